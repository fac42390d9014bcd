"""Spectral decimation maps: registry, branches, fixed points, preimages.

A :class:`DecimationSystem` bundles the rational map ``R`` with the data
needed to run it backwards on ``[0, x_r]``: its monotone pieces (inverse
branches), the branch ``phi0`` fixing 0, exceptional values and the
closed-form offspring schedule of the discrete spectra, if one is known.

Symbolic work is exact (:mod:`fracspec.rational`); iteration runs in
mpmath at a caller-chosen binary precision (default 256 bits).
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

from mpmath import iv, mp, mpf

from .rational import (
    PoleError,
    Polynomial,
    RationalFunction,
    RealRoot,
    as_fraction,
    iv_interval,
    iv_precision,
    real_roots,
)

__all__ = [
    "DEFAULT_PRECISION",
    "REGISTRY_ENV",
    "BranchCoverageError",
    "BranchInverse",
    "Offspring",
    "DecimationSystem",
    "FixedPoint",
    "DerivativeExtremum",
    "load_registry",
    "get_system",
    "system_from_dict",
    "fixed_points",
    "critical_points",
    "apply_inverse",
    "backward_images",
    "preimage_set",
    "extremum_of_derivative",
    "check_contraction",
    "closed_form_spectrum",
]

DEFAULT_PRECISION = 256
REGISTRY_ENV = "FRACSPEC_REGISTRY"


class BranchCoverageError(ValueError):
    """A point of (0, x_r) has no inverse branch containing it in its target."""


def _exact_root(q) -> RealRoot:
    q = as_fraction(q)
    return RealRoot(q, q, 1, q)


def _mp(x) -> mpf:
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, int):
        return mpf(x)
    return mpf(x)


@dataclass(frozen=True)
class Offspring:
    """Values born at level ``birth``: the real roots of ``roots_of``.

    When ``propagate`` is set they contribute ``R^{-(n-birth)}(roots)`` to
    the level-n spectrum, otherwise the roots themselves.
    """

    roots_of: Polynomial
    birth: int = 0
    propagate: bool = True


@dataclass(frozen=True)
class BranchInverse:
    """A maximal monotone piece ``[lo, hi]`` of R inside the domain.

    ``lo_pole``/``hi_pole`` mark endpoints at poles, where the target is
    unbounded.
    """

    R: RationalFunction = field(repr=False)
    lo: RealRoot
    hi: RealRoot
    increasing: bool
    lo_pole: bool = False
    hi_pole: bool = False

    def source(self, precision: int = DEFAULT_PRECISION) -> tuple[mpf, mpf]:
        return _branch_source(self, precision)

    def _source(self, precision: int) -> tuple[mpf, mpf]:
        with mp.workprec(precision + 16):
            lo = self.lo.refine(precision + 16).value()
            hi = self.hi.refine(precision + 16).value()
        return lo, hi

    def _end_value(self, end: RealRoot, pole: bool, at_lo: bool):
        if pole:
            # approaching a pole from inside the piece
            up = self.increasing == (not at_lo)
            return mp.inf if up else -mp.inf
        if end.exact is not None:
            return _mp(self.R(end.exact))
        return self.R(end.refine(mp.prec + 16).value())

    def target(self, precision: int = DEFAULT_PRECISION) -> tuple[mpf, mpf]:
        """Image interval (ascending) of the piece."""
        return _branch_target(self, precision)

    def _target(self, precision: int) -> tuple[mpf, mpf]:
        with mp.workprec(precision + 16):
            a = self._end_value(self.lo, self.lo_pole, True)
            b = self._end_value(self.hi, self.hi_pole, False)
        return (a, b) if a <= b else (b, a)

    def contains_target(self, y, precision: int = DEFAULT_PRECISION) -> bool:
        a, b = self.target(precision)
        slack = mpf(2) ** (-(precision // 2)) * max(1, abs(_mp(y)))
        return a - slack <= _mp(y) <= b + slack

    def contains_source(self, x, precision: int = DEFAULT_PRECISION) -> bool:
        a, b = self.source(precision)
        return a <= _mp(x) <= b


@lru_cache(maxsize=256)
def _branch_source(branch: BranchInverse, precision: int) -> tuple[mpf, mpf]:
    return branch._source(precision)


@lru_cache(maxsize=256)
def _branch_target(branch: BranchInverse, precision: int) -> tuple[mpf, mpf]:
    return branch._target(precision)


@dataclass(frozen=True)
class FixedPoint:
    point: RealRoot
    multiplier: mpf  # |R'(point)|
    multiplier_lo: mpf  # certified enclosure of |R'| over the bracket
    multiplier_hi: mpf
    exact_multiplier: Optional[Fraction] = None

    @property
    def value(self) -> mpf:
        return self.point.value()


@dataclass(frozen=True)
class DerivativeExtremum:
    min_value: mpf
    max_value: mpf
    argmin: mpf
    argmax: mpf
    min_enclosure: tuple[mpf, mpf]
    max_enclosure: tuple[mpf, mpf]


@dataclass(frozen=True)
class DecimationSystem:
    """Spectral decimation map R of one fractal, with its branch structure."""

    name: str
    fractal: str
    convention: str
    R: RationalFunction
    x_r: Fraction
    exceptional: tuple[Fraction, ...] = ()
    offspring: tuple[Offspring, ...] = ()
    contraction_eps: Optional[Fraction] = None
    contraction_y0: Optional[Fraction] = None

    def __post_init__(self):
        if self.R.den(Fraction(0)) == 0:
            raise ValueError(f"{self.name}: R has a pole at 0")
        if self.R(Fraction(0)) != 0:
            raise ValueError(f"{self.name}: R(0) must be 0")
        if self.c_delta <= 1:
            raise ValueError(f"{self.name}: R'(0) = {self.c_delta} must exceed 1")
        if Fraction(0) in self.exceptional:
            raise ValueError(f"{self.name}: 0 cannot be exceptional")
        if self.x_r <= 0:
            raise ValueError(f"{self.name}: x_r must be positive")

    @cached_property
    def dR(self) -> RationalFunction:
        return self.R.derivative()

    @cached_property
    def d2R(self) -> RationalFunction:
        return self.dR.derivative()

    @property
    def c_delta(self) -> Fraction:
        """Renormalisation constant R'(0), exact."""
        return self.R.derivative()(Fraction(0))

    @cached_property
    def poles(self) -> list[RealRoot]:
        return self.R.poles(bits=96)

    @cached_property
    def critical(self) -> list[RealRoot]:
        """Critical points of R in the open domain (0, x_r)."""
        return [r for r in real_roots(self.dR.num, 0, self.x_r, 96) if 0 < r.lo and r.hi < self.x_r]

    @cached_property
    def branches(self) -> tuple[BranchInverse, ...]:
        """Monotone pieces covering [0, x_r], split at critical points and poles."""
        cuts = [(r, False) for r in self.critical]
        cuts += [(r, True) for r in self.poles if 0 < r.lo and r.hi < self.x_r]
        cuts.sort(key=lambda c: c[0].lo)
        points = [(_exact_root(0), False)] + cuts + [(_exact_root(self.x_r), False)]
        out = []
        for (a, a_pole), (b, b_pole) in zip(points, points[1:]):
            probe = (a.hi + b.lo) / 2
            slope = self.dR(probe)
            out.append(BranchInverse(self.R, a, b, slope > 0, a_pole, b_pole))
        return tuple(out)

    @cached_property
    def phi0(self) -> BranchInverse:
        b = self.branches[0]
        if not b.increasing:
            raise ValueError(f"{self.name}: R must increase near 0")
        return b

    def branch_containing(self, x, precision: int = DEFAULT_PRECISION) -> BranchInverse:
        for b in self.branches:
            if b.contains_source(x, precision):
                return b
        raise ValueError(f"{x} lies outside [0, {self.x_r}]")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "fractal": self.fractal,
            "convention": self.convention,
            "numerator": [str(c) for c in self.R.num.coeffs],
            "denominator": [str(c) for c in self.R.den.coeffs],
            "x_r": str(self.x_r),
            "exceptional": [str(e) for e in self.exceptional],
            "offspring": [
                {"roots_of": [str(c) for c in o.roots_of.coeffs], "birth": o.birth, "propagate": o.propagate}
                for o in self.offspring
            ],
            "contraction": None
            if self.contraction_eps is None
            else {"epsilon": str(self.contraction_eps), "y0": str(self.contraction_y0)},
        }


# --- registry -------------------------------------------------------------


def system_from_dict(d: dict) -> DecimationSystem:
    contraction = d.get("contraction") or {}
    return DecimationSystem(
        name=d["name"],
        fractal=d.get("fractal", d["name"]),
        convention=d.get("convention", "combinatorial"),
        R=RationalFunction(Polynomial(d["numerator"]), Polynomial(d.get("denominator", ["1"]))),
        x_r=as_fraction(d["x_r"]),
        exceptional=tuple(as_fraction(e) for e in d.get("exceptional", ())),
        offspring=tuple(
            Offspring(Polynomial(o["roots_of"]), int(o.get("birth", 0)), bool(o.get("propagate", True)))
            for o in d.get("offspring", ())
        ),
        contraction_eps=as_fraction(contraction["epsilon"]) if "epsilon" in contraction else None,
        contraction_y0=as_fraction(contraction["y0"]) if "y0" in contraction else None,
    )


def load_registry(path: str | os.PathLike | None = None) -> dict[str, DecimationSystem]:
    """Load registry entries; ``path`` defaults to $FRACSPEC_REGISTRY, then the bundled file."""
    path = path or os.environ.get(REGISTRY_ENV)
    if path:
        text = Path(path).read_text()
    else:
        text = resources.files("fracspec").joinpath("data/registry.json").read_text()
    data = json.loads(text)
    entries = data["systems"] if isinstance(data, dict) else data
    return {e["name"]: system_from_dict(e) for e in entries}


# registries loaded by get_system, keyed by source path ("" for the bundled file)
_LOADED: dict[str, dict[str, DecimationSystem]] = {}


def get_system(name: str, registry: dict | None = None) -> DecimationSystem:
    if registry is None:
        key = os.environ.get(REGISTRY_ENV, "")
        if key not in _LOADED:
            _LOADED[key] = load_registry(key or None)
        registry = _LOADED[key]
    try:
        return registry[name.lower()]
    except KeyError:
        raise KeyError(f"no decimation system {name!r} in registry; known: {', '.join(registry)}") from None


# --- fixed and critical points ------------------------------------------------


def _abs_enclosure(f: RationalFunction, root: RealRoot, precision: int) -> tuple[mpf, mpf, mpf, Optional[Fraction]]:
    """(value, lo, hi, exact) of |f| at a bracketed root."""
    if root.exact is not None:
        v = abs(f(root.exact))
        return _mp(v), _mp(v), _mp(v), v
    r = root.refine(precision)
    with iv_precision(precision + 16):
        enc = f(iv_interval(r.lo, r.hi))
        lo, hi = mpf(enc.a), mpf(enc.b)
    if lo <= 0 <= hi:
        alo, ahi = mpf(0), max(-lo, hi)
    elif hi < 0:
        alo, ahi = -hi, -lo
    else:
        alo, ahi = lo, hi
    return abs(f(r.value())), alo, ahi, None


def fixed_points(system: DecimationSystem, lo=0, hi=None, precision: int = DEFAULT_PRECISION) -> list[FixedPoint]:
    """Solutions of R(x) = x in [lo, hi] with certified multiplier enclosures."""
    hi = system.x_r if hi is None else hi
    out = []
    with mp.workprec(precision):
        for r in real_roots(system.R.fixed_point_polynomial(), lo, hi, precision):
            val, mlo, mhi, ex = _abs_enclosure(system.dR, r, precision)
            out.append(FixedPoint(r, val, mlo, mhi, ex))
    return out


def critical_points(system: DecimationSystem, precision: int = DEFAULT_PRECISION) -> list[RealRoot]:
    """Sorted roots of R' in [0, x_r]."""
    return real_roots(system.dR.num, 0, system.x_r, precision)


def extremum_of_derivative(system: DecimationSystem, lo, hi, precision: int = DEFAULT_PRECISION) -> DerivativeExtremum:
    """Min and max of R' on [lo, hi] from endpoints and critical points of R'.

    Raises :class:`PoleError` if R has a pole in the interval.
    """
    lo, hi = as_fraction(lo), as_fraction(hi)
    if system.R.den.degree >= 1 and real_roots(system.R.den, lo, hi, 32):
        raise PoleError(f"R has a pole in [{lo}, {hi}]")
    dR = system.dR
    cands: list[tuple[mpf, mpf, mpf, mpf]] = []  # (value, enc_lo, enc_hi, where)
    with mp.workprec(precision):
        for e in (lo, hi):
            v = _mp(dR(e))
            cands.append((v, v, v, _mp(e)))
        for r in real_roots(dR.num.derivative() * dR.den - dR.num * dR.den.derivative(), lo, hi, precision):
            if r.exact is not None:
                v = _mp(dR(r.exact))
                cands.append((v, v, v, _mp(r.exact)))
                continue
            with iv_precision(precision + 16):
                enc = dR(iv_interval(r.lo, r.hi))
            cands.append((dR(r.value()), mpf(enc.a), mpf(enc.b), r.value()))
        mn = min(cands, key=lambda c: c[0])
        mx = max(cands, key=lambda c: c[0])
        return DerivativeExtremum(
            mn[0],
            mx[0],
            mn[3],
            mx[3],
            (min(c[1] for c in cands), min(c[2] for c in cands)),
            (max(c[1] for c in cands), max(c[2] for c in cands)),
        )


def check_contraction(system: DecimationSystem, eps=None, y0=None) -> bool:
    """Certify phi0(y) <= y / (c - eps) for 0 < y <= y0.

    Equivalent to R(x)/x >= c - eps on (0, phi0(y0)], decided by Sturm
    counting on the numerator of R(x)/x - (c - eps).
    """
    eps = as_fraction(system.contraction_eps if eps is None else eps)
    y0 = as_fraction(system.contraction_y0 if y0 is None else y0)
    num, den = system.R.num, system.R.den
    quot, rem = divmod(num, Polynomial.x())
    assert rem.is_zero()
    g = quot - den * (system.c_delta - eps)
    phi0 = system.phi0
    with mp.workprec(96):
        a, b = phi0.target(96)
        if y0 > as_fraction(b):
            return False
        x0 = apply_inverse(phi0, y0, 96)
    x_hi = as_fraction(x0) + Fraction(1, 2**80)
    if real_roots(den, 0, x_hi, 32):
        return False
    if g(Fraction(0)) * den(Fraction(0)) <= 0:
        return False
    return not real_roots(g, 0, x_hi, 32)


# --- inverse branches ---------------------------------------------------------


def apply_inverse(branch: BranchInverse, y, precision: int = DEFAULT_PRECISION, guess=None) -> mpf:
    """The unique x in the branch source with R(x) = y.

    Bisection down to 2**-8 of the source width, then safeguarded Newton on
    N(x) - y D(x).  A ``guess`` inside the source skips the bisection.
    Raises ``ValueError`` when y is outside the target.
    """
    R = branch.R
    work = precision + 24
    with mp.workprec(work):
        yv = _mp(y) if not isinstance(y, mpf) else y
        if not branch.contains_target(yv, precision):
            raise ValueError(f"y = {mp.nstr(yv, 12)} outside branch target {tuple(mp.nstr(t, 12) for t in branch.target(precision))}")
        a, b = branch.source(work)
        if isinstance(y, (int, Fraction)):
            exact_y = as_fraction(y)
            for end in (branch.lo, branch.hi):
                if end.exact is not None and R.den(end.exact) != 0 and R(end.exact) == exact_y:
                    return _mp(end.exact)
        F = R.num - R.den * as_fraction(yv)
        dF = F.derivative()
        fa, fb = F(a), F(b)
        if fa == 0:
            return a
        if fb == 0:
            return b
        if (fa > 0) == (fb > 0):
            # y sits on a target endpoint within slack: clamp to that end
            return a if abs(fa) <= abs(fb) else b
        sa = fa > 0
        width = b - a
        start = None if guess is None else mpf(guess)
        if start is not None and not (a < start < b):
            start = None
        while start is None and b - a > width / 256:
            m = (a + b) / 2
            fm = F(m)
            if fm == 0:
                return m
            if (fm > 0) == sa:
                a = m
            else:
                b = m
        x = (a + b) / 2 if start is None else start
        stop = mpf(2) ** (-(precision + 8))
        for _ in range(200):
            fx = F(x)
            if fx == 0:
                return x
            if (fx > 0) == sa:
                a = x
            else:
                b = x
            d = dF(x)
            nx = x - fx / d if d != 0 else (a + b) / 2
            if not (a < nx < b):
                nx = (a + b) / 2
            if abs(nx - x) <= stop * max(abs(nx), stop):
                x = nx
                break
            x = nx
            if b - a <= stop * max(abs(x), stop):
                break
    with mp.workprec(precision):
        return +x


def _dedup(values: Iterable[mpf], resolution: mpf) -> list[mpf]:
    out: list[mpf] = []
    for v in sorted(values):
        if out and v - out[-1] <= resolution:
            continue
        out.append(v)
    return out


def backward_images(system: DecimationSystem, values: Iterable, precision: int = DEFAULT_PRECISION, strict: bool = True) -> list[mpf]:
    """R^{-1}(values) inside [0, x_r], deduplicated and sorted.

    With ``strict``, a value in (0, x_r) not covered by any branch target
    raises :class:`BranchCoverageError`.
    """
    out = []
    with mp.workprec(precision):
        x_r = _mp(system.x_r)
        for y in values:
            yv = _mp(y)
            hit = False
            for br in system.branches:
                if br.contains_target(yv, precision):
                    out.append(apply_inverse(br, y, precision))
                    hit = True
            if strict and not hit and 0 < yv < x_r:
                raise BranchCoverageError(f"no inverse branch covers y = {mp.nstr(yv, 15)}")
        return _dedup(out, mpf(2) ** (-(precision // 2)))


def preimage_set(system: DecimationSystem, D0: Iterable, n: int, precision: int = DEFAULT_PRECISION) -> list[mpf]:
    """D_n = D_0 ∪ R^{-1}(D_0) ∪ ... ∪ R^{-n}(D_0), sorted and deduplicated.

    Only newly added points are pulled back at each step, since
    R^{-1}(D_{k-1}) already contains R^{-1}(D_{k-2}).
    """
    if n < 0:
        raise ValueError("depth must be nonnegative")
    res = mpf(2) ** (-(precision // 2))
    with mp.workprec(precision):
        current = _dedup((_mp(as_fraction(d)) if not isinstance(d, mpf) else d for d in D0), res)
        x_r = _mp(system.x_r)
        for d in current:
            if d < -res or d > x_r + res:
                raise ValueError(f"D0 element {mp.nstr(d, 15)} outside [0, x_r]")
        frontier = current
        for _ in range(n):
            pulled = backward_images(system, frontier, precision)
            merged = _dedup(current + pulled, res)
            frontier = [v for v in merged if not _near(v, current, res)]
            current = merged
            if not frontier:
                break
        return current


def _near(v: mpf, sorted_vals: Sequence[mpf], res: mpf) -> bool:
    import bisect

    i = bisect.bisect_left(sorted_vals, v)
    for j in (i - 1, i):
        if 0 <= j < len(sorted_vals) and abs(sorted_vals[j] - v) <= res:
            return True
    return False


def closed_form_spectrum(system: DecimationSystem, n: int, precision: int = DEFAULT_PRECISION) -> list[mpf]:
    """Distinct level-n eigenvalues predicted by the offspring schedule."""
    if not system.offspring:
        raise ValueError(f"{system.name}: registry entry has no offspring schedule")
    vals: list[mpf] = []
    with mp.workprec(precision):
        for o in system.offspring:
            if o.birth > n:
                continue
            seeds = [r.exact if r.exact is not None else r.refine(precision + 8).value() for r in real_roots(o.roots_of, bits=precision)]
            if o.propagate:
                for _ in range(n - o.birth):
                    seeds = backward_images(system, seeds, precision, strict=False)
            vals.extend(_mp(s) if not isinstance(s, mpf) else s for s in seeds)
        return _dedup(vals, mpf(2) ** (-(precision // 2)))
