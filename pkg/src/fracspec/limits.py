"""Eigenvalues of the limiting Laplacian as renormalised backward orbits.

Every eigenvalue has the form ``lim_k c^(n0+k) phi0^k(lambda0)`` with
``lambda0`` an eigenvalue of the level-n0 graph Laplacian.  The iteration
stops when successive terms agree and a geometric tail estimate bounds the
remaining change.
"""
from __future__ import annotations

import bisect
import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from mpmath import iv, mp, mpf

from .decimation import (
    DEFAULT_PRECISION,
    DecimationSystem,
    apply_inverse,
    closed_form_spectrum,
)
from .graphs import FractalSpec, build_level, get_fractal
from .laplacian import assemble, spectrum
from .rational import Polynomial, as_fraction, iv_interval, iv_precision

__all__ = [
    "EigenvalueLimit",
    "LimitEigenvalue",
    "GeneratedSpectrum",
    "NotConvergedError",
    "tail_constant",
    "eigenvalue_limit",
    "polished_level_spectrum",
    "level_limits",
    "truncated_spectrum",
    "generate_spectrum",
]


class NotConvergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenvalueLimit:
    n0: int
    base_value: mpf
    iterations: int
    value: mpf
    error_bound: mpf
    c_delta: Fraction


@lru_cache(maxsize=None)
def tail_constant(system: DecimationSystem) -> tuple[mpf, mpf, mpf]:
    """(q, M, x0) for the tail estimate.

    For x <= x0 = phi0(y0): phi0 contracts with ratio q = 1/(c - eps), and
    |log g(x) - log c| <= M x where g(x) = R(x)/x.  M is a certified bound
    of |g'|/g on [0, x0] from interval arithmetic.
    """
    from .decimation import check_contraction

    if system.contraction_eps is None:
        raise ValueError(f"{system.name}: registry entry has no contraction constants")
    if not check_contraction(system):
        raise ValueError(f"{system.name}: contraction constants (eps, y0) fail certification")
    eps, y0 = system.contraction_eps, system.contraction_y0
    c = system.c_delta
    with mp.workprec(96):
        x0 = apply_inverse(system.phi0, y0, 96)
    x0_hi = as_fraction(x0) + Fraction(1, 2**60)
    quot, _ = divmod(system.R.num, Polynomial.x())
    from .rational import RationalFunction

    g = RationalFunction(quot, system.R.den)
    dg = g.derivative()
    with iv_precision(96):
        enc = dg(iv_interval(Fraction(0), x0_hi))
        sup = max(abs(mpf(enc.a)), abs(mpf(enc.b)))
    q = mpf(1) / (mpf(c.numerator) / c.denominator - mpf(eps.numerator) / eps.denominator)
    M = sup * q  # g >= c - eps on [0, x0]
    return q, M, _fr(x0_hi)


def _fr(q: Fraction) -> mpf:
    return mpf(q.numerator) / q.denominator


def eigenvalue_limit(
    system: DecimationSystem,
    n0: int,
    lambda0,
    tol: float = 1e-10,
    precision: int = DEFAULT_PRECISION,
    max_iter: Optional[int] = None,
) -> EigenvalueLimit:
    """lim_k c^(n0+k) phi0^k(lambda0) with a certified truncation bound.

    Stops at the first k with ``|s_k - s_{k-1}| <= tol * max(1, s_k)`` and
    tail estimate below the same threshold.  The tail estimate uses
    ``x_{j+1} <= q x_j`` and ``|log(c x_{j+1} / x_j)| <= M x_{j+1}``, so
    ``|log(s_inf / s_k)| <= M q x_k / (1 - q)``.
    """
    if n0 < 0:
        raise ValueError("n0 must be nonnegative")
    c = system.c_delta
    q, M, x0 = tail_constant(system)
    max_iter = max_iter or 8 * precision
    with mp.workprec(precision + 16):
        x = lambda0 if isinstance(lambda0, mpf) else _fr(as_fraction(lambda0))
        if x < 0 or x > _fr(system.x_r) * (1 + mpf(2) ** (-precision // 2)):
            raise ValueError(f"lambda0 = {mp.nstr(x, 15)} outside [0, {system.x_r}]")
        base = +x
        cm = _fr(c)
        if x == 0:
            return EigenvalueLimit(n0, base, 0, mpf(0), mpf(0), c)
        scale = cm**n0
        s = scale * x
        prev = None
        for k in range(1, max_iter + 1):
            x = apply_inverse(system.phi0, x, precision + 16, guess=x / cm)
            scale *= cm
            prev, s = s, scale * x
            if x <= x0:
                t = M * q * x / (1 - q)
                tail = s * (mp.exp(t) - 1)
            else:
                tail = mp.inf
            thr = tol * max(1, s)
            diff = abs(s - prev)
            if diff <= thr and tail <= thr:
                with mp.workprec(precision):
                    return EigenvalueLimit(n0, base, k, +s, +max(tail, diff), c)
    raise NotConvergedError(
        f"no convergence after {max_iter} iterations; raise --precision or loosen --tol"
    )


# --- spectrum generation -------------------------------------------------------


@dataclass(frozen=True)
class LimitEigenvalue:
    value: mpf
    error_bound: mpf
    base_level: int
    base_value: mpf


@dataclass
class GeneratedSpectrum:
    fractal: str
    bc: str
    depth: int
    precision: int
    tol: float
    values: list[LimitEigenvalue]
    complete_below: mpf  # every eigenvalue below this is listed
    notes: list[str] = field(default_factory=list)
    closed_form_mismatch: dict[int, dict] = field(default_factory=dict)

    def as_mpf(self) -> list[mpf]:
        return [v.value for v in self.values]

    def to_dict(self) -> dict:
        digits = max(17, int(self.precision * 0.30103) - 2)
        return {
            "fractal": self.fractal,
            "bc": self.bc,
            "depth": self.depth,
            "precision": self.precision,
            "tol": self.tol,
            "complete_below": mp.nstr(self.complete_below, digits),
            "notes": self.notes,
            "closed_form_mismatch": {str(k): v for k, v in self.closed_form_mismatch.items()},
            "eigenvalues": [
                {
                    "index": i,
                    "eigenvalue": mp.nstr(v.value, digits),
                    "base_level": v.base_level,
                    "base_value": mp.nstr(v.base_value, digits),
                    "error_bound": mp.nstr(v.error_bound, 6),
                }
                for i, v in enumerate(self.values)
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "eigenvalue", "base_level", "base_value", "error_bound"])
        for row in self.to_dict()["eigenvalues"]:
            w.writerow([row["index"], row["eigenvalue"], row["base_level"], row["base_value"], row["error_bound"]])
        return buf.getvalue()


@dataclass(frozen=True)
class _Polished:
    value: mpf
    parent: Optional[mpf]  # R(value) in the previous level, if any
    via_phi0: bool


def _nearest(sorted_vals: list[mpf], y: float) -> tuple[Optional[mpf], float]:
    if not sorted_vals:
        return None, float("inf")
    i = bisect.bisect_left(sorted_vals, y)
    best, dist = None, float("inf")
    for j in (i - 1, i):
        if 0 <= j < len(sorted_vals):
            d = abs(float(sorted_vals[j]) - y)
            if d < dist:
                best, dist = sorted_vals[j], d
    return best, dist


def _high_precision_eigs(spec: FractalSpec, level: int, convention: str, bc: str, precision: int) -> list[mpf]:
    """Distinct eigenvalues of a small level matrix at full precision."""
    g = build_level(spec, level)
    n = g.n_vertices
    with mp.workprec(precision + 32):
        deg = g.degrees
        a = mp.zeros(n, n)
        for i, j in g.edges:
            w = mpf(1) if convention == "combinatorial" else 1 / mp.sqrt(mpf(deg[i]) * deg[j])
            a[i, j] = a[j, i] = -w
        for i in range(n):
            a[i, i] = mpf(deg[i]) if convention == "combinatorial" else mpf(1)
        if convention == "combinatorial" and bc == "neumann":
            t = [mp.sqrt(2) if i in g.boundary else mpf(1) for i in range(n)]
            for i in range(n):
                for j in range(n):
                    a[i, j] *= t[i] * t[j]
        keep = list(g.interior) if bc == "dirichlet" else list(range(n))
        sub = mp.matrix(len(keep), len(keep))
        for r, i in enumerate(keep):
            for s, j in enumerate(keep):
                sub[r, s] = a[i, j]
        ev = mp.eigsy(sub, eigvals_only=True)
        vals = sorted(ev[i] for i in range(len(keep)))
    out: list[mpf] = []
    res = mpf(2) ** (-(precision // 2))
    for v in vals:
        if abs(v) <= res:
            v = mpf(0)
        if not out or v - out[-1] > res:
            out.append(v)
    return out


def polished_level_spectrum(
    system: DecimationSystem,
    spec: FractalSpec | str,
    level: int,
    bc: str,
    precision: int = DEFAULT_PRECISION,
    _cache: Optional[dict] = None,
) -> list[_Polished]:
    """Distinct eigenvalues of the level graph, refined to ``precision`` bits.

    Small levels use a high-precision dense solve.  Above that each float
    eigenvalue ``lam`` is matched to a refined eigenvalue ``mu`` of the
    previous level with ``R(lam) ~ mu`` and replaced by the inverse branch
    image of ``mu`` nearest to ``lam``; exceptional values snap to their
    exact registry value.
    """
    spec = get_fractal(spec) if isinstance(spec, str) else spec
    cache = {} if _cache is None else _cache
    key = (level, bc)
    if key in cache:
        return cache[key]
    if bc == "dirichlet" and level == 0:
        cache[key] = []
        return []
    if level <= 1:
        vals = _high_precision_eigs(spec, level, system.convention, bc, precision)
        prev = [] if level == 0 else [p.value for p in polished_level_spectrum(system, spec, 0, "neumann", precision, cache)]
        out = []
        for v in vals:
            via = False
            parent = None
            if level == 1 and prev:
                ref = _ref_values(system, spec, level, bc, precision, cache)
                if not _is_exceptional(system, float(v)):
                    parent, _ = _nearest(ref, float(system.R(v)))
                same = [p.value for p in polished_level_spectrum(system, spec, 0, bc, precision, cache)]
                via = _is_phi0_image(system, v, same, precision)
            out.append(_Polished(v, parent, via))
        cache[key] = out
        return out

    mat = assemble(build_level(spec, level), system.convention, bc)
    res = spectrum(mat, tol=1e-12, residual=False)
    ref = _ref_values(system, spec, level, bc, precision, cache)
    same = [p.value for p in polished_level_spectrum(system, spec, level - 1, bc, precision, cache)]
    out: list[_Polished] = []
    with mp.workprec(precision):
        for lam in res.eigenvalues:
            lam = float(lam)
            exc = _is_exceptional(system, lam)
            if exc is not None:
                out.append(_Polished(_fr(exc), None, False))
                continue
            y = float(system.R(lam))
            mu, dist = _nearest(ref, y)
            if mu is None or dist > 1e-6 * max(1.0, abs(y)):
                raise ValueError(
                    f"{spec.name} level {level} ({bc}): R({lam:.12g}) = {y:.12g} is not near the previous spectrum"
                )
            cands = []
            near = [br for br in system.branches if br.contains_source(lam + 1e-6, precision) or br.contains_source(lam - 1e-6, precision)]
            for br in near or system.branches:
                if br.contains_target(mu, precision):
                    x = apply_inverse(br, mu, precision, guess=lam if br.contains_source(lam, precision) else None)
                    cands.append((abs(float(x) - lam), x))
            if not cands:
                raise ValueError(f"{spec.name} level {level} ({bc}): no inverse branch reaches {lam:.12g}")
            x = min(cands, key=lambda t: t[0])[1]
            out.append(_Polished(x, mu, _is_phi0_image(system, x, same, precision)))
    merged: list[_Polished] = []
    resn = mpf(2) ** (-(precision // 2))
    for p in sorted(out, key=lambda p: p.value):
        if merged and p.value - merged[-1].value <= resn:
            continue
        merged.append(p)
    cache[key] = merged
    return merged


def _is_exceptional(system: DecimationSystem, lam: float) -> Optional[Fraction]:
    for e in system.exceptional:
        if abs(lam - float(e)) <= 1e-8 * max(1.0, float(e)):
            return e
    return None


def _ref_values(system, spec, level, bc, precision, cache) -> list[mpf]:
    """Refined spectra of the previous level that R maps level-m values into."""
    vals = [p.value for p in polished_level_spectrum(system, spec, level - 1, "neumann", precision, cache)]
    if bc == "dirichlet":
        vals += [p.value for p in polished_level_spectrum(system, spec, level - 1, "dirichlet", precision, cache)]
    return sorted(vals)


def _is_phi0_image(system: DecimationSystem, x: mpf, previous: list[mpf], precision: int) -> bool:
    """True when x = phi0(mu) for some mu in ``previous``."""
    if not system.phi0.contains_source(x, precision):
        return False
    y = system.R(x)
    mu, dist = _nearest(previous, float(y))
    return mu is not None and abs(mu - y) <= mpf(2) ** (-(precision // 3)) * max(1, abs(y))


def _continues(system: DecimationSystem, x: mpf, following: list[mpf], precision: int) -> bool:
    """True when phi0(x) is an eigenvalue of the next level."""
    if not system.phi0.contains_target(x, precision):
        return False
    y = apply_inverse(system.phi0, x, precision)
    mu, _ = _nearest(following, float(y))
    return mu is not None and abs(mu - y) <= mpf(2) ** (-(precision // 3)) * max(1, abs(y))


def level_limits(
    system: DecimationSystem,
    spec: FractalSpec | str,
    level: int,
    bc: str = "dirichlet",
    tol: float = 1e-10,
    precision: int = DEFAULT_PRECISION,
    _cache: Optional[dict] = None,
) -> list[LimitEigenvalue]:
    """Limit eigenvalues whose base value first appears at ``level``.

    A level-n eigenvalue that is not a phi0 image of a level-(n-1)
    eigenvalue is new; it yields a limit eigenvalue when its phi0 image is
    again an eigenvalue at level n+1.
    """
    spec = get_fractal(spec) if isinstance(spec, str) else spec
    if level + 1 > spec.max_level:
        raise ValueError(f"level {level + 1} is beyond the safety cap {spec.max_level} for {spec.name}")
    cache = {} if _cache is None else _cache
    polished = polished_level_spectrum(system, spec, level, bc, precision, cache)
    following = [p.value for p in polished_level_spectrum(system, spec, level + 1, bc, precision, cache)]
    out = []
    with mp.workprec(precision):
        for p in polished:
            if p.via_phi0 or not _continues(system, p.value, following, precision):
                continue
            lim = eigenvalue_limit(system, level, p.value, tol, precision)
            out.append(LimitEigenvalue(lim.value, lim.error_bound, level, p.value))
    return out


def truncated_spectrum(
    system: DecimationSystem,
    spec: FractalSpec | str,
    bc: str = "dirichlet",
    depth: int = 3,
    tol: float = 1e-10,
    precision: int = DEFAULT_PRECISION,
) -> list[LimitEigenvalue]:
    """All limit eigenvalues with base level at most ``depth``, sorted."""
    cache: dict = {}
    found: list[LimitEigenvalue] = []
    for level in range(depth + 1):
        found.extend(level_limits(system, spec, level, bc, tol, precision, cache))
    return _dedup_limits(found, tol)


def generate_spectrum(
    system: DecimationSystem,
    spec: FractalSpec | str,
    bc: str = "dirichlet",
    cutoff=None,
    count: Optional[int] = None,
    tol: float = 1e-10,
    precision: int = DEFAULT_PRECISION,
    depth: int = 0,
    verify_closed_form: bool = False,
) -> GeneratedSpectrum:
    """Distinct limit eigenvalues below ``cutoff`` or the first ``count``.

    Levels are added until the smallest nonzero limit first appearing at
    the newest level exceeds the target, so nothing below the target is
    missed; ``depth`` forces at least that many levels.  With
    ``verify_closed_form`` the refined level spectra are compared with the
    registry's offspring schedule and mismatches are recorded.
    """
    spec = get_fractal(spec) if isinstance(spec, str) else spec
    if cutoff is None and count is None:
        raise ValueError("give a cutoff or a count")
    if count is not None and count < 1:
        raise ValueError("count must be positive")
    cache: dict = {}
    found: list[LimitEigenvalue] = []
    mismatch: dict[int, dict] = {}
    target = None if cutoff is None else mpf(cutoff)
    complete_below = mpf(0)
    level = 0
    while True:
        if level + 1 > spec.max_level:
            raise ValueError(
                f"target unreachable: level {level + 1} is beyond the safety cap {spec.max_level} for {spec.name}"
            )
        new = level_limits(system, spec, level, bc, tol, precision, cache)
        if verify_closed_form and system.offspring:
            polished = polished_level_spectrum(system, spec, level, bc, precision, cache)
            mismatch[level] = _compare_closed_form(system, [p.value for p in polished], level, precision)
        found = _dedup_limits(found + new, tol)
        positive = [v.value for v in new if v.value > 0]
        smallest_new = min(positive) if positive else None
        if smallest_new is not None:
            complete_below = smallest_new
        if level >= depth and smallest_new is not None:
            if target is not None and smallest_new > target:
                break
            if count is not None and len(found) >= count and smallest_new > found[count - 1].value:
                break
        level += 1
    if target is not None:
        found = [v for v in found if v.value <= target]
    if count is not None:
        found = found[:count]
    notes = []
    if spec.name == "sg3":
        notes.append("level 0 is the complete graph K3 on the boundary points")
    return GeneratedSpectrum(spec.name, bc, level, precision, tol, found, complete_below, notes, mismatch)


def _dedup_limits(vals: list[LimitEigenvalue], tol: float) -> list[LimitEigenvalue]:
    out: list[LimitEigenvalue] = []
    for v in sorted(vals, key=lambda v: (v.value, v.base_level)):
        if out and v.value - out[-1].value <= 10 * tol * max(1, abs(v.value)):
            continue
        out.append(v)
    return out


def _compare_closed_form(system: DecimationSystem, values: list[mpf], level: int, precision: int) -> dict:
    formula = closed_form_spectrum(system, level, precision)
    tol = mpf(10) ** -9

    def missing(a, b):
        return [mp.nstr(x, 15) for x in a if not any(abs(x - y) <= tol for y in b)]

    return {"only_in_eigensolver": missing(values, formula), "only_in_formula": missing(formula, values)}
