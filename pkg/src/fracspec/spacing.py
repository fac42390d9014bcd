"""Eigenvalue spacing, gap ratios and the two infimum-spacing criteria.

``positive_criterion`` certifies a uniform lower bound on the spacing of
the renormalised discrete spectra from a seed set D0 that is closed under
the relevant preimages.  ``zero_criterion`` looks for a repelling fixed
point whose multiplier beats R'(0), which forces spacings to shrink;
``zero_spacing_witness`` builds the shrinking pairs explicitly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np
from mpmath import mp, mpf

from .decimation import (
    DEFAULT_PRECISION,
    BranchInverse,
    DecimationSystem,
    apply_inverse,
    fixed_points,
    preimage_set,
)
from .graphs import FractalSpec, get_fractal
from .laplacian import level_spectrum
from .rational import RealRoot, as_fraction, iv_interval, iv_precision, real_roots

__all__ = [
    "POSITIVE",
    "ZERO",
    "INCONCLUSIVE",
    "SpacingReport",
    "GapRatios",
    "Condition",
    "CriterionVerdict",
    "LemmaBoundReport",
    "LevelFloor",
    "WitnessPoint",
    "SuggestedD0",
    "min_spacing",
    "spacing_report",
    "gap_ratios",
    "positive_criterion",
    "zero_criterion",
    "lemma_bound_check",
    "spacing_lower_bound_for_spectrum",
    "zero_spacing_witness",
    "witness_sequence",
    "suggest_D0",
]

POSITIVE = "PositiveInfimum"
ZERO = "ZeroInfimum"
INCONCLUSIVE = "Inconclusive"

Number = Fraction | mpf | float | int


def _mp(x) -> mpf:
    if isinstance(x, mpf):
        return x
    q = as_fraction(x) if not isinstance(x, float) else None
    if q is not None:
        return mpf(q.numerator) / q.denominator
    return mpf(x)


def _dec(q: Fraction, digits: int, up: bool) -> str:
    """Decimal string of q rounded outward (down, or up with ``up``)."""
    scale = 10**digits
    n = -((-q.numerator * scale) // q.denominator) if up else (q.numerator * scale) // q.denominator
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, scale)
    return f"{sign}{whole}.{frac:0{digits}d}".rstrip("0").rstrip(".")


def _s(x, digits: int = 20) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return mp.nstr(_mp(x), digits)


# --- spacing statistics --------------------------------------------------------


def min_spacing(values: Sequence[Number]) -> tuple[Number, tuple[int, int]]:
    """Least consecutive difference of the sorted values and its index pair."""
    vals = sorted(values)
    if len(vals) < 2:
        raise ValueError("need at least two values")
    best, at = None, (0, 1)
    for i in range(len(vals) - 1):
        d = vals[i + 1] - vals[i]
        if best is None or d < best:
            best, at = d, (i, i + 1)
    return best, at


@dataclass
class SpacingReport:
    source: str
    count: int
    min_gap: Number
    pair: tuple[int, int]
    pair_values: tuple[Number, Number]
    spacings: Optional[list] = None
    ratios: Optional[list] = None

    def to_dict(self) -> dict:
        d = {
            "source": self.source,
            "count": self.count,
            "min_spacing": _s(self.min_gap),
            "pair": list(self.pair),
            "pair_values": [_s(v) for v in self.pair_values],
        }
        if self.spacings is not None:
            d["spacings"] = [_s(v) for v in self.spacings]
        if self.ratios is not None:
            d["gap_ratios"] = [_s(v) for v in self.ratios]
        return d


def spacing_report(values: Sequence[Number], source: str = "", full: bool = False) -> SpacingReport:
    vals = sorted(values)
    gap, pair = min_spacing(vals)
    spacings = [b - a for a, b in zip(vals, vals[1:])] if full else None
    ratios = None
    if full and vals[0] > 0:
        ratios = gap_ratios(vals).ratios
    return SpacingReport(source, len(vals), gap, pair, (vals[pair[0]], vals[pair[1]]), spacings, ratios)


@dataclass
class GapRatios:
    ratios: list
    tail_max: list  # tail_max[k] = max(ratios[k:]), a limsup proxy

    @property
    def max(self):
        return self.tail_max[0]


def gap_ratios(values: Sequence[Number]) -> GapRatios:
    """Consecutive ratios lambda_{k+1}/lambda_k of sorted positive values."""
    vals = sorted(values)
    if len(vals) < 2:
        raise ValueError("need at least two values")
    if vals[0] <= 0:
        raise ValueError("gap ratios need strictly positive values")
    ratios = [b / a for a, b in zip(vals, vals[1:])]
    tail = list(ratios)
    for k in range(len(tail) - 2, -1, -1):
        tail[k] = max(tail[k], tail[k + 1])
    return GapRatios(ratios, tail)


# --- verdicts ------------------------------------------------------------------


@dataclass
class Condition:
    name: str
    status: str  # "pass", "fail" or "undecided"
    detail: str
    certificate: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass
class CriterionVerdict:
    criterion: str
    verdict: str
    conditions: list[Condition]
    witnesses: dict = field(default_factory=dict)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.conditions if not c.passed]

    @property
    def first_failed(self) -> Optional[str]:
        f = self.failed
        return f[0] if f else None

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "verdict": self.verdict,
            "first_failed": self.first_failed,
            "conditions": [
                {"name": c.name, "status": c.status, "detail": c.detail, "certificate": c.certificate}
                for c in self.conditions
            ],
            "witnesses": self.witnesses,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_text(self) -> str:
        lines = [f"{self.criterion}: {self.verdict}"]
        for c in self.conditions:
            lines.append(f"  [{c.status:9}] {c.name}: {c.detail}")
        for k, v in self.witnesses.items():
            lines.append(f"  {k} = {v}")
        return "\n".join(lines)


# --- positive criterion ----------------------------------------------------------


@dataclass(frozen=True)
class _Point:
    """A real number that is either an exact rational or an isolating bracket."""

    lo: Fraction
    hi: Fraction
    exact: Optional[Fraction]

    @classmethod
    def of(cls, r: RealRoot) -> "_Point":
        return cls(r.lo, r.hi, r.exact)

    def value(self) -> mpf:
        if self.exact is not None:
            return _mp(self.exact)
        return (_mp(self.lo) + _mp(self.hi)) / 2

    def __str__(self) -> str:
        return str(self.exact) if self.exact is not None else mp.nstr(self.value(), 20)


def _preimage_components(system: DecimationSystem, precision: int):
    """Pieces of R^{-1}[0, x_r] over the whole real line.

    The preimage is cut at every root of R and R - x_r, so each piece is a
    candidate monotone branch image.  Returns (pieces, boundary) where
    pieces are (left, right) _Point pairs and boundary lists the roots of
    R and R - x_r.
    """
    R, x_r = system.R, system.x_r
    zeros = [_Point.of(r) for r in real_roots(R.num, bits=precision)]
    tops = [_Point.of(r) for r in real_roots(R.minus_value(x_r), bits=precision)]
    poles = [_Point.of(r) for r in real_roots(R.den, bits=precision)] if R.den.degree > 0 else []
    marks = sorted(set(zeros + tops + poles), key=lambda p: p.lo)
    if not marks:
        raise ValueError("R has no roots; its preimage of [0, x_r] is empty or unbounded")
    pole_set = set(poles)

    def inside(q: Fraction) -> bool:
        return 0 <= R(q) <= x_r

    # open pieces between consecutive marks, plus the two unbounded ends;
    # R - 0 and R - x_r keep their signs on each piece
    samples = [marks[0].lo - 1] + [(a.hi + b.lo) / 2 for a, b in zip(marks, marks[1:])] + [marks[-1].hi + 1]
    comps = []
    for k, q in enumerate(samples):
        if not inside(q):
            continue
        left = marks[k - 1] if k > 0 else None
        right = marks[k] if k < len(marks) else None
        if left is None or right is None:
            raise ValueError("R^{-1}[0, x_r] is unbounded")
        if left in pole_set or right in pole_set:
            raise ValueError("a piece of R^{-1}[0, x_r] ends at a pole")
        comps.append((left, right))
    # isolated points where R touches 0 or x_r without an open piece around
    covered = lambda p: any(a.lo <= p.lo and p.hi <= b.hi for a, b in comps)
    for p in zeros + tops:
        if not covered(p):
            comps.append((p, p))
    comps.sort(key=lambda c: c[0].lo)
    return comps, zeros + tops


def _member(x, D0: Sequence, res: mpf) -> bool:
    for d in D0:
        if isinstance(x, _Point) and x.exact is not None and isinstance(d, Fraction):
            if x.exact == d:
                return True
            continue
        xv = x.value() if isinstance(x, _Point) else _mp(x)
        if abs(xv - _mp(d)) <= res:
            return True
    return False


def _derivative_candidates(system: DecimationSystem, a: _Point, b: _Point, precision: int):
    """(label, exact |R'| or None, enclosure lo, hi) on the component [a, b]."""
    dR = system.dR
    out = []

    def enclose(p: _Point):
        if p.exact is not None:
            v = abs(dR(p.exact))
            return v, _mp(v), _mp(v)
        with iv_precision(precision + 16):
            e = dR(iv_interval(p.lo, p.hi))
            lo, hi = mpf(e.a), mpf(e.b)
        if lo <= 0 <= hi:
            return None, mpf(0), max(-lo, hi)
        return None, min(abs(lo), abs(hi)), max(abs(lo), abs(hi))

    for p in (a, b) if a != b else (a,):
        out.append((str(p), *enclose(p)))
    d2 = dR.num.derivative() * dR.den - dR.num * dR.den.derivative()
    for r in real_roots(d2, a.lo, b.hi, precision):
        if r.hi <= a.hi or r.lo >= b.lo:
            if not (r.exact is not None and a.hi <= r.exact <= b.lo):
                continue
        p = _Point.of(r)
        out.append((str(p), *enclose(p)))
    return out


def _normalise_D0(D0: Iterable) -> list:
    out = []
    for d in D0:
        if isinstance(d, mpf):
            out.append(d)
        elif isinstance(d, float):
            q = Fraction(d).limit_denominator(10**6)
            out.append(q if abs(float(q) - d) <= 1e-12 * max(1.0, abs(d)) else mpf(d))
        else:
            out.append(as_fraction(d))
    return sorted(out, key=_mp)


def positive_criterion(
    system: DecimationSystem,
    D0: Iterable,
    precision: int = DEFAULT_PRECISION,
    margin: Optional[float] = None,
) -> CriterionVerdict:
    """Decide the sufficient conditions for a positive spacing infimum.

    (a) R^{-1}[0, x_r] lies in [0, x_r]; (b) each of its components is
    mapped monotonically onto [0, x_r] by an inverse branch; (c) no point
    of D0 maps into the open interval (0, x_r); (d) R^{-1}{0, x_r} lies in
    D0; (e) R'(0) is the maximum of |R'| on R^{-1}[0, x_r].  Every
    condition is evaluated and all failures are reported.
    """
    D0 = _normalise_D0(D0)
    res = mpf(2) ** (-(precision // 2))
    margin_v = res if margin is None else mpf(margin)
    c = system.c_delta
    x_r = system.x_r
    conds: list[Condition] = []
    with mp.workprec(precision):
        pre_ok = bool(D0) and _member(_Point(Fraction(0), Fraction(0), Fraction(0)), D0, res) and abs(
            max(_mp(d) for d in D0) - _mp(x_r)
        ) <= res
        conds.append(
            Condition(
                "precondition",
                "pass" if pre_ok else "fail",
                "0 and x_r belong to D0 and x_r is its maximum" if pre_ok else "D0 must contain 0 and have maximum x_r",
            )
        )
        comps, boundary = _preimage_components(system, precision)
        comp_txt = [f"[{a}, {b}]" for a, b in comps]

        inside = all(a.lo >= 0 and b.hi <= x_r for a, b in comps)
        conds.append(
            Condition(
                "(a) backward invariance",
                "pass" if inside else "fail",
                f"R^-1[0,x_r] = {' U '.join(comp_txt)}" + ("" if inside else " leaves [0, x_r]"),
                {"components": comp_txt},
            )
        )

        # (b) every component maps monotonically onto [0, x_r]
        crit = real_roots(system.dR.num, bits=precision)
        bad = []
        for a, b in comps:
            interior_crit = [r for r in crit if r.lo >= a.hi and r.hi <= b.lo and not (r.exact in (a.exact, b.exact) and r.exact is not None)]
            ends = set()
            for p in (a, b):
                v = system.R(p.exact) if p.exact is not None else system.R(p.value())
                ends.add(0 if abs(_mp(v)) <= res else (1 if abs(_mp(v) - _mp(x_r)) <= res else None))
            if interior_crit or ends != {0, 1}:
                bad.append(f"[{a}, {b}]")
        conds.append(
            Condition(
                "(b) branch coverage",
                "pass" if not bad else "fail",
                "each component is a monotone preimage of [0, x_r]" if not bad else f"not a full monotone branch: {', '.join(bad)}",
                {"branches": len(comps)},
            )
        )

        hits = []
        for d in D0:
            if isinstance(d, Fraction):
                v = system.R(d)
                if 0 < v < x_r:
                    hits.append(str(d))
            else:
                v = system.R(d)
                if res < v < _mp(x_r) - res:
                    hits.append(_s(d))
        conds.append(
            Condition(
                "(c) D0 avoids R^-1(0, x_r)",
                "pass" if not hits else "fail",
                "no element of D0 maps into (0, x_r)" if not hits else f"D0 elements mapping into (0, x_r): {', '.join(hits)}",
            )
        )

        missing = [str(p) for p in boundary if not _member(p, D0, res)]
        conds.append(
            Condition(
                "(d) R^-1{0, x_r} in D0",
                "pass" if not missing else "fail",
                "all preimages of 0 and x_r are in D0" if not missing else f"missing from D0: {', '.join(missing)}",
                {"preimages": [str(p) for p in boundary]},
            )
        )

        worst_hi, worst_at, status, exceed = mpf(0), None, "pass", []
        cm = _mp(c)
        for a, b in comps:
            for label, exact, lo, hi in _derivative_candidates(system, a, b, precision):
                if hi > worst_hi:
                    worst_hi, worst_at = hi, label
                if exact is not None:
                    if exact > c:
                        status = "fail"
                        exceed.append(f"|R'({label})| = {exact}")
                elif lo > cm:
                    status = "fail"
                    exceed.append(f"|R'({label})| in [{mp.nstr(lo, 12)}, {mp.nstr(hi, 12)}]")
                elif hi >= cm - margin_v and status == "pass":
                    status = "undecided"
                    exceed.append(f"|R'({label})| within margin of R'(0)")
        conds.append(
            Condition(
                "(e) R'(0) = max |R'|",
                status,
                f"max |R'| on R^-1[0,x_r] = {mp.nstr(worst_hi, 15)} at {worst_at}; R'(0) = {c}"
                + ("" if status == "pass" else "; " + "; ".join(exceed[:4])),
                {"max_abs_derivative_upper": mp.nstr(worst_hi, 20), "argmax": worst_at, "c_delta": str(c)},
            )
        )
        gap = min_spacing([_mp(d) for d in D0])[0] if len(D0) >= 2 else mpf(0)
    verdict = POSITIVE if all(cd.passed for cd in conds) else INCONCLUSIVE
    witnesses = {"D0": [_s(d) for d in D0], "C0": mp.nstr(gap, 20), "c_delta": str(c)}
    return CriterionVerdict("positive", verdict, conds, witnesses)


# --- zero criterion --------------------------------------------------------------


def zero_criterion(system: DecimationSystem, precision: int = DEFAULT_PRECISION, margin: Optional[float] = None) -> CriterionVerdict:
    """Look for a fixed point zeta > 0 with certified |R'(zeta)| > R'(0) > 1.

    All fixed points of R in (0, x_r] are listed; the witness is the
    largest qualifying one.
    """
    c = system.c_delta
    cm = _mp(c)
    margin_v = mpf(2) ** (-(precision // 2)) if margin is None else mpf(margin)
    conds = [Condition("R'(0) > 1", "pass" if c > 1 else "fail", f"R'(0) = {c}")]
    fps = [f for f in fixed_points(system, 0, system.x_r, precision) if not (f.point.exact == 0)]
    table = []
    good = []
    for f in fps:
        table.append(
            {
                "zeta": [_dec(f.point.lo, 30, False), _dec(f.point.hi, 30, True)]
                if f.point.exact is None
                else [str(f.point.exact)] * 2,
                "multiplier": [_dec(as_fraction(f.multiplier_lo), 20, False), _dec(as_fraction(f.multiplier_hi), 20, True)],
            }
        )
        if f.exact_multiplier is not None:
            if f.exact_multiplier > c:
                good.append(f)
        elif f.multiplier_lo > cm + margin_v:
            good.append(f)
    if good:
        z = good[-1]
        detail = f"zeta ~ {mp.nstr(z.value, 15)} has |R'(zeta)| in [{mp.nstr(z.multiplier_lo, 12)}, {mp.nstr(z.multiplier_hi, 12)}] > {c}"
        conds.append(Condition("repelling fixed point beats R'(0)", "pass", detail))
        witnesses = {
            "zeta_enclosure": table[fps.index(z)]["zeta"],
            "zeta_multiplier_enclosure": table[fps.index(z)]["multiplier"],
            "c_delta": str(c),
            "c_delta_enclosure": [_dec(c, 20, False), _dec(c, 20, True)],
            "qualifying_fixed_points": [table[fps.index(g)] for g in good],
            "fixed_points": table,
        }
        return CriterionVerdict("zero", ZERO, conds, witnesses)
    detail = "no fixed point in (0, x_r] has multiplier above R'(0)"
    conds.append(Condition("repelling fixed point beats R'(0)", "fail", detail))
    return CriterionVerdict("zero", INCONCLUSIVE, conds, {"fixed_points": table, "c_delta": str(c)})


# --- bound checks ----------------------------------------------------------------


@dataclass
class LemmaBoundReport:
    n: int
    size: int
    min_spacing: mpf
    bound: mpf
    C0: mpf
    holds: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "size": self.size,
            "min_spacing": mp.nstr(self.min_spacing, 20),
            "bound": mp.nstr(self.bound, 20),
            "C0": mp.nstr(self.C0, 20),
            "holds": self.holds,
        }


def lemma_bound_check(
    system: DecimationSystem,
    D0: Iterable,
    n: int,
    precision: int = DEFAULT_PRECISION,
    verdict: Optional[CriterionVerdict] = None,
) -> LemmaBoundReport:
    """Check min spacing of D_n >= C0 / R'(0)^n by enumerating D_n."""
    D0 = _normalise_D0(D0)
    verdict = verdict or positive_criterion(system, D0, precision)
    if verdict.verdict != POSITIVE:
        raise ValueError(f"positive criterion does not hold for this D0 (failed: {verdict.first_failed})")
    with mp.workprec(precision):
        Dn = preimage_set(system, [_mp(d) for d in D0], n, precision)
        C0 = min_spacing([_mp(d) for d in D0])[0]
        gap = min_spacing(Dn)[0] if len(Dn) >= 2 else mp.inf
        bound = C0 / _mp(system.c_delta) ** n
        slack = mpf(2) ** (-(precision // 2))
        return LemmaBoundReport(n, len(Dn), gap, bound, C0, gap >= bound - slack)


@dataclass
class LevelFloor:
    level: int
    contained: bool
    worst_distance: float
    eigenvalues: int
    renormalised_min_spacing: float
    C0: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def spacing_lower_bound_for_spectrum(
    system: DecimationSystem,
    spec: FractalSpec | str,
    bc: str,
    D0: Iterable,
    depth: int,
    tol: float = 1e-8,
    precision: int = DEFAULT_PRECISION,
) -> list[LevelFloor]:
    """Per level: is sigma(Delta_n) inside D_n, and c^n * spacing vs C0.

    Raises ``ValueError`` on a containment failure.
    """
    spec = get_fractal(spec) if isinstance(spec, str) else spec
    D0 = _normalise_D0(D0)
    verdict = positive_criterion(system, D0, precision)
    if verdict.verdict != POSITIVE:
        raise ValueError(f"positive criterion does not hold for this D0 (failed: {verdict.first_failed})")
    C0 = float(min_spacing([_mp(d) for d in D0])[0])
    c = float(system.c_delta)
    out = []
    start = 1 if bc == "dirichlet" else 0
    with mp.workprec(precision):
        for n in range(start, depth + 1):
            Dn = np.array([float(v) for v in preimage_set(system, [_mp(d) for d in D0], n, precision)])
            sp = level_spectrum(spec, n, system.convention, bc).eigenvalues
            dist = np.abs(sp[:, None] - Dn[None, :]).min(axis=1)
            worst = float(dist.max()) if dist.size else 0.0
            if worst > tol:
                raise ValueError(f"level {n}: eigenvalue {sp[int(dist.argmax())]:.12g} is {worst:.3g} from D_{n}")
            gap = float(np.min(np.diff(sp))) * c**n if sp.size >= 2 else float("inf")
            out.append(LevelFloor(n, True, worst, int(sp.size), gap, C0))
    return out


# --- zero-spacing witness ----------------------------------------------------------


@dataclass(frozen=True)
class WitnessPoint:
    m: int
    values: tuple[mpf, mpf]
    spacing: mpf


def _zeta_branch(system: DecimationSystem, zeta: mpf, precision: int) -> BranchInverse:
    for br in system.branches:
        a, b = br.source(precision)
        if a < zeta < b:
            return br
    raise ValueError(f"no inverse branch has {mp.nstr(zeta, 12)} in its interior")


def _default_zeta(system: DecimationSystem, precision: int) -> mpf:
    v = zero_criterion(system, precision)
    if v.verdict != ZERO:
        raise ValueError(f"{system.name}: no repelling fixed point beats R'(0); no witness exists")
    lo, hi = v.witnesses["zeta_enclosure"]
    return (mpf(lo) + mpf(hi)) / 2


def zero_spacing_witness(
    system: DecimationSystem,
    x1,
    x2,
    n0: int,
    m: int,
    j: int,
    precision: int = DEFAULT_PRECISION,
    zeta=None,
) -> WitnessPoint:
    """The pair c^(n0+j+m) phi0^j(phi_zeta^m(x_i)) and its spacing.

    ``phi_zeta`` is the inverse branch whose source interval contains the
    fixed point ``zeta`` (default: the zero-criterion witness).
    """
    with mp.workprec(precision + 16):
        a, b = _mp(x1), _mp(x2)
        if a == b:
            raise ValueError("x1 and x2 must differ")
        if min(m, j, n0) < 0:
            raise ValueError("n0, m and j must be nonnegative")
        z = _default_zeta(system, precision) if zeta is None else _mp(zeta)
        br = _zeta_branch(system, z, precision)
        cm = _mp(system.c_delta)
        vals = []
        for x in (a, b):
            if not (0 <= x <= _mp(system.x_r)):
                raise ValueError(f"{mp.nstr(x, 12)} lies outside [0, x_r]")
            if not br.contains_target(x, precision):
                raise ValueError(f"{mp.nstr(x, 12)} is outside the target of the zeta branch")
            y = x
            for _ in range(m):
                y = apply_inverse(br, y, precision + 16)
            for _ in range(j):
                if not system.phi0.contains_target(y, precision):
                    raise ValueError(f"phi0 is undefined at {mp.nstr(y, 12)}")
                y = apply_inverse(system.phi0, y, precision + 16)
            vals.append(cm ** (n0 + j + m) * y)
        with mp.workprec(precision):
            return WitnessPoint(m, (+vals[0], +vals[1]), +abs(vals[0] - vals[1]))


def witness_sequence(system: DecimationSystem, x1, x2, n0: int, ms: Iterable[int], j: int, precision: int = DEFAULT_PRECISION, zeta=None) -> list[WitnessPoint]:
    z = _default_zeta(system, precision) if zeta is None else zeta
    return [zero_spacing_witness(system, x1, x2, n0, m, j, precision, z) for m in ms]


# --- D0 suggestion ------------------------------------------------------------------


@dataclass
class SuggestedD0:
    values: list
    rejected: list[float]
    skipped: list[float]

    def to_dict(self) -> dict:
        return {"D0": [_s(v) for v in self.values], "rejected": self.rejected, "skipped_exceptional": self.skipped}


def _snap(x: float) -> Number:
    q = Fraction(x).limit_denominator(1000)
    return q if abs(float(q) - x) <= 1e-9 * max(1.0, abs(x)) else mpf(x)


def suggest_D0(
    system: DecimationSystem,
    spec: FractalSpec | str,
    n: int,
    tol: float = 1e-9,
    bc: str = "neumann",
    close: bool = True,
    precision: int = DEFAULT_PRECISION,
) -> SuggestedD0:
    """Candidate D0 = R^n(sigma(Delta_n)) with 0 and x_r added.

    Images of exceptional values are skipped and images leaving [0, x_r]
    are rejected.  With ``close`` the preimages R^{-1}{0, x_r} are added,
    which is what condition (d) of the positive criterion asks for.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    spec = get_fractal(spec) if isinstance(spec, str) else spec
    sp = level_spectrum(spec, n, system.convention, bc).eigenvalues
    x_r = float(system.x_r)
    exc = [float(e) for e in system.exceptional]
    vals: list = [Fraction(0), system.x_r]
    rejected, skipped = [], []
    for lam in sp:
        y = float(lam)
        dead = False
        for _ in range(n):
            if any(abs(y - e) <= tol * max(1.0, e) for e in exc):
                dead = True
                break
            y = float(system.R(y))
        if dead:
            skipped.append(float(lam))
            continue
        if y < -tol or y > x_r + tol:
            rejected.append(float(lam))
            continue
        vals.append(_snap(min(max(y, 0.0), x_r)))
    if close:
        with mp.workprec(precision):
            for poly in (system.R.num, system.R.minus_value(system.x_r)):
                for r in real_roots(poly, 0, system.x_r, precision):
                    vals.append(r.exact if r.exact is not None else r.value())
    out: list = []
    for v in sorted(vals, key=_mp):
        if out and abs(_mp(v) - _mp(out[-1])) <= max(tol, 1e-12):
            if isinstance(v, Fraction) and not isinstance(out[-1], Fraction):
                out[-1] = v
            continue
        out.append(v)
    return SuggestedD0(out, rejected, skipped)
