"""End-to-end reproduction checks, shared by the CLI and the test suite.

Each check returns a :class:`CheckResult`; a check passes when its
numerical condition holds and it finishes within its time budget.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from mpmath import mp, mpf, pi

from .decimation import closed_form_spectrum, extremum_of_derivative, fixed_points, get_system
from .graphs import SG as SG_SPEC, SG3 as SG3_SPEC
from .laplacian import verify_decimation
from .limits import generate_spectrum, polished_level_spectrum, truncated_spectrum
from .perturbation import run_trials, wielandt_check
from .rational import Polynomial, RationalFunction, real_roots
from .spacing import (
    POSITIVE,
    ZERO,
    lemma_bound_check,
    min_spacing,
    positive_criterion,
    witness_sequence,
    zero_criterion,
)

__all__ = ["CheckResult", "CHECKS", "run_check", "run_all", "format_table"]


@dataclass
class CheckResult:
    id: str
    title: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _sg3_derivative() -> tuple[bool, str]:
    R = get_system("sg3").R
    x = Polynomial.x()
    num = (x**4 * 288 - x**3 * 1024 + x**2 * 1290 - x * 658 + 105) * 6
    den = (x * 6 - 7) ** 2
    displayed = RationalFunction(num, den)
    dR = R.derivative()
    same = dR == displayed
    at0 = dR(Fraction(0))
    ok = same and at0 == Fraction(90, 7)
    return ok, f"R' equals the displayed form: {same}; R'(0) = {at0}"


def _sg3_derivative_min() -> tuple[bool, str]:
    ext = extremum_of_derivative(get_system("sg3"), Fraction(6, 5), Fraction(3, 2))
    target = mpf("25.5428")
    ok = abs(ext.min_value - target) <= mpf("1e-3")
    return ok, (
        f"min R' on [1.2, 1.5] = {mp.nstr(ext.min_value, 12)} at x = {mp.nstr(ext.argmin, 12)}; "
        f"expected 25.5428 +- 1e-3"
    )


def _sg3_fixed_point() -> tuple[bool, str]:
    sys3 = get_system("sg3")
    c = sys3.c_delta
    inside = real_roots(sys3.R.fixed_point_polynomial(), Fraction(5, 4), Fraction(13, 10), open_interval=True)
    fps = [f for f in fixed_points(sys3) if f.point.exact != 0]
    in_window = [f for f in fps if f.point.lo > Fraction(5, 4) and f.point.hi < Fraction(13, 10)]
    mult_ok = bool(in_window) and all(f.multiplier_lo > mpf(c.numerator) / c.denominator for f in in_window)
    verdict = zero_criterion(sys3)
    ok = len(inside) == 1 and mult_ok and verdict.verdict == ZERO
    listed = ", ".join(f"{mp.nstr(f.value, 10)} (|R'| {mp.nstr(f.multiplier, 8)})" for f in fps)
    return ok, (
        f"fixed points in (1.25, 1.3): {len(inside)}; all positive fixed points: {listed}; "
        f"zero criterion: {verdict.verdict}"
    )


def _sg3_spectra() -> tuple[bool, str]:
    sys3 = get_system("sg3")
    parts, ok = [], True
    cache: dict = {}
    for n in (1, 2):
        computed = [p.value for p in polished_level_spectrum(sys3, SG3_SPEC, n, "neumann", 128, cache)]
        formula = closed_form_spectrum(sys3, n, 128)
        tol = mpf("1e-9")
        extra = [v for v in computed if not any(abs(v - f) <= tol for f in formula)]
        missing = [f for f in formula if not any(abs(v - f) <= tol for v in computed)]
        good = not extra and not missing
        ok &= good
        parts.append(
            f"n={n}: {len(computed)} computed vs {len(formula)} predicted, "
            f"{len(extra)} only computed, {len(missing)} only predicted"
        )
    return ok, "; ".join(parts)


def _interval_spectrum() -> tuple[bool, str]:
    sys_i = get_system("interval")
    dir_ = generate_spectrum(sys_i, "interval", "dirichlet", count=8, tol=1e-12).as_mpf()
    neu = generate_spectrum(sys_i, "interval", "neumann", count=8, tol=1e-12).as_mpf()
    rel = max(abs(v / (pi**2 * k * k) - 1) for k, v in enumerate(dir_, start=1))
    dgap = min_spacing(dir_)[0]
    ngap = min_spacing(neu)[0]
    ok = (
        len(dir_) == 8
        and rel <= mpf("1e-6")
        and abs(dgap - 3 * pi**2) <= mpf("1e-6")
        and abs(ngap - pi**2) <= mpf("1e-6")
    )
    return ok, (
        f"max relative error vs pi^2 k^2 = {mp.nstr(rel, 3)}; Dirichlet min spacing - 3pi^2 = "
        f"{mp.nstr(dgap - 3 * pi**2, 3)}; Neumann min spacing - pi^2 = {mp.nstr(ngap - pi**2, 3)}"
    )


def _lemma_bound() -> tuple[bool, str]:
    ok = True
    parts = []
    for name, D0 in (("interval", [0, 2, 4]), ("sg", [0, 2, 3, 5, 6])):
        system = get_system(name)
        v = positive_criterion(system, D0)
        good = v.verdict == POSITIVE
        worst = None
        if good:
            for n in range(7):
                rep = lemma_bound_check(system, D0, n, verdict=v)
                good &= rep.holds
                r = rep.min_spacing / rep.bound
                worst = r if worst is None else min(worst, r)
        ok &= good
        parts.append(f"{name}: {v.verdict}, min over n<=6 of spacing/bound = {mp.nstr(worst, 6) if worst else 'n/a'}")
    return ok, "; ".join(parts)


def _decimation() -> tuple[bool, str]:
    worst, ok, parts = 0.0, True, []
    for name, top in (("interval", 6), ("sg", 4), ("sg3", 2)):
        system = get_system(name)
        for bc in ("neumann", "dirichlet"):
            for m in range(1, top + 1):
                rep = verify_decimation(name, m, system, tol=1e-9, bc=bc)
                ok &= rep.passed and rep.max_distance < 1e-9
                worst = max(worst, rep.max_distance)
        parts.append(f"{name} m<={top}")
    return ok, f"{', '.join(parts)} (both boundary conditions); worst distance {worst:.3g}"


def _witness() -> tuple[bool, str]:
    sys3 = get_system("sg3")
    zc = zero_criterion(sys3)
    lo, hi = (mpf(s) for s in zc.witnesses["zeta_multiplier_enclosure"])
    target = mpf(sys3.c_delta.numerator) / sys3.c_delta.denominator / ((lo + hi) / 2)
    seq = witness_sequence(sys3, Fraction(3, 4), Fraction(1), 1, range(7), 8)
    sp = [w.spacing for w in seq]
    decreasing = all(b < a for a, b in zip(sp, sp[1:]))
    ratios = [sp[m] / sp[m - 1] for m in range(1, 7)]
    close = all(abs(ratios[m - 1] - target) <= mpf("0.1") for m in range(4, 7))
    return decreasing and close, (
        f"spacings {', '.join(mp.nstr(s, 6) for s in sp)}; ratios for m>=4 "
        f"{', '.join(mp.nstr(r, 6) for r in ratios[3:])} vs c/|R'(zeta)| = {mp.nstr(target, 6)}"
    )


def _wielandt() -> tuple[bool, str]:
    rows = run_trials(10, 4, 1000, 0.1, seed=0)
    bad = sum(r.violation for r in rows)
    eps = 1e-2
    rep = wielandt_check(np.diag([2.0, 0.0]), np.array([[0.0, eps], [eps, 0.0]]), 1)
    exact = np.sqrt(1 + eps * eps) - 1
    top = rep.entries[0]
    two = abs(top.shift - exact) <= 1e-14 and abs(top.bound - eps * eps / 2) <= 1e-16 and rep.violations == 0
    return bad == 0 and two, f"{bad} violations in 1000 trials; 2x2 shift {top.shift:.12g} vs {exact:.12g}, bound {top.bound:.3g}"


def _truncation_stability() -> tuple[bool, str]:
    sg = get_system("sg")
    ok, parts = True, []
    for bc in ("dirichlet", "neumann"):
        a = generate_spectrum(sg, "sg", bc, count=30, tol=1e-12, precision=256)
        # a limit at level n needs level n + 1, so the deepest usable base is max_level - 1
        deeper = min(2 * a.depth, SG_SPEC.max_level - 1)
        b = generate_spectrum(sg, "sg", bc, count=30, tol=1e-14, precision=512, depth=deeper)
        ga, gb = min_spacing(a.as_mpf())[0], min_spacing(b.as_mpf())[0]
        rel = abs(ga - gb) / ga
        good = len(a.values) >= 30 and ga > 0 and rel < mpf("1e-8")
        ok &= good
        parts.append(f"sg {bc}: min spacing {mp.nstr(ga, 12)} (levels {a.depth} vs {b.depth}), relative change {mp.nstr(rel, 3)}")
    sys3 = get_system("sg3")
    gaps = [min_spacing([v.value for v in truncated_spectrum(sys3, "sg3", "neumann", d)])[0] for d in (1, 2, 3)]
    dec = all(b < a for a, b in zip(gaps, gaps[1:]))
    ok &= dec
    parts.append(f"sg3 min spacing by depth 1..3: {', '.join(mp.nstr(g, 8) for g in gaps)}")
    return ok, "; ".join(parts)


CHECKS: dict[str, tuple[str, float, Callable[[], tuple[bool, str]]]] = {
    "1": ("SG3 derivative identity", 1.0, _sg3_derivative),
    "2": ("SG3 derivative infimum on [1.2, 1.5]", 1.0, _sg3_derivative_min),
    "3": ("SG3 repelling fixed point", 1.0, _sg3_fixed_point),
    "4": ("SG3 discrete spectra vs closed form", 30.0, _sg3_spectra),
    "5": ("interval limit spectrum and spacings", 10.0, _interval_spectrum),
    "6": ("lemma spacing bound", 60.0, _lemma_bound),
    "7": ("decimation containment", 60.0, _decimation),
    "8": ("zero-spacing witness", 10.0, _witness),
    "9": ("Wielandt inequalities", 30.0, _wielandt),
    "10": ("truncated spectrum stability", 120.0, _truncation_stability),
}


def run_check(check_id: str) -> CheckResult:
    try:
        title, budget, fn = CHECKS[check_id]
    except KeyError:
        raise KeyError(f"unknown example id {check_id!r}; known: {', '.join(CHECKS)}") from None
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, reported like any other
        ok, detail = False, f"error: {type(exc).__name__}: {exc}"
    dt = time.perf_counter() - t0
    if ok and dt > budget:
        ok, detail = False, f"{detail}; took {dt:.1f} s > {budget:.0f} s budget"
    return CheckResult(check_id, title, ok, detail, dt, budget)


def run_all(ids=None) -> list[CheckResult]:
    return [run_check(i) for i in (ids or CHECKS)]


def format_table(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        lines.append(f"{'PASS' if r.passed else 'FAIL'}  {r.id:>2}  {r.title}  ({r.seconds:.2f} s)  {r.detail}")
    return "\n".join(lines)
