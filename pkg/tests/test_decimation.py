import json
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from fracspec.decimation import (
    BranchCoverageError,
    apply_inverse,
    backward_images,
    check_contraction,
    closed_form_spectrum,
    critical_points,
    extremum_of_derivative,
    fixed_points,
    get_system,
    load_registry,
    preimage_set,
    system_from_dict,
)
from fracspec.rational import PoleError

X = sp.Symbol("x")
SG3_SYMPY = 6 * X * (X - 1) * (4 * X - 5) * (4 * X - 3) / (6 * X - 7)


def sympy_R(system):
    n = sum(sp.Rational(str(c)) * X**k for k, c in enumerate(system.R.num.coeffs))
    d = sum(sp.Rational(str(c)) * X**k for k, c in enumerate(system.R.den.coeffs))
    return n / d


def test_sg3_registry_matches_factored_form(sg3):
    assert sp.simplify(sympy_R(sg3) - SG3_SYMPY) == 0
    assert sg3.c_delta == Fraction(90, 7)
    assert sp.diff(SG3_SYMPY, X).subs(X, 0) == sp.Rational(90, 7)


@pytest.mark.parametrize("name,c", [("interval", 4), ("sg", 5), ("sg3", Fraction(90, 7))])
def test_renormalisation_constants(name, c):
    assert get_system(name).c_delta == c


@pytest.mark.parametrize("name", ["interval", "sg", "sg3"])
def test_fixed_points_match_sympy(name):
    system = get_system(name)
    r = sympy_R(system)
    expect = sorted(float(s) for s in sp.Poly(sp.numer(sp.together(r - X)), X).nroots() if abs(sp.im(s)) < 1e-12 and 0 < sp.re(s) <= float(system.x_r))
    got = [float(f.value) for f in fixed_points(system) if f.value > 0]
    assert got == pytest.approx(expect, abs=1e-12)
    for f in fixed_points(system):
        m = abs(float(sp.diff(r, X).subs(X, sp.Float(mp.nstr(f.value, 40), 40))))
        assert f.multiplier_lo - mpf("1e-12") <= m <= f.multiplier_hi + mpf("1e-12")


def test_sg3_fixed_points_and_multipliers(sg3):
    fps = {round(float(f.value), 6): float(f.multiplier) for f in fixed_points(sg3)}
    assert fps[0.0] == pytest.approx(90 / 7)
    assert fps[1.300573] == pytest.approx(23.6935260588, abs=1e-9)
    assert fps[1.088967] == pytest.approx(23.7054200395, abs=1e-9)
    assert fps[0.610461] == pytest.approx(4.7989460983, abs=1e-9)


def test_sg3_critical_points_match_sympy(sg3):
    crit = sorted(float(s) for s in sp.Poly(sp.numer(sp.together(sp.diff(SG3_SYMPY, X))), X).nroots() if abs(sp.im(s)) < 1e-12 and 0 < sp.re(s) < 1.5)
    got = [float(r.value()) for r in critical_points(sg3)]
    assert got == pytest.approx(crit, abs=1e-12)
    assert len(got) == 2


def test_sg3_derivative_extremum_matches_sympy(sg3):
    ext = extremum_of_derivative(sg3, Fraction(6, 5), Fraction(3, 2))
    d1 = sp.diff(SG3_SYMPY, X)
    cands = [sp.Float(1.2), sp.Float(1.5)] + [sp.re(s) for s in sp.Poly(sp.numer(sp.together(sp.diff(d1, X))), X).nroots() if abs(sp.im(s)) < 1e-12 and 1.2 <= sp.re(s) <= 1.5]
    vals = [float(d1.subs(X, c)) for c in cands]
    assert float(ext.min_value) == pytest.approx(min(vals), abs=1e-10)
    assert float(ext.max_value) == pytest.approx(max(vals), abs=1e-10)
    lo, hi = ext.min_enclosure
    assert lo - mpf("1e-12") <= min(vals) <= hi + mpf("1e-12")
    assert hi - lo < mpf("1e-30")


def test_extremum_rejects_pole(sg3):
    with pytest.raises(PoleError):
        extremum_of_derivative(sg3, 1, Fraction(3, 2))


@pytest.mark.parametrize("name", ["interval", "sg", "sg3"])
def test_branches_cover_and_invert(name):
    system = get_system(name)
    mp.prec = 200
    for br in system.branches:
        a, b = br.source(200)
        lo, hi = br.target(200)
        for t in (mpf("0.1"), mpf("0.5"), mpf("0.9")):
            y = lo + t * (hi - lo) if mp.isfinite(hi) and mp.isfinite(lo) else (lo + t if mp.isfinite(lo) else hi - 1 / t)
            x = apply_inverse(br, y, 200)
            assert a <= x <= b
            assert abs(system.R(x) - y) < mpf(2) ** -150 * max(1, abs(y))


@given(st.fractions(0, Fraction(3, 2)))
def test_phi0_is_a_contraction_on_its_range(y):
    sg3 = get_system("sg3")
    if y > sg3.contraction_y0:
        return
    x = apply_inverse(sg3.phi0, y, 128)
    k = sg3.c_delta - sg3.contraction_eps
    q = mpf(k.denominator) / k.numerator
    assert x <= q * mpf(y.numerator) / y.denominator + mpf(2) ** -100


@pytest.mark.parametrize("name", ["interval", "sg", "sg3"])
def test_registered_contraction_constants_certify(name):
    assert check_contraction(get_system(name))


def test_contraction_fails_for_too_small_epsilon(sg):
    # R(x)/x = 5 - x drops below 5 - 1/100 as soon as x > 1/100
    assert not check_contraction(sg, Fraction(1, 100), 3)


def test_backward_images_interval():
    sys_i = get_system("interval")
    got = [float(v) for v in backward_images(sys_i, [0, 4, 2])]
    assert got == pytest.approx([0, 2 - 2**0.5, 2, 2 + 2**0.5, 4])


def test_backward_images_strict_coverage():
    sys3 = get_system("sg3")
    # R maps [0, 3/2] onto ranges that miss nothing in (0, 3/2)
    backward_images(sys3, [mpf("0.3"), mpf("1.4")])
    lopsided = system_from_dict({
        "name": "lop", "fractal": "interval", "convention": "combinatorial",
        "numerator": ["0", "2", "-1"], "denominator": ["1"], "x_r": "4", "exceptional": [],
    })
    with pytest.raises(BranchCoverageError):
        backward_images(lopsided, [3])


@given(st.integers(0, 4))
def test_preimage_set_is_nested(n):
    sg = get_system("sg")
    small = preimage_set(sg, [0, 2, 3, 5, 6], n, 96)
    big = preimage_set(sg, [0, 2, 3, 5, 6], n + 1, 96)
    assert all(any(abs(a - b) < mpf(2) ** -40 for b in big) for a in small)
    assert len(big) >= len(small)


def test_closed_form_interval_matches_cosines():
    sys_i = get_system("interval")
    got = [float(v) for v in closed_form_spectrum(sys_i, 3)]
    import numpy as np

    assert got == pytest.approx(sorted(2 - 2 * np.cos(np.arange(9) * np.pi / 8)), abs=1e-12)


def test_closed_form_requires_schedule(sg):
    with pytest.raises(ValueError):
        closed_form_spectrum(sg, 2)


def test_registry_roundtrip_and_env(tmp_path, monkeypatch):
    systems = load_registry()
    path = tmp_path / "reg.json"
    path.write_text(json.dumps({"systems": [s.to_dict() for s in systems.values()]}))
    again = load_registry(path)
    assert {k: v.to_dict() for k, v in again.items()} == {k: v.to_dict() for k, v in systems.items()}
    only = tmp_path / "one.json"
    d = systems["sg"].to_dict()
    d["name"] = "custom"
    only.write_text(json.dumps({"systems": [d]}))
    monkeypatch.setenv("FRACSPEC_REGISTRY", str(only))
    assert get_system("custom").R == systems["sg"].R


@pytest.mark.parametrize("bad,msg", [
    ({"numerator": ["1", "1"]}, "R\\(0\\)"),
    ({"numerator": ["0", "1"]}, "must exceed 1"),
    ({"exceptional": ["0"]}, "cannot be exceptional"),
])
def test_registry_validation(bad, msg):
    d = {"name": "t", "fractal": "sg", "convention": "combinatorial", "numerator": ["0", "5", "-1"],
         "denominator": ["1"], "x_r": "6", "exceptional": []}
    d.update(bad)
    with pytest.raises(ValueError, match=msg):
        system_from_dict(d)


def test_sg3_zeros_and_pole(sg3):
    from fracspec.rational import real_roots

    assert sg3.R(Fraction(1)) == 0 and sg3.R(Fraction(0)) == 0
    with pytest.raises(PoleError):
        sg3.R(Fraction(7, 6))
    zeros = [r.exact for r in real_roots(sg3.R.num, 0, Fraction(3, 2))]
    assert zeros == [0, Fraction(3, 4), 1, Fraction(5, 4)]
    got = preimage_set(sg3, [0], 1, 128)
    assert [float(v) for v in got] == [0, 0.75, 1, 1.25]
