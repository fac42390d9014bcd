import dataclasses

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf, pi, sqrt

from fracspec import get_system
from fracspec.decimation import system_from_dict
from fracspec.graphs import get_fractal
from fracspec.limits import NotConvergedError, eigenvalue_limit, generate_spectrum, tail_constant, truncated_spectrum


def explicit_limit(phi0, c, n0, y, steps=200):
    # independent route: closed-form inverse branch, many iterations
    with mp.workprec(400):
        y = mpf(y)
        for _ in range(steps):
            y = phi0(y)
        return c ** (n0 + steps) * y


def interval_phi0(y):
    return y / (2 + sqrt(4 - y))


def sg_phi0(y):
    return 2 * y / (5 + sqrt(25 - 4 * y))


def test_interval_limit_is_pi_squared(interval):
    lim = eigenvalue_limit(interval, 1, 2)
    mp.prec = 256
    assert abs(lim.value - pi**2) <= lim.error_bound
    assert lim.error_bound < 1e-9


@settings(max_examples=15)
@given(st.integers(1, 399).map(lambda k: mpf(k) / 100), st.integers(0, 3))
def test_error_bound_is_honest_interval(y, n0):
    sys_i = get_system("interval")
    lim = eigenvalue_limit(sys_i, n0, y, tol=1e-9)
    ref = explicit_limit(interval_phi0, 4, n0, y)
    assert abs(lim.value - ref) <= lim.error_bound + mpf(10) ** -40 * ref


@settings(max_examples=15)
@given(st.integers(1, 599).map(lambda k: mpf(k) / 100))
def test_error_bound_is_honest_sg(y):
    sg = get_system("sg")
    lim = eigenvalue_limit(sg, 1, y, tol=1e-9)
    ref = explicit_limit(sg_phi0, 5, 1, y)
    assert abs(lim.value - ref) <= lim.error_bound + mpf(10) ** -40 * ref


def test_zero_is_a_fixed_limit(sg3):
    lim = eigenvalue_limit(sg3, 3, 0)
    assert lim.value == 0 and lim.error_bound == 0


def test_argument_checks(sg):
    with pytest.raises(ValueError):
        eigenvalue_limit(sg, -1, 2)
    with pytest.raises(ValueError):
        eigenvalue_limit(sg, 1, 7)
    with pytest.raises(NotConvergedError):
        eigenvalue_limit(sg, 1, 2, tol=1e-30, max_iter=3)


def test_tail_constant_needs_contraction_data():
    bare = system_from_dict({
        "name": "bare", "fractal": "sg", "convention": "combinatorial",
        "numerator": ["0", "5", "-1"], "denominator": ["1"], "x_r": "6", "exceptional": ["6"],
    })
    with pytest.raises(ValueError):
        tail_constant(bare)
    q, M, x0 = tail_constant(get_system("sg"))
    assert q == pytest.approx(0.25) and M > 0 and 0 < x0 < 3


def test_interval_dirichlet_and_neumann(interval):
    dir_ = generate_spectrum(interval, "interval", "dirichlet", count=6, tol=1e-12).as_mpf()
    neu = generate_spectrum(interval, "interval", "neumann", count=6, tol=1e-12).as_mpf()
    for k, v in enumerate(dir_, start=1):
        assert abs(v / (pi**2 * k * k) - 1) < 1e-10
    assert neu[0] == 0
    for k, v in enumerate(neu[1:], start=1):
        assert abs(v / (pi**2 * k * k) - 1) < 1e-10


def test_interval_cutoff(interval):
    gen = generate_spectrum(interval, "interval", "dirichlet", cutoff=100, tol=1e-12)
    assert len(gen.values) == 3  # pi^2, 4 pi^2, 9 pi^2 < 100 < 16 pi^2
    assert gen.complete_below > 100


def test_sg_first_dirichlet_limit_matches_closed_branch(sg):
    gen = generate_spectrum(sg, "sg", "dirichlet", count=3, tol=1e-12)
    first = gen.values[0]
    assert first.base_level == 1 and first.base_value == 2
    ref = explicit_limit(sg_phi0, 5, 1, 2)
    assert abs(first.value - ref) <= first.error_bound + mpf(10) ** -30
    assert float(first.value) == pytest.approx(11.2106659260, abs=1e-9)


def test_sg_dead_end_value_is_excluded(sg):
    # 6 is a level-0 Neumann eigenvalue that does not continue to level 1
    vals = generate_spectrum(sg, "sg", "neumann", count=4, tol=1e-12)
    assert all(v.base_value != 6 or v.base_level > 0 for v in vals.values)


def test_sg3_limit_uses_polished_base(sg3):
    vals = truncated_spectrum(sg3, "sg3", "neumann", 1)
    assert vals[0].value == 0
    bases = sorted(float(v.base_value) for v in vals if v.base_level == 1)
    assert bases == pytest.approx([(3 - 2**0.5) / 4, 1.0, (3 + 2**0.5) / 4], abs=1e-12)


def test_truncations_are_nested(sg3):
    d1 = [v.value for v in truncated_spectrum(sg3, "sg3", "dirichlet", 1)]
    d2 = [v.value for v in truncated_spectrum(sg3, "sg3", "dirichlet", 2)]
    assert all(any(abs(a - b) < 1e-8 * max(1, a) for b in d2) for a in d1)


def test_cap_is_reported(sg3):
    small = dataclasses.replace(get_fractal("sg3"), max_level=2)
    with pytest.raises(ValueError, match="safety cap"):
        generate_spectrum(sg3, small, "dirichlet", count=10**6)


def test_serialisation(interval):
    gen = generate_spectrum(interval, "interval", "dirichlet", count=2, tol=1e-12)
    d = gen.to_dict()
    assert [e["index"] for e in d["eigenvalues"]] == [0, 1]
    assert mpf(d["eigenvalues"][0]["eigenvalue"]) - pi**2 < 1e-10
    assert gen.to_csv().splitlines()[0] == "index,eigenvalue,base_level,base_value,error_bound"
