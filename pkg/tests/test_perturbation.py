import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracspec.perturbation import (
    make_admissible_perturbation,
    random_symmetric,
    run_trials,
    spectral_projectors,
    trials_csv,
    wielandt_check,
)


@pytest.mark.parametrize("eps", [1e-3, 1e-2, 0.3])
def test_two_by_two_closed_form(eps):
    # eigenvalues of [[2, e], [e, 0]] are 1 +- sqrt(1 + e^2)
    a = np.diag([2.0, 0.0])
    b = np.array([[0.0, eps], [eps, 0.0]])
    rep = wielandt_check(a, b, 1)
    shift = np.sqrt(1 + eps * eps) - 1
    assert rep.violations == 0
    assert rep.entries[0].shift == pytest.approx(shift, rel=1e-10)
    assert rep.entries[1].shift == pytest.approx(-shift, rel=1e-10)
    assert rep.entries[0].bound == pytest.approx(eps * eps / 2)


@given(st.integers(0, 10**6), st.integers(3, 9), st.floats(0.01, 0.5))
def test_random_admissible_perturbations(seed, n, frac):
    a = random_symmetric(n, seed)
    d = n // 2
    pp = spectral_projectors(a, d)
    b = make_admissible_perturbation(a, d, seed, frac * pp.gap, projectors=pp)
    assert np.allclose(b, b.T)
    assert np.linalg.norm(pp.P_top @ b @ pp.P_top) < 1e-10
    assert np.linalg.norm(b, 2) == pytest.approx(frac * pp.gap)
    rep = wielandt_check(a, b, d, projectors=pp)
    assert rep.violations == 0
    assert all(e.shift >= -rep.slack for e in rep.entries if e.block == "top")
    assert all(e.shift <= rep.slack for e in rep.entries if e.block == "bottom")


def test_perturbation_is_reproducible():
    a = random_symmetric(6, 7)
    assert np.array_equal(make_admissible_perturbation(a, 2, 3, 0.1), make_admissible_perturbation(a, 2, 3, 0.1))


def test_inadmissible_perturbation_rejected():
    a = np.diag([3.0, 2.0, 0.0])
    with pytest.raises(ValueError, match="admissible"):
        wielandt_check(a, np.eye(3) * 0.1, 2)


def test_gap_hypothesis():
    with pytest.raises(ValueError, match="gap"):
        spectral_projectors(np.diag([1.0, 1.0, 0.0]), 1)
    with pytest.raises(ValueError):
        spectral_projectors(np.eye(3), 3)


def test_trials_and_csv():
    rows = run_trials(8, 3, 25, 0.1, seed=5)
    assert len(rows) == 25 and not any(r.violation for r in rows)
    assert [r.seed for r in rows] == list(range(5, 30))
    text = trials_csv(rows)
    assert text.splitlines()[0] == "seed,scale,worst_margin_top,worst_margin_bottom,violation"
    assert run_trials(8, 3, 3, 0.1, seed=5)[2] == rows[2]
