from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf

from fracspec import get_system
from fracspec.spacing import (
    INCONCLUSIVE,
    POSITIVE,
    ZERO,
    gap_ratios,
    lemma_bound_check,
    min_spacing,
    positive_criterion,
    spacing_lower_bound_for_spectrum,
    spacing_report,
    suggest_D0,
    witness_sequence,
    zero_criterion,
    zero_spacing_witness,
)

SG_D0 = [0, 2, 3, 5, 6]


@given(st.lists(st.fractions(-50, 50), min_size=2, max_size=30, unique=True))
def test_min_spacing_brute_force(vals):
    gap, (i, j) = min_spacing(vals)
    brute = min(abs(a - b) for a in vals for b in vals if a != b)
    assert gap == brute
    s = sorted(vals)
    assert s[j] - s[i] == gap


def test_min_spacing_needs_two():
    with pytest.raises(ValueError):
        min_spacing([1])


def test_gap_ratios_and_report():
    g = gap_ratios([Fraction(k * k) for k in range(1, 5)])
    assert g.ratios == [4, Fraction(9, 4), Fraction(16, 9)]
    assert g.max == 4 and g.tail_max[-1] == Fraction(16, 9)
    with pytest.raises(ValueError):
        gap_ratios([0, 1])
    rep = spacing_report([1, 4, 9, 16], "squares", full=True)
    assert rep.min_gap == 3 and rep.pair_values == (1, 4)
    assert [mpf(x) for x in rep.to_dict()["spacings"]] == [3, 5, 7]


def test_sg_positive_criterion(sg):
    v = positive_criterion(sg, SG_D0)
    assert v.verdict == POSITIVE, v.to_text()
    assert mpf(v.witnesses["C0"]) == 1


def test_interval_positive_criterion(interval):
    assert positive_criterion(interval, [0, 2, 4]).verdict == POSITIVE


def test_missing_preimages_fail_condition_d(sg):
    v = positive_criterion(sg, [0, 6])
    assert v.verdict == INCONCLUSIVE
    assert v.failed == ["(d) R^-1{0, x_r} in D0"]


def test_interior_images_fail_condition_c(sg):
    v = positive_criterion(sg, [0, 1, 2, 3, 5, 6])
    assert "(c) D0 avoids R^-1(0, x_r)" in v.failed


def test_precondition(sg):
    v = positive_criterion(sg, [0, 2, 3, 5])
    assert v.first_failed == "precondition"


def test_sg3_positive_criterion_fails_only_on_derivative(sg3):
    D0 = suggest_D0(sg3, "sg3", 1).values
    v = positive_criterion(sg3, D0)
    assert v.verdict == INCONCLUSIVE
    assert v.failed == ["(e) R'(0) = max |R'|"]


def test_sg3_derivative_maximum_matches_sympy(sg3):
    # the largest |R'| over R^-1[0, 3/2] sits at the preimage (3 + sqrt 2)/4 of 3/2
    x = sp.Symbol("x")
    R = 6 * x * (x - 1) * (4 * x - 5) * (4 * x - 3) / (6 * x - 7)
    at = (3 + sp.sqrt(2)) / 4
    assert sp.simplify(R.subs(x, at) - sp.Rational(3, 2)) == 0
    expect = float(abs(sp.diff(R, x).subs(x, at)))
    v = positive_criterion(sg3, suggest_D0(sg3, "sg3", 1).values)
    detail = next(c.detail for c in v.conditions if c.name.startswith("(e)"))
    assert f"{expect:.10f}"[:12] in detail


def test_zero_criterion_verdicts(sg3, sg, interval):
    z = zero_criterion(sg3)
    assert z.verdict == ZERO
    with mp.workprec(128):
        lo, hi = (mpf(s) for s in z.witnesses["zeta_enclosure"])
        assert 0 < hi - lo < 1e-25
        assert abs(lo - mpf("1.30057267575004686248874890029")) < 1e-28
    m_lo, _ = (mpf(s) for s in z.witnesses["zeta_multiplier_enclosure"])
    assert m_lo > mpf(90) / 7
    assert len(z.witnesses["qualifying_fixed_points"]) == 2
    assert zero_criterion(sg).verdict == INCONCLUSIVE
    assert zero_criterion(interval).verdict == INCONCLUSIVE


@settings(max_examples=6)
@given(st.integers(0, 6))
def test_lemma_bound_sg(n):
    sg = get_system("sg")
    rep = lemma_bound_check(sg, SG_D0, n)
    assert rep.holds and rep.min_spacing >= rep.bound


def test_lemma_bound_refuses_failed_criterion(sg):
    with pytest.raises(ValueError):
        lemma_bound_check(sg, [0, 6], 2)


@pytest.mark.parametrize("bc", ["neumann", "dirichlet"])
def test_level_spectra_lie_in_Dn(sg, bc):
    floors = spacing_lower_bound_for_spectrum(sg, "sg", bc, SG_D0, 4)
    assert all(f.contained for f in floors)
    assert all(f.renormalised_min_spacing >= f.C0 - 1e-9 for f in floors)


def test_suggest_D0(sg, interval):
    assert suggest_D0(sg, "sg", 1).values == [0, 2, 3, 5, 6]
    assert suggest_D0(interval, "interval", 0, close=False).values == [0, 4]
    with pytest.raises(ValueError):
        suggest_D0(sg, "sg", -1)


def test_witness_sequence_shrinks(sg3):
    seq = witness_sequence(sg3, Fraction(3, 4), 1, 1, range(6), 8)
    gaps = [w.spacing for w in seq]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    ratio = gaps[-1] / gaps[-2]
    assert abs(ratio - (mpf(90) / 7) / mpf("23.6935260587898758")) < 1e-3


def test_witness_argument_checks(sg3, sg):
    with pytest.raises(ValueError):
        zero_spacing_witness(sg3, 1, 1, 1, 0, 2)
    with pytest.raises(ValueError):
        zero_spacing_witness(sg3, Fraction(3, 4), 1, -1, 0, 2)
    with pytest.raises(ValueError):
        zero_spacing_witness(sg, 1, 2, 1, 0, 2)  # no witness exists for SG


def test_sg3_two_level_candidate_is_inconclusive(sg3):
    v = positive_criterion(sg3, suggest_D0(sg3, "sg3", 2).values)
    assert v.verdict == INCONCLUSIVE
    assert "(e) R'(0) = max |R'|" in v.failed
