from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from fracspec.rational import PoleError, Polynomial, RationalFunction, count_real_roots, real_roots

X = sp.Symbol("x")
small = st.integers(-20, 20)
polys = st.lists(small, min_size=1, max_size=6).map(Polynomial)


def to_sympy(p: Polynomial):
    return sum(sp.Rational(c.numerator, c.denominator) * X**k for k, c in enumerate(p.coeffs))


@given(polys, polys)
def test_ring_operations_match_sympy(p, q):
    assert sp.expand(to_sympy(p * q) - to_sympy(p) * to_sympy(q)) == 0
    assert sp.expand(to_sympy(p + q) - to_sympy(p) - to_sympy(q)) == 0
    assert sp.expand(to_sympy(p.derivative()) - sp.diff(to_sympy(p), X)) == 0


@given(polys, polys.filter(lambda q: not q.is_zero()))
def test_division_identity(p, q):
    quo, rem = divmod(p, q)
    assert quo * q + rem == p
    assert rem.is_zero() or rem.degree < q.degree


@given(st.lists(st.integers(-6, 6), min_size=1, max_size=5), st.integers(1, 3))
def test_real_roots_against_sympy(roots, lead):
    p = Polynomial.from_roots(roots, lead) * Polynomial([1, 0, 1])  # x^2 + 1 adds no real roots
    found = real_roots(p, bits=60)
    assert [r.value() for r in found] == sorted(mpf(r) for r in set(roots))
    mult = {int(r.exact): r.multiplicity for r in found}
    assert mult == {r: roots.count(r) for r in set(roots)}


def test_irrational_roots_are_bracketed():
    p = Polynomial([-2, 0, 1])
    (neg, pos) = real_roots(p, bits=80)
    assert neg.exact is None and neg.lo < neg.hi and neg.width <= Fraction(1, 2**80)
    mp.prec = 100
    assert abs(pos.value() - mp.sqrt(2)) < mpf(2) ** -79


def test_open_interval_excludes_endpoints():
    p = Polynomial.from_roots([1, 2, 3])
    assert len(real_roots(p, 1, 3)) == 3
    assert len(real_roots(p, 1, 3, open_interval=True)) == 1
    assert count_real_roots(p, 1, 3) == 3


@given(st.lists(small, min_size=2, max_size=5).map(Polynomial), st.lists(small, min_size=1, max_size=3).map(Polynomial))
def test_rational_derivative_matches_sympy(n, d):
    if d.is_zero():
        return
    r = RationalFunction(n, d)
    expr = sp.diff(to_sympy(n) / to_sympy(d), X)
    got = to_sympy(r.derivative().num) / to_sympy(r.derivative().den)
    assert sp.simplify(expr - got) == 0


def test_rational_normalisation_and_pole():
    r = RationalFunction(Polynomial.from_roots([1, 2]), Polynomial.from_roots([1], lead=3))
    assert r.den.coeffs == (Fraction(1),)
    assert r == RationalFunction([Fraction(-2, 3), Fraction(1, 3)])
    s = RationalFunction([1], [0, 1])
    with pytest.raises(PoleError):
        s(Fraction(0))
