"""Exact polynomials and rational functions over the rationals.

Coefficients are :class:`fractions.Fraction` in ascending degree order.
Real roots are isolated with Sturm sequences and refined by bisection
with a Newton tail, so every root comes back as a certified rational
bracket (or as an exact rational when it is one).
"""
from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

import mpmath
from mpmath import iv, mp, mpf

__all__ = [
    "Polynomial",
    "RationalFunction",
    "RealRoot",
    "PoleError",
    "as_fraction",
    "real_roots",
    "count_real_roots",
    "iv_interval",
]


class PoleError(ZeroDivisionError):
    """Evaluation at a zero of the denominator."""


def as_fraction(x) -> Fraction:
    """Convert int, str ("p/q" or decimal), float, Fraction or mpf exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, mpmath.mpf):
        if not mpmath.isfinite(x):
            raise ValueError(f"cannot convert {x} to Fraction")
        sign, man, exp, _ = x._mpf_
        man = -int(man) if sign else int(man)
        return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def _to_mpf(q: Fraction) -> mpf:
    return mpf(q.numerator) / q.denominator


def _to_iv(q: Fraction):
    return iv.mpf(q.numerator) / q.denominator


def iv_interval(lo: Fraction, hi: Fraction):
    """Outward-rounded mpmath interval containing [lo, hi]."""
    a, b = _to_iv(lo), _to_iv(hi)
    return iv.mpf([a.a, b.b])


@contextlib.contextmanager
def iv_precision(bits: int):
    # mpmath's interval context has no workprec helper
    old = iv.prec
    iv.prec = max(bits, old)
    try:
        yield
    finally:
        iv.prec = old


def _sign(q) -> int:
    return (q > 0) - (q < 0)


class Polynomial:
    """Univariate polynomial with rational coefficients, lowest degree first."""

    __slots__ = ("coeffs", "_mp_cache")

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)
        self._mp_cache: dict = {}

    # construction helpers
    @classmethod
    def x(cls) -> "Polynomial":
        return cls([0, 1])

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls([c])

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "Polynomial":
        p = cls([lead])
        for r in roots:
            p = p * cls([-as_fraction(r), 1])
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __repr__(self) -> str:
        return f"Polynomial([{', '.join(str(c) for c in self.coeffs)}])"

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if mono and abs(c) == 1:
                coef = "-" if c < 0 else ""
            else:
                coef = f"({c})" if c.denominator != 1 else str(c)
            terms.append(f"{coef}{mono}" if mono else coef)
        return " + ".join(terms).replace("+ -", "- ")

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial([other])
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    # arithmetic
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial([other])

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Polynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial([1])
        for _ in range(k):
            out = out * self
        return out

    def __divmod__(self, other: "Polynomial"):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.leading
        if len(rem) - 1 < dq:
            return Polynomial(), Polynomial(rem)
        quo = [Fraction(0)] * (len(rem) - dq)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] / lead
            quo[k - dq] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k - dq + j] -= c * b
        return Polynomial(quo), Polynomial(rem[:dq])

    def __floordiv__(self, other) -> "Polynomial":
        return divmod(self, other)[0]

    def __mod__(self, other) -> "Polynomial":
        return divmod(self, other)[1]

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return Polynomial(c / self.leading for c in self.coeffs)

    def derivative(self) -> "Polynomial":
        return Polynomial(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def gcd(self, other: "Polynomial") -> "Polynomial":
        a, b = self, self._coerce(other)
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    # evaluation
    def _mp_coeffs(self):
        key = ("mp", mp.prec)
        cs = self._mp_cache.get(key)
        if cs is None:
            cs = [_to_mpf(c) for c in self.coeffs]
            self._mp_cache[key] = cs
        return cs

    def __call__(self, x):
        """Horner evaluation; exact for rationals, mpf/iv/float otherwise."""
        if isinstance(x, (int, Fraction)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        if isinstance(x, mpmath.mpf):
            cs = self._mp_coeffs()
            acc = mpf(0)
        elif isinstance(x, iv.mpf):
            cs = [_to_iv(c) for c in self.coeffs]
            acc = iv.mpf(0)
        else:
            cs = [float(c) for c in self.coeffs]
            acc = 0.0
        for c in reversed(cs):
            acc = acc * x + c
        return acc

    def sign_at(self, x: Fraction) -> int:
        return _sign(self(x))

    # root structure
    def squarefree_decomposition(self) -> list[tuple["Polynomial", int]]:
        """Yun's algorithm: returns [(f_i, i)] with self = c * prod f_i**i."""
        if self.degree < 1:
            return []
        f = self.monic()
        df = f.derivative()
        a = f.gcd(df)
        b = f // a
        c = df // a
        out = []
        i = 1
        while b.degree >= 1:
            d = c - b.derivative()
            g = b.gcd(d)
            if g.degree >= 1:
                out.append((g, i))
            b = b // g
            c = d // g
            i += 1
        return out

    def squarefree_part(self) -> "Polynomial":
        if self.degree < 1:
            return self
        return (self // self.gcd(self.derivative())).monic()

    def sturm_chain(self) -> list["Polynomial"]:
        chain = [self, self.derivative()]
        while chain[-1].degree > 0:
            r = -(chain[-2] % chain[-1])
            if r.is_zero():
                break
            # positive rescaling keeps sign pattern, curbs coefficient growth
            chain.append(Polynomial(c / abs(r.leading) for c in r.coeffs))
        return chain

    def cauchy_bound(self) -> Fraction:
        if self.degree < 1:
            return Fraction(1)
        lead = abs(self.leading)
        return 1 + max(abs(c) for c in self.coeffs[:-1]) / lead


def _variations(chain: Sequence[Polynomial], x: Fraction) -> int:
    signs = [s for s in (p.sign_at(x) for p in chain) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _count_open(f: Polynomial, chain, a: Fraction, b: Fraction) -> int:
    # V(a) - V(b) counts distinct roots in (a, b] even when a or b is a root
    n = _variations(chain, a) - _variations(chain, b)
    return n - (1 if f(b) == 0 else 0)


@dataclass(frozen=True)
class RealRoot:
    """A real root given by a rational isolating bracket.

    ``lo < root < hi`` unless ``exact`` is set, in which case
    ``lo == hi == exact``.  ``factor`` is the square-free factor the root
    belongs to (used for further refinement).
    """

    lo: Fraction
    hi: Fraction
    multiplicity: int = 1
    exact: Optional[Fraction] = None
    factor: Optional[Polynomial] = field(default=None, compare=False, repr=False)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def value(self) -> mpf:
        """Midpoint as an mpf at the current working precision."""
        if self.exact is not None:
            return _to_mpf(self.exact)
        return _to_mpf(self.midpoint)

    def interval(self):
        return iv_interval(self.lo, self.hi)

    def refine(self, bits: int) -> "RealRoot":
        if self.exact is not None or self.width <= Fraction(1, 2**bits):
            return self
        lo, hi, exact = _refine_bracket(self.factor, self.lo, self.hi, bits)
        if exact is not None:
            return RealRoot(exact, exact, self.multiplicity, exact, self.factor)
        return RealRoot(lo, hi, self.multiplicity, None, self.factor)

    def __float__(self) -> float:
        return float(self.exact if self.exact is not None else self.midpoint)


def _try_exact(f: Polynomial, lo: Fraction, hi: Fraction) -> Optional[Fraction]:
    mid = (lo + hi) / 2
    for den in (1, 2**8, 2**16):
        r = mid.limit_denominator(den)
        if lo <= r <= hi and f(r) == 0:
            return r
    return None


def _refine_bracket(f: Polynomial, lo: Fraction, hi: Fraction, bits: int):
    """Shrink an isolating bracket of a simple root of ``f`` to width 2**-bits.

    Exact bisection down to 2**-8 times the target, then Newton at extended
    precision, accepted only when the resulting bracket shows an exact sign
    change.  Falls back to bisection otherwise.
    """
    target = Fraction(1, 2**bits)
    slo = f.sign_at(lo)
    coarse = target * 2**8
    while hi - lo > coarse:
        m = (lo + hi) / 2
        s = f.sign_at(m)
        if s == 0:
            return m, m, m
        if s == slo:
            lo = m
        else:
            hi = m
        if hi - lo <= Fraction(1, 2**40):
            ex = _try_exact(f, lo, hi)
            if ex is not None:
                return ex, ex, ex
    if hi - lo <= target:
        return lo, hi, None
    df = f.derivative()
    with mp.workprec(bits + 32):
        x = _to_mpf((lo + hi) / 2)
        a, b = _to_mpf(lo), _to_mpf(hi)
        for _ in range(60):
            d = df(x)
            if d == 0:
                break
            nx = x - f(x) / d
            if not (a < nx < b):
                break
            if abs(nx - x) <= mpf(2) ** (-(bits + 8)):
                x = nx
                break
            x = nx
        X = as_fraction(x)
    h = target / 4
    a2, b2 = X - h, X + h
    if lo < a2 and b2 < hi:
        sa, sb = f.sign_at(a2), f.sign_at(b2)
        if sa == 0:
            return a2, a2, a2
        if sb == 0:
            return b2, b2, b2
        if sa != sb:
            ex = _try_exact(f, a2, b2)
            if ex is not None:
                return ex, ex, ex
            return a2, b2, None
    while hi - lo > target:
        m = (lo + hi) / 2
        s = f.sign_at(m)
        if s == 0:
            return m, m, m
        if s == slo:
            lo = m
        else:
            hi = m
    return lo, hi, None


def _isolate_squarefree(f: Polynomial, lo: Fraction, hi: Fraction) -> Iterator[tuple]:
    """Yield (lo, hi, exact) isolating brackets of roots of ``f`` in [lo, hi].

    Non-exact brackets are open intervals whose endpoints are not roots.
    """
    if f.degree < 1:
        return
    chain = f.sturm_chain()
    if f(lo) == 0:
        yield lo, lo, lo
    if hi != lo and f(hi) == 0:
        yield hi, hi, hi
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        k = _count_open(f, chain, a, b)
        if k == 0:
            continue
        if k == 1 and f(a) != 0 and f(b) != 0:
            yield a, b, None
            continue
        m = (a + b) / 2
        if f(m) == 0:
            yield m, m, m
        stack.append((a, m))
        stack.append((m, b))


def real_roots(
    p: Polynomial,
    lo=None,
    hi=None,
    bits: int = 64,
    *,
    open_interval: bool = False,
) -> list[RealRoot]:
    """Isolate and refine all real roots of ``p`` in ``[lo, hi]``.

    Defaults cover the whole real line via the Cauchy bound.  The number of
    returned roots equals the Sturm count exactly; each bracket has width at
    most ``2**-bits``; multiplicities come from the square-free
    decomposition.  With ``open_interval`` the endpoints are excluded.
    """
    if p.is_zero():
        raise ValueError("the zero polynomial has no isolated roots")
    bound = p.cauchy_bound()
    lo = -bound if lo is None else as_fraction(lo)
    hi = bound if hi is None else as_fraction(hi)
    if lo > hi:
        raise ValueError("empty interval")
    roots: list[RealRoot] = []
    for f, mult in p.squarefree_decomposition():
        for a, b, ex in _isolate_squarefree(f, lo, hi):
            if ex is not None:
                if open_interval and (ex == lo or ex == hi):
                    continue
                roots.append(RealRoot(ex, ex, mult, ex, f))
                continue
            if b - a <= Fraction(1, 2**40):
                ex = _try_exact(f, a, b)
            if ex is None:
                r = RealRoot(a, b, mult, None, f).refine(max(bits, 48))
            else:
                r = RealRoot(ex, ex, mult, ex, f)
            roots.append(r)
    roots.sort(key=lambda r: (r.lo, r.hi))
    return roots


def count_real_roots(p: Polynomial, lo, hi) -> int:
    """Number of distinct real roots in the closed interval [lo, hi]."""
    lo, hi = as_fraction(lo), as_fraction(hi)
    total = 0
    for f, _ in p.squarefree_decomposition():
        chain = f.sturm_chain()
        total += _count_open(f, chain, lo, hi) + (f(hi) == 0) + (f(lo) == 0 and lo != hi)
    return total


class RationalFunction:
    """Quotient of two coprime rational polynomials.

    The denominator is normalised to be monic, so structurally equal
    functions compare equal coefficientwise; ``==`` nevertheless uses
    cross multiplication.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = num if isinstance(num, Polynomial) else Polynomial(num)
        den = Polynomial([1]) if den is None else (den if isinstance(den, Polynomial) else Polynomial(den))
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = num.gcd(den) if not num.is_zero() else den.monic()
        if g.degree >= 1:
            num, den = num // g, den // g
        lead = den.leading
        self.num = Polynomial(c / lead for c in num.coeffs)
        self.den = Polynomial(c / lead for c in den.coeffs)

    def __repr__(self) -> str:
        return f"RationalFunction({self.num!r}, {self.den!r})"

    def __str__(self) -> str:
        if self.den.degree == 0:
            return str(self.num)
        return f"({self.num}) / ({self.den})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __call__(self, x):
        d = self.den(x)
        if isinstance(d, iv.mpf):
            if d.a <= 0 <= d.b:
                raise PoleError("denominator enclosure contains 0")
        elif d == 0:
            raise PoleError(f"pole of {self} at {x}")
        return self.num(x) / d

    def derivative(self) -> "RationalFunction":
        n, d = self.num, self.den
        return RationalFunction(n.derivative() * d - n * d.derivative(), d * d)

    def minus_value(self, y) -> Polynomial:
        """Numerator of R(x) - y, i.e. N(x) - y D(x)."""
        return self.num - self.den * as_fraction(y)

    def fixed_point_polynomial(self) -> Polynomial:
        """Numerator of R(x) - x."""
        return self.num - self.den * Polynomial.x()

    def poles(self, lo=None, hi=None, bits: int = 64) -> list[RealRoot]:
        if self.den.degree < 1:
            return []
        return real_roots(self.den, lo, hi, bits)
