"""Exact arithmetic for recoupling coefficients.

Values are finite sums ``sum_r c_r * sqrt(r)`` with rational ``c_r`` and
distinct squarefree positive integers ``r``.  The set is a ring; it is
closed under the square roots of rationals that appear in SU(2) symbols,
which is all we need.  Division is deliberately not provided.

Spins are :class:`HalfInt`, a :class:`fractions.Fraction` restricted to
denominators 1 and 2.
"""
from __future__ import annotations

import math
import re
import sys
from fractions import Fraction
from functools import lru_cache

from gmpy2 import gcd, mpq, mpz

Rational = type(mpq())


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ResourceError(RuntimeError):
    """Requested object exceeds a configured size cap."""


# ---------------------------------------------------------------------------
# rationals


def as_rational(x) -> Rational:
    """Convert int, Fraction, mpq or 'p/q' text to an exact rational."""
    if isinstance(x, Rational):
        return x
    if isinstance(x, (int, type(mpz()))):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        try:
            f = Fraction(x.strip())
        except ValueError as exc:
            raise DomainError(f"not a rational: {x!r}") from exc
        return mpq(f.numerator, f.denominator)
    if isinstance(x, float):
        raise DomainError("floats are not accepted as exact rationals")
    raise DomainError(f"cannot convert {type(x).__name__} to a rational")


def _fmt_rational(q: Rational) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# half-integers


_HMOD = sys.hash_info.modulus
_INV2 = (_HMOD + 1) // 2


class HalfInt(Fraction):
    """A non-negative or negative half-integer such as 0, 1/2, -3/2.

    Accepts ``HalfInt(3, 2)``, ``HalfInt("3/2")``, ``HalfInt("1.5")``,
    ``HalfInt(1.5)`` and ints.  Anything that is not an exact multiple of 1/2
    raises :class:`DomainError`.
    """

    __slots__ = ()

    def __new__(cls, numerator=0, denominator=None):
        if isinstance(numerator, HalfInt) and denominator is None:
            return numerator
        try:
            self = super().__new__(cls, numerator, denominator)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise DomainError(f"not a half-integer: {numerator!r}") from exc
        if self.denominator not in (1, 2):
            raise DomainError(f"not a half-integer: {numerator!r}")
        return self

    @classmethod
    def from_twice(cls, twice: int) -> "HalfInt":
        h = _INTERNED.get(twice)
        if h is None:
            h = _INTERNED[twice] = cls(int(twice), 2)
        return h

    @property
    def twice(self) -> int:
        return self.numerator * (2 // self.denominator)

    @property
    def is_integer(self) -> bool:
        return self.denominator == 1

    def __repr__(self) -> str:
        return f"HalfInt({str(self)!r})"

    # Fraction's generic hash and equality are slow; these agree with them.
    def __hash__(self) -> int:
        if self.denominator == 1:
            return hash(self.numerator)
        n = self.numerator
        h = (abs(n) * _INV2) % _HMOD
        h = h if n >= 0 else -h
        return -2 if h == -1 else h

    def __eq__(self, other) -> bool:
        if isinstance(other, HalfInt):
            return self.numerator == other.numerator and self.denominator == other.denominator
        return Fraction.__eq__(self, other)

    def __reduce__(self):
        return (HalfInt, (self.numerator, self.denominator))


_INTERNED: dict[int, HalfInt] = {}


def spin(x) -> HalfInt:
    """Coerce input to a shared :class:`HalfInt` instance.

    Sharing instances lets tuple comparisons of labels short-circuit on
    identity, which matters in the hot caches.
    """
    if type(x) is HalfInt:
        h = _INTERNED.get(x.twice)
        return h if h is not None else HalfInt.from_twice(x.twice)
    return HalfInt.from_twice(HalfInt(x).twice)


# ---------------------------------------------------------------------------
# square roots of rationals


@lru_cache(maxsize=1 << 16)
def _square_split(n: int) -> tuple[int, int]:
    """Return (s, r) with n = s*s*r and r squarefree, by trial division."""
    if n <= 0:
        raise DomainError("square split needs a positive integer")
    s, r = 1, 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            s *= p ** (e // 2)
            if e % 2:
                r *= p
        p += 1 if p == 2 else 2
    return s, r * n


def _sqrt_term(q: Rational) -> tuple[Rational, int]:
    """sqrt(q) for q > 0 as (coefficient, squarefree radicand)."""
    # sqrt(p/q) = sqrt(p*q)/q
    num, den = int(q.numerator), int(q.denominator)
    s, r = _square_split(num * den)
    return mpq(s, den), r


class SurdSum:
    """Exact element ``sum_r c_r * sqrt(r)`` in canonical form.

    The canonical form is a mapping from squarefree radicand to a nonzero
    rational coefficient.  Instances are immutable and hashable.
    """

    __slots__ = ("_t", "_key")

    def __init__(self, terms=None):
        t: dict[int, Rational] = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for r, c in items:
                r = int(r)
                if r <= 0:
                    raise DomainError("radicands must be positive")
                c = as_rational(c)
                if not c:
                    continue
                s, rr = _square_split(r)
                t[rr] = t.get(rr, 0) + c * s
        self._t = {r: c for r, c in t.items() if c}
        self._key = None

    @classmethod
    def _raw(cls, t: dict) -> "SurdSum":
        obj = cls.__new__(cls)
        obj._t = t
        obj._key = None
        return obj

    @classmethod
    def rational(cls, q) -> "SurdSum":
        q = as_rational(q)
        return cls._raw({1: q} if q else {})

    @classmethod
    def sqrt(cls, q) -> "SurdSum":
        """Exact square root of a non-negative rational."""
        q = as_rational(q)
        if q < 0:
            raise DomainError("square root of a negative rational")
        if not q:
            return ZERO
        c, r = _sqrt_term(q)
        return cls._raw({r: c})

    @classmethod
    def signed_sqrt(cls, sign: int, q) -> "SurdSum":
        s = cls.sqrt(q)
        return -s if sign < 0 else s

    # -- inspection --------------------------------------------------------
    def terms(self) -> dict[int, Rational]:
        return dict(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def is_rational(self) -> bool:
        return not self._t or (len(self._t) == 1 and 1 in self._t)

    def square(self) -> "SurdSum":
        return self * self

    def single_term(self) -> tuple[Rational, int]:
        """(c, r) for a one-term value; raises for sums."""
        if len(self._t) != 1:
            raise DomainError("not a single surd")
        (r, c), = self._t.items()
        return c, r

    def __bool__(self) -> bool:
        return bool(self._t)

    def __float__(self) -> float:
        return math.fsum(float(c) * math.sqrt(r) for r, c in self._t.items())

    def __complex__(self) -> complex:
        return complex(float(self))

    def _sortkey(self):
        if self._key is None:
            self._key = tuple(sorted(self._t.items()))
        return self._key

    def __hash__(self) -> int:
        k = self._sortkey()
        if len(k) == 1 and k[0][0] == 1:
            return hash(k[0][1])
        return hash(k)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SurdSum):
            try:
                other = SurdSum.rational(as_rational(other))
            except DomainError:
                return NotImplemented
        return self._t == other._t

    # -- ring operations ---------------------------------------------------
    @staticmethod
    def _coerce(x) -> "SurdSum":
        return x if isinstance(x, SurdSum) else SurdSum.rational(x)

    def __add__(self, other) -> "SurdSum":
        other = self._coerce(other)
        t = dict(self._t)
        for r, c in other._t.items():
            v = t.get(r, 0) + c
            if v:
                t[r] = v
            else:
                t.pop(r, None)
        return SurdSum._raw(t)

    __radd__ = __add__

    def __neg__(self) -> "SurdSum":
        return SurdSum._raw({r: -c for r, c in self._t.items()})

    def __pos__(self) -> "SurdSum":
        return self

    def __sub__(self, other) -> "SurdSum":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "SurdSum":
        return self._coerce(other) - self

    def __mul__(self, other) -> "SurdSum":
        if not isinstance(other, SurdSum):
            q = as_rational(other)
            if not q:
                return ZERO
            return SurdSum._raw({r: c * q for r, c in self._t.items()})
        t: dict[int, Rational] = {}
        for r1, c1 in self._t.items():
            for r2, c2 in other._t.items():
                g = int(gcd(r1, r2))
                r = (r1 // g) * (r2 // g)
                v = t.get(r, 0) + c1 * c2 * g
                if v:
                    t[r] = v
                else:
                    t.pop(r, None)
        return SurdSum._raw(t)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "SurdSum":
        if not isinstance(n, int) or n < 0:
            raise DomainError("only non-negative integer powers")
        out, base = ONE, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- text --------------------------------------------------------------
    def __str__(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for r, c in self._sortkey():
            body = _fmt_rational(abs(c)) if r == 1 else (
                f"sqrt({r})" if abs(c) == 1 else f"{_fmt_rational(abs(c))}*sqrt({r})")
            parts.append(("-" if c < 0 else "+", body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"SurdSum({str(self)!r})"

    def __reduce__(self):
        return (parse_surd, (str(self),))


ZERO = SurdSum._raw({})
ONE = SurdSum._raw({1: mpq(1)})

_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:(?P<coef>\d+(?:/\d+)?)\s*(?P<star>\*)?\s*)?
        (?:sqrt\(\s*(?P<rad>\d+(?:/\d+)?)\s*\))?\s*""",
    re.VERBOSE,
)


def parse_surd(text: str) -> SurdSum:
    """Parse the canonical text form, e.g. ``1/2*sqrt(2) - 3``.

    Radicands may be rational (``sqrt(1/3)``); they are normalised.
    """
    s = text.strip()
    if not s:
        raise DomainError("empty surd text")
    acc = ZERO
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise DomainError(f"cannot parse surd {text!r} at {pos}")
        sign, coef, star, rad = m.group("sign", "coef", "star", "rad")
        if not first and sign is None:
            raise DomainError(f"missing operator in {text!r}")
        if coef is None and rad is None:
            raise DomainError(f"empty term in {text!r}")
        if star and rad is None:
            raise DomainError(f"dangling '*' in {text!r}")
        term = SurdSum.rational(as_rational(coef) if coef else 1)
        if rad is not None:
            term = term * SurdSum.sqrt(as_rational(rad))
        acc = acc - term if sign == "-" else acc + term
        pos = m.end()
        first = False
    return acc


def surd_from_sqrt(q) -> SurdSum:
    """sqrt(q) for a non-negative rational q."""
    return SurdSum.sqrt(q)


def surd_add(a: SurdSum, b: SurdSum) -> SurdSum:
    return a + b


def surd_mul(a: SurdSum, b: SurdSum) -> SurdSum:
    return a * b


def surd_neg(a: SurdSum) -> SurdSum:
    return -a


def surd_to_float(a) -> float:
    """Float value of a SurdSum, rational or number."""
    return float(a)


approx = surd_to_float
