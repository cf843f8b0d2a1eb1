"""SU(2) representation data in the Condon-Shortley convention.

Exact Clebsch-Gordan, 6j and 9j symbols via Racah's single-sum formulas,
the 9-lambda symbol, Wigner D-matrices and a small group-element type.

Internally spins are carried as doubled integers (``tj = 2*j``) so that
memoisation keys are cheap.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from gmpy2 import mpq

from .exact import ZERO, DomainError, HalfInt, Rational, SurdSum, spin

# ---------------------------------------------------------------------------
# factorials

_FACT: list[int] = [1]


def fact(n: int) -> int:
    if n < 0:
        raise DomainError("negative factorial")
    while len(_FACT) <= n:
        _FACT.append(_FACT[-1] * len(_FACT))
    return _FACT[n]


def _twice(j) -> int:
    return spin(j).twice


def dim(j) -> int:
    """d_j = 2j + 1."""
    return _twice(j) + 1


def casimir_eigenvalue(j) -> Fraction:
    """epsilon_j = 4 j (j + 1), the Casimir eigenvalue in the lattice normalisation."""
    j = spin(j)
    return Fraction(4 * j * (j + 1))


def is_triad(j1, j2, j3) -> bool:
    a, b, c = _twice(j1), _twice(j2), _twice(j3)
    return _triad2(a, b, c)


def _triad2(a: int, b: int, c: int) -> bool:
    return (a + b + c) % 2 == 0 and abs(a - b) <= c <= a + b


def clebsch_series(j1, j2) -> list[HalfInt]:
    """Spins in j1 x j2, ascending."""
    a, b = _twice(j1), _twice(j2)
    if a < 0 or b < 0:
        raise DomainError("spins must be non-negative")
    return [HalfInt.from_twice(t) for t in range(abs(a - b), a + b + 1, 2)]


def _check_spin(tj: int, tm: int) -> bool:
    return tj >= 0 and abs(tm) <= tj and (tj - tm) % 2 == 0


# ---------------------------------------------------------------------------
# Clebsch-Gordan coefficients


@lru_cache(maxsize=None)
def cg_parts(tj1: int, tm1: int, tj2: int, tm2: int, tj: int, tm: int):
    """Split <j1 m1 j2 m2 | j m> as sqrt(P * F) * S.

    P depends on the spins only, F = Phi(j1,m1) Phi(j2,m2) Phi(j,m) with
    Phi(j,m) = (j+m)! (j-m)!, and S is the rational Racah sum.  Returns
    ``(P, S)``; ``S == 0`` means the coefficient vanishes.
    """
    if tm1 + tm2 != tm or not (_check_spin(tj1, tm1) and _check_spin(tj2, tm2)
                               and _check_spin(tj, tm)) or not _triad2(tj1, tj2, tj):
        return mpq(0), mpq(0)
    a = (tj1 + tj2 - tj) // 2
    b = (tj1 - tj2 + tj) // 2
    c = (-tj1 + tj2 + tj) // 2
    P = mpq((tj + 1) * fact(a) * fact(b) * fact(c), fact((tj1 + tj2 + tj) // 2 + 1))
    u = (tj1 - tm1) // 2        # j1 - m1
    v = (tj2 + tm2) // 2        # j2 + m2
    w = (tj - tj2 + tm1) // 2   # j - j2 + m1
    x = (tj - tj1 - tm2) // 2   # j - j1 - m2
    s = mpq(0)
    for k in range(max(0, -w, -x), min(a, u, v) + 1):
        term = mpq(1, fact(k) * fact(a - k) * fact(u - k) * fact(v - k)
                   * fact(w + k) * fact(x + k))
        s += -term if k % 2 else term
    return P, s


@lru_cache(maxsize=None)
def phi2(tj: int, tm: int) -> int:
    """(j+m)! (j-m)! from doubled arguments."""
    return fact((tj + tm) // 2) * fact((tj - tm) // 2)


@lru_cache(maxsize=None)
def _cg2(tj1, tm1, tj2, tm2, tj, tm) -> SurdSum:
    P, S = cg_parts(tj1, tm1, tj2, tm2, tj, tm)
    if not S:
        return ZERO
    F = phi2(tj1, tm1) * phi2(tj2, tm2) * phi2(tj, tm)
    return SurdSum.sqrt(P * F) * S


def cg(j1, m1, j2, m2, j, m) -> SurdSum:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | j m> (exact).

    Returns zero when the projections do not add up or the triad rule fails;
    raises :class:`DomainError` for malformed spin/projection pairs.
    """
    args = [_twice(x) for x in (j1, m1, j2, m2, j, m)]
    for tj_, tm_ in zip(args[0::2], args[1::2]):
        if tj_ < 0 or (tj_ - tm_) % 2 or abs(tm_) > tj_:
            raise DomainError(f"invalid spin/projection pair ({tj_}/2, {tm_}/2)")
    return _cg2(*args)


def cg_float(j1, m1, j2, m2, j, m) -> float:
    return float(cg(j1, m1, j2, m2, j, m))


# ---------------------------------------------------------------------------
# 6j


def _delta2(a: int, b: int, c: int) -> Rational:
    """Delta(abc)^2 with doubled arguments."""
    return mpq(fact((a + b - c) // 2) * fact((a - b + c) // 2) * fact((-a + b + c) // 2),
               fact((a + b + c) // 2 + 1))


def _sixj_variants(t):
    a, b, c, d, e, f = t
    cols = [(a, d), (b, e), (c, f)]
    for perm in itertools.permutations(cols):
        (p, q), (r, s), (u, v) = perm
        yield (p, r, u, q, s, v)
        yield (q, s, u, p, r, v)
        yield (q, r, v, p, s, u)
        yield (p, s, v, q, r, u)


@lru_cache(maxsize=None)
def _sixj_canon(t) -> SurdSum:
    a, b, c, d, e, f = t
    if not (_triad2(a, b, c) and _triad2(a, e, f) and _triad2(d, b, f) and _triad2(d, e, c)):
        return ZERO
    pref = _delta2(a, b, c) * _delta2(a, e, f) * _delta2(d, b, f) * _delta2(d, e, c)
    s1 = (a + b + c) // 2
    s2 = (a + e + f) // 2
    s3 = (d + b + f) // 2
    s4 = (d + e + c) // 2
    p1 = (a + b + d + e) // 2
    p2 = (b + c + e + f) // 2
    p3 = (c + a + f + d) // 2
    acc = mpq(0)
    for t_ in range(max(s1, s2, s3, s4), min(p1, p2, p3) + 1):
        term = mpq(fact(t_ + 1), fact(t_ - s1) * fact(t_ - s2) * fact(t_ - s3) * fact(t_ - s4)
                   * fact(p1 - t_) * fact(p2 - t_) * fact(p3 - t_))
        acc += -term if t_ % 2 else term
    if not acc:
        return ZERO
    return SurdSum.sqrt(pref) * acc


def _sixj2(t) -> SurdSum:
    return _sixj_canon(min(_sixj_variants(t)))


def wigner6j(j1, j2, j3, j4, j5, j6) -> SurdSum:
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6}."""
    t = tuple(_twice(x) for x in (j1, j2, j3, j4, j5, j6))
    if min(t) < 0:
        raise DomainError("spins must be non-negative")
    return _sixj2(t)


# ---------------------------------------------------------------------------
# 9j and 9-lambda


def _ninej_variants(g):
    """Sign-free symmetries: cyclic row/column shifts and transposition."""
    rows = [g[0:3], g[3:6], g[6:9]]
    for tr in (False, True):
        m = [list(r) for r in rows]
        if tr:
            m = [list(c) for c in zip(*m)]
        for rs in range(3):
            mr = m[rs:] + m[:rs]
            for cs in range(3):
                yield tuple(x for r in mr for x in (r[cs:] + r[:cs]))


@lru_cache(maxsize=None)
def _ninej_canon(g) -> SurdSum:
    a, b, c, d, e, f, g7, h, i = g
    for tri in ((a, b, c), (d, e, f), (g7, h, i), (a, d, g7), (b, e, h), (c, f, i)):
        if not _triad2(*tri):
            return ZERO
    lo = max(abs(a - i), abs(d - h), abs(b - f))
    hi = min(a + i, d + h, b + f)
    acc = ZERO
    for tx in range(lo, hi + 1, 2):
        s1 = _sixj2((a, d, g7, h, i, tx))
        if not s1:
            continue
        s2 = _sixj2((b, e, h, d, tx, f))
        if not s2:
            continue
        s3 = _sixj2((c, f, i, tx, a, b))
        if not s3:
            continue
        w = (tx + 1) * (-1 if tx % 2 else 1)
        acc = acc + s1 * s2 * s3 * w
    return acc


def _ninej2(g) -> SurdSum:
    return _ninej_canon(min(_ninej_variants(g)))


def _grid(rows) -> tuple[int, ...]:
    flat = [x for r in rows for x in r]
    if len(flat) != 9 or len(rows) != 3:
        raise DomainError("a 9j symbol needs a 3x3 array of spins")
    t = tuple(_twice(x) for x in flat)
    if min(t) < 0:
        raise DomainError("spins must be non-negative")
    return t


def wigner9j(rows) -> SurdSum:
    """Wigner 9j symbol for a 3x3 array ``rows``."""
    return _ninej2(_grid(rows))


@lru_cache(maxsize=None)
def _nine_lambda2(g) -> SurdSum:
    n = _ninej2(g)
    if not n:
        return ZERO
    # rows (j1', j1'', j1), (j2', j2'', j2), (j3', j3'', j3)
    return SurdSum.sqrt(mpq((g[2] + 1) * (g[5] + 1) * (g[6] + 1) * (g[7] + 1))) * n


def nine_lambda(rows) -> SurdSum:
    """The 9-lambda symbol sqrt(d_{j1} d_{j2} d_{j3'} d_{j3''}) * 9j.

    ``rows`` are the coupling triples alpha_1, alpha_2, alpha_3 written as
    ``(first child, second child, parent)``.
    """
    return _nine_lambda2(_grid(rows))


nine_lambda_su2 = nine_lambda


def nine_lambda_zero_rule(k, j1, j2, j, jp1, jp2, jp) -> SurdSum:
    """Closed form of the 9-lambda-type 9j with a leading zero.

    {0 k k; j1 j2 j; j1' j2' j'} equals
    delta(j1, j1') / sqrt(d_{j1} d_k) (-1)^{j + k + j1' + j2'} {k j' j; j1 j2 j2'}.
    """
    if spin(j1) != spin(jp1):
        return ZERO
    ph = spin(j) + spin(k) + spin(jp1) + spin(jp2)
    if ph.denominator != 1:
        return ZERO
    six = wigner6j(k, jp, j, j1, j2, jp2)
    val = six * SurdSum.sqrt(mpq(1, dim(j1) * dim(k)))
    return -val if ph.numerator % 2 else val


# ---------------------------------------------------------------------------
# group elements and D-matrices


@dataclass(frozen=True)
class Su2Element:
    """Unit quaternion a = [[alpha, beta], [-conj(beta), conj(alpha)]]."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        if abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1) > 1e-12:
            raise DomainError("|alpha|^2 + |beta|^2 must be 1")

    @property
    def matrix(self) -> np.ndarray:
        a, b = self.alpha, self.beta
        return np.array([[a, b], [-np.conj(b), np.conj(a)]], dtype=complex)

    @classmethod
    def from_matrix(cls, m) -> "Su2Element":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError("SU(2) element must be 2x2")
        el = cls(complex(m[0, 0]), complex(m[0, 1]))
        if not np.allclose(el.matrix, m, atol=1e-10) or abs(abs(el.alpha) ** 2 + abs(el.beta) ** 2 - 1) > 1e-10:
            raise DomainError("matrix is not in SU(2)")
        return el

    @classmethod
    def identity(cls) -> "Su2Element":
        return cls(1.0 + 0j, 0j)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "Su2Element":
        """Haar-random element (uniform on the 3-sphere)."""
        x = rng.standard_normal(4)
        x /= np.linalg.norm(x)
        return cls(complex(x[0], x[1]), complex(x[2], x[3]))

    def __matmul__(self, other: "Su2Element") -> "Su2Element":
        return Su2Element.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "Su2Element":
        return Su2Element(np.conj(self.alpha), -self.beta)


def wigner_d(j, a) -> np.ndarray:
    """D^j(a) with basis index i <-> m = j - i (so D^{1/2}(a) is a itself).

    Computed from the action of ``a`` on homogeneous polynomials of degree
    2j, in the orthonormal monomial basis x^{j+m} y^{j-m} / sqrt((j+m)!(j-m)!).
    """
    tj = _twice(j)
    m = a.matrix if isinstance(a, Su2Element) else np.asarray(a, dtype=complex)
    u11, u12, u21, u22 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    n = tj
    # powers of the images of x and y: x -> u11 x + u21 y, y -> u12 x + u22 y,
    # polynomials stored by power of x (index p means x^p y^(deg-p))
    def powers(c_x, c_y):
        out = [np.array([1.0 + 0j])]
        for d in range(1, n + 1):
            prev = out[-1]
            nxt = np.zeros(d + 1, dtype=complex)
            nxt[1:] += c_x * prev
            nxt[:-1] += c_y * prev
            out.append(nxt)
        return out

    px = powers(u11, u21)
    py = powers(u12, u22)
    norms = np.array([np.sqrt(float(fact(p) * fact(n - p))) for p in range(n + 1)])
    D = np.zeros((n + 1, n + 1), dtype=complex)
    for i in range(n + 1):          # column: source m = j - i, x-power p = n - i
        p = n - i
        poly = np.convolve(px[p], py[n - p])       # index = power of x
        # coefficient of normalised basis f_q is poly[q] * norm_q / norm_p
        col = poly * norms / norms[p]
        D[:, i] = col[::-1]                          # row k <-> x-power n - k
    return D


def casimir_total(leaves) -> Fraction:
    """Sum of epsilon_j over a leaf spin tuple."""
    return sum((casimir_eigenvalue(j) for j in leaves), start=Fraction(0))


class Su2System:
    """Irrep system adaptor used by the generic labelling enumerator."""

    name = "SU(2)"

    @staticmethod
    def label(x) -> HalfInt:
        return spin(x)

    @staticmethod
    def series(a, b):
        return [(j, 1) for j in clebsch_series(a, b)]

    @staticmethod
    def dim(a) -> int:
        return dim(a)


SU2 = Su2System()

__all__ = [
    "SU2", "Su2Element", "Su2System", "casimir_eigenvalue", "casimir_total", "cg", "cg_float",
    "cg_parts", "clebsch_series", "dim", "fact", "is_triad", "nine_lambda",
    "nine_lambda_zero_rule", "phi2", "wigner6j", "wigner9j", "wigner_d",
]
