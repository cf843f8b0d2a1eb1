"""Numerical SU(3): irreps, Clebsch-Gordan tensors, 9-lambda symbols.

Irreps are realised on polynomials in x_1..x_3 (fundamental) and
y_1..y_3 (dual) with the Bargmann inner product, so the monomials
x^a y^b / sqrt(a! b!) are orthonormal and E_ij acts as

    x_i d/dx_j - y_j d/dy_i.

The irrep (n, m) is the span of all lowerings of x_1^n y_3^m.  Basis
vectors are ordered by depth below the highest weight, then by
descending Dynkin weight, then by Gram-Schmidt order.  All matrices in
this basis are real, and so are all Clebsch-Gordan tensors produced
here.

Everything is double precision; tolerances are noted where used.
"""
from __future__ import annotations

import csv
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm, schur

from .exact import DomainError, ResourceError
from .quasichar import NormParams, TracePolynomial

DIM_CAP = 100
_TOL = 1e-10

# weight change of the two lowering operators, in Dynkin components
_LOWER = {(1, 0): (-2, 1), (2, 1): (1, -2)}


@dataclass(frozen=True, order=True)
class Su3Irrep:
    """Irrep with highest weight n*omega_1 + m*omega_2."""

    n: int
    m: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.m, int)) or self.n < 0 or self.m < 0:
            raise DomainError(f"Dynkin labels must be non-negative integers, got {self.n}, {self.m}")

    @classmethod
    def parse(cls, text: str) -> "Su3Irrep":
        """Accept ``"21"``, ``"2,1"`` or ``"(2,1)"``."""
        s = text.strip().strip("()").replace(" ", "")
        try:
            if "," in s:
                a, b = s.split(",")
            elif len(s) == 2:
                a, b = s
            else:
                raise ValueError
            return cls(int(a), int(b))
        except ValueError as exc:
            raise DomainError(f"cannot read SU(3) label {text!r}") from exc

    @property
    def dim(self) -> int:
        return su3_dim(self)

    @property
    def dual(self) -> "Su3Irrep":
        return Su3Irrep(self.m, self.n)

    def __str__(self) -> str:
        return f"{self.n}{self.m}" if max(self.n, self.m) < 10 else f"({self.n},{self.m})"


def _irrep(r) -> Su3Irrep:
    if isinstance(r, Su3Irrep):
        return r
    if isinstance(r, str):
        return Su3Irrep.parse(r)
    n, m = r
    return Su3Irrep(int(n), int(m))


def su3_dim(r) -> int:
    r = _irrep(r)
    return (r.n + 1) * (r.m + 1) * (r.n + r.m + 2) // 2


def su3_zeta(r) -> Fraction:
    """2/3 ((n+1)^2 + (m+1)^2 + (n+1)(m+1))."""
    r = _irrep(r)
    a, b = r.n + 1, r.m + 1
    return Fraction(2, 3) * (a * a + b * b + a * b)


def su3_cg_series(r1, r2) -> dict[Su3Irrep, int]:
    """Multiplicities of the irreps in r1 x r2."""
    r1, r2 = _irrep(r1), _irrep(r2)
    n, m, n2, m2 = r1.n, r1.m, r2.n, r2.m
    out: dict[Su3Irrep, int] = defaultdict(int)
    for i in range(min(n, m2) + 1):
        for j in range(min(n2, m) + 1):
            a, b = n + n2 - i - j, m + m2 - i - j
            out[Su3Irrep(a, b)] += 1
            for k in range(1, min(n - i, n2 - j) + 1):
                out[Su3Irrep(a - 2 * k, b + k)] += 1
            for k in range(1, min(m - j, m2 - i) + 1):
                out[Su3Irrep(a + k, b - 2 * k)] += 1
    return dict(sorted(out.items(), key=lambda kv: (-su3_dim(kv[0]), kv[0])))


@dataclass(frozen=True)
class Su3WeightLabel:
    weight: tuple[int, int]
    counter: int

    def __str__(self) -> str:
        return f"({self.weight[0]},{self.weight[1]})#{self.counter}"


# ---------------------------------------------------------------------------
# representations


@dataclass(frozen=True, eq=False)
class Su3Rep:
    """Matrices of E_ij (i, j = 1..3) on one irrep in the ordered basis."""

    irrep: Su3Irrep
    E: np.ndarray          # shape (3, 3, d, d); E[i, j] represents E_{i+1, j+1}
    weights: tuple         # Dynkin weight of each basis vector
    labels: tuple          # Su3WeightLabel per basis vector
    depth: tuple           # lowering steps below the highest weight

    @property
    def dim(self) -> int:
        return self.E.shape[-1]

    def algebra(self, X: np.ndarray) -> np.ndarray:
        """Image of a 3x3 matrix under the Lie-algebra representation."""
        return np.tensordot(np.asarray(X), self.E, axes=([0, 1], [0, 1]))

    def generators(self) -> list[np.ndarray]:
        """Images of lambda_a / 2 for the eight Gell-Mann matrices."""
        return [self.algebra(g) for g in gell_mann_halves()]

    def __call__(self, g: np.ndarray) -> np.ndarray:
        """D(g) for g in SU(3) (or GL(3)), through a matrix logarithm."""
        return expm(self.algebra(_log_unitary(g)))


def gell_mann_halves() -> list[np.ndarray]:
    lam = np.zeros((8, 3, 3), dtype=complex)
    lam[0][0, 1] = lam[0][1, 0] = 1
    lam[1][0, 1], lam[1][1, 0] = -1j, 1j
    lam[2][0, 0], lam[2][1, 1] = 1, -1
    lam[3][0, 2] = lam[3][2, 0] = 1
    lam[4][0, 2], lam[4][2, 0] = -1j, 1j
    lam[5][1, 2] = lam[5][2, 1] = 1
    lam[6][1, 2], lam[6][2, 1] = -1j, 1j
    lam[7] = np.diag([1, 1, -2]) / math.sqrt(3)
    return [l / 2 for l in lam]


def _log_unitary(g: np.ndarray) -> np.ndarray:
    t, q = schur(np.asarray(g, dtype=complex), output="complex")
    return q @ np.diag(np.log(np.diag(t))) @ q.conj().T


def _monomials(k: int) -> list[tuple[int, int, int]]:
    return [(a, b, k - a - b) for a in range(k, -1, -1) for b in range(k - a, -1, -1)]


def _poly_operators(n: int, m: int):
    """E_ij on Sym^n(x) (x) Sym^m(y) in the orthonormal monomial basis."""
    states = [(a, b) for a in _monomials(n) for b in _monomials(m)]
    pos = {s: i for i, s in enumerate(states)}
    M = len(states)
    E = np.zeros((3, 3, M, M))
    for col, (a, b) in enumerate(states):
        for i in range(3):
            for j in range(3):
                if i == j:
                    E[i, i, col, col] = a[i] - b[i]
                    continue
                if a[j]:
                    na = list(a)
                    na[j] -= 1
                    na[i] += 1
                    E[i, j, pos[(tuple(na), b)], col] += math.sqrt(a[j] * (a[i] + 1))
                if b[i]:
                    nb = list(b)
                    nb[i] -= 1
                    nb[j] += 1
                    E[i, j, pos[(a, tuple(nb))], col] -= math.sqrt(b[i] * (b[j] + 1))
    return states, pos, E


def _dynkin(w3) -> tuple[int, int]:
    return (int(round(w3[0] - w3[1])), int(round(w3[1] - w3[2])))


@lru_cache(maxsize=None)
def su3_build_irrep(r, cap: int = DIM_CAP) -> Su3Rep:
    """Construct the irrep by lowering from the highest-weight monomial."""
    r = _irrep(r)
    d = su3_dim(r)
    if d > cap:
        raise ResourceError(f"irrep {r} has dimension {d} > cap {cap}")
    states, pos, E = _poly_operators(r.n, r.m)
    hw = np.zeros(len(states))
    hw[pos[((r.n, 0, 0), (0, 0, r.m))]] = 1.0
    levels = [[((r.n, r.m), hw)]]
    while True:
        by_weight: dict = defaultdict(list)
        for w, v in levels[-1]:
            for (i, j), shift in _LOWER.items():
                u = E[i, j] @ v
                if np.linalg.norm(u) > _TOL:
                    by_weight[(w[0] + shift[0], w[1] + shift[1])].append(u)
        if not by_weight:
            break
        level = []
        for w in sorted(by_weight, reverse=True):
            chosen: list[np.ndarray] = []
            for u in by_weight[w]:
                for c in chosen:
                    u = u - (c @ u) * c
                nu = np.linalg.norm(u)
                if nu > 1e-8:
                    chosen.append(u / nu)
            level.extend((w, c) for c in chosen)
        levels.append(level)
    flat = [(lvl, w, v) for lvl, level in enumerate(levels) for w, v in level]
    B = np.stack([v for _, _, v in flat], axis=1)
    if B.shape[1] != d:
        raise AssertionError(f"built {B.shape[1]} vectors for {r}, expected {d}")
    Er = np.einsum("ak,ijab,bl->ijkl", B, E, B)
    weights = tuple(w for _, w, _ in flat)
    seen: dict = defaultdict(int)
    labels = []
    for w in weights:
        seen[w] += 1
        labels.append(Su3WeightLabel(w, seen[w]))
    return Su3Rep(r, Er, weights, tuple(labels), tuple(l for l, _, _ in flat))


def casimir(rep: Su3Rep) -> np.ndarray:
    """sum_a T_a T_a with T_a = lambda_a / 2."""
    return sum(g @ g for g in rep.generators())


def random_su3(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """exp of a random anti-Hermitian traceless matrix."""
    coeffs = rng.normal(scale=scale, size=8)
    X = sum(c * g for c, g in zip(coeffs, gell_mann_halves()))
    return expm(2j * X)


# ---------------------------------------------------------------------------
# decomposition of a representation with diagonal Cartan generators


def _weights_of(E: np.ndarray) -> list[tuple[int, int]]:
    diag = np.stack([np.diag(E[i, i]).real for i in range(3)], axis=1)
    return [_dynkin(w) for w in diag]


def _null_basis(A: np.ndarray, k: int) -> list[np.ndarray]:
    """Deterministic orthonormal basis of ker A on a coordinate subspace of size k."""
    if A.shape[0] == 0:
        N = np.eye(k)
    else:
        _, s, vh = np.linalg.svd(A)
        rank = int(np.sum(s > 1e-9 * max(1.0, s[0] if len(s) else 1.0)))
        N = vh[rank:].conj().T
    P = N @ N.conj().T
    out: list[np.ndarray] = []
    for i in range(k):
        if len(out) == N.shape[1]:
            break
        u = P[:, i].copy()
        for c in out:
            u = u - (c.conj() @ u) * c
        nu = np.linalg.norm(u)
        if nu > 1e-8:
            u = u / nu
            first = u[np.argmax(np.abs(u) > 1e-10)]
            out.append(u * (abs(first) / first))
    return out


def highest_weight_vectors(E: np.ndarray, target: Su3Irrep) -> list[np.ndarray]:
    """Orthonormal highest-weight vectors of weight ``target`` in a representation."""
    wts = _weights_of(E)
    idx = [i for i, w in enumerate(wts) if w == (target.n, target.m)]
    if not idx:
        return []
    A = np.concatenate([E[0, 1][:, idx], E[1, 2][:, idx]], axis=0)
    vecs = []
    for u in _null_basis(A, len(idx)):
        v = np.zeros(E.shape[-1], dtype=u.dtype)
        v[idx] = u
        vecs.append(v)
    return vecs


def embed_irrep(E: np.ndarray, hw: np.ndarray, target: Su3Irrep) -> np.ndarray:
    """Intertwiner U: irrep -> representation with U e_0 = hw.

    Built level by level: the images of the lowered vectors fix U on the
    next level, U_{l+1} = Z Y^+.
    """
    rep = su3_build_irrep(target)
    depth = np.array(rep.depth)
    U = np.zeros((E.shape[-1], rep.dim), dtype=np.result_type(hw, float))
    U[:, 0] = hw
    for lvl in range(int(depth.max())):
        cur = np.flatnonzero(depth == lvl)
        nxt = np.flatnonzero(depth == lvl + 1)
        Y = np.concatenate([rep.E[i, j][np.ix_(nxt, cur)] for i, j in _LOWER], axis=1)
        Z = np.concatenate([E[i, j] @ U[:, cur] for i, j in _LOWER], axis=1)
        U[:, nxt] = Z @ np.linalg.pinv(Y)
    return U


def decompose(E: np.ndarray, target: Su3Irrep) -> list[np.ndarray]:
    """All isometric intertwiners from ``target`` into the representation E."""
    return [embed_irrep(E, v, target) for v in highest_weight_vectors(E, target)]


def tensor_operators(*Es: np.ndarray) -> np.ndarray:
    """E_ij on a tensor product, as sum of one-factor actions."""
    dims = [e.shape[-1] for e in Es]
    total = math.prod(dims)
    out = np.zeros((3, 3, total, total), dtype=np.result_type(*Es))
    for pos, e in enumerate(Es):
        left = math.prod(dims[:pos])
        right = math.prod(dims[pos + 1:])
        for i in range(3):
            for j in range(3):
                out[i, j] += np.kron(np.kron(np.eye(left), e[i, j]), np.eye(right))
    return out


# ---------------------------------------------------------------------------
# Clebsch-Gordan tensors


@dataclass(frozen=True, eq=False)
class Su3CGTensor:
    source: tuple[Su3Irrep, Su3Irrep]
    target: Su3Irrep
    k: int
    coefficients: np.ndarray   # [d1, d2, d]

    def rows(self, tol: float = 1e-12):
        """Nonzero entries as (mu1, mu2, mu, value) with weight labels."""
        r1, r2, r = (su3_build_irrep(x) for x in (*self.source, self.target))
        for (a, b, c), v in np.ndenumerate(self.coefficients):
            if abs(v) > tol:
                yield r1.labels[a], r2.labels[b], r.labels[c], v


_CG_OVERRIDES: dict = {}


@lru_cache(maxsize=None)
def _cg_all(r1: Su3Irrep, r2: Su3Irrep, r: Su3Irrep) -> tuple[np.ndarray, ...]:
    E = tensor_operators(su3_build_irrep(r1).E, su3_build_irrep(r2).E)
    d1, d2 = su3_dim(r1), su3_dim(r2)
    return tuple(U.reshape(d1, d2, -1) for U in decompose(E, r))


def su3_cg(r1, r2, target, k: int = 1) -> Su3CGTensor:
    """Clebsch-Gordan tensor C[mu1, mu2, mu] of the k-th copy of target in r1 x r2."""
    r1, r2, target = _irrep(r1), _irrep(r2), _irrep(target)
    mult = su3_cg_series(r1, r2).get(target, 0)
    if k < 1 or k > mult:
        raise DomainError(f"{target} occurs {mult} times in {r1} x {r2}; no copy k={k}")
    key = (r1, r2, target, k)
    if key in _CG_OVERRIDES:
        return Su3CGTensor((r1, r2), target, k, _CG_OVERRIDES[key])
    return Su3CGTensor((r1, r2), target, k, _cg_all(r1, r2, target)[k - 1])


def dump_cg_csv(t: Su3CGTensor, path) -> None:
    """Write mu1,mu2,mu,k,re,im with weights as 'h1 h2 counter'."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r1", "r2", "r", "mu1", "mu2", "mu", "k", "re", "im"])
        for a, b, c, v in t.rows():
            v = complex(v)
            w.writerow([str(t.source[0]), str(t.source[1]), str(t.target),
                        _wl(a), _wl(b), _wl(c), t.k, f"{v.real:.17g}", f"{v.imag:.17g}"])


def _wl(l: Su3WeightLabel) -> str:
    return f"{l.weight[0]} {l.weight[1]} {l.counter}"


def load_cg_csv(path) -> list[tuple]:
    """Register Clebsch-Gordan tensors from a CSV in the dump format.

    Registered tensors replace the numerical solver for their key; weight
    labels must refer to this module's basis.  Returns the keys loaded.
    """
    tables: dict = defaultdict(dict)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (Su3Irrep.parse(row["r1"]), Su3Irrep.parse(row["r2"]),
                   Su3Irrep.parse(row["r"]), int(row["k"]))
            tables[key][(row["mu1"], row["mu2"], row["mu"])] = complex(float(row["re"]), float(row["im"]))
    for key, entries in tables.items():
        reps = [su3_build_irrep(x) for x in key[:3]]
        index = [{_wl(l): i for i, l in enumerate(rep.labels)} for rep in reps]
        arr = np.zeros(tuple(rep.dim for rep in reps), dtype=complex)
        for (a, b, c), v in entries.items():
            try:
                arr[index[0][a], index[1][b], index[2][c]] = v
            except KeyError as exc:
                raise DomainError(f"unknown weight label {exc} for {key}") from exc
        if not np.iscomplexobj(arr) or np.allclose(arr.imag, 0):
            arr = arr.real
        _CG_OVERRIDES[key] = arr
    return list(tables)


def clear_cg_overrides() -> None:
    _CG_OVERRIDES.clear()


# ---------------------------------------------------------------------------
# 9-lambda symbols


def su3_nine_lambda(rows, row_k=(1, 1, 1), col_k=(1, 1, 1), mu3: int = 0) -> complex:
    """Contraction of six Clebsch-Gordan tensors at root weight index ``mu3``.

    ``rows`` is ((a, b, x), (c, d, y), (e, f, z)); rows couple left to right
    and columns top to bottom.  The value is

        sum conj(R3[e,f,z] C1[a,c,e] C2[b,d,f]) C3[x,y,z] R1[a,b,x] R2[c,d,y],

    the overlap of the coupled state built column-first with the one built
    row-first.  Zero unless all six couplings exist.
    """
    g = [[_irrep(x) for x in row] for row in rows]
    couplings = [(g[0][0], g[0][1], g[0][2], row_k[0]), (g[1][0], g[1][1], g[1][2], row_k[1]),
                 (g[2][0], g[2][1], g[2][2], row_k[2]), (g[0][0], g[1][0], g[2][0], col_k[0]),
                 (g[0][1], g[1][1], g[2][1], col_k[1]), (g[0][2], g[1][2], g[2][2], col_k[2])]
    for a, b, c, k in couplings:
        if su3_cg_series(a, b).get(c, 0) < k:
            return 0j
    R1, R2, R3, C1, C2, C3 = (su3_cg(*c).coefficients for c in couplings)
    z = mu3
    left = np.einsum("abx,cdy,xy->abcd", R1, R2, C3[:, :, z])
    right = np.einsum("ef,ace,bdf->abcd", R3[:, :, z], C1, C2)
    return complex(np.sum(np.conj(right) * left))


# ---------------------------------------------------------------------------
# quasicharacters on the cherry


@dataclass(frozen=True, order=True)
class Su3QuasicharIndex:
    """chi_hat = sum_mu <C^{k'}(mu)| D^{r1}(a1) x D^{r2}(a2) |C^{k}(mu)>."""

    r1: Su3Irrep
    r2: Su3Irrep
    r: Su3Irrep
    k: int = 1
    k_prime: int = 1

    def __post_init__(self):
        mult = su3_cg_series(self.r1, self.r2).get(self.r, 0)
        if not (1 <= self.k <= mult and 1 <= self.k_prime <= mult):
            raise DomainError(f"{self.r} occurs {mult} times in {self.r1} x {self.r2}")

    @classmethod
    def of(cls, r1, r2, r, k: int = 1, k_prime: int = 1) -> "Su3QuasicharIndex":
        return cls(_irrep(r1), _irrep(r2), _irrep(r), k, k_prime)

    @classmethod
    def parse(cls, text: str) -> "Su3QuasicharIndex":
        """``"21,20,22"`` or ``"11,11,11;1,2"`` (labels; k, k')."""
        labels, _, ks = text.partition(";")
        parts = labels.split(",")
        if len(parts) != 3:
            raise DomainError(f"expected three labels in {text!r}")
        k = [int(x) for x in ks.split(",")] if ks else [1, 1]
        return cls.of(*(Su3Irrep.parse(p) for p in parts), *k)

    @property
    def leaves(self) -> tuple[Su3Irrep, Su3Irrep]:
        return (self.r1, self.r2)

    def __str__(self) -> str:
        s = f"{self.r1},{self.r2},{self.r}"
        mult = su3_cg_series(self.r1, self.r2)[self.r]
        return s if mult == 1 else f"{s};{self.k},{self.k_prime}"


def su3_evaluate(q: Su3QuasicharIndex, a1: np.ndarray, a2: np.ndarray) -> complex:
    C = su3_cg(q.r1, q.r2, q.r, q.k).coefficients
    Cp = su3_cg(q.r1, q.r2, q.r, q.k_prime).coefficients
    D1, D2 = su3_build_irrep(q.r1)(a1), su3_build_irrep(q.r2)(a2)
    return complex(np.einsum("pqz,pa,qb,abz->", np.conj(Cp), D1, D2, C))


def su3_evaluate_expansion(expansion: dict, a1, a2) -> complex:
    return sum(c * su3_evaluate(q, a1, a2) for q, c in expansion.items())


def su3_norm(labels, p: NormParams) -> float:
    """Norm of a cherry quasicharacter with leaf and root labels ``labels``."""
    r1, r2, r = (_irrep(x) for x in labels)
    return (math.sqrt(su3_dim(r) / (su3_dim(r1) * su3_dim(r2))) * (p.hbar * math.pi) ** 4
            * math.exp(p.hbar * p.beta ** 2 * float(su3_zeta(r1) + su3_zeta(r2))))


def su3_log_norm(labels, p: NormParams) -> float:
    r1, r2, r = (_irrep(x) for x in labels)
    return (0.5 * math.log(su3_dim(r) / (su3_dim(r1) * su3_dim(r2))) + 4 * math.log(p.hbar * math.pi)
            + p.hbar * p.beta ** 2 * float(su3_zeta(r1) + su3_zeta(r2)))


# ---------------------------------------------------------------------------
# expansion of invariant trace polynomials


_FUND_E = np.zeros((3, 3, 3, 3))
for _i in range(3):
    for _j in range(3):
        _FUND_E[_i, _j, _i, _j] = 1.0
_DUAL_E = -np.transpose(_FUND_E, (0, 1, 3, 2))


def _link_slots(word: Sequence[int], link: int) -> list[tuple[int, bool]]:
    """(position, inverted) for each letter of ``link`` in the word."""
    return [(t, x < 0) for t, x in enumerate(word) if abs(x) == link]


def _word_tensor(word: Sequence[int], n_links: int) -> tuple[np.ndarray, list[list[bool]]]:
    """Integer tensor T with tr(word) = sum T[rho, sigma] prod_l W_l(a_l)[rho_l, sigma_l].

    W_l is the tensor product of a (direct letters) and conj(a)
    (inverse letters) in order of appearance.  a^{-1}[i, j] = conj(a[j, i]),
    so an inverse letter swaps its row and column index.
    """
    L = len(word)
    slots = [_link_slots(word, l) for l in range(1, n_links + 1)]
    shape = [3] * (2 * L)
    T = np.zeros(shape, dtype=np.int64)
    for idx in itertools.product(range(3), repeat=L):
        rho, sigma = [], []
        for sl in slots:
            for t, inv in sl:
                i, j = idx[t], idx[(t + 1) % L]
                rho.append(j if inv else i)
                sigma.append(i if inv else j)
        T[tuple(rho + sigma)] += 1
    return T.reshape(3 ** L, 3 ** L), [[inv for _, inv in sl] for sl in slots]


def _power_operators(flags: Sequence[bool]) -> np.ndarray:
    if not flags:
        return np.zeros((3, 3, 1, 1))
    return tensor_operators(*[_DUAL_E if inv else _FUND_E for inv in flags])


def su3_expand_invariant(p: TracePolynomial, max_dim: int = DIM_CAP) -> dict[Su3QuasicharIndex, complex]:
    """Expansion of a two-link trace polynomial in cherry quasicharacters.

    Coefficient of chi_hat(r1, r2, r; k, k') is

        (1/d_r) sum_{s,t} sum_mu B'[., mu]^T T B[., mu]*,

    with B the image of the coupled state under the link intertwiners
    U_s (x) U_t, which is Schur orthogonality written as a contraction.
    """
    if p.n_links > 2:
        raise DomainError("SU(3) expansions are implemented for two links")
    out: dict[Su3QuasicharIndex, complex] = defaultdict(complex)
    for c, word in p.terms:
        if not word:
            out[Su3QuasicharIndex.of((0, 0), (0, 0), (0, 0))] += 3 * float(c)
            continue
        T, flags = _word_tensor(word, 2)
        Es = [_power_operators(f) for f in flags]
        # irreps inside each link's tensor power with their intertwiners
        link_parts = []
        for E, f in zip(Es, flags):
            parts = {}
            for lam in _candidate_irreps(f):
                Us = decompose(E, lam)
                if Us:
                    parts[lam] = Us
            link_parts.append(parts)
        for (l1, U1s), (l2, U2s) in itertools.product(link_parts[0].items(), link_parts[1].items()):
            for r, mult in su3_cg_series(l1, l2).items():
                if su3_dim(r) > max_dim:
                    continue
                Cs = [su3_cg(l1, l2, r, k).coefficients for k in range(1, mult + 1)]
                acc = np.zeros((mult, mult), dtype=complex)
                for U1, U2 in itertools.product(U1s, U2s):
                    B = [np.einsum("pa,qb,abz->pqz", U1, U2, C).reshape(T.shape[0], -1) for C in Cs]
                    for k, kp in itertools.product(range(mult), repeat=2):
                        acc[k, kp] += np.einsum("rz,rs,sz->", B[kp], T, np.conj(B[k]))
                acc *= float(c) / su3_dim(r)
                for k, kp in itertools.product(range(mult), repeat=2):
                    if abs(acc[k, kp]) > 1e-12:
                        out[Su3QuasicharIndex(l1, l2, r, k + 1, kp + 1)] += acc[k, kp]
    return {q: v for q, v in sorted(out.items()) if abs(v) > 1e-12}


def _candidate_irreps(flags: Sequence[bool]) -> list[Su3Irrep]:
    p = sum(1 for f in flags if not f)
    q = len(flags) - p
    return [Su3Irrep(n, m) for n in range(p + q + 1) for m in range(p + q + 1)
            if (n - m - p + q) % 3 == 0]


# ---------------------------------------------------------------------------
# multiplication law and operator rows


def su3_structure_constants(q1: Su3QuasicharIndex, q2: Su3QuasicharIndex,
                            max_dim: int = DIM_CAP) -> dict[Su3QuasicharIndex, complex]:
    """Coefficients of chi_hat(q1) chi_hat(q2) in the cherry basis.

    coefficient(q3) = sum over the intermediate counters of
    W(q1.k, q2.k -> q3.k) conj(W(q1.k', q2.k' -> q3.k')).
    """
    out: dict[Su3QuasicharIndex, complex] = defaultdict(complex)
    s1 = su3_cg_series(q1.r1, q2.r1)
    s2 = su3_cg_series(q1.r2, q2.r2)
    sr = su3_cg_series(q1.r, q2.r)
    for (e, me), (f, mf) in itertools.product(s1.items(), s2.items()):
        if su3_dim(e) > max_dim or su3_dim(f) > max_dim:
            continue
        for z, mz in su3_cg_series(e, f).items():
            if z not in sr or su3_dim(z) > max_dim:
                continue
            cols = list(itertools.product(range(1, me + 1), range(1, mf + 1), range(1, sr[z] + 1)))

            def w(k1, k2, k3, col):
                return su3_nine_lambda(((q1.r1, q1.r2, q1.r), (q2.r1, q2.r2, q2.r), (e, f, z)),
                                       row_k=(k1, k2, k3), col_k=col)

            for k3, k3p in itertools.product(range(1, mz + 1), repeat=2):
                val = sum(w(q1.k, q2.k, k3, col) * np.conj(w(q1.k_prime, q2.k_prime, k3p, col))
                          for col in cols)
                if abs(val) > 1e-12:
                    out[Su3QuasicharIndex(e, f, z, k3, k3p)] += val
    return dict(out)


def su3_operator_row(op_expansion: dict, source: Su3QuasicharIndex, p: NormParams,
                     max_dim: int = DIM_CAP) -> dict[Su3QuasicharIndex, complex]:
    """One row of a multiplication operator in the normalised basis.

    Entry for target t is M[source -> t] * ||chi_t|| / ||chi_source||,
    i.e. <e_t, op e_source> for e = chi_hat / ||chi_hat||.
    """
    acc: dict[Su3QuasicharIndex, complex] = defaultdict(complex)
    for q, c in op_expansion.items():
        for t, s in su3_structure_constants(q, source, max_dim).items():
            acc[t] += c * s
    ls = su3_log_norm((source.r1, source.r2, source.r), p)
    return {t: v * math.exp(su3_log_norm((t.r1, t.r2, t.r), p) - ls)
            for t, v in sorted(acc.items()) if abs(v) > 1e-12}


# ---------------------------------------------------------------------------
# stratum relations for the U(1) x U(1) stratum on two links


def _word_product(*factors) -> list[tuple[Fraction, tuple[int, ...]]]:
    acc = [(Fraction(1), ())]
    for f in factors:
        acc = [(c1 * c2, w1 + w2) for c1, w1 in acc for c2, w2 in f]
    return acc


_COMM = [(Fraction(1), (1, 2)), (Fraction(-1), (2, 1))]


def _letters(*w: int):
    return [(Fraction(1), tuple(w))]


def _relation(*tail, power: int = 1) -> TracePolynomial:
    block = [_COMM] + [_letters(*t) for t in tail]
    terms = _word_product(*(block * power))
    return TracePolynomial(tuple(terms))


STRATUM_RELATIONS: dict[str, TracePolynomial] = {
    "r1": _relation((1, 2)),
    "r2": _relation((1, 1, 2)),
    "r3": _relation((2, 2, 1)),
    "r4": _relation((1,), power=2),
    "r5": _relation((2,), power=2),
    "r6": _relation(power=3),
    "r7": _relation((1, 1), power=2),
    "r8": _relation((2, 2), power=2),
    "r9": _relation((1, 2), power=2),
    "r10": _relation((1, 1, 2), power=2),
    "r11": _relation((1, 2, 1), power=2),
    "r12": _relation((2, 1, 1), power=2),
    "r13": _relation((2, 2, 1), power=2),
    "r14": _relation((2, 1, 2), power=2),
    "r15": _relation((1, 2, 2), power=2),
}

T1 = TracePolynomial.parse("tr(1 2 1 2)")
T2 = TracePolynomial.parse("tr(1 1 2 2)")
