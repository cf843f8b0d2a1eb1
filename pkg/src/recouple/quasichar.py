"""Modified quasicharacters of SU(2)^N and their multiplication law.

A quasicharacter is indexed by a tree T and two labellings alpha, alpha'
with common leaves and root:

    chi_hat(a_1..a_N) = sum_m <T; alpha', m| D^{j_1}(a_1) x ... x D^{j_N}(a_N) |T; alpha, m>.

Products of quasicharacters expand back into quasicharacters with
coefficients built from the recoupling coefficients R(T).
"""
from __future__ import annotations

import itertools
import math
import re
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .exact import ZERO, DomainError, HalfInt, SurdSum, as_rational, spin
from .recoupling import coupled_state, recoupling_R
from .su2 import clebsch_series, dim, is_triad, wigner6j, wigner9j, wigner_d
from .trees import (CouplingTree, Labelling, enumerate_labellings, labelling_from_nodes,
                    standard_tree)

# ---------------------------------------------------------------------------
# indices


@dataclass(frozen=True)
class QuasicharIndex:
    """(T, alpha, alpha') with alpha, alpha' sharing leaf and root labels."""

    tree: CouplingTree
    alpha: Labelling
    alpha_prime: Labelling

    def __post_init__(self):
        t, a, b = self.tree, self.alpha, self.alpha_prime
        if len(a) != t.n_vertices or len(b) != t.n_vertices:
            raise DomainError("labellings do not fit the tree")
        if a.leaf_labels(t) != b.leaf_labels(t) or a.root != b.root:
            raise DomainError("alpha and alpha' must share leaves and root")

    @property
    def leaves(self) -> tuple:
        return self.alpha.leaf_labels(self.tree)

    @property
    def root(self):
        return self.alpha.root

    @property
    def n_links(self) -> int:
        return self.tree.n_leaves

    def max_label(self):
        return max(max(self.alpha.labels), max(self.alpha_prime.labels))

    def __str__(self) -> str:
        if self.alpha == self.alpha_prime:
            return f"chi{self.tree}{self.alpha}"
        return f"chi{self.tree}{self.alpha}{self.alpha_prime}"


def character_index(j) -> QuasicharIndex:
    """The ordinary character chi_j for N = 1."""
    t = standard_tree(1)
    lab = Labelling((spin(j),))
    return QuasicharIndex(t, lab, lab)


def cherry_index(j1, j2, j) -> QuasicharIndex:
    """chi_{j1, j2, j} on the two-leaf tree."""
    t = standard_tree(2)
    lab = labelling_from_nodes(t, [j1, j2], [j])
    return QuasicharIndex(t, lab, lab)


def diagonal_index(tree: CouplingTree, lab: Labelling) -> QuasicharIndex:
    return QuasicharIndex(tree, lab, lab)


def quasichar_basis(tree: CouplingTree, j_max) -> list[QuasicharIndex]:
    """All indices on ``tree`` whose vertex labels are at most ``j_max``."""
    j_max = spin(j_max)
    spins = [HalfInt.from_twice(t) for t in range(0, j_max.twice + 1)]
    out = []
    for leaves in itertools.product(spins, repeat=tree.n_leaves):
        labs = enumerate_labellings(tree, leaves, max_label=j_max)
        by_root = defaultdict(list)
        for lab in labs:
            if lab.root <= j_max:
                by_root[lab.root].append(lab)
        for root in sorted(by_root):
            for a in by_root[root]:
                for b in by_root[root]:
                    out.append(QuasicharIndex(tree, a, b))
    return out


# ---------------------------------------------------------------------------
# evaluation


@lru_cache(maxsize=4096)
def _state_matrix(tree: CouplingTree, lab: Labelling) -> np.ndarray:
    """Columns |T; lab, m> for m = j, j-1, ..., -j as dense vectors."""
    j = spin(lab.root)
    cols = [coupled_state(tree, lab, HalfInt.from_twice(j.twice - 2 * i)).as_vector()
            for i in range(j.twice + 1)]
    return np.stack(cols, axis=1)


def _apply_links(mats: Sequence[np.ndarray], v: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """(D_1 x ... x D_N) applied to the columns of v."""
    k = v.shape[1]
    t = v.reshape(*dims, k).astype(complex)
    for axis, m in enumerate(mats):
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1, k)


def evaluate(q: QuasicharIndex, points) -> complex:
    """chi_hat at one point ``points = (a_1, ..., a_N)`` of SU(2)^N."""
    if len(points) != q.n_links:
        raise DomainError(f"expected {q.n_links} group elements")
    leaves = q.leaves
    mats = [wigner_d(j, a) for j, a in zip(leaves, points)]
    dims = [dim(j) for j in leaves]
    v = _state_matrix(q.tree, q.alpha)
    w = _state_matrix(q.tree, q.alpha_prime)
    return complex(np.sum(np.conj(w) * _apply_links(mats, v, dims)))


def evaluate_expansion(expansion: dict, points) -> complex:
    return sum(float(c) * evaluate(q, points) for q, c in expansion.items())


# ---------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class NormParams:
    """Parameters of the heat-kernel measure: Planck constant and coupling."""

    hbar: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.hbar <= 0 or self.beta <= 0:
            raise DomainError("hbar and beta must be positive")


def norm_squared(q: QuasicharIndex, p: NormParams) -> float:
    """(hbar pi)^{3N/2} (d_j / d_leaves) exp(hbar beta^2 sum_r d_{j_r}^2)."""
    n = q.n_links
    dl = [dim(j) for j in q.leaves]
    return ((p.hbar * math.pi) ** (1.5 * n) * dim(q.root) / math.prod(dl)
            * math.exp(p.hbar * p.beta ** 2 * sum(d * d for d in dl)))


def norm(q: QuasicharIndex, p: NormParams) -> float:
    return math.sqrt(norm_squared(q, p))


def log_norm(q: QuasicharIndex, p: NormParams) -> float:
    """log ||chi_hat||; avoids overflow for large labels."""
    n = q.n_links
    dl = [dim(j) for j in q.leaves]
    return 0.5 * (1.5 * n * math.log(p.hbar * math.pi) + math.log(dim(q.root))
                  - sum(math.log(d) for d in dl) + p.hbar * p.beta ** 2 * sum(d * d for d in dl))


# ---------------------------------------------------------------------------
# multiplication law


def structure_constants(q1: QuasicharIndex, q2: QuasicharIndex) -> dict[QuasicharIndex, SurdSum]:
    """Coefficients of chi_hat(q1) * chi_hat(q2) in the quasicharacter basis.

    coefficient(alpha3, alpha3') = R(T)^{a1' a2'}_{a3'} R(T)^{a1 a2}_{a3}.
    """
    t = q1.tree
    if q2.tree != t:
        raise DomainError("quasicharacters must live on the same tree")
    l1, l2 = q1.leaves, q2.leaves
    leaf_options = [clebsch_series(a, b) for a, b in zip(l1, l2)]
    out: dict[QuasicharIndex, SurdSum] = {}
    for leaves3 in itertools.product(*leaf_options):
        for j3 in clebsch_series(q1.root, q2.root):
            labs = enumerate_labellings(t, leaves3, j3)
            if not labs:
                continue
            left = [recoupling_R(t, q1.alpha, q2.alpha, a3) for a3 in labs]
            right = [recoupling_R(t, q1.alpha_prime, q2.alpha_prime, a3) for a3 in labs]
            for a3, x in zip(labs, left):
                if not x:
                    continue
                for a3p, y in zip(labs, right):
                    if y:
                        out[QuasicharIndex(t, a3, a3p)] = x * y
    return out


def multiply_expansions(e1: dict, e2: dict) -> dict[QuasicharIndex, SurdSum]:
    out: dict[QuasicharIndex, SurdSum] = defaultdict(lambda: ZERO)
    for q1, c1 in e1.items():
        for q2, c2 in e2.items():
            for q3, c in structure_constants(q1, q2).items():
                out[q3] = out[q3] + c1 * c2 * c
    return {q: c for q, c in out.items() if c}


def character_product(spins: Sequence) -> dict[HalfInt, int]:
    """chi_{j1} ... chi_{jk} = sum_j n_j chi_j (Clebsch-Gordan series)."""
    acc = {spin(0): 1}
    for j in spins:
        nxt: dict = defaultdict(int)
        for a, n in acc.items():
            for b in clebsch_series(a, j):
                nxt[b] += n
        acc = dict(nxt)
    return dict(sorted(acc.items()))


# ---------------------------------------------------------------------------
# trace polynomials

_POLY_TERM = re.compile(
    r"\s*(?P<sign>[+-])?\s*(?:(?P<coef>\d+(?:/\d+)?)\s*\*?\s*)?tr\((?P<word>[^)]*)\)\s*")


@dataclass(frozen=True)
class TracePolynomial:
    """Rational combination of traces of words in the links.

    A word is a tuple of nonzero ints; ``k`` stands for a_k and ``-k`` for
    its inverse.  The empty word is tr(1).
    """

    terms: tuple[tuple[Fraction, tuple[int, ...]], ...]

    @classmethod
    def parse(cls, text: str) -> "TracePolynomial":
        """Parse e.g. ``3*tr(1 2 -1 -2) - 1/2*tr(1)``."""
        pos, terms = 0, []
        text = text.strip()
        if not text:
            raise DomainError("empty trace polynomial")
        while pos < len(text):
            m = _POLY_TERM.match(text, pos)
            if not m or m.end() == pos:
                raise DomainError(f"cannot parse trace polynomial at {pos}: {text!r}")
            if terms and m.group("sign") is None:
                raise DomainError(f"missing operator in {text!r}")
            coef = Fraction(m.group("coef") or 1)
            if m.group("sign") == "-":
                coef = -coef
            try:
                word = tuple(int(x) for x in m.group("word").split())
            except ValueError as exc:
                raise DomainError(f"bad word in {text!r}") from exc
            if any(x == 0 for x in word):
                raise DomainError("link numbers start at 1")
            terms.append((coef, word))
            pos = m.end()
        return cls(tuple(terms))

    @classmethod
    def commutator_square(cls) -> "TracePolynomial":
        """tr([a1, a2]^2) written out as four words."""
        return cls.parse("tr(1 2 1 2) - tr(1 2 2 1) - tr(2 1 1 2) + tr(2 1 2 1)")

    @property
    def n_links(self) -> int:
        return max((abs(x) for _, w in self.terms for x in w), default=0)

    def __str__(self) -> str:
        out = []
        for i, (c, w) in enumerate(self.terms):
            sign = "-" if c < 0 else "+"
            body = f"tr({' '.join(str(x) for x in w)})"
            if abs(c) != 1:
                body = f"{abs(c)}*{body}"
            out.append((sign if i or c < 0 else "") + (" " if i else "") + body)
        return " ".join(out)

    def evaluate(self, mats: Sequence[np.ndarray]) -> complex:
        """Numerical value for link matrices ``mats`` (any unitary group)."""
        total = 0j
        d = mats[0].shape[0]
        for c, w in self.terms:
            prod = np.eye(d, dtype=complex)
            for x in w:
                m = mats[abs(x) - 1]
                prod = prod @ (m if x > 0 else m.conj().T)
            total += float(c) * np.trace(prod)
        return total


_EPS = np.array([[0, 1], [-1, 0]])
_EPS_INV = np.array([[0, -1], [1, 0]])


def word_tensor(word: Sequence[int], letter_order: Sequence[int] | None = None) -> np.ndarray:
    """Integer tensor T with tr(word) = sum T[rho, sigma] prod_t a_{l_t}[rho_t, sigma_t].

    Inverse letters use a^{-1} = eps a^T eps^{-1}.  The result has shape
    (2,)*k + (2,)*k for rho then sigma, with letters permuted into
    ``letter_order`` (a permutation of 0..k-1) if given.
    """
    k = len(word)
    # letter factor w_t[mu, nu, rho, sigma] with mu, nu the matrix indices of X_t
    factors = []
    for x in word:
        w = np.zeros((2, 2, 2, 2), dtype=np.int64)
        for mu, nu, rho, sig in itertools.product(range(2), repeat=4):
            if x > 0:
                w[mu, nu, rho, sig] = int(rho == mu and sig == nu)
            else:
                w[mu, nu, rho, sig] = _EPS[mu, sig] * _EPS_INV[rho, nu]
        factors.append(w)
    # contract the matrix product: acc[mu_1, mu_{t+1}, rho_1..t, sigma_1..t]
    acc = factors[0]
    for t in range(1, k):
        acc = np.einsum("ab...,bcxy->ac...xy", acc, factors[t])
    tr = np.einsum("aa...->...", acc)
    # axes now (rho_1, sigma_1, rho_2, sigma_2, ...)
    rho_axes = list(range(0, 2 * k, 2))
    sig_axes = list(range(1, 2 * k, 2))
    if letter_order is not None:
        rho_axes = [rho_axes[i] for i in letter_order]
        sig_axes = [sig_axes[i] for i in letter_order]
    return np.transpose(tr, rho_axes + sig_axes)


def _big_tree(tree: CouplingTree, counts: Sequence[int]):
    """T with leaf i replaced by a standard tree on counts[i] leaves."""
    def sub(s):
        if isinstance(s, int):
            n = max(counts[s - 1], 1)
            return standard_tree(n).shape if n > 1 else 0
        return (sub(s[0]), sub(s[1]))

    return CouplingTree.from_shape(sub(tree.shape))


def _embed_labelling(tree: CouplingTree, big: CouplingTree, lab: Labelling,
                     link_labs: Sequence[Labelling | None]) -> Labelling:
    """Labelling of the big tree: link sub-labellings under T's labelling."""
    labels: list = []

    def walk(v):
        c = tree.children[v]
        if c is None:
            pos = tree.leaves.index(v)
            sub = link_labs[pos]
            if sub is None:
                labels.append(spin(0))
            else:
                labels.extend(sub.labels)
            return
        walk(c[0])
        walk(c[1])
        labels.append(lab.labels[v])

    walk(tree.root)
    return Labelling(tuple(labels))


def expand_invariant(p: TracePolynomial, n_links: int | None = None,
                     tree: CouplingTree | None = None) -> dict[QuasicharIndex, SurdSum]:
    """Exact expansion of an invariant trace polynomial in quasicharacters.

    Each word becomes a contraction of fundamental matrix elements; the
    tensor power of each link is decomposed with coupled states of a
    standard tree and the coefficient of chi_hat(alpha, alpha') is

        (1/d_j) sum_m <alpha, m| M |alpha', m>.
    """
    n = max(p.n_links, 1) if n_links is None else n_links
    if p.n_links > n:
        raise DomainError("polynomial uses more links than requested")
    tree = standard_tree(n) if tree is None else tree
    if tree.n_leaves != n:
        raise DomainError("tree does not match the number of links")
    groups: dict[tuple[int, ...], list] = defaultdict(list)
    for c, w in p.terms:
        counts = tuple(sum(1 for x in w if abs(x) == i) for i in range(1, n + 1))
        groups[counts].append((c, w))
    out: dict[QuasicharIndex, SurdSum] = defaultdict(lambda: ZERO)
    for counts, words in groups.items():
        for q, c in _expand_group(counts, words, tree).items():
            out[q] = out[q] + c
    return {q: c for q, c in out.items() if c}


def _constant_tensor(words) -> dict:
    """Sparse tensor sum_w c_w T_w with letters grouped by link."""
    table: dict = defaultdict(Fraction)
    for c, w in words:
        if not w:
            table[()] += 2 * Fraction(c)
            continue
        order = sorted(range(len(w)), key=lambda t: (abs(w[t]), t))
        for idx, v in np.ndenumerate(word_tensor(w, order)):
            if v:
                table[idx] += Fraction(c) * int(v)
    return {idx: as_rational(c) for idx, c in table.items() if c}


def _expand_group(counts, words, tree):
    k = sum(counts)
    mtab = _constant_tensor(words)
    if not mtab:
        return {}
    half = HalfInt(1, 2)
    link_choices = []
    for ni in counts:
        if ni == 0:
            link_choices.append([None])
        elif ni == 1:
            link_choices.append([Labelling((half,))])
        else:
            link_choices.append(enumerate_labellings(standard_tree(ni), [half] * ni))
    big = _big_tree(tree, counts)
    out: dict[QuasicharIndex, SurdSum] = defaultdict(lambda: ZERO)
    for link_labs in itertools.product(*link_choices):
        leaves = [spin(0) if b is None else b.root for b in link_labs]
        for j in _roots(leaves):
            labs = enumerate_labellings(tree, leaves, j)
            vecs = {}
            for a in labs:
                ba = _embed_labelling(tree, big, a, link_labs)
                vecs[a] = [_letter_vector(coupled_state(big, ba, HalfInt.from_twice(j.twice - 2 * i)))
                           for i in range(j.twice + 1)]
            for a in labs:
                for b in labs:
                    acc = ZERO
                    for va, vb in zip(vecs[a], vecs[b]):
                        acc = acc + _sandwich(va, mtab, vb, k)
                    if acc:
                        q = QuasicharIndex(tree, a, b)
                        out[q] = out[q] + acc * mpq(1, dim(j))
    return out


def _roots(leaves):
    acc = {spin(0)}
    for j in leaves:
        acc = {c for a in acc for c in clebsch_series(a, j)}
    return sorted(acc)


def _letter_vector(state) -> dict:
    """Re-key amplitudes by spin-1/2 letter indices (0 <-> m = +1/2).

    Spin-0 leaves stand for links absent from the word and are dropped.
    """
    leaves = state.labelling.leaf_labels(state.tree)
    keep = [i for i, j in enumerate(leaves) if j != 0]
    return {tuple(0 if ms[i] > 0 else 1 for i in keep): amp for ms, amp in state.amplitudes.items()}


def _sandwich(va: dict, mtab: dict, vb: dict, k: int) -> SurdSum:
    """sum T[rho, sigma] va[sigma] vb[rho]."""
    acc = ZERO
    for idx, c in mtab.items():
        rho, sig = idx[:k], idx[k:]
        x = va.get(sig)
        if x is None:
            continue
        y = vb.get(rho)
        if y is None:
            continue
        acc = acc + x * y * as_rational(c)
    return acc


# ---------------------------------------------------------------------------
# matrix elements


def matrix_elements(op_expansion: dict, basis: Sequence[QuasicharIndex], p: NormParams) -> np.ndarray:
    """Matrix of a multiplication operator; rows are source basis elements.

    Entry [i, k] = (||chi_i|| / ||chi_k||) M[i -> k] where
    op * chi_i = sum_k M[i -> k] chi_k.  Targets outside ``basis`` are dropped.
    """
    pos = {q: i for i, q in enumerate(basis)}
    out = np.zeros((len(basis), len(basis)))
    logn = [log_norm(q, p) for q in basis]
    for i, src in enumerate(basis):
        acc: dict = defaultdict(lambda: ZERO)
        for q, c in op_expansion.items():
            for tgt, s in structure_constants(q, src).items():
                if tgt in pos:
                    acc[tgt] = acc[tgt] + c * s
        for tgt, m in acc.items():
            k = pos[tgt]
            out[i, k] = math.exp(logn[i] - logn[k]) * float(m)
    return out


def cherry_basis(j_max) -> list[QuasicharIndex]:
    """All chi_{j1, j2, j} with every label at most j_max."""
    return quasichar_basis(standard_tree(2), j_max)


def _sq(x: SurdSum) -> float:
    return float(x * x)


def stratum_operator_su2_n2(p: NormParams, j_max) -> tuple[list[QuasicharIndex], np.ndarray]:
    """Closed 6j/9j form of the tr([a1, a2]^2) multiplication operator.

    Same orientation and norm ratio as :func:`matrix_elements`.
    """
    basis = cherry_basis(j_max)
    out = np.zeros((len(basis), len(basis)))
    hb = p.hbar * p.beta ** 2
    for i, src in enumerate(basis):
        j1, j2 = src.leaves
        j = src.root
        for k, tgt in enumerate(basis):
            k1, k2 = tgt.leaves
            kk = tgt.root
            d = dim
            val = 0.0
            if j2 == k2:
                val += d(j) * d(k1) * _sq(wigner6j(1, k1, j1, j2, j, kk))
            if j1 == k1:
                val += d(j) * d(k2) * _sq(wigner6j(1, kk, j, j1, j2, k2))
            if j == kk:
                # squared 9-lambda with a zero entry reduced to a 6j
                val += d(k1) * d(k2) * _sq(wigner6j(1, k2, j2, j, j1, k1))
            val -= 6 * d(j) * d(k1) * d(k2) * _sq(wigner9j([[1, 1, 1], [j1, j2, j], [k1, k2, kk]]))
            if (j1, j2, j) == (k1, k2, kk):
                val -= 3
            if val == 0.0:
                continue
            pref = math.sqrt(d(j) * d(k1) * d(k2) / (d(j1) * d(j2) * d(kk)))
            expo = hb * (d(j1) ** 2 + d(j2) ** 2 - d(k1) ** 2 - d(k2) ** 2) / 2
            out[i, k] = pref * math.exp(expo) * val
    return basis, out


def stratum_vanishes(src: QuasicharIndex, tgt: QuasicharIndex) -> bool:
    """True when a column pair rules out a nonzero stratum-operator entry.

    For each column the labels must agree or form a triad with 1.
    """
    for a, b in zip(src.leaves + (src.root,), tgt.leaves + (tgt.root,)):
        if a != b and not is_triad(1, a, b):
            return True
    return False
