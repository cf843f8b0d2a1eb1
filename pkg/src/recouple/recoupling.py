"""Composite Clebsch-Gordan coefficients and SU(2) recoupling coefficients.

Two independent routes to the coefficient relating the coupled bases of
T . T and T^v:

* :func:`recoupling_coeff` sums composite Clebsch-Gordan products over all
  leaf projections (the definition);
* :func:`recoupling_R` multiplies one 9-lambda symbol per internal vertex.

For speed the projection sum works with rescaled amplitudes.  Writing each
CG as ``sqrt(P * Phi1 Phi2 Phi) * S`` with ``Phi(j,m) = (j+m)!(j-m)!``, the
composite coefficient of a labelled tree factors as

    C(T; alpha, m_leaves) = c(m_leaves) * sqrt(prod_x P_x * prod_y Phi(j_y, m_y) / Phi(j, m))

where ``c`` is rational and obeys ``c_parent = Phi(j, m) * S * c_left * c_right``.
Products of two composite coefficients over the same leaf projections then
only involve rationals plus one common square root.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .exact import ONE, ZERO, DomainError, HalfInt, SurdSum, spin
from .su2 import _nine_lambda2, _triad2, cg_parts, phi2
from .trees import (CouplingTree, Labelling, enumerate_labellings, interleave,
                    leaf_duplicate, leaf_duplicate_map)

# ---------------------------------------------------------------------------
# labelled shapes: nested tuples carrying doubled spins, used as cache keys


@lru_cache(maxsize=1 << 16)
def labelled_shape(tree: CouplingTree, lab: Labelling):
    """Nested key: leaf -> 2j, node -> (left, right, 2j)."""
    if len(lab) != tree.n_vertices:
        raise DomainError("labelling does not fit the tree")
    tl = twice_labels(lab)
    built: list = []
    for v, c in enumerate(tree.children):
        built.append(tl[v] if c is None else (built[c[0]], built[c[1]], tl[v]))
    return built[-1]


def twice_labels(lab: Labelling) -> tuple[int, ...]:
    tl = lab.__dict__.get("_twice")
    if tl is None:
        tl = tuple(spin(x).twice for x in lab.labels)
        object.__setattr__(lab, "_twice", tl)
    return tl


def _root2(ls) -> int:
    return ls if isinstance(ls, int) else ls[2]


@lru_cache(maxsize=1 << 18)
def _rvec(ls, tm: int):
    """Rescaled amplitudes of |ls, m>: (prod of P, {leaf projections: c})."""
    if isinstance(ls, int):
        if abs(tm) > ls or (ls - tm) % 2:
            return mpq(0), {}
        return mpq(1), {(tm,): mpq(1)}
    left, right, tj = ls
    ta, tb = _root2(left), _root2(right)
    if not _triad2(ta, tb, tj) or abs(tm) > tj or (tj - tm) % 2:
        return mpq(0), {}
    phi = phi2(tj, tm)
    out: dict = {}
    pprod = None
    for tm1 in range(-ta, ta + 1, 2):
        tm2 = tm - tm1
        if abs(tm2) > tb:
            continue
        P, S = cg_parts(ta, tm1, tb, tm2, tj, tm)
        if not S:
            continue
        pa, va = _rvec(left, tm1)
        pb, vb = _rvec(right, tm2)
        if not va or not vb:
            continue
        pprod = P * pa * pb
        w = phi * S
        for ka, ca in va.items():
            wa = w * ca
            for kb, cb in vb.items():
                out[ka + kb] = wa * cb
    if not out:
        return mpq(0), {}
    return pprod, out


def _leaf_weight(tleaves: Sequence[int], key: Sequence[int]) -> int:
    w = 1
    for tj, tm in zip(tleaves, key):
        w *= phi2(tj, tm)
    return w


def _leaf2(ls) -> tuple[int, ...]:
    if isinstance(ls, int):
        return (ls,)
    return _leaf2(ls[0]) + _leaf2(ls[1])


# ---------------------------------------------------------------------------
# composite CG and coupled states


def _doubled(xs) -> tuple[int, ...]:
    return tuple(spin(x).twice for x in xs)


def composite_cg(tree: CouplingTree, lab: Labelling, m_leaves: Sequence, m) -> SurdSum:
    """Product over internal vertices of the CG coefficients.

    Each vertex carries the sum of its descendant leaf projections; the
    result vanishes unless those add up to ``m``.
    """
    ls = labelled_shape(tree, lab)
    key = _doubled(m_leaves)
    tm = spin(m).twice
    if len(key) != tree.n_leaves:
        raise DomainError("one projection per leaf expected")
    tleaves = _leaf2(ls)
    for tj, tmy in zip(tleaves, key):
        if abs(tmy) > tj or (tj - tmy) % 2:
            raise DomainError("leaf projection out of range")
    pprod, vec = _rvec(ls, tm)
    c = vec.get(key)
    if not c:
        return ZERO
    return SurdSum.sqrt(pprod * _leaf_weight(tleaves, key) / phi2(_root2(ls), tm)) * c


@dataclass(frozen=True)
class CoupledState:
    """|T; alpha, m> expanded in the product basis of the leaves."""

    tree: CouplingTree
    labelling: Labelling
    m: HalfInt
    amplitudes: dict

    def as_vector(self) -> np.ndarray:
        """Dense real vector; leaf basis index i <-> m = j - i, row-major."""
        leaves = self.labelling.leaf_labels(self.tree)
        dims = [spin(j).twice + 1 for j in leaves]
        v = np.zeros(int(np.prod(dims)))
        for ms, amp in self.amplitudes.items():
            idx = np.ravel_multi_index(tuple(int(spin(j) - mm) for j, mm in zip(leaves, ms)), dims)
            v[idx] = float(amp)
        return v


def coupled_state(tree: CouplingTree, lab: Labelling, m) -> CoupledState:
    ls = labelled_shape(tree, lab)
    tm = spin(m).twice
    tj = _root2(ls)
    if abs(tm) > tj or (tj - tm) % 2:
        raise DomainError("projection out of range for the root spin")
    pprod, vec = _rvec(ls, tm)
    tleaves = _leaf2(ls)
    phi = phi2(tj, tm)
    amps = {}
    for key, c in vec.items():
        ms = tuple(HalfInt.from_twice(x) for x in key)
        amps[ms] = SurdSum.sqrt(pprod * _leaf_weight(tleaves, key) / phi) * c
    return CoupledState(tree, lab, HalfInt.from_twice(tm), amps)


# ---------------------------------------------------------------------------
# recoupling coefficients


def _inverse_perm(sigma: Sequence[int], n: int) -> tuple[int, ...]:
    if sorted(sigma) != list(range(1, n + 1)):
        raise DomainError("sigma must be a permutation of 1..N")
    inv = [0] * n
    for i, s in enumerate(sigma):
        inv[s - 1] = i
    return tuple(inv)


def recoupling_coeff(t1: CouplingTree, a1: Labelling, t2: CouplingTree, a2: Labelling,
                     sigma: Sequence[int] | None = None, m=None) -> SurdSum:
    """R(T2|T1) at fixed m: sum over leaf projections of C(T2; a2, sigma m) C(T1; a1, m).

    ``sigma[i-1]`` is the position in T2 of the leaf at position i of T1
    (1-based, identity by default).  ``m`` defaults to the highest weight.
    """
    n = t1.n_leaves
    if t2.n_leaves != n:
        raise DomainError("trees have different numbers of leaves")
    inv = _inverse_perm(sigma if sigma is not None else range(1, n + 1), n)
    ls1 = labelled_shape(t1, a1)
    ls2 = labelled_shape(t2, a2)
    l1, l2 = _leaf2(ls1), _leaf2(ls2)
    if tuple(l1[inv[p]] for p in range(n)) != l2:
        raise DomainError("leaf labels do not correspond under sigma")
    if m is not None:
        tm = spin(m).twice
        tj = _root2(ls1)
        if abs(tm) > tj or (tj - tm) % 2:
            raise DomainError("projection out of range for the root spin")
    return _projection_sum(ls1, ls2, inv, None if m is None else spin(m).twice)


def _projection_sum(ls1, ls2, inv: tuple[int, ...], tm: int | None) -> SurdSum:
    tj = _root2(ls1)
    if _root2(ls2) != tj:
        return ZERO
    if tm is None:
        tm = tj
    p1, w1 = _weighted(ls1, tm, inv)
    p2, v2 = _rvec(ls2, tm)
    if not w1 or not v2:
        return ZERO
    acc = mpq(0)
    if len(w1) <= len(v2):
        get = v2.get
        for k, c in w1.items():
            c2 = get(k)
            if c2:
                acc += c * c2
    else:
        get = w1.get
        for k, c in v2.items():
            c1 = get(k)
            if c1:
                acc += c * c1
    if not acc:
        return ZERO
    return SurdSum.sqrt(p1 * p2) * (acc / phi2(tj, tm))


@lru_cache(maxsize=1 << 17)
def _weighted(ls, tm: int, inv: tuple[int, ...]):
    """Rescaled amplitudes times leaf weights, keys permuted into the target order."""
    pprod, vec = _rvec(ls, tm)
    tl = _leaf2(ls)
    ident = inv == tuple(range(len(inv)))
    out = {}
    for k, c in vec.items():
        key = k if ident else tuple(k[i] for i in inv)
        out[key] = c * _leaf_weight(tl, k)
    return pprod, out


def join_labelling(tree: CouplingTree, a1: Labelling, a2: Labelling, j3) -> Labelling:
    """[alpha1, alpha2; j3] on T . T."""
    if len(a1) != tree.n_vertices or len(a2) != tree.n_vertices:
        raise DomainError("labellings do not fit the tree")
    return Labelling(tuple(a1.labels) + tuple(a2.labels) + (spin(j3),))


def duplicate_labelling(tree: CouplingTree, a1: Labelling, a2: Labelling, a3: Labelling) -> Labelling:
    """alpha1 * alpha2 * alpha3 on T^v.

    The cherry replacing leaf y carries (j1^y, j2^y; j3^y); every other
    vertex takes its label from alpha3.
    """
    dup = leaf_duplicate(tree)
    vmap = leaf_duplicate_map(tree)
    labels: list = [None] * dup.n_vertices
    for v, w in vmap.items():
        labels[w] = a3.labels[v]
        if tree.children[v] is None:
            left, right = dup.children[w]
            labels[left] = a1.labels[v]
            labels[right] = a2.labels[v]
    return Labelling(tuple(labels))


def recoupling_R_oracle(tree: CouplingTree, a1: Labelling, a2: Labelling, a3: Labelling,
                        m=None) -> SurdSum:
    """R(T)^{a1 a2}_{a3} as the projection sum R(T.T | T^v)."""
    for a in (a1, a2, a3):
        if len(a) != tree.n_vertices:
            raise DomainError("labelling does not fit the tree")
    if not _product_admissible(tree, a1, a2, a3):
        return ZERO
    ls1, ls2, ls3 = (labelled_shape(tree, a) for a in (a1, a2, a3))
    ls_tt = (ls1, ls2, _root2(ls3))
    ls_dup = _graft(ls3, iter(zip(_leaf2(ls1), _leaf2(ls2))))
    tm = None if m is None else spin(m).twice
    return _projection_sum(ls_dup, ls_tt, _dup_to_join_inv(tree.n_leaves), tm)


def _graft(ls, pairs):
    if isinstance(ls, int):
        a, b = next(pairs)
        return (a, b, ls)
    left = _graft(ls[0], pairs)
    right = _graft(ls[1], pairs)
    return (left, right, ls[2])


@lru_cache(maxsize=None)
def _dup_to_join_inv(n: int) -> tuple[int, ...]:
    return _inverse_perm(_dup_to_join(n), 2 * n)


@lru_cache(maxsize=None)
def _dup_to_join(n: int) -> tuple[int, ...]:
    # interleave maps join positions to duplicate positions; we need its inverse
    sig = interleave(n)
    inv = [0] * (2 * n)
    for i, s in enumerate(sig):
        inv[s - 1] = i + 1
    return tuple(inv)


def _product_admissible(tree, a1, a2, a3) -> bool:
    l1, l2, l3 = twice_labels(a1), twice_labels(a2), twice_labels(a3)
    for v in tree.leaves + (tree.root,):
        if not _triad2(l1[v], l2[v], l3[v]):
            return False
    return True


def recoupling_R(tree: CouplingTree, a1: Labelling, a2: Labelling, a3: Labelling) -> SurdSum:
    """R(T)^{a1 a2}_{a3} as a product of one 9-lambda symbol per internal vertex."""
    for a in (a1, a2, a3):
        if len(a) != tree.n_vertices:
            raise DomainError("labelling does not fit the tree")
    if not _product_admissible(tree, a1, a2, a3):
        return ZERO
    l1, l2, l3 = twice_labels(a1), twice_labels(a2), twice_labels(a3)
    out = ONE
    for v in tree.nodes:
        x, y = tree.children[v]
        f = _nine_lambda2((l1[x], l1[y], l1[v], l2[x], l2[y], l2[v], l3[x], l3[y], l3[v]))
        if not f:
            return ZERO
        out = out * f
    return out


# ---------------------------------------------------------------------------
# change of tree


@dataclass(frozen=True)
class ChangeOfTree:
    """Matrix R(T2|T1): ``matrix[i][k]`` pairs ``source[i]`` with ``target[k]``."""

    source: list
    target: list
    matrix: list

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.matrix])


def change_of_tree(t1: CouplingTree, t2: CouplingTree, leaves: Sequence, root,
                   sigma: Sequence[int] | None = None) -> ChangeOfTree:
    """Unitary matrix between the coupled bases of two trees.

    ``leaves`` are the leaf spins of T1 (planar order).
    """
    n = t1.n_leaves
    inv = _inverse_perm(sigma if sigma is not None else range(1, n + 1), n)
    leaves2 = [leaves[inv[p]] for p in range(n)]
    src = enumerate_labellings(t1, leaves, root)
    tgt = enumerate_labellings(t2, leaves2, root)
    mat = [[recoupling_coeff(t1, a, t2, b, sigma) for b in tgt] for a in src]
    return ChangeOfTree(src, tgt, mat)
