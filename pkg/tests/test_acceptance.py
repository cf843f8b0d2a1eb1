"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""
from __future__ import annotations

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from acceptance_registry import record
from recouple.exact import SurdSum
from recouple.gauge import LatticeModel, assemble_hamiltonian, spectrum
from recouple.quasichar import (NormParams, TracePolynomial, cherry_basis, cherry_index, evaluate,
                                expand_invariant, matrix_elements, quasichar_basis,
                                stratum_operator_su2_n2, stratum_vanishes, structure_constants)
from recouple.recoupling import recoupling_R, recoupling_R_oracle
from recouple.su2 import Su2Element, clebsch_series, dim, is_triad, nine_lambda, nine_lambda_zero_rule, wigner9j
from recouple.su3 import (STRATUM_RELATIONS, T1, T2, random_su3, su3_cg_series, su3_dim,
                          su3_evaluate_expansion, su3_expand_invariant, su3_nine_lambda)
from recouple.trees import all_trees, enumerate_labellings, standard_tree
from recouple.exact import HalfInt

H = Fraction(1, 2)


class Clock:
    def __init__(self, limit: float):
        self.limit = limit
        self.t0 = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def ok(self) -> bool:
        return self.elapsed < self.limit

    def __str__(self) -> str:
        return f"{self.elapsed:.1f}s of {self.limit:g}s"


def finish(n, ok, clock, detail):
    ok = ok and clock.ok()
    record(n, ok, f"{detail} [{clock}]")
    assert ok, detail


def test_criterion_1_su2_commutator_expansion():
    clock = Clock(1.0)
    got = expand_invariant(TracePolynomial.commutator_square(), 2, standard_tree(2))
    want = {cherry_index(1, 0, 1): 1, cherry_index(0, 1, 1): 1, cherry_index(1, 1, 0): 3,
            cherry_index(1, 1, 1): -2, cherry_index(0, 0, 0): -3}
    ok = got == {q: SurdSum.rational(c) for q, c in want.items()}
    finish(1, ok, clock, f"tr([a1,a2]^2) expansion exact, {len(got)} terms")


def _triples(tree, top=1):
    spins = [HalfInt.from_twice(t) for t in range(2 * top + 1)]
    labs = [a for lv in itertools.product(spins, repeat=tree.n_leaves)
            for a in enumerate_labellings(tree, lv, max_label=top) if a.root <= top]
    cache = {}
    for a1, a2 in itertools.product(labs, repeat=2):
        l1, l2 = a1.leaf_labels(tree), a2.leaf_labels(tree)
        opts = [[j for j in clebsch_series(x, y) if j <= top] for x, y in zip(l1, l2)]
        for lv3 in itertools.product(*opts):
            for j3 in clebsch_series(a1.root, a2.root):
                if j3 > top:
                    continue
                key = (lv3, j3)
                if key not in cache:
                    cache[key] = enumerate_labellings(tree, lv3, j3, max_label=top)
                for a3 in cache[key]:
                    yield a1, a2, a3


@pytest.mark.slow
def test_criterion_2_factorized_R_equals_projection_sum():
    clock = Clock(60.0)
    n = bad = 0
    trees = [t for k in range(1, 5) for t in all_trees(k)]
    for tree in trees:
        for a1, a2, a3 in _triples(tree):
            n += 1
            if recoupling_R(tree, a1, a2, a3) != recoupling_R_oracle(tree, a1, a2, a3):
                bad += 1
    finish(2, bad == 0 and n > 0, clock, f"{n} labelling triples on {len(trees)} trees (N<=4, spins<=1), {bad} mismatches")


@pytest.mark.slow
def test_criterion_3_pointwise_multiplication_law():
    clock = Clock(120.0)
    rng = np.random.default_rng(20240)
    worst, pairs = 0.0, 0
    for n, n_pairs in ((2, None), (3, 300)):
        basis = quasichar_basis(standard_tree(n), Fraction(3, 2))
        if n_pairs is None:
            chosen = list(itertools.combinations_with_replacement(basis, 2))
        else:
            chosen = [(basis[i], basis[k]) for i, k in rng.integers(len(basis), size=(n_pairs, 2))]
        tuples = [[Su2Element.random(rng) for _ in range(n)] for _ in range(20)]
        cache: dict = {}

        def ev(q, t):
            key = (q, t)
            if key not in cache:
                cache[key] = evaluate(q, tuples[t])
            return cache[key]

        for q1, q2 in chosen:
            prod = structure_constants(q1, q2)
            for t in range(20):
                lhs = sum(float(c) * ev(q, t) for q, c in prod.items())
                worst = max(worst, abs(lhs - ev(q1, t) * ev(q2, t)))
            pairs += 1
    finish(3, worst < 1e-10, clock, f"{pairs} products x 20 Haar tuples (N=2 all pairs, N=3 300 sampled), max |diff| {worst:.2e}")


def test_criterion_4_nine_lambda_bridge():
    clock = Clock(30.0)
    spins = [HalfInt.from_twice(t) for t in range(5)]
    triads = [t for t in itertools.product(spins, repeat=3) if is_triad(*t)]
    n = bad = 0
    for rows in itertools.product(triads, repeat=3):
        if not all(is_triad(*c) for c in zip(*rows)):
            continue
        n += 1
        r1, r2, r3 = rows
        scale = SurdSum.sqrt(dim(r1[2]) * dim(r2[2]) * dim(r3[0]) * dim(r3[1]))
        if nine_lambda(rows) != scale * wigner9j(rows):
            bad += 1
    # zero-entry rule on every array with a leading (0, k, k) row
    z = 0
    for k in spins:
        for rest in itertools.product(spins, repeat=6):
            j1, j2, j, jp1, jp2, jp = rest
            z += 1
            if wigner9j([(0, k, k), (j1, j2, j), (jp1, jp2, jp)]) != nine_lambda_zero_rule(k, *rest):
                bad += 1
    finish(4, bad == 0, clock, f"{n} admissible arrays (entries<=2) and {z} zero-entry arrays, {bad} mismatches")


def test_criterion_5_stratum_two_paths():
    clock = Clock(60.0)
    worst, off = 0.0, 0
    rc = expand_invariant(TracePolynomial.commutator_square(), 2, standard_tree(2))
    for p in (NormParams(1.0, 1.0), NormParams(0.3, 0.7)):
        basis, closed = stratum_operator_su2_n2(p, Fraction(3, 2))
        generic = matrix_elements(rc, basis, p)
        worst = max(worst, float(np.max(np.abs(closed - generic))))
        for i, k in itertools.product(range(len(basis)), repeat=2):
            if stratum_vanishes(basis[i], basis[k]) and (closed[i, k] != 0.0 or generic[i, k] != 0.0):
                off += 1
    finish(5, worst < 1e-10 and off == 0, clock,
           f"{len(basis)}x{len(basis)} matrix, max |closed - pipeline| {worst:.2e}, {off} nonzero entries off the triad pattern")


def test_criterion_6_su3_dimension_identity():
    clock = Clock(5.0)
    bad = sum(1 for a, b, c, d in itertools.product(range(4), repeat=4)
              if sum(k * su3_dim(r) for r, k in su3_cg_series((a, b), (c, d)).items()) != su3_dim((a, b)) * su3_dim((c, d)))
    finish(6, bad == 0, clock, f"256 label pairs (n,m<=3), {bad} violations")


def test_criterion_7_su3_quintet():
    clock = Clock(120.0)
    want = {("21", "22"): 1.0, ("21", "30"): math.sqrt(3) / 2, ("21", "11"): math.sqrt(6) / 4,
            ("10", "30"): 0.5, ("10", "11"): math.sqrt(10) / 4}
    worst = 0.0
    for (n1, r), w in want.items():
        val = su3_nine_lambda([("20", "20", "21"), ("01", "00", "01"), (n1, "20", r)])
        worst = max(worst, abs(abs(val) - w))
    finish(7, worst < 1e-9, clock, f"|W| quintet, max deviation {worst:.2e}")


REFERENCE = {
    "t1": (T1, {"20,20,40": 1, "20,20,21": -1, "20,20,02": 1, "01,01,02": -1, "01,01,10": 1}),
    "t2": (T2, {"20,20,40": 1, "20,20,02": -0.5, "20,01,21": -0.5, "01,20,21": -0.5,
                "20,01,10": 0.5, "01,20,10": 0.5, "01,01,02": 0.5}),
    "r1": (STRATUM_RELATIONS["r1"], {"20,20,21": -1, "20,20,02": 1.5, "20,01,21": 0.5, "01,20,21": 0.5,
                                     "20,01,10": -0.5, "01,20,10": -0.5, "01,01,21": -1.5, "01,01,10": 1.5}),
}


def test_criterion_8_su3_invariant_expansions():
    clock = Clock(300.0)
    rng = np.random.default_rng(8)
    pts = [(random_su3(rng), random_su3(rng)) for _ in range(10)]
    notes, ok = [], True
    for name, (poly, reference) in REFERENCE.items():
        got = su3_expand_invariant(poly)
        mine = sorted(abs(v) for v in got.values())
        theirs = sorted(abs(v) for v in reference.values())
        match = len(mine) == len(theirs) and all(abs(a - b) < 1e-8 for a, b in zip(mine, theirs))
        pointwise = max(abs(su3_evaluate_expansion(got, a1, a2) - poly.evaluate([a1, a2])) for a1, a2 in pts)
        ok = ok and match and pointwise < 1e-8
        diff = {k: v for k, v in reference.items()
                if abs(abs(complex(dict((str(q), c) for q, c in got.items()).get(k, 0))) - abs(v)) > 1e-8}
        notes.append(f"{name}: {len(got)} terms, |coeff| {'match' if match else 'differ at ' + str(sorted(diff))}, "
                     f"pointwise {pointwise:.1e}")
    finish(8, ok, clock, "; ".join(notes))


def test_criterion_9_hamiltonian_properties():
    clock = Clock(30.0)
    g2 = 1e3
    sp = assemble_hamiltonian(LatticeModel(1, ((1,),), g=math.sqrt(g2), delta=1.0), j_max=2)
    s = spectrum(sp)
    eps = np.sort([float(e) for e in sp.casimir_diag])
    scale = g2 / 2
    target = scale * eps
    rel = np.abs(s.eigenvalues - target)
    # the eps = 0 level has no relative scale; it is held to 1% of the first excitation
    tol = 0.01 * scale * np.where(eps > 0, eps, eps[eps > 0].min())
    sym_ok = sp.is_symmetric() and np.array_equal(sp.matrix(), sp.matrix().T)
    others = [assemble_hamiltonian(LatticeModel(2, ((1, 2, -1, -2),)), j_max=1),
              assemble_hamiltonian(LatticeModel(3, ((1, 2, -3), (3, -1))), j_max=1)]
    sym_ok = sym_ok and all(o.is_symmetric() for o in others)
    res = max(float(np.max(x.residuals / x.h_norm)) for x in [s] + [spectrum(o) for o in others])
    ok = sym_ok and bool(np.all(rel <= tol)) and res < 1e-8
    finish(9, ok, clock, f"symmetric={sym_ok}, strong-coupling worst |E - g^2 eps/2| = {rel.max():.2e} "
           f"(levels {', '.join(f'{x:.6g}' for x in s.eigenvalues)}), residual/||H|| {res:.1e}")


@pytest.mark.slow
def test_criterion_10_monte_carlo_gram():
    clock = Clock(60.0)
    qs = cherry_basis(1)[:10]
    rng = np.random.default_rng(10)
    n = 10_000
    w = np.array([math.sqrt(dim(q.leaves[0]) * dim(q.leaves[1]) / dim(q.root)) for q in qs])
    vals = np.empty((n, len(qs)), dtype=complex)
    for s in range(n):
        pts = [Su2Element.random(rng), Su2Element.random(rng)]
        vals[s] = [evaluate(q, pts) for q in qs]
    vals *= w
    prods = np.conj(vals)[:, :, None] * vals[:, None, :]
    mean = prods.mean(axis=0)
    sigma = prods.std(axis=0) / math.sqrt(n)
    dev = np.abs(mean - np.eye(len(qs)))
    worst = float(np.max(dev / np.maximum(sigma, 1e-300)))
    ok = bool(np.all(dev <= 3 * sigma + 1e-12))
    finish(10, ok, clock, f"10 cherry quasicharacters, {n} Haar samples, worst deviation {worst:.2f} sigma")
