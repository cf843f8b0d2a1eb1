"""Truncated Kogut-Susskind Hamiltonian on gauge-invariant SU(2) states.

After tree gauge fixing, a lattice reduces to N off-tree links and a list
of plaquette words.  Gauge-invariant wave functions are expanded in
quasicharacters; in the L^2-normalised basis e_I = chi_hat_I / ||chi_hat_I||
the Hamiltonian

    H = (g^2 / 2 delta) C - (1 / g^2 delta) W,   W = sum_p (W(p) + W(p)^*)

has a diagonal Casimir part and a Wilson part assembled from exact
structure constants.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from gmpy2 import mpq

from .exact import ZERO, DomainError, ResourceError, SurdSum, spin
from .quasichar import (QuasicharIndex, TracePolynomial, expand_invariant, quasichar_basis,
                        stratum_operator_su2_n2, structure_constants)
from .su2 import casimir_total, dim
from .trees import CouplingTree, parse_tree, standard_tree

__all__ = ["LatticeModel", "SpectralProblem", "Spectrum", "assemble_hamiltonian", "casimir_total",
           "spectrum", "stratum_operator_su2_n2", "wilson_coefficients", "EIGEN_CAP"]

EIGEN_CAP = 4000


@dataclass(frozen=True)
class LatticeModel:
    """Off-tree links, plaquette words and the two couplings."""

    n_links: int
    plaquettes: tuple[tuple[int, ...], ...]
    g: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        if self.n_links < 1:
            raise DomainError("need at least one link")
        if self.g <= 0 or self.delta <= 0:
            raise DomainError("g and delta must be positive")
        plaqs = tuple(tuple(int(x) for x in w) for w in self.plaquettes)
        for w in plaqs:
            if not w:
                raise DomainError("plaquette words must be nonempty")
            if any(x == 0 or abs(x) > self.n_links for x in w):
                raise DomainError(f"plaquette {w} uses links outside 1..{self.n_links}")
        object.__setattr__(self, "plaquettes", plaqs)

    def to_json(self) -> str:
        d = asdict(self)
        d["plaquettes"] = [list(w) for w in self.plaquettes]
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LatticeModel":
        try:
            d = json.loads(text)
            return cls(int(d["n_links"]), tuple(tuple(w) for w in d["plaquettes"]),
                       float(d.get("g", 1.0)), float(d.get("delta", 1.0)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"malformed model file: {exc}") from exc

    def wilson_polynomial(self) -> TracePolynomial:
        """sum_p tr(W(p)) + tr(W(p)^{-1}); the second term is the conjugate."""
        terms = []
        for w in self.plaquettes:
            terms.append((Fraction(1), w))
            terms.append((Fraction(1), tuple(-x for x in reversed(w))))
        return TracePolynomial(tuple(terms))


def _tree_for(model: LatticeModel, tree) -> CouplingTree:
    if tree is None:
        return standard_tree(model.n_links)
    t = parse_tree(tree) if isinstance(tree, str) else tree
    if t.n_leaves != model.n_links:
        raise DomainError(f"tree has {t.n_leaves} leaves but the model has {model.n_links} links")
    return t


def wilson_coefficients(model: LatticeModel, tree=None, j_max=None) -> dict[QuasicharIndex, SurdSum]:
    """Quasicharacter expansion of the Wilson operator.

    With ``j_max`` set, terms with a vertex label above it are dropped.
    """
    if not model.plaquettes:
        return {}
    t = _tree_for(model, tree)
    out = expand_invariant(model.wilson_polynomial(), model.n_links, t)
    if j_max is not None:
        jm = spin(j_max)
        out = {q: c for q, c in out.items() if q.max_label() <= jm}
    return out


def _scale(q: QuasicharIndex) -> mpq:
    """s^2 with e = s * chi_hat orthonormal: prod d_leaves / d_root."""
    return mpq(math.prod(dim(j) for j in q.leaves), dim(q.root))


@dataclass
class SpectralProblem:
    """Truncated Hamiltonian data; the Wilson matrix is kept exactly."""

    basis: list[QuasicharIndex]
    casimir_diag: list[Fraction]
    wilson_exact: dict[tuple[int, int], SurdSum]
    g: float
    delta: float
    dropped_couplings: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.basis)

    def wilson_matrix(self) -> np.ndarray:
        n = self.size
        out = np.zeros((n, n))
        for (k, j), v in self.wilson_exact.items():
            out[k, j] = float(v)
        return out

    def matrix(self) -> np.ndarray:
        """H_KJ = (g^2/2delta) eps_J delta_JK - (1/g^2 delta) W_KJ."""
        c = self.g ** 2 / (2 * self.delta)
        w = 1.0 / (self.g ** 2 * self.delta)
        return c * np.diag([float(e) for e in self.casimir_diag]) - w * self.wilson_matrix()

    def is_symmetric(self) -> bool:
        return all(self.wilson_exact.get((j, k), ZERO) == v for (k, j), v in self.wilson_exact.items())


def assemble_hamiltonian(model: LatticeModel, tree=None, j_max=Fraction(1, 2)) -> SpectralProblem:
    """Hamiltonian on all basis elements whose vertex labels are at most j_max.

    Wilson couplings to basis elements beyond the cutoff are dropped and
    counted.  With w^I the expansion of sum_p tr W(p) and Gamma_IJ^K the
    structure constants in the orthonormal basis,

        W_KJ = sum_I w^I (Gamma_IJ^K + Gamma_IK^J),

    where the second term is the contribution of W(p)^*.  The matrix is
    symmetric exactly, term by term.
    """
    t = _tree_for(model, tree)
    basis = quasichar_basis(t, j_max)
    if not basis:
        raise DomainError("empty basis at this cutoff")
    pos = {q: i for i, q in enumerate(basis)}
    ops = expand_invariant(TracePolynomial(tuple((Fraction(1), w) for w in model.plaquettes)),
                           model.n_links, t) if model.plaquettes else {}
    gamma: dict[tuple[int, int], SurdSum] = defaultdict(lambda: ZERO)
    dropped = 0
    for jdx, src in enumerate(basis):
        s_src = _scale(src)
        for q, c in ops.items():
            for tgt, sc in structure_constants(q, src).items():
                kdx = pos.get(tgt)
                if kdx is None:
                    dropped += 1
                    continue
                ratio = SurdSum.sqrt(_scale(tgt) / s_src)
                gamma[(kdx, jdx)] = gamma[(kdx, jdx)] + c * sc * ratio
    wil: dict[tuple[int, int], SurdSum] = {}
    for (k, j) in set(gamma) | {(j, k) for (k, j) in gamma}:
        v = gamma.get((k, j), ZERO) + gamma.get((j, k), ZERO)
        if v:
            wil[(k, j)] = v
    eps = [casimir_total(q.leaves) for q in basis]
    return SpectralProblem(basis, eps, wil, model.g, model.delta, dropped,
                           {"j_max": str(spin(j_max)), "tree": str(t), "truncation": "vertex-spin cutoff"})


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residuals: np.ndarray
    h_norm: float


def spectrum(sp: SpectralProblem | np.ndarray, vectors: bool = True, cap: int = EIGEN_CAP) -> Spectrum:
    """Ascending eigenvalues of the dense symmetric matrix, with residuals."""
    H = sp.matrix() if isinstance(sp, SpectralProblem) else np.asarray(sp, dtype=float)
    n = H.shape[0]
    if n > cap:
        raise ResourceError(f"matrix dimension {n} exceeds eigensolver cap {cap}")
    w, v = np.linalg.eigh(H)
    res = np.linalg.norm(H @ v - v * w, axis=0)
    return Spectrum(w, v if vectors else None, res, float(np.linalg.norm(H, 2)) if n else 0.0)
