"""Exact SU(2) recoupling, quasicharacter expansions and a numerical SU(3) companion."""
from __future__ import annotations

__version__ = "0.1.0"

from .exact import DomainError, HalfInt, ResourceError, SurdSum, parse_surd, spin
from .su2 import cg, clebsch_series, nine_lambda, wigner6j, wigner9j
from .trees import CouplingTree, Labelling, enumerate_labellings, parse_tree, standard_tree
from .recoupling import change_of_tree, recoupling_coeff, recoupling_R
from .quasichar import (NormParams, QuasicharIndex, TracePolynomial, expand_invariant,
                        structure_constants)

__all__ = [
    "__version__", "DomainError", "ResourceError", "HalfInt", "SurdSum", "parse_surd", "spin",
    "cg", "clebsch_series", "nine_lambda", "wigner6j", "wigner9j",
    "CouplingTree", "Labelling", "enumerate_labellings", "parse_tree", "standard_tree",
    "change_of_tree", "recoupling_coeff", "recoupling_R",
    "NormParams", "QuasicharIndex", "TracePolynomial", "expand_invariant", "structure_constants",
]
