"""Desk-scale numerical laboratory for Banach-space operator theory.

The package certifies when the contraction functional
A_T(x) = (||x||^2 - ||Tx||^2)^(1/2) defines a norm, builds and verifies
isometric dilations, tests Birkhoff-James orthogonality and
1-complementedness, constructs sigma-shifts, and computes Wold and
canonical decompositions, all on finite p-norm coefficient models.
"""

from . import (
    decomposition,
    dilation,
    functionals,
    gallery,
    kernel,
    operators,
    optim,
    orthogonality,
    shifts,
    spaces,
    subspace,
)
from .dilation import (
    build_min_dilation,
    build_nagy_dilation,
    lambda_window,
    triangle_margin,
    triangle_violation_search,
    verify_dilation,
)
from .errors import (
    ArgumentError,
    ContractionError,
    InconsistentWitness,
    LabError,
)
from .gallery import run_counterexample, run_suite
from .operators import Operator, a_T, operator_norm
from .orthogonality import bj_min, bj_orthogonal
from .spaces import BlockSeq, DirectSum2, Lp, PolySup

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "decomposition",
    "dilation",
    "functionals",
    "gallery",
    "kernel",
    "operators",
    "optim",
    "orthogonality",
    "shifts",
    "spaces",
    "subspace",
    "ArgumentError",
    "ContractionError",
    "InconsistentWitness",
    "LabError",
    "Lp",
    "DirectSum2",
    "BlockSeq",
    "PolySup",
    "Operator",
    "a_T",
    "operator_norm",
    "bj_min",
    "bj_orthogonal",
    "triangle_violation_search",
    "triangle_margin",
    "lambda_window",
    "build_min_dilation",
    "build_nagy_dilation",
    "verify_dilation",
    "run_counterexample",
    "run_suite",
]
