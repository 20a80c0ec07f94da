"""cbsforge: verification and counterexample-search engine for an
alternating quadratic functional on complex hypermatrices, its exact
polynomial identities, its symmetry group, and the dense-operator
formulation linking it to two-party state distillability."""

from ._kernels import BACKEND
from .hypermatrix import (
    BudgetExceededError,
    DimVector,
    Hypermatrix,
    IndexSubset,
    IntHypermatrix,
    NumericalIntegrityError,
    ShapeMismatchError,
    frobenius_norm_sq,
    linear_offset,
    modified_indices,
    multi_index,
    random_hypermatrix,
)
from .cbs import CbsInput, PhiBreakdown, phi, phi_m1_closed, phi_m2_compact, phi_subset

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BudgetExceededError",
    "CbsInput",
    "DimVector",
    "Hypermatrix",
    "IndexSubset",
    "IntHypermatrix",
    "NumericalIntegrityError",
    "PhiBreakdown",
    "ShapeMismatchError",
    "frobenius_norm_sq",
    "linear_offset",
    "modified_indices",
    "multi_index",
    "phi",
    "phi_m1_closed",
    "phi_m2_compact",
    "phi_subset",
    "random_hypermatrix",
    "__version__",
]
