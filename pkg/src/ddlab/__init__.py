"""Verification laboratory for dual-primal iterative substructuring
preconditioners: BDDC, FETI-DP, and the one-multiplier-step (P-FETI-DP)
variant, built from first principles on a generated 2D elliptic model problem
and certified against their operator identities and eigenvalue bounds."""

from .errors import (
    DdlabError,
    EigenConvergenceError,
    EmptyCoarseSpace,
    IndefiniteOperator,
    NotPositiveDefinite,
    UnsupportedCoarseSpace,
)
from .pipeline import Instance, RunConfig, acceptance_matrix, build_instance

__all__ = [
    "DdlabError",
    "EigenConvergenceError",
    "EmptyCoarseSpace",
    "IndefiniteOperator",
    "NotPositiveDefinite",
    "UnsupportedCoarseSpace",
    "Instance",
    "RunConfig",
    "acceptance_matrix",
    "build_instance",
]

__version__ = "0.1.0"
