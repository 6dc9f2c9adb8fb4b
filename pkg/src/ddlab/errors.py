"""Exception types shared across the package."""


class DdlabError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefinite(DdlabError):
    """Cholesky pivot failure: the matrix is not numerically SPD.

    ``pivot`` is the zero-based index of the failing pivot, ``value`` the
    offending pivot value. ``meaning`` optionally carries a human-readable
    description of the coordinate the pivot belongs to.
    """

    def __init__(self, pivot, value, meaning=None):
        self.pivot = pivot
        self.value = value
        self.meaning = meaning
        msg = f"matrix not positive definite at pivot {pivot} (value {value:.3e})"
        if meaning is not None:
            msg += f", coordinate: {meaning}"
        super().__init__(msg)


class EigenConvergenceError(DdlabError):
    """Jacobi sweeps exhausted before the off-diagonal norm dropped below threshold."""

    def __init__(self, off_norm, threshold, sweeps):
        self.off_norm = off_norm
        self.threshold = threshold
        self.sweeps = sweeps
        super().__init__(
            f"eigensolver did not converge in {sweeps} sweeps: "
            f"off-diagonal norm {off_norm:.3e} > {threshold:.3e}"
        )


class EmptyCoarseSpace(DdlabError):
    """No coarse degrees of freedom available although several substructures exist."""


class IndefiniteOperator(DdlabError):
    """PCG detected a non-SPD operator or a preconditioner with negative curvature."""


class UnsupportedCoarseSpace(DdlabError):
    """A node shared by three or more substructures carries no coarse
    constraint, so no two-entry jump rows exist for its degrees of freedom."""
