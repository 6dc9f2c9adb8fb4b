"""The three preconditioners and the dual (multiplier) system.

BDDC applies E tilde(S)^{-1} E^T to a residual on the continuous space. The
dual system iterates on multipliers: operator B tilde(S)^{-1} B^T, right-hand
side B tilde(S)^{-1} E^T f, preconditioner B_D tilde(S) B_D^T, with primal
recovery u = E tilde(S)^{-1} (E^T f - B^T lambda). The one-multiplier-step
preconditioner (lambda = 0, residual as right-hand side) is implemented
strictly through the dual-system path so its agreement with BDDC is a genuine
cross-check, not a tautology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import CholFactor, cholesky, chol_solve
from .operators import OperatorSet
from .spaces import check_wtilde_spd


@dataclass
class BddcPrecond:
    e: np.ndarray
    r_hat: np.ndarray
    stilde_chol: CholFactor


@dataclass
class FetiDpSystem:
    b: np.ndarray
    b_d: np.ndarray
    e: np.ndarray
    stilde: np.ndarray
    stilde_chol: CholFactor
    f_chol: CholFactor  # factor of the dense dual operator, SPD by full row rank of B

    @property
    def n_lambda(self) -> int:
        return self.b.shape[0]


def make_bddc(ops: OperatorSet) -> BddcPrecond:
    factor = check_wtilde_spd(ops.stilde, ops.sub)
    return BddcPrecond(e=ops.e, r_hat=ops.r_hat, stilde_chol=factor)


def make_fetidp(ops: OperatorSet) -> FetiDpSystem:
    factor = check_wtilde_spd(ops.stilde, ops.sub)
    f_dense = ops.b @ chol_solve(factor, ops.b.T)
    f_chol = cholesky(0.5 * (f_dense + f_dense.T))
    return FetiDpSystem(
        b=ops.b,
        b_d=ops.b_d,
        e=ops.e,
        stilde=ops.stilde,
        stilde_chol=factor,
        f_chol=f_chol,
    )


def bddc_apply(p: BddcPrecond, r: np.ndarray) -> np.ndarray:
    """E tilde(S)^{-1} E^T r."""
    return p.e @ chol_solve(p.stilde_chol, p.e.T @ r)


def feti_F_apply(sys: FetiDpSystem, lam: np.ndarray) -> np.ndarray:
    """Dual operator B tilde(S)^{-1} B^T applied to lam."""
    return sys.b @ chol_solve(sys.stilde_chol, sys.b.T @ lam)


def feti_rhs(sys: FetiDpSystem, f: np.ndarray) -> np.ndarray:
    """Dual right-hand side B tilde(S)^{-1} E^T f."""
    return sys.b @ chol_solve(sys.stilde_chol, sys.e.T @ f)


def feti_M_apply(sys: FetiDpSystem, mu: np.ndarray) -> np.ndarray:
    """Dual preconditioner B_D tilde(S) B_D^T applied to mu."""
    return sys.b_d @ (sys.stilde @ (sys.b_d.T @ mu))


def primal_recover(sys: FetiDpSystem, lam: np.ndarray, f: np.ndarray) -> np.ndarray:
    """u = E tilde(S)^{-1} (E^T f - B^T lambda).

    When lambda solves the dual system exactly, the unprojected iterate is
    already continuous and u is the solution of the primal problem.
    """
    w = chol_solve(sys.stilde_chol, sys.e.T @ f - sys.b.T @ lam)
    return sys.e @ w


def pfetidp_apply(sys: FetiDpSystem, r: np.ndarray) -> np.ndarray:
    """One multiplier step from lambda = 0 with residual r as right-hand side."""
    return primal_recover(sys, np.zeros(sys.n_lambda), r)


def saddle_solve(sys: FetiDpSystem, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Direct block elimination of the saddle system
    tilde(S) w + B^T lambda = E^T f, B w = 0. Returns (w, lambda)."""
    lam = chol_solve(sys.f_chol, feti_rhs(sys, f))
    w = chol_solve(sys.stilde_chol, sys.e.T @ f - sys.b.T @ lam)
    return w, lam
