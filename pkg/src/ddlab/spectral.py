"""Spectra of the preconditioned operators and the theorem verdicts.

The preconditioned operators are products of a symmetric PSD preconditioner
matrix and an SPD system matrix; their spectra are computed through the
symmetric similarity transform, the norm bounds omega through energy-norm
operator norms, and the two spectra are compared as sorted multisets after
stripping the eigenvalue-1 band.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DdlabError
from .linalg import energy_op_norm_sq, gen_eig_spd, symmetrize
from .operators import OperatorSet
from .precond import (
    BddcPrecond,
    FetiDpSystem,
    bddc_apply,
    feti_F_apply,
    feti_M_apply,
    pfetidp_apply,
)

ONE_TOL = 1e-8  # absolute band around the eigenvalue 1
PAIR_RTOL = 1e-8  # pairwise relative tolerance for stripped spectra
BOUND_TOL = 1e-10  # slack for the eigenvalue bounds and the omega equality
OPERATOR_EQ_TOL = 1e-12  # max-abs tolerance for the operator identity


def assemble_dense(apply_op: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """Column-by-column dense assembly of a matrix-free linear operator."""
    cols = [apply_op(col) for col in np.eye(dim)]
    return np.column_stack(cols) if cols else np.zeros((dim, 0))


@dataclass
class SpectraComparison:
    """Verdict of the multiset comparison of the two spectra."""

    stripped_bddc: np.ndarray
    stripped_feti: np.ndarray
    mult_one_bddc: int
    mult_one_feti: int
    lists_match: bool
    mult_order_ok: bool
    one_tol: float
    pair_rtol: float

    @property
    def passed(self) -> bool:
        return self.lists_match and self.mult_order_ok


def compare_spectra(
    eigs_bddc: np.ndarray,
    eigs_feti: np.ndarray,
    one_tol: float = ONE_TOL,
    pair_rtol: float = PAIR_RTOL,
) -> SpectraComparison:
    def strip(eigs):
        eigs = np.sort(np.asarray(eigs, dtype=float))
        in_band = np.abs(eigs - 1.0) <= one_tol
        return eigs[~in_band], int(in_band.sum())

    kept_b, mult_b = strip(eigs_bddc)
    kept_f, mult_f = strip(eigs_feti)
    if kept_b.size != kept_f.size:
        match = False
    elif kept_b.size == 0:
        match = True
    else:
        scale = np.maximum(np.abs(kept_b), np.abs(kept_f))
        match = bool(np.all(np.abs(kept_b - kept_f) <= pair_rtol * scale))
    return SpectraComparison(
        stripped_bddc=kept_b,
        stripped_feti=kept_f,
        mult_one_bddc=mult_b,
        mult_one_feti=mult_f,
        lists_match=match,
        mult_order_ok=mult_f <= mult_b,
        one_tol=one_tol,
        pair_rtol=pair_rtol,
    )


def omega_bounds(ops: OperatorSet) -> tuple[float, float | None]:
    """Energy-norm bounds: omega_bddc = ||r_hat E||^2 in the tilde(S) norm,
    omega_feti = ||B_D^T B||^2; the latter is absent when there are no
    multipliers."""
    if ops.w_tilde_dim == 0:
        return 1.0, None
    omega_bddc = energy_op_norm_sq(ops.r_hat @ ops.e, ops.stilde)
    omega_feti = None
    if ops.n_lambda > 0:
        omega_feti = energy_op_norm_sq(ops.b_d.T @ ops.b, ops.stilde)
    return float(omega_bddc), omega_feti


def condition_number(eigs: np.ndarray) -> float | None:
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size == 0:
        return None
    if eigs[0] <= 0.0:
        raise DdlabError(f"invalid preconditioned operator: lambda_min = {eigs[0]:.3e} <= 0")
    return float(eigs[-1] / eigs[0])


@dataclass
class SpectralReport:
    eigs_bddc: np.ndarray
    eigs_feti: np.ndarray
    kappa_bddc: float | None
    kappa_feti: float | None
    omega_bddc: float
    omega_feti: float | None
    comparison: SpectraComparison
    operator_identity_residual: float  # max-abs of M_pfetidp - M_bddc
    selfadjoint_residual: float  # asymmetry of hat(S) (M_bddc hat(S))
    flags: dict[str, bool] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())


def spectral_report(
    ops: OperatorSet,
    bddc: BddcPrecond,
    feti: FetiDpSystem,
    one_tol: float = ONE_TOL,
) -> SpectralReport:
    nh = ops.w_hat_dim
    nl = feti.n_lambda

    m_bddc = assemble_dense(lambda r: bddc_apply(bddc, r), nh)
    m_pfeti = assemble_dense(lambda r: pfetidp_apply(feti, r), nh)
    op_identity = float(np.abs(m_pfeti - m_bddc).max(initial=0.0))

    p_bddc = m_bddc @ ops.shat
    selfadj = float(np.abs(ops.shat @ p_bddc - (ops.shat @ p_bddc).T).max(initial=0.0))

    eigs_bddc = gen_eig_spd(symmetrize(m_bddc), ops.shat) if nh else np.zeros(0)
    if nl:
        f_dense = assemble_dense(lambda lam: feti_F_apply(feti, lam), nl)
        m_f = assemble_dense(lambda mu: feti_M_apply(feti, mu), nl)
        eigs_feti = gen_eig_spd(symmetrize(m_f), symmetrize(f_dense))
    else:
        eigs_feti = np.zeros(0)

    omega_b, omega_f = omega_bounds(ops)
    comparison = compare_spectra(eigs_bddc, eigs_feti, one_tol=one_tol)
    kappa_b = condition_number(eigs_bddc)
    kappa_f = condition_number(eigs_feti)

    flags = {
        "thm1_operator_equal": op_identity <= OPERATOR_EQ_TOL,
        "thm2_lower": bool(
            (eigs_bddc.size == 0 or eigs_bddc[0] >= 1.0 - BOUND_TOL)
            and (eigs_feti.size == 0 or eigs_feti[0] >= 1.0 - BOUND_TOL)
        ),
        "thm2_upper_bddc": bool(
            eigs_bddc.size == 0 or eigs_bddc[-1] <= omega_b * (1.0 + BOUND_TOL)
        ),
        "thm2_upper_feti": bool(
            eigs_feti.size == 0
            or (omega_f is not None and eigs_feti[-1] <= omega_f * (1.0 + BOUND_TOL))
        ),
        "thm2_omega_equal": bool(
            omega_f is None or abs(omega_b - omega_f) <= BOUND_TOL * omega_b
        ),
        "thm3_spectra_match": comparison.lists_match,
        "thm3_mult_order": comparison.mult_order_ok,
    }
    tolerances = {
        "one_tol": one_tol,
        "pair_rtol": PAIR_RTOL,
        "bound_tol": BOUND_TOL,
        "operator_eq_tol": OPERATOR_EQ_TOL,
    }
    return SpectralReport(
        eigs_bddc=eigs_bddc,
        eigs_feti=eigs_feti,
        kappa_bddc=kappa_b,
        kappa_feti=kappa_f,
        omega_bddc=omega_b,
        omega_feti=omega_f,
        comparison=comparison,
        operator_identity_residual=op_identity,
        selfadjoint_residual=selfadj,
        flags=flags,
        tolerances=tolerances,
    )
