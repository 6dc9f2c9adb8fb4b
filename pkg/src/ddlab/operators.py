"""Assembled operator set on the subassembled coordinates and its axioms.

Builds tilde(S), hat(S), the averaging operator E, the jump operator B and
its weighted generalized inverse B_D, and verifies the defining identities
numerically:

    E r_hat = I            (averaging restores continuous functions)
    (r_hat E)^2 = r_hat E  (projection onto the continuous subspace)
    B r_hat = 0            (jumps of continuous functions vanish)
    B B_D^T = I            (B_D^T reproduces prescribed jumps)
    B_D^T B + r_hat E = I  (complementary projections)
    hat(S) = r_hat^T tilde(S) r_hat
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedCoarseSpace
from .linalg import symmetrize
from .model import SchurLocal
from .spaces import CoarseSpec, InterfaceLayout, Subassembly, _side_dofs, check_wtilde_spd

SCALING_KINDS = ("multiplicity", "stiffness")
DEFAULT_AXIOM_TOL = 1e-12


@dataclass
class Weights:
    """Per-W-dof averaging weight; within every clique the weights sum to 1."""

    values: np.ndarray
    kind: str


def build_weights(
    locals_: list[SchurLocal], layout: InterfaceLayout, kind: str
) -> Weights:
    if kind not in SCALING_KINDS:
        raise ValueError(f"unknown scaling kind {kind!r}")
    values = np.zeros(layout.w_dim)
    if kind == "multiplicity":
        for clique in layout.cliques:
            values[clique] = 1.0 / clique.size
    else:
        diag = np.concatenate([loc.matrix.diagonal() for loc in locals_]) \
            if locals_ else np.zeros(0)
        if diag.size != layout.w_dim:
            raise ValueError("Schur locals inconsistent with layout")
        for clique in layout.cliques:
            total = diag[clique].sum()
            if total <= 0.0:
                raise ValueError("zero clique diagonal sum (degenerate Schur complement)")
            values[clique] = diag[clique] / total
    return Weights(values=values, kind=kind)


def harmonize_edge_weights(
    weights: Weights, layout: InterfaceLayout, coarse: CoarseSpec
) -> Weights:
    """Replace per-node weights by their per-side edge mean on averaged edges.

    Edge-average identification couples all nodes of an edge into shared
    coordinates; a constant weight per edge side keeps the closed-form B_D
    exactly complementary to the averaging projection.
    """
    if not coarse.averaged:
        return weights
    values = weights.values.copy()
    for edge in coarse.edges:
        dofs_i, dofs_j = _side_dofs(layout, edge)
        wi = values[dofs_i].mean()
        wj = values[dofs_j].mean()
        total = wi + wj
        values[dofs_i] = wi / total
        values[dofs_j] = wj / total
    return Weights(values=values, kind=weights.kind)


def build_stilde(s: np.ndarray, r_tilde: np.ndarray) -> np.ndarray:
    """tilde(S) = r_tilde^T S r_tilde in subassembled coordinates."""
    return symmetrize(r_tilde.T @ s @ r_tilde)


def build_shat(stilde: np.ndarray, r_hat: np.ndarray) -> np.ndarray:
    """hat(S) = r_hat^T tilde(S) r_hat."""
    return symmetrize(r_hat.T @ stilde @ r_hat)


def averaging_matrix(layout: InterfaceLayout, weights: Weights) -> np.ndarray:
    """(dim hat W) x (dim W): weighted averaging of each clique."""
    a = np.zeros((layout.w_hat_dim, layout.w_dim))
    for row, clique in enumerate(layout.cliques):
        a[row, clique] = weights.values[clique]
    return a


def build_E(layout: InterfaceLayout, weights: Weights, sub: Subassembly) -> np.ndarray:
    """Averaging operator into hat(W) coordinates, (dim hat W) x (dim tilde W).

    Each hat(W) coordinate is the weighted average of the node's W
    representatives; coarse-identified coordinates contribute their summed
    clique weight (1 for corners). The projection onto the continuous
    subspace is the composition r_hat @ E.
    """
    return averaging_matrix(layout, weights) @ sub.r_tilde


def build_B(layout: InterfaceLayout, sub: Subassembly) -> np.ndarray:
    """Signed jump operator: one row per dual pair, +1 and -1 entries.

    null(B) = range(r_hat), range(B) = the multiplier space; B has full row
    rank because the dual pairs are disjoint.
    """
    if sub.unsupported_cliques:
        raise UnsupportedCoarseSpace(
            "dual cliques of multiplicity > 2 present "
            f"(nodes {sub.unsupported_cliques}); jump rows are only defined "
            "for multiplicity-2 dual cliques"
        )
    b = np.zeros((len(sub.dual_pairs), sub.w_tilde_dim))
    for row, pair in enumerate(sub.dual_pairs):
        b[row, pair.ci] = 1.0
        b[row, pair.cj] = -1.0
    return b


def _pair_weights(weights: Weights, pair) -> tuple[float, float]:
    wi = float(weights.values[pair.wdofs_i].mean())
    wj = float(weights.values[pair.wdofs_j].mean())
    return wi, wj


def build_BD(weights: Weights, layout: InterfaceLayout, sub: Subassembly) -> np.ndarray:
    """Weighted jump map: for a dual pair with side weights (w_i, w_j) the row
    is +w_j on side i and -w_i on side j, so that B B_D^T = I and
    B_D^T B + r_hat E = I hold exactly."""
    bd = np.zeros((len(sub.dual_pairs), sub.w_tilde_dim))
    for row, pair in enumerate(sub.dual_pairs):
        wi, wj = _pair_weights(weights, pair)
        bd[row, pair.ci] = wj
        bd[row, pair.cj] = -wi
    return bd


@dataclass
class OperatorSet:
    """All assembled operators of one problem instance."""

    s: np.ndarray  # block-diagonal on W
    stilde: np.ndarray
    shat: np.ndarray
    e: np.ndarray  # (dim hat W) x (dim tilde W)
    b: np.ndarray  # (n_lambda) x (dim tilde W)
    b_d: np.ndarray  # (n_lambda) x (dim tilde W)
    r_tilde: np.ndarray
    r_hat: np.ndarray
    weights: Weights
    layout: InterfaceLayout
    sub: Subassembly
    coarse: CoarseSpec

    @property
    def n_lambda(self) -> int:
        return self.b.shape[0]

    @property
    def w_tilde_dim(self) -> int:
        return self.stilde.shape[0]

    @property
    def w_hat_dim(self) -> int:
        return self.shat.shape[0]


def build_operator_set(
    locals_: list[SchurLocal],
    s: np.ndarray,
    layout: InterfaceLayout,
    coarse: CoarseSpec,
    sub: Subassembly,
    scaling: str,
) -> OperatorSet:
    weights = build_weights(locals_, layout, scaling)
    weights = harmonize_edge_weights(weights, layout, coarse)
    stilde = build_stilde(s, sub.r_tilde)
    shat = build_shat(stilde, sub.r_hat)
    e = build_E(layout, weights, sub)
    if sub.unsupported_cliques:
        # Missing coarse constraints at shared nodes. When that also leaves
        # tilde(S) singular, the singularity is the root cause and is
        # diagnosed first; otherwise build_B reports the jump-row limitation.
        check_wtilde_spd(stilde, sub)
    b = build_B(layout, sub)
    b_d = build_BD(weights, layout, sub)
    return OperatorSet(
        s=s,
        stilde=stilde,
        shat=shat,
        e=e,
        b=b,
        b_d=b_d,
        r_tilde=sub.r_tilde,
        r_hat=sub.r_hat,
        weights=weights,
        layout=layout,
        sub=sub,
        coarse=coarse,
    )


@dataclass
class AxiomReport:
    residuals: dict[str, float]
    rank_b: int
    null_b_dim_ok: bool
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.null_b_dim_ok and all(
            r <= self.tol for r in self.residuals.values()
        )


def _maxabs(a: np.ndarray) -> float:
    return float(np.abs(a).max(initial=0.0))


def axiom_check(ops: OperatorSet, tol: float = DEFAULT_AXIOM_TOL) -> AxiomReport:
    """Max-abs residuals of the operator identities, plus the rank condition
    null(B) = range(r_hat) checked as B r_hat = 0 together with
    dim null(B) = dim hat(W)."""
    nt = ops.w_tilde_dim
    nh = ops.w_hat_dim
    identity_t = np.eye(nt)
    re = ops.r_hat @ ops.e
    residuals = {
        "e_rhat_identity": _maxabs(ops.e @ ops.r_hat - np.eye(nh)),
        "projection_idempotent": _maxabs(re @ re - re),
        "b_annihilates_continuous": _maxabs(ops.b @ ops.r_hat),
        "b_bd_identity": _maxabs(ops.b @ ops.b_d.T - np.eye(ops.n_lambda)),
        "complementarity": _maxabs(ops.b_d.T @ ops.b + re - identity_t),
        "shat_consistency": _maxabs(ops.shat - ops.r_hat.T @ ops.stilde @ ops.r_hat),
    }
    rank_b = int(np.linalg.matrix_rank(ops.b)) if ops.n_lambda else 0
    null_b_dim_ok = (rank_b == ops.n_lambda) and (nt - rank_b == nh)
    return AxiomReport(residuals=residuals, rank_b=rank_b, null_b_dim_ok=null_b_dim_ok, tol=tol)
