"""Preconditioned conjugate gradients with full iteration telemetry.

The iteration starts from the zero vector and stops on the unpreconditioned
residual 2-norm relative to ||b||, which is comparable across
preconditioners. When the exact solution is supplied the trace also records
the energy-norm error per iterate, which feeds the condition-number error
bound check

    ||e_k||_K <= 2 ((sqrt(kappa) - 1) / (sqrt(kappa) + 1))^k ||e_0||_K.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import IndefiniteOperator

Apply = Callable[[np.ndarray], np.ndarray]


@dataclass
class PcgTrace:
    residual_norms: list[float] = field(default_factory=list)
    precond_products: list[float] = field(default_factory=list)  # r^T M r per iterate
    energy_errors: list[float] | None = None
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    converged: bool = False
    iterates: list[np.ndarray] | None = None  # per-iteration solutions, on request


def error_bound_factor(kappa: float, k: int) -> float:
    """2 ((sqrt(kappa)-1)/(sqrt(kappa)+1))^k."""
    root = np.sqrt(kappa)
    return 2.0 * ((root - 1.0) / (root + 1.0)) ** k


def pcg(
    apply_a: Apply,
    apply_m: Apply,
    b: np.ndarray,
    tol: float = 1e-10,
    maxit: int = 500,
    exact: np.ndarray | None = None,
    keep_iterates: bool = False,
) -> PcgTrace:
    b = np.asarray(b, dtype=float)
    n = b.size
    trace = PcgTrace(x=np.zeros(n))
    if exact is not None:
        trace.energy_errors = []
    if keep_iterates:
        trace.iterates = []

    def record_error(x):
        if exact is None:
            return
        e = x - exact
        trace.energy_errors.append(float(np.sqrt(max(e @ apply_a(e), 0.0))))

    x = np.zeros(n)
    r = b.copy()
    b_norm = float(np.linalg.norm(b))
    trace.residual_norms.append(float(np.linalg.norm(r)))
    record_error(x)
    if keep_iterates:
        trace.iterates.append(x.copy())
    if n == 0 or b_norm == 0.0:
        trace.converged = True
        return trace

    z = apply_m(r)
    rz = float(r @ z)
    if rz < 0.0:
        raise IndefiniteOperator(f"preconditioner produced r^T M r = {rz:.3e} < 0")
    trace.precond_products.append(rz)
    p = z.copy()
    for k in range(1, maxit + 1):
        ap = apply_a(p)
        pap = float(p @ ap)
        if pap <= 0.0:
            raise IndefiniteOperator(f"operator produced p^T A p = {pap:.3e} <= 0")
        alpha = rz / pap
        x = x + alpha * p
        r = r - alpha * ap
        res = float(np.linalg.norm(r))
        trace.residual_norms.append(res)
        record_error(x)
        if keep_iterates:
            trace.iterates.append(x.copy())
        trace.iterations = k
        if res <= tol * b_norm:
            trace.converged = True
            break
        z = apply_m(r)
        rz_new = float(r @ z)
        if rz_new < 0.0:
            raise IndefiniteOperator(f"preconditioner produced r^T M r = {rz_new:.3e} < 0")
        trace.precond_products.append(rz_new)
        p = z + (rz_new / rz) * p
        rz = rz_new
    trace.x = x
    return trace


def check_error_bound(
    trace: PcgTrace, kappa: float, slack: float = 1e-8
) -> tuple[bool, float]:
    """Verify every recorded energy error against the kappa bound.

    Returns (ok, worst ratio of error to bound)."""
    if trace.energy_errors is None:
        raise ValueError("trace has no energy errors; pass the exact solution to pcg")
    e0 = trace.energy_errors[0]
    if e0 == 0.0:
        return True, 0.0
    worst = 0.0
    ok = True
    for k, ek in enumerate(trace.energy_errors):
        bound = error_bound_factor(kappa, k) * e0
        if bound == 0.0:
            if ek > 0.0:
                ok = False
                worst = np.inf
            continue
        ratio = ek / bound
        worst = max(worst, ratio)
        if ek > bound * (1.0 + slack):
            ok = False
    return ok, worst
