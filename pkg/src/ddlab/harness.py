"""Randomized property testing of the purely abstract eigenvalue results.

The two facts being exercised, divorced from any PDE content:

  * for any SPD A and any L, T with L T = I, the eigenvalues of
    (L A^{-1} L^T)(T^T A T) lie in [1, ||T L||_A^2];
  * for complementary pairs (L1, T1), (L2, T2) with L_i T_i = I and
    T1 L1 + T2 L2 = I, the two product operators share all eigenvalues
    different from one, with identical multiplicities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr

from .linalg import cholesky, energy_op_norm_sq, gen_eig_spd, symmetrize, tri_solve

# The certified tolerances are absolute while lambda_max can reach 1e8, so
# plain float64 backward error (eps * lambda_max ~ 1e-8) would swamp them.
# The lemma checks therefore run in extended precision where the platform
# provides it (80-bit on x86-64 Linux, eps ~ 5e-20).
WIDE = np.longdouble

BOUND_TOL = 1e-10
ONE_TOL = 1e-8
PAIR_RTOL = 1e-8
RESAMPLE_BUDGET = 50

# Conditioning caps on generated instances. The eigenvalue checks are
# absolute at eigenvalue 1 while the spectrum stretches up to omega =
# ||T L||_A^2, so the verification arithmetic resolves the lower bound to
# about eps * omega; omega is capped so that stays well below BOUND_TOL.
LT_COND_MAX = 1e4
T_COND_MAX = 1e3
OMEGA_MAX = 1e8


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish orthogonal matrix via QR with sign-fixed diagonal."""
    g = rng.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.where(r.diagonal() == 0.0, 1.0, r.diagonal()))


def random_spd(n: int, rng: np.random.Generator, cond_target: float = 1e3) -> np.ndarray:
    """Q diag(d) Q^T with log-spaced d hitting the target condition number."""
    if n < 1:
        raise ValueError("n must be >= 1")
    q = random_orthogonal(n, rng)
    if n == 1:
        d = np.ones(1)
    else:
        d = np.logspace(0.0, np.log10(cond_target), n)
    return symmetrize(q @ np.diag(d) @ q.T)


def make_LT(n: int, k: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Random (L, T) with T full column rank and L T = I exactly up to roundoff."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    for _ in range(RESAMPLE_BUDGET):
        t = rng.standard_normal((n, k))
        if np.linalg.cond(t) > T_COND_MAX:
            continue
        l0 = rng.standard_normal((k, n))
        m = l0 @ t
        if np.linalg.cond(m) > LT_COND_MAX:
            continue
        l = np.linalg.solve(m, l0)
        # Newton steps square the residual of L T = I; the second runs in
        # extended precision so the hypothesis holds far below the check
        # tolerances even when ||L|| is large
        l = l + (np.eye(k) - l @ t) @ l
        l = l.astype(WIDE)
        t = t.astype(WIDE)
        l = l + (np.eye(k, dtype=WIDE) - l @ t) @ l
        return l, t
    raise RuntimeError("resample budget exhausted while drawing (L, T)")


@dataclass
class AbstractInstance:
    a: np.ndarray
    l: np.ndarray
    t: np.ndarray
    seed: int


@dataclass
class ComplementaryPair:
    l1: np.ndarray
    t1: np.ndarray
    l2: np.ndarray
    t2: np.ndarray


def make_instance(n: int, k: int, seed: int, cond_target: float = 1e3) -> AbstractInstance:
    rng = np.random.default_rng(seed)
    a = random_spd(n, rng, cond_target)
    for _ in range(RESAMPLE_BUDGET):
        l, t = make_LT(n, k, rng)
        if energy_op_norm_sq(t @ l, a.astype(WIDE)) <= OMEGA_MAX:
            break
    else:
        raise RuntimeError("resample budget exhausted while capping the spectral range")
    if np.abs(l @ t - np.eye(k)).max() > 1e-10:
        raise RuntimeError("generated instance violates L T = I")
    return AbstractInstance(a=a, l=l, t=t, seed=seed)


def make_complementary(n: int, k: int, rng: np.random.Generator) -> ComplementaryPair:
    """Complete (L1, T1) to a complementary pair: T2 spans range(I - T1 L1)
    (rank-revealing QR), L2 = T2^T (I - T1 L1)."""
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    for _ in range(RESAMPLE_BUDGET):
        l1, t1 = make_LT(n, k, rng)
        p = t1 @ l1
        complement = np.eye(n, dtype=p.dtype) - p
        q, r, _ = qr(complement.astype(float), pivoting=True)
        diag = np.abs(np.diag(r))
        rank = int((diag > 1e-10 * np.linalg.norm(complement)).sum())
        if rank != n - k:
            continue
        t2 = q[:, : n - k]
        l2 = t2.T @ complement
        return ComplementaryPair(l1=l1, t1=t1, l2=l2, t2=t2)
    raise RuntimeError("resample budget exhausted while drawing a complementary pair")


@dataclass
class LemmaVerdict:
    ok: bool
    detail: dict


def _dual_gram(l: np.ndarray, a: np.ndarray) -> np.ndarray:
    """L A^{-1} L^T through the Cholesky factor of A.

    Writing A = C C^T gives L A^{-1} L^T = G G^T with G = L C^{-T}; the
    triangular solve loses only about sqrt(cond(A)) * eps, where inverting A
    outright would lose cond(A) * eps."""
    c = cholesky(a).lower
    g = tri_solve(c, l.T, lower=True).T
    return symmetrize(g @ g.T)


def lemma1_check(inst: AbstractInstance) -> LemmaVerdict:
    """Eigenvalues of (L A^{-1} L^T)(T^T A T) against [1, ||T L||_A^2]."""
    a = inst.a.astype(WIDE)
    l = inst.l.astype(WIDE)
    t = inst.t.astype(WIDE)
    m = _dual_gram(l, a)
    k_mat = symmetrize(t.T @ a @ t)
    eigs = gen_eig_spd(m, k_mat)
    bound = float(energy_op_norm_sq(t @ l, a))
    lower_ok = bool(eigs[0] >= 1.0 - BOUND_TOL)
    upper_ok = bool(eigs[-1] <= bound * (1.0 + BOUND_TOL))
    return LemmaVerdict(
        ok=lower_ok and upper_ok,
        detail={
            "lambda_min": float(eigs[0]),
            "lambda_max": float(eigs[-1]),
            "bound": float(bound),
            "saturation": float(eigs[-1] / bound),
        },
    )


def lemma2_check(pair: ComplementaryPair, a: np.ndarray) -> LemmaVerdict:
    """Spectra equality (outside the eigenvalue-1 band) for the two sides of a
    complementary pair."""
    a = a.astype(WIDE)
    l1, t1 = pair.l1.astype(WIDE), pair.t1.astype(WIDE)
    l2, t2 = pair.l2.astype(WIDE), pair.t2.astype(WIDE)
    eigs1 = gen_eig_spd(_dual_gram(l1, a), symmetrize(t1.T @ a @ t1))
    eigs2 = gen_eig_spd(_dual_gram(l2, a), symmetrize(t2.T @ a @ t2))

    def strip(eigs):
        eigs = np.sort(eigs)
        return eigs[np.abs(eigs - 1.0) > ONE_TOL]

    kept1 = strip(eigs1)
    kept2 = strip(eigs2)
    if kept1.size != kept2.size:
        ok = False
        worst = np.inf
    elif kept1.size == 0:
        ok = True
        worst = 0.0
    else:
        scale = np.maximum(np.abs(kept1), np.abs(kept2))
        rel = np.abs(kept1 - kept2) / scale
        worst = float(rel.max())
        ok = bool(worst <= PAIR_RTOL)
    return LemmaVerdict(ok=ok, detail={"worst_rel_mismatch": worst,
                                       "stripped_sizes": (kept1.size, kept2.size)})


def run_harness(
    instances: int, n_max: int, seed: int, cond_max: float = 1e6
) -> dict:
    """Run both lemma checks over a seeded instance matrix; returns a summary
    with pass counts and worst residuals/saturations."""
    rng = np.random.default_rng(seed)
    summary = {
        "instances": instances,
        "n_max": n_max,
        "seed": seed,
        "lemma1_passed": 0,
        "lemma1_failed": 0,
        "lemma1_worst_saturation": 0.0,
        "lemma2_passed": 0,
        "lemma2_failed": 0,
        "lemma2_worst_mismatch": 0.0,
    }
    for i in range(instances):
        n = int(rng.integers(2, n_max + 1))
        k = int(rng.integers(1, n + 1))
        cond = float(10.0 ** rng.uniform(0.0, np.log10(cond_max)))
        inst_seed = int(rng.integers(0, 2**32))
        inst = make_instance(n, k, inst_seed, cond)
        verdict = lemma1_check(inst)
        summary["lemma1_passed" if verdict.ok else "lemma1_failed"] += 1
        summary["lemma1_worst_saturation"] = max(
            summary["lemma1_worst_saturation"], verdict.detail["saturation"]
        )

        n2 = int(rng.integers(2, n_max + 1))
        k2 = int(rng.integers(1, n2))
        a = random_spd(n2, rng, cond)
        pair = make_complementary(n2, k2, rng)
        verdict2 = lemma2_check(pair, a)
        summary["lemma2_passed" if verdict2.ok else "lemma2_failed"] += 1
        summary["lemma2_worst_mismatch"] = max(
            summary["lemma2_worst_mismatch"],
            0.0 if np.isinf(verdict2.detail["worst_rel_mismatch"]) else verdict2.detail["worst_rel_mismatch"],
        )
        if not verdict2.ok:
            summary["lemma2_worst_mismatch"] = float("inf")
    summary["all_passed"] = (
        summary["lemma1_failed"] == 0 and summary["lemma2_failed"] == 0
    )
    return summary
