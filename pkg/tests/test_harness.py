"""Randomized abstract eigenvalue checks: instance generators and the two
lemma verdicts."""

import numpy as np
import pytest

from ddlab.harness import (
    WIDE,
    AbstractInstance,
    ComplementaryPair,
    lemma1_check,
    lemma2_check,
    make_LT,
    make_complementary,
    make_instance,
    random_orthogonal,
    random_spd,
    run_harness,
)
from ddlab.linalg import is_spd


class TestGenerators:
    def test_random_orthogonal(self):
        rng = np.random.default_rng(0)
        for n in (1, 3, 8):
            q = random_orthogonal(n, rng)
            assert np.abs(q.T @ q - np.eye(n)).max() <= 1e-13

    def test_random_spd_is_spd_with_target_conditioning(self):
        rng = np.random.default_rng(1)
        a = random_spd(6, rng, cond_target=1e3)
        assert is_spd(a)
        vals = np.linalg.eigvalsh(a)
        assert vals[-1] / vals[0] == pytest.approx(1e3, rel=1e-8)

    def test_random_spd_scalar_case(self):
        rng = np.random.default_rng(2)
        a = random_spd(1, rng)
        assert a.shape == (1, 1) and a[0, 0] > 0.0

    def test_random_spd_rejects_empty(self):
        with pytest.raises(ValueError):
            random_spd(0, np.random.default_rng(0))

    def test_make_LT_identity_hypothesis(self):
        rng = np.random.default_rng(3)
        for n, k in ((4, 2), (9, 5), (12, 12)):
            l, t = make_LT(n, k, rng)
            assert np.abs(l @ t - np.eye(k)).max() <= 1e-12
            p = t @ l
            assert np.abs(p @ p - p).max() <= 1e-11

    def test_make_LT_square_case_is_inverse_pair(self):
        rng = np.random.default_rng(4)
        l, t = make_LT(5, 5, rng)
        assert np.abs(t @ l - np.eye(5)).max() <= 1e-11

    def test_make_LT_rejects_bad_shapes(self):
        rng = np.random.default_rng(5)
        with pytest.raises(ValueError):
            make_LT(3, 0, rng)
        with pytest.raises(ValueError):
            make_LT(3, 4, rng)

    def test_make_instance_fields(self):
        inst = make_instance(8, 3, seed=11)
        assert inst.a.shape == (8, 8)
        assert inst.l.shape == (3, 8) and inst.t.shape == (8, 3)
        assert inst.seed == 11

    def test_make_complementary_invariants(self):
        rng = np.random.default_rng(6)
        for n, k in ((5, 2), (10, 7), (6, 5)):
            pair = make_complementary(n, k, rng)
            assert np.abs(pair.l1 @ pair.t1 - np.eye(k)).max() <= 1e-11
            assert np.abs(pair.l2 @ pair.t2 - np.eye(n - k)).max() <= 1e-11
            total = pair.t1 @ pair.l1 + pair.t2 @ pair.l2
            assert np.abs(total - np.eye(n)).max() <= 1e-11

    def test_make_complementary_rejects_full_rank_first_factor(self):
        with pytest.raises(ValueError):
            make_complementary(4, 4, np.random.default_rng(0))


class TestLemma1:
    def test_orthogonal_projection_spectrum_is_exactly_one(self):
        # T orthonormal columns, L = T^T, A = I: the product operator is the
        # identity on the coarse space
        rng = np.random.default_rng(7)
        q = random_orthogonal(6, rng)[:, :3]
        inst = AbstractInstance(a=np.eye(6), l=q.T, t=q, seed=0)
        verdict = lemma1_check(inst)
        assert verdict.ok
        assert verdict.detail["lambda_min"] == pytest.approx(1.0, abs=1e-12)
        assert verdict.detail["lambda_max"] == pytest.approx(1.0, abs=1e-12)
        assert verdict.detail["bound"] == pytest.approx(1.0, rel=1e-12)

    def test_hand_built_oblique_projection(self):
        # n=2, k=1: T = (1, 0)^T, L = (1, c), A = I. Then T L is an oblique
        # projection with squared norm 1 + c^2, and the single eigenvalue of
        # (L L^T)(T^T T) = 1 + c^2 attains the bound exactly.
        c = 3.0
        inst = AbstractInstance(
            a=np.eye(2), l=np.array([[1.0, c]]), t=np.array([[1.0], [0.0]]), seed=0
        )
        verdict = lemma1_check(inst)
        assert verdict.ok
        assert verdict.detail["lambda_max"] == pytest.approx(1.0 + c * c, rel=1e-12)
        assert verdict.detail["saturation"] == pytest.approx(1.0, abs=1e-12)

    def test_random_instances_pass_with_saturated_upper_bound(self):
        for seed in range(5):
            inst = make_instance(10, 4, seed=seed, cond_target=1e4)
            verdict = lemma1_check(inst)
            assert verdict.ok
            assert verdict.detail["lambda_min"] >= 1.0 - 1e-10
            # the upper bound is attained in exact arithmetic
            assert verdict.detail["saturation"] == pytest.approx(1.0, abs=1e-9)

    def test_violated_hypothesis_is_flagged(self):
        # scaling L breaks L T = I; the spectrum drops below 1
        inst = make_instance(6, 3, seed=1)
        bad = AbstractInstance(a=inst.a, l=0.1 * inst.l, t=inst.t, seed=1)
        verdict = lemma1_check(bad)
        assert not verdict.ok
        assert verdict.detail["lambda_min"] < 1.0 - 1e-10


class TestLemma2:
    def test_complementary_pair_spectra_match(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            n = int(rng.integers(4, 12))
            k = int(rng.integers(1, n))
            a = random_spd(n, rng, cond_target=1e3)
            pair = make_complementary(n, k, rng)
            verdict = lemma2_check(pair, a)
            assert verdict.ok
            assert verdict.detail["worst_rel_mismatch"] <= 1e-8

    def test_stripped_spectra_have_equal_sizes(self):
        rng = np.random.default_rng(9)
        a = random_spd(9, rng)
        pair = make_complementary(9, 4, rng)
        verdict = lemma2_check(pair, a)
        s1, s2 = verdict.detail["stripped_sizes"]
        assert s1 == s2

    def test_unrelated_pairs_mismatch(self):
        rng = np.random.default_rng(10)
        a = random_spd(8, rng)
        p1 = make_complementary(8, 3, rng)
        p2 = make_complementary(8, 3, rng)
        frankenstein = ComplementaryPair(l1=p1.l1, t1=p1.t1, l2=p2.l2, t2=p2.t2)
        verdict = lemma2_check(frankenstein, a)
        assert not verdict.ok


class TestRunHarness:
    def test_small_sweep_passes(self):
        summary = run_harness(instances=10, n_max=8, seed=123)
        assert summary["all_passed"]
        assert summary["lemma1_passed"] == 10 and summary["lemma1_failed"] == 0
        assert summary["lemma2_passed"] == 10 and summary["lemma2_failed"] == 0
        assert summary["lemma1_worst_saturation"] <= 1.0 + 1e-10
        assert summary["lemma2_worst_mismatch"] <= 1e-8

    def test_zero_instances(self):
        summary = run_harness(instances=0, n_max=5, seed=0)
        assert summary["all_passed"]
        assert summary["lemma1_passed"] == 0

    def test_deterministic_for_fixed_seed(self):
        s1 = run_harness(instances=5, n_max=6, seed=42)
        s2 = run_harness(instances=5, n_max=6, seed=42)
        assert s1 == s2


class TestExtendedPrecision:
    def test_wide_dtype_has_more_resolution_than_float64(self):
        assert np.finfo(WIDE).eps < np.finfo(np.float64).eps

    def test_generated_factors_carry_wide_dtype(self):
        l, t = make_LT(6, 3, np.random.default_rng(11))
        assert l.dtype == WIDE and t.dtype == WIDE
