"""Operator assembly on the subassembled coordinates and the defining
identities of the averaging and jump operators."""

import numpy as np
import pytest

from ddlab import RunConfig, build_instance
from ddlab.errors import UnsupportedCoarseSpace
from ddlab.model import GridSpec, block_S, build_decomposition, build_schur_locals
from ddlab.operators import (
    axiom_check,
    build_B,
    build_BD,
    build_E,
    build_shat,
    build_stilde,
    build_weights,
    harmonize_edge_weights,
)
from ddlab.spaces import build_layout, build_subassembly, select_coarse


def pipeline_parts(nx, ny, m, rho=None, kind="corners"):
    rho = rho if rho is not None else (1.0,) * (nx * ny)
    spec = GridSpec(nx=nx, ny=ny, m=m, rho=rho)
    decomp = build_decomposition(spec)
    locals_ = build_schur_locals(decomp, spec)
    layout = build_layout(decomp)
    coarse = select_coarse(layout, decomp, kind)
    sub = build_subassembly(layout, coarse)
    return locals_, layout, coarse, sub


class TestWeights:
    def test_multiplicity_pair(self):
        locals_, layout, _, _ = pipeline_parts(2, 1, 2)
        w = build_weights(locals_, layout, "multiplicity")
        assert np.allclose(w.values, [0.5, 0.5])

    def test_multiplicity_cross_point(self):
        locals_, layout, _, _ = pipeline_parts(2, 2, 2)
        w = build_weights(locals_, layout, "multiplicity")
        for clique in layout.cliques:
            assert np.allclose(w.values[clique], 1.0 / clique.size)

    def test_stiffness_reflects_coefficient_jump(self):
        # identical geometry on both sides: Schur diagonals scale with rho,
        # so the weights become rho-proportional
        locals_, layout, _, _ = pipeline_parts(2, 1, 2, rho=(1.0, 5.0))
        w = build_weights(locals_, layout, "stiffness")
        assert np.allclose(w.values, [1.0 / 6.0, 5.0 / 6.0])

    def test_stiffness_equals_multiplicity_for_symmetric_problem(self):
        locals_, layout, _, _ = pipeline_parts(2, 2, 2)
        wm = build_weights(locals_, layout, "multiplicity")
        ws = build_weights(locals_, layout, "stiffness")
        assert np.abs(wm.values - ws.values).max() <= 1e-14

    def test_clique_sums_to_one(self):
        for scaling in ("multiplicity", "stiffness"):
            locals_, layout, _, _ = pipeline_parts(3, 2, 2, rho=(1, 9, 1, 9, 1, 9))
            w = build_weights(locals_, layout, scaling)
            for clique in layout.cliques:
                assert w.values[clique].sum() == pytest.approx(1.0, abs=1e-14)

    def test_unknown_kind_rejected(self):
        locals_, layout, _, _ = pipeline_parts(2, 1, 2)
        with pytest.raises(ValueError):
            build_weights(locals_, layout, "cardinality")

    def test_harmonized_weights_constant_per_edge_side(self):
        locals_, layout, coarse, _ = pipeline_parts(
            3, 1, 4, rho=(1.0, 20.0, 1.0), kind="corners-edges"
        )
        w = harmonize_edge_weights(
            build_weights(locals_, layout, "stiffness"), layout, coarse
        )
        from ddlab.spaces import _side_dofs

        for edge in coarse.edges:
            dofs_i, dofs_j = _side_dofs(layout, edge)
            assert np.ptp(w.values[dofs_i]) <= 1e-14
            assert np.ptp(w.values[dofs_j]) <= 1e-14


class TestAveraging:
    def test_pair_row_is_half_half(self):
        locals_, layout, coarse, sub = pipeline_parts(2, 1, 2)
        w = build_weights(locals_, layout, "multiplicity")
        e = build_E(layout, w, sub)
        assert e.shape == (1, 2)
        assert np.allclose(e, [[0.5, 0.5]])
        re = sub.r_hat @ e
        assert np.allclose(re, [[0.5, 0.5], [0.5, 0.5]])

    def test_corner_coordinate_has_unit_entry(self):
        locals_, layout, coarse, sub = pipeline_parts(2, 2, 2)
        w = build_weights(locals_, layout, "multiplicity")
        e = build_E(layout, w, sub)
        corner_col = next(
            i for i, m in enumerate(sub.coord_meaning) if m[0] == "corner"
        )
        col = e[:, corner_col]
        assert np.isclose(col.max(), 1.0)
        assert np.isclose(np.abs(col).sum(), 1.0)

    def test_identity_when_spaces_coincide(self):
        inst = build_instance(RunConfig(nx=2, ny=2, m=1))
        assert inst.w_tilde_equals_w_hat
        assert np.allclose(inst.ops.e, np.eye(inst.ops.w_hat_dim))


class TestJumpOperators:
    def test_b_rows_are_signed_pairs(self):
        locals_, layout, coarse, sub = pipeline_parts(2, 2, 2)
        b = build_B(layout, sub)
        assert b.shape[0] == 4
        for row in b:
            assert sorted(row[row != 0.0]) == [-1.0, 1.0]

    def test_b_annihilates_continuous_functions(self):
        locals_, layout, coarse, sub = pipeline_parts(3, 2, 2)
        b = build_B(layout, sub)
        assert np.abs(b @ sub.r_hat).max() <= 1e-15

    def test_bd_row_uses_opposite_weights(self):
        locals_, layout, coarse, sub = pipeline_parts(2, 1, 2, rho=(1.0, 5.0))
        w = build_weights(locals_, layout, "stiffness")
        bd = build_BD(w, layout, sub)
        pair = sub.dual_pairs[0]
        assert bd[0, pair.ci] == pytest.approx(5.0 / 6.0)
        assert bd[0, pair.cj] == pytest.approx(-1.0 / 6.0)
        b = build_B(layout, sub)
        assert (b @ bd.T)[0, 0] == pytest.approx(1.0)

    def test_empty_multiplier_space(self):
        inst = build_instance(RunConfig(nx=2, ny=2, m=1))
        assert inst.ops.n_lambda == 0
        assert inst.ops.b.shape == (0, inst.ops.w_tilde_dim)

    def test_unidentified_cross_point_rejected(self):
        locals_, layout, coarse, sub = pipeline_parts(2, 2, 2, kind="none")
        with pytest.raises(UnsupportedCoarseSpace):
            build_B(layout, sub)


class TestAssembledMatrices:
    def test_stilde_assembles_at_shared_coordinate(self):
        # two 2x2 blocks sharing one identified coordinate: the assembled
        # 3x3 matrix adds the diagonal contributions at the shared slot
        s = np.array(
            [
                [2.0, -1.0, 0.0, 0.0],
                [-1.0, 3.0, 0.0, 0.0],
                [0.0, 0.0, 4.0, -2.0],
                [0.0, 0.0, -2.0, 5.0],
            ]
        )
        r_tilde = np.array(
            [
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
        stilde = build_stilde(s, r_tilde)
        expected = np.array(
            [[2.0, -1.0, 0.0], [-1.0, 7.0, -2.0], [0.0, -2.0, 5.0]]
        )
        assert np.allclose(stilde, expected)

    def test_quadratic_form_matches_decoded_energy(self):
        locals_, layout, coarse, sub = pipeline_parts(2, 2, 2)
        s = block_S(locals_)
        stilde = build_stilde(s, sub.r_tilde)
        rng = np.random.default_rng(0)
        v = rng.standard_normal(sub.w_tilde_dim)
        decoded = sub.r_tilde @ v
        assert float(v @ stilde @ v) == pytest.approx(
            float(decoded @ s @ decoded), rel=1e-14
        )

    def test_shat_matches_one_shot_composition(self):
        locals_, layout, coarse, sub = pipeline_parts(3, 2, 2)
        s = block_S(locals_)
        stilde = build_stilde(s, sub.r_tilde)
        shat = build_shat(stilde, sub.r_hat)
        glued = sub.r_tilde @ sub.r_hat
        oracle = glued.T @ s @ glued
        assert np.abs(shat - oracle).max() <= 1e-12


class TestAxioms:
    def test_reference_instance_passes(self, small_instance):
        report = axiom_check(small_instance.ops)
        assert report.passed
        assert max(report.residuals.values()) <= 1e-13

    def test_projection_complementarity(self, small_instance):
        ops = small_instance.ops
        p1 = ops.r_hat @ ops.e
        p2 = ops.b_d.T @ ops.b
        assert np.abs(p1 @ p2).max() <= 1e-13
        assert np.abs(p2 @ p1).max() <= 1e-13
        assert np.abs(p1 + p2 - np.eye(ops.w_tilde_dim)).max() <= 1e-13

    def test_perturbation_is_detected(self, small_instance):
        import copy

        ops = copy.deepcopy(small_instance.ops)
        ops.b_d[0, np.flatnonzero(ops.b_d[0])[0]] += 1e-3
        report = axiom_check(ops)
        assert not report.passed
        assert report.residuals["b_bd_identity"] == pytest.approx(1e-3, rel=1e-6)

    def test_degenerate_spaces_pass_trivially(self):
        inst = build_instance(RunConfig(nx=2, ny=2, m=1))
        report = axiom_check(inst.ops)
        assert report.passed
