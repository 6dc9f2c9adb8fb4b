"""Shared fixtures: the certification instance matrix is built once per
session and reused by the unit and acceptance tests."""

from __future__ import annotations

import pytest

from ddlab import RunConfig, acceptance_matrix, build_instance
from ddlab.spectral import spectral_report


@pytest.fixture(scope="session")
def matrix_instances():
    """All certification instances, keyed by their config label."""
    return {cfg.label(): build_instance(cfg) for cfg in acceptance_matrix()}


@pytest.fixture(scope="session")
def matrix_reports(matrix_instances):
    """Spectral reports for every certification instance."""
    return {
        label: spectral_report(inst.ops, inst.bddc, inst.feti)
        for label, inst in matrix_instances.items()
    }


@pytest.fixture(scope="session")
def small_instance():
    """The 2x2 substructure, m=2 reference instance."""
    return build_instance(RunConfig(nx=2, ny=2, m=2))
