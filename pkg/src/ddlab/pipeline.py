"""End-to-end instance construction: grid -> Schur complements -> spaces ->
operators -> preconditioners. Shared by the CLI and the test suite."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    Decomposition,
    GridSpec,
    SchurLocal,
    block_S,
    build_decomposition,
    build_schur_locals,
)
from .operators import OperatorSet, build_operator_set
from .precond import BddcPrecond, FetiDpSystem, make_bddc, make_fetidp
from .spaces import (
    CoarseSpec,
    InterfaceLayout,
    Subassembly,
    build_layout,
    build_subassembly,
    select_coarse,
)

RHO_PATTERNS = ("uniform", "checkerboard")


@dataclass(frozen=True)
class RunConfig:
    nx: int = 2
    ny: int = 2
    m: int = 2
    coarse: str = "corners"
    scaling: str = "multiplicity"
    rho_pattern: str = "uniform"
    rho_ratio: float = 1000.0
    tol: float = 1e-10
    maxit: int = 500
    seed: int = 0

    def rho(self) -> tuple[float, ...]:
        if self.rho_pattern not in RHO_PATTERNS:
            raise ValueError(f"unknown rho pattern {self.rho_pattern!r}")
        values = []
        for sy in range(self.ny):
            for sx in range(self.nx):
                if self.rho_pattern == "checkerboard" and (sx + sy) % 2 == 1:
                    values.append(self.rho_ratio)
                else:
                    values.append(1.0)
        return tuple(values)

    def grid_spec(self) -> GridSpec:
        return GridSpec(nx=self.nx, ny=self.ny, m=self.m, rho=self.rho())

    def label(self) -> str:
        return (
            f"{self.nx}x{self.ny}-m{self.m}-{self.coarse}-{self.scaling}-"
            f"{self.rho_pattern}"
        )


@dataclass
class Instance:
    config: RunConfig
    decomp: Decomposition
    schur_locals: list[SchurLocal]
    s: np.ndarray
    layout: InterfaceLayout
    coarse: CoarseSpec
    sub: Subassembly
    ops: OperatorSet
    bddc: BddcPrecond = field(repr=False, default=None)
    feti: FetiDpSystem = field(repr=False, default=None)

    @property
    def degenerate(self) -> bool:
        return self.layout.w_hat_dim == 0

    @property
    def w_tilde_equals_w_hat(self) -> bool:
        return self.ops.w_tilde_dim == self.ops.w_hat_dim

    def unit_load(self) -> np.ndarray:
        return np.ones(self.ops.w_hat_dim)


def build_instance(config: RunConfig) -> Instance:
    """May raise NotPositiveDefinite (insufficient coarse space) or
    EmptyCoarseSpace."""
    spec = config.grid_spec()
    decomp = build_decomposition(spec)
    locals_ = build_schur_locals(decomp, spec)
    s = block_S(locals_)
    layout = build_layout(decomp)
    coarse = select_coarse(layout, decomp, config.coarse)
    sub = build_subassembly(layout, coarse)
    ops = build_operator_set(locals_, s, layout, coarse, sub, config.scaling)
    bddc = make_bddc(ops)
    feti = make_fetidp(ops)
    return Instance(
        config=config,
        decomp=decomp,
        schur_locals=locals_,
        s=s,
        layout=layout,
        coarse=coarse,
        sub=sub,
        ops=ops,
        bddc=bddc,
        feti=feti,
    )


def acceptance_matrix() -> list[RunConfig]:
    """The instance grid every theorem is certified on."""
    configs = []
    for nx, ny in ((2, 2), (3, 3), (4, 2)):
        for m in (2, 4):
            for scaling in ("multiplicity", "stiffness"):
                for rho_pattern in ("uniform", "checkerboard"):
                    configs.append(
                        RunConfig(
                            nx=nx,
                            ny=ny,
                            m=m,
                            scaling=scaling,
                            rho_pattern=rho_pattern,
                        )
                    )
    return configs
