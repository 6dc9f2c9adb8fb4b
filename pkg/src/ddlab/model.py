"""Generated 2D elliptic model problem.

A rectangular domain is meshed with Q1 elements and split into an nx-by-ny
array of equal square substructures, m elements per substructure edge, with a
positive coefficient rho constant on each substructure. Homogeneous Dirichlet
conditions on the whole outer boundary are imposed by row/column deletion.
The per-substructure products are the stiffness matrices and their interface
Schur complements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import cholesky, chol_solve, symmetrize

# Exact Q1 stiffness matrix of the Laplacian on a square element (any size;
# the 2D Laplace element matrix is scale invariant). Corner ordering:
# (0,0), (1,0), (1,1), (0,1). Diagonal 2/3, edge neighbours -1/6, diagonally
# opposite corners -1/3; rows sum to zero.
Q1_ELEMENT = np.array(
    [
        [4.0, -1.0, -2.0, -1.0],
        [-1.0, 4.0, -1.0, -2.0],
        [-2.0, -1.0, 4.0, -1.0],
        [-1.0, -2.0, -1.0, 4.0],
    ]
) / 6.0


@dataclass(frozen=True)
class GridSpec:
    """Substructure grid: nx * ny square substructures, m elements per edge."""

    nx: int
    ny: int
    m: int
    rho: tuple[float, ...]
    dirichlet: bool = True

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("substructure counts must be >= 1")
        if self.m < 1:
            raise ValueError("element count per edge must be >= 1")
        if len(self.rho) != self.nx * self.ny:
            raise ValueError("rho must have one entry per substructure")
        if any(r <= 0 for r in self.rho):
            raise ValueError("all rho must be positive")
        if not self.dirichlet:
            raise ValueError("only the fully Dirichlet outer boundary is supported")

    @property
    def n_sub(self) -> int:
        return self.nx * self.ny


@dataclass
class Decomposition:
    """Conforming global mesh plus substructure bookkeeping.

    Node ids are row-major on the (nx*m+1) x (ny*m+1) node grid. A node is
    interface iff it belongs to at least two substructures; Dirichlet nodes
    (the whole outer boundary) appear in no dof set.
    """

    spec: GridSpec
    nodes_x: int
    nodes_y: int
    coords: np.ndarray  # (n_nodes, 2)
    dirichlet_nodes: np.ndarray  # bool mask
    multiplicity: np.ndarray  # int per node
    subdomain_nodes: list[np.ndarray] = field(default_factory=list)  # all node ids, sorted

    @property
    def n_nodes(self) -> int:
        return self.nodes_x * self.nodes_y

    def free_mask(self) -> np.ndarray:
        return ~self.dirichlet_nodes

    def is_interface(self, node: int) -> bool:
        return (not self.dirichlet_nodes[node]) and self.multiplicity[node] >= 2

    def free_interface_nodes(self) -> np.ndarray:
        mask = self.free_mask() & (self.multiplicity >= 2)
        return np.flatnonzero(mask)

    def subdomain_free_nodes(self, i: int) -> np.ndarray:
        nodes = self.subdomain_nodes[i]
        return nodes[~self.dirichlet_nodes[nodes]]

    @property
    def degenerate(self) -> bool:
        """True when there are no free interface dofs (W = {0})."""
        return self.free_interface_nodes().size == 0


def build_decomposition(spec: GridSpec) -> Decomposition:
    nodes_x = spec.nx * spec.m + 1
    nodes_y = spec.ny * spec.m + 1
    n_nodes = nodes_x * nodes_y

    ix = np.tile(np.arange(nodes_x), nodes_y)
    iy = np.repeat(np.arange(nodes_y), nodes_x)
    coords = np.column_stack([ix / spec.m, iy / spec.m])

    dirichlet = (ix == 0) | (ix == nodes_x - 1) | (iy == 0) | (iy == nodes_y - 1)

    def axis_count(idx, n_sub):
        # number of substructures along one axis containing grid line idx
        on_cut = (idx % spec.m == 0) & (idx > 0) & (idx < n_sub * spec.m)
        return np.where(on_cut, 2, 1)

    multiplicity = axis_count(ix, spec.nx) * axis_count(iy, spec.ny)

    subdomain_nodes = []
    for sy in range(spec.ny):
        for sx in range(spec.nx):
            gx = np.arange(sx * spec.m, sx * spec.m + spec.m + 1)
            gy = np.arange(sy * spec.m, sy * spec.m + spec.m + 1)
            ids = (gy[:, None] * nodes_x + gx[None, :]).ravel()
            subdomain_nodes.append(np.sort(ids))

    return Decomposition(
        spec=spec,
        nodes_x=nodes_x,
        nodes_y=nodes_y,
        coords=coords,
        dirichlet_nodes=dirichlet,
        multiplicity=multiplicity,
        subdomain_nodes=subdomain_nodes,
    )


def assemble_subdomain(
    decomp: Decomposition, spec: GridSpec, i: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Q1 stiffness matrix of substructure i, Dirichlet rows/cols deleted.

    Returns (K_i, interior_idx, interface_idx, free_nodes): indices are local
    positions into free_nodes (global node ids, ascending).
    """
    free_nodes = decomp.subdomain_free_nodes(i)
    local = {node: t for t, node in enumerate(free_nodes)}
    nf = free_nodes.size
    k = np.zeros((nf, nf))
    rho_i = spec.rho[i]

    sx = i % spec.nx
    sy = i // spec.nx
    nodes_x = decomp.nodes_x
    for ey in range(sy * spec.m, (sy + 1) * spec.m):
        for ex in range(sx * spec.m, (sx + 1) * spec.m):
            n00 = ey * nodes_x + ex
            corners = (n00, n00 + 1, n00 + nodes_x + 1, n00 + nodes_x)
            for a, na in enumerate(corners):
                la = local.get(na)
                if la is None:
                    continue
                for b, nb in enumerate(corners):
                    lb = local.get(nb)
                    if lb is None:
                        continue
                    k[la, lb] += rho_i * Q1_ELEMENT[a, b]

    mult = decomp.multiplicity[free_nodes]
    interface_idx = np.flatnonzero(mult >= 2)
    interior_idx = np.flatnonzero(mult < 2)
    return symmetrize(k), interior_idx, interface_idx, free_nodes


@dataclass
class SchurLocal:
    """Interface Schur complement S_i of one substructure."""

    subdomain: int
    matrix: np.ndarray  # symmetric PSD, on the interface dofs
    nodes: np.ndarray  # global node id per interface dof, ascending


def schur_local(
    k: np.ndarray,
    interior_idx: np.ndarray,
    interface_idx: np.ndarray,
    nodes: np.ndarray,
    subdomain: int = 0,
) -> SchurLocal:
    """Eliminate interior dofs: S = K_GG - K_GI K_II^{-1} K_IG.

    K_II must be SPD (a failure signals an assembly or boundary-condition bug).
    """
    interface_idx = np.asarray(interface_idx, dtype=int)
    interior_idx = np.asarray(interior_idx, dtype=int)
    k_gg = k[np.ix_(interface_idx, interface_idx)]
    if interior_idx.size == 0:
        s = k_gg.copy()
    else:
        k_ii = symmetrize(k[np.ix_(interior_idx, interior_idx)])
        k_ig = k[np.ix_(interior_idx, interface_idx)]
        f = cholesky(k_ii)
        s = k_gg - k_ig.T @ chol_solve(f, k_ig)
    return SchurLocal(subdomain=subdomain, matrix=symmetrize(s), nodes=np.asarray(nodes)[interface_idx])


def build_schur_locals(decomp: Decomposition, spec: GridSpec) -> list[SchurLocal]:
    out = []
    for i in range(spec.n_sub):
        k, interior_idx, interface_idx, free_nodes = assemble_subdomain(decomp, spec, i)
        out.append(schur_local(k, interior_idx, interface_idx, free_nodes, subdomain=i))
    return out


def block_S(locals_: list[SchurLocal]) -> np.ndarray:
    """Block-diagonal S on W = W_1 x ... x W_N; a(u, v) = u^T S v."""
    sizes = [loc.matrix.shape[0] for loc in locals_]
    dim = sum(sizes)
    s = np.zeros((dim, dim))
    offset = 0
    for loc, size in zip(locals_, sizes):
        s[offset : offset + size, offset : offset + size] = loc.matrix
        offset += size
    return s


def interior_minimization_energy(
    k: np.ndarray, interior_idx: np.ndarray, interface_idx: np.ndarray, v: np.ndarray
) -> float:
    """Oracle: min over interior values of the full quadratic form with the
    interface fixed at v. Uses a least-squares solve, independent of the
    Cholesky elimination path."""
    interior_idx = np.asarray(interior_idx, dtype=int)
    interface_idx = np.asarray(interface_idx, dtype=int)
    x = np.zeros(k.shape[0])
    x[interface_idx] = v
    if interior_idx.size:
        k_ii = k[np.ix_(interior_idx, interior_idx)]
        rhs = -k[np.ix_(interior_idx, interface_idx)] @ v
        x[interior_idx] = np.linalg.lstsq(k_ii, rhs, rcond=None)[0]
    return float(x @ k @ x)
