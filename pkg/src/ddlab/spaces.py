"""The space chain hat(W) subset tilde(W) subset W as explicit basis injections.

W is the product of the substructure interface spaces (one dof per
substructure per shared node). hat(W) is the fully continuous subspace, one
coordinate per free interface node. tilde(W) identifies only the coarse
degrees of freedom: corner values always, optionally one average per edge.
The injection of tilde(W) into W is the explicit basis matrix r_tilde; the
embedding of hat(W) into tilde(W) coordinates is r_hat.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCoarseSpace, NotPositiveDefinite
from .linalg import cholesky, CholFactor
from .model import Decomposition

COARSE_KINDS = ("corners", "corners-edges", "none")


@dataclass
class InterfaceLayout:
    """Gluing layout of W: one clique of W dofs per free interface node."""

    w_dim: int
    nodes: np.ndarray  # free interface node ids, ascending; defines hat(W) order
    wdof_node: np.ndarray  # global node id per W dof
    wdof_sub: np.ndarray  # owning subdomain per W dof
    cliques: list[np.ndarray]  # per node (in `nodes` order): W dof indices, by subdomain

    def node_row(self, node: int) -> int:
        return int(np.searchsorted(self.nodes, node))

    def clique_of(self, node: int) -> np.ndarray:
        return self.cliques[self.node_row(node)]

    @property
    def w_hat_dim(self) -> int:
        return self.nodes.size


def build_layout(decomp: Decomposition) -> InterfaceLayout:
    """Enumerate the W dofs and their cliques, ordered deterministically.

    W dofs are blocked by subdomain; within a subdomain they follow the
    interface-node ordering of the local Schur complement (global node id,
    ascending). Cliques are ordered by subdomain id.
    """
    nodes = decomp.free_interface_nodes()
    node_row = {int(n): r for r, n in enumerate(nodes)}
    wdof_node: list[int] = []
    wdof_sub: list[int] = []
    members: list[list[int]] = [[] for _ in nodes]
    for i in range(decomp.spec.n_sub):
        sub_free = decomp.subdomain_free_nodes(i)
        sub_iface = sub_free[decomp.multiplicity[sub_free] >= 2]
        for node in sub_iface:
            w = len(wdof_node)
            wdof_node.append(int(node))
            wdof_sub.append(i)
            members[node_row[int(node)]].append(w)
    cliques = [np.array(m, dtype=int) for m in members]
    return InterfaceLayout(
        w_dim=len(wdof_node),
        nodes=nodes,
        wdof_node=np.array(wdof_node, dtype=int),
        wdof_sub=np.array(wdof_sub, dtype=int),
        cliques=cliques,
    )


@dataclass
class Edge:
    """Maximal run of multiplicity-2 interface nodes shared by one subdomain pair."""

    subdomains: tuple[int, int]  # (i, j), i < j
    nodes: np.ndarray  # ordered along the edge


@dataclass
class CoarseSpec:
    kind: str
    corners: np.ndarray  # node ids, ascending
    edges: list[Edge]

    @property
    def averaged(self) -> bool:
        return self.kind == "corners-edges"


def select_coarse(layout: InterfaceLayout, decomp: Decomposition, kind: str) -> CoarseSpec:
    """Corners are all interface nodes with multiplicity >= 3; the remaining
    multiplicity-2 nodes are grouped into edges by owning subdomain pair.

    kind "none" deliberately selects no coarse dofs (the resulting tilde(S)
    is singular whenever a substructure floats; the failure surfaces as
    NotPositiveDefinite downstream).
    """
    if kind not in COARSE_KINDS:
        raise ValueError(f"unknown coarse kind {kind!r}")
    mult = decomp.multiplicity
    if kind == "none":
        corners = np.zeros(0, dtype=int)
    else:
        corners = layout.nodes[mult[layout.nodes] >= 3]

    edge_groups: dict[tuple[int, int], list[int]] = {}
    for row, node in enumerate(layout.nodes):
        if mult[node] != 2 or node in corners:
            continue
        pair = tuple(sorted(int(layout.wdof_sub[w]) for w in layout.cliques[row]))
        edge_groups.setdefault(pair, []).append(int(node))
    edges = []
    for pair in sorted(edge_groups):
        nodes = np.array(sorted(edge_groups[pair]), dtype=int)
        # order along the shared line (node ids are monotone along a grid line)
        edges.append(Edge(subdomains=pair, nodes=nodes))

    if (
        kind != "none"
        and decomp.spec.n_sub >= 2
        and layout.w_hat_dim > 0
        and corners.size == 0
        and not edges
    ):
        raise EmptyCoarseSpace(
            "no corners and no edges available; tilde(S) would be singular"
        )
    return CoarseSpec(kind=kind, corners=corners, edges=edges)


@dataclass
class DualPair:
    """One jump constraint: tilde(W) coordinates ci, cj whose values may differ.

    For kind "node" the pair is the two sides of a multiplicity-2 node clique;
    for kind "edge-fluct" it is matching fluctuation coordinates of the two
    sides of an averaged edge. wdofs_i / wdofs_j are the underlying W dofs on
    each side (used for weight lookups).
    """

    ci: int
    cj: int
    kind: str  # "node" | "edge-fluct"
    node: int = -1
    edge_index: int = -1
    wdofs_i: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    wdofs_j: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


@dataclass
class Subassembly:
    """Basis injections realizing the space chain.

    r_tilde: (dim W) x (dim tilde W), full column rank.
    r_hat:   (dim tilde W) x (dim hat W), columns of r_tilde @ r_hat span
             exactly the continuous subspace (constant on every clique).
    coord_meaning: per tilde(W) coordinate, a human-readable tag.
    """

    r_tilde: np.ndarray
    r_hat: np.ndarray
    continuous: np.ndarray  # (dim W) x (dim hat W) continuous basis
    coord_meaning: list[tuple]
    dual_pairs: list[DualPair]
    # nodes whose clique has multiplicity > 2 but was not selected as coarse;
    # no jump rows exist for these (only reachable with kind "none")
    unsupported_cliques: list[int] = field(default_factory=list)

    @property
    def w_dim(self) -> int:
        return self.r_tilde.shape[0]

    @property
    def w_tilde_dim(self) -> int:
        return self.r_tilde.shape[1]

    @property
    def w_hat_dim(self) -> int:
        return self.r_hat.shape[1]


def continuous_basis(layout: InterfaceLayout) -> np.ndarray:
    """One column per free interface node: indicator of its clique in W."""
    c = np.zeros((layout.w_dim, layout.w_hat_dim))
    for row, clique in enumerate(layout.cliques):
        c[clique, row] = 1.0
    return c


def _side_dofs(layout: InterfaceLayout, edge: Edge) -> tuple[np.ndarray, np.ndarray]:
    si, sj = edge.subdomains
    dofs_i = []
    dofs_j = []
    for node in edge.nodes:
        clique = layout.clique_of(int(node))
        subs = layout.wdof_sub[clique]
        dofs_i.append(int(clique[subs == si][0]))
        dofs_j.append(int(clique[subs == sj][0]))
    return np.array(dofs_i, dtype=int), np.array(dofs_j, dtype=int)


def build_subassembly(layout: InterfaceLayout, coarse: CoarseSpec) -> Subassembly:
    """Construct r_tilde, r_hat and the dual-pair bookkeeping.

    tilde(W) coordinates, in order: one shared coordinate per corner clique;
    for each averaged edge one shared average plus per-side fluctuation
    coordinates (difference basis along the edge); one independent coordinate
    per remaining W dof. r_hat is recovered by least squares from
    r_tilde @ r_hat = continuous basis, which is exact because the continuous
    subspace lies in range(r_tilde).
    """
    corner_set = set(int(n) for n in coarse.corners)
    averaged_nodes: set[int] = set()
    if coarse.averaged:
        for edge in coarse.edges:
            averaged_nodes.update(int(n) for n in edge.nodes)

    cols: list[np.ndarray] = []
    meaning: list[tuple] = []
    dual_pairs: list[DualPair] = []

    def unit(idx_values: list[tuple[int, float]]) -> np.ndarray:
        col = np.zeros(layout.w_dim)
        for idx, val in idx_values:
            col[idx] = val
        return col

    for node in coarse.corners:
        clique = layout.clique_of(int(node))
        cols.append(unit([(int(w), 1.0) for w in clique]))
        meaning.append(("corner", int(node)))

    if coarse.averaged:
        for e_idx, edge in enumerate(coarse.edges):
            dofs_i, dofs_j = _side_dofs(layout, edge)
            k = dofs_i.size
            avg = np.zeros(layout.w_dim)
            avg[dofs_i] = 1.0 / k
            avg[dofs_j] = 1.0 / k
            cols.append(avg)
            meaning.append(("edge-average", e_idx))
            fluct_i = []
            fluct_j = []
            for side, dofs, out in ((edge.subdomains[0], dofs_i, fluct_i),
                                    (edge.subdomains[1], dofs_j, fluct_j)):
                for t in range(k - 1):
                    out.append(len(cols))
                    cols.append(unit([(int(dofs[t]), 1.0), (int(dofs[t + 1]), -1.0)]))
                    meaning.append(("edge-fluct", e_idx, side, t))
            for t in range(k - 1):
                dual_pairs.append(
                    DualPair(
                        ci=fluct_i[t],
                        cj=fluct_j[t],
                        kind="edge-fluct",
                        edge_index=e_idx,
                        wdofs_i=dofs_i,
                        wdofs_j=dofs_j,
                    )
                )

    unsupported: list[int] = []
    for row, node in enumerate(layout.nodes):
        node = int(node)
        if node in corner_set or node in averaged_nodes:
            continue
        clique = layout.cliques[row]
        if clique.size > 2:
            unsupported.append(node)
        coord_idx = []
        for w in clique:
            coord_idx.append(len(cols))
            cols.append(unit([(int(w), 1.0)]))
            meaning.append(("dual", node, int(layout.wdof_sub[w])))
        if clique.size == 2:
            dual_pairs.append(
                DualPair(
                    ci=coord_idx[0],
                    cj=coord_idx[1],
                    kind="node",
                    node=node,
                    wdofs_i=clique[:1],
                    wdofs_j=clique[1:],
                )
            )

    r_tilde = np.column_stack(cols) if cols else np.zeros((layout.w_dim, 0))
    cont = continuous_basis(layout)
    if r_tilde.shape[1]:
        r_hat, _, rank, _ = np.linalg.lstsq(r_tilde, cont, rcond=None)
        if rank < r_tilde.shape[1]:
            raise ValueError("r_tilde is rank deficient (construction bug)")
        residual = np.abs(r_tilde @ r_hat - cont).max(initial=0.0)
        if residual > 1e-10:
            raise ValueError(
                f"continuous space not contained in tilde(W): residual {residual:.3e}"
            )
    else:
        r_hat = np.zeros((0, layout.w_hat_dim))
    return Subassembly(
        r_tilde=r_tilde,
        r_hat=r_hat,
        continuous=cont,
        coord_meaning=meaning,
        dual_pairs=dual_pairs,
        unsupported_cliques=unsupported,
    )


def check_wtilde_spd(stilde: np.ndarray, sub: Subassembly | None = None) -> CholFactor:
    """Positive definiteness of tilde(S) via Cholesky; on failure the pivot is
    mapped back to the meaning of the offending tilde(W) coordinate."""
    try:
        return cholesky(stilde)
    except NotPositiveDefinite as err:
        meaning = None
        if sub is not None and 0 <= err.pivot < len(sub.coord_meaning):
            meaning = sub.coord_meaning[err.pivot]
        raise NotPositiveDefinite(err.pivot, err.value, meaning) from None
