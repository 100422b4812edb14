"""Block partition of the torus and the block visibility graph.

The torus is tiled by cubes of nominal volume r^d * chi * log n; a
block is occupied when it holds at least delta * log n vertices, and
two blocks are visible when the sup distance between them is at most
the visibility radius.  Phase-one labeling walks a BFS spanning tree of
the visibility graph on occupied blocks.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import TorusBox, block_sup_distance
from .sampler import GsbmGraph


@dataclass(eq=False)
class BlockGrid:
    """Cubic tiling of the torus with vertex assignment and occupancy.

    The per-axis count is floored, then the block side is stretched so
    the grid tiles exactly; actual block volume is therefore at least
    the nominal one, which only strengthens occupancy margins.
    """

    box: TorusBox
    blocks_per_axis: int
    block_side: float
    nominal_volume: float
    vertex_block: np.ndarray   # vertex id -> flat block id
    occupancy: np.ndarray      # flat block id -> vertex count
    delta_threshold: float

    @property
    def total_blocks(self) -> int:
        return self.blocks_per_axis**self.box.d

    def block_bounds(self, block_id: int) -> tuple[np.ndarray, np.ndarray]:
        coords = np.array(
            np.unravel_index(block_id, (self.blocks_per_axis,) * self.box.d),
            dtype=np.float64,
        )
        lo = coords * self.block_side
        return lo, lo + self.block_side

    def members_table(self) -> tuple[np.ndarray, np.ndarray]:
        """(order, start) so order[start[b]:start[b+1]] lists block b's vertices."""
        order = np.argsort(self.vertex_block, kind="stable").astype(np.int64)
        start = np.zeros(self.total_blocks + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.vertex_block, minlength=self.total_blocks), out=start[1:])
        return order, start


@dataclass(eq=False)
class VisibilityGraph:
    """Occupied blocks, their visibility edges, and a rooted BFS tree.

    parent and bfs_order are filled only when the graph is connected;
    the root is the occupied block with the smallest id and BFS visits
    neighbors in ascending id order.
    """

    nodes: np.ndarray
    adjacency: dict[int, np.ndarray]
    connected: bool
    parent: dict[int, int | None] | None
    bfs_order: list[int] | None


def build_block_grid(graph: GsbmGraph, chi: float, delta: float) -> BlockGrid:
    """Tile the torus and assign vertices by coordinate floor-division."""
    if chi <= 0.0:
        raise ValueError("chi must be positive")
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    box = graph.box
    logn = math.log(box.n)
    nominal = graph.profile.r**box.d * chi * logn
    if not nominal < box.n:
        raise ValueError("nominal block volume must be smaller than the box volume")
    k = int(box.side // nominal ** (1.0 / box.d))
    k = max(k, 1)
    block_side = box.side / k
    diameter = math.sqrt(box.d) * block_side
    if diameter > graph.visibility_radius * (1.0 + 1e-12):
        raise ValueError(
            "block diameter exceeds the visibility radius; vertices in one "
            f"block would not be mutually visible (chi={chi} too large)"
        )
    coords = np.minimum(
        np.floor(graph.positions / block_side).astype(np.int64), k - 1
    )
    flat = (
        np.ravel_multi_index(coords.T, (k,) * box.d)
        if graph.n_vertices
        else np.empty(0, dtype=np.int64)
    )
    occupancy = np.bincount(flat, minlength=k**box.d)
    return BlockGrid(
        box=box,
        blocks_per_axis=k,
        block_side=block_side,
        nominal_volume=nominal,
        vertex_block=flat.astype(np.int64),
        occupancy=occupancy,
        delta_threshold=delta * logn,
    )


def occupied_blocks(grid: BlockGrid) -> np.ndarray:
    """Ids of blocks holding at least delta * log n vertices."""
    return np.flatnonzero(grid.occupancy >= grid.delta_threshold).astype(np.int64)


def _axis_offset_sup(delta: int, block_side: float, circ: float) -> float:
    lo_b = delta * block_side
    return block_sup_distance(
        (np.array([0.0]), np.array([block_side])),
        (np.array([lo_b]), np.array([lo_b + block_side])),
        TorusBox(d=1, side=circ, n=circ),
    )


def _visible_offsets(grid: BlockGrid, radius: float) -> list[tuple[int, ...]]:
    """Nonzero per-axis index offsets whose block sup distance is <= radius."""
    k = grid.blocks_per_axis
    sup_1d = np.array(
        [_axis_offset_sup(dlt, grid.block_side, grid.box.side) for dlt in range(k)]
    )
    reach = math.ceil(radius / grid.block_side) + 1
    deltas = range(k) if 2 * reach + 1 >= k else [x % k for x in range(-reach, reach + 1)]
    deltas = sorted(set(deltas))
    out = []
    for off in np.ndindex(*(len(deltas),) * grid.box.d):
        delta = tuple(deltas[i] for i in off)
        if all(x == 0 for x in delta):
            continue
        sup2 = sum(sup_1d[x] ** 2 for x in delta)
        if sup2 <= radius * radius:
            out.append(delta)
    return out


def build_visibility_graph(grid: BlockGrid, graph: GsbmGraph) -> VisibilityGraph:
    """Visibility graph on occupied blocks plus its BFS spanning tree."""
    occ = occupied_blocks(grid)
    occ_mask = np.zeros(grid.total_blocks, dtype=bool)
    occ_mask[occ] = True
    k = grid.blocks_per_axis
    d = grid.box.d
    radius = graph.visibility_radius

    edges: set[tuple[int, int]] = set()
    if len(occ) > 1:
        coords = np.array(np.unravel_index(occ, (k,) * d), dtype=np.int64).T
        strides = np.array([k**i for i in range(d - 1, -1, -1)], dtype=np.int64)
        for delta in _visible_offsets(grid, radius):
            nb = (coords + np.asarray(delta, dtype=np.int64)) % k
            nb_flat = nb @ strides
            good = occ_mask[nb_flat] & (nb_flat != occ)
            for a, b in zip(occ[good], nb_flat[good]):
                edges.add((min(int(a), int(b)), max(int(a), int(b))))

    adjacency: dict[int, list[int]] = {int(b): [] for b in occ}
    for a, b in edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    adjacency_arr = {b: np.array(sorted(nbrs), dtype=np.int64) for b, nbrs in adjacency.items()}

    parent: dict[int, int | None] = {}
    order: list[int] = []
    if len(occ):
        root = int(occ[0])
        parent[root] = None
        order.append(root)
        queue = deque([root])
        while queue:
            b = queue.popleft()
            for nb in adjacency_arr[b]:
                nb = int(nb)
                if nb not in parent:
                    parent[nb] = b
                    order.append(nb)
                    queue.append(nb)
    connected = len(order) == len(occ)
    return VisibilityGraph(
        nodes=occ,
        adjacency=adjacency_arr,
        connected=connected,
        parent=parent if connected else None,
        bfs_order=order if connected else None,
    )


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]


def validate_parameters(
    d: int,
    lam: float,
    r: float,
    chi: float,
    delta: float,
    chi0: float,
    delta_factor: float = 0.5,
) -> ValidationReport:
    """Check the block-partition constants against the connectivity regime.

    d = 1 requires lam * r > 1 and 0 < chi0 < (1 - 1/(lam r))/2; d >= 2
    requires lam * r^d * (nu_d * (1 - (3 sqrt(d)/2) chi0^(1/d))^d - chi0) > 1
    with a positive inner factor.  In both cases chi0/2 < chi < chi0.
    The admissible delta ceiling is only known up to a computable
    constant, exposed here as delta < delta_factor * chi.
    """
    from .geometry import unit_ball_volume

    checks: list[str] = []
    if d == 1:
        if not lam * r > 1.0:
            checks.append(f"lambda * r = {lam * r:.6g} must exceed 1")
        else:
            cap = (1.0 - 1.0 / (lam * r)) / 2.0
            if not 0.0 < chi0 < cap:
                checks.append(f"chi0 = {chi0:.6g} must lie in (0, {cap:.6g})")
    else:
        inner = 1.0 - (3.0 * math.sqrt(d) / 2.0) * chi0 ** (1.0 / d)
        if not inner > 0.0:
            checks.append(
                f"1 - (3 sqrt(d)/2) chi0^(1/d) = {inner:.6g} must be positive"
            )
        else:
            nu = unit_ball_volume(d)
            lhs = lam * r**d * (nu * inner**d - chi0)
            if not lhs > 1.0:
                checks.append(
                    f"lambda r^d (nu_d (1 - (3 sqrt(d)/2) chi0^(1/d))^d - chi0) "
                    f"= {lhs:.6g} must exceed 1"
                )
    if not chi0 / 2.0 < chi < chi0:
        checks.append(f"chi = {chi:.6g} must lie in (chi0/2, chi0) = "
                      f"({chi0 / 2.0:.6g}, {chi0:.6g})")
    if not delta > 0.0:
        checks.append(f"delta = {delta:.6g} must be positive")
    if not delta < delta_factor * chi:
        checks.append(
            f"delta = {delta:.6g} must stay below delta_factor * chi = "
            f"{delta_factor * chi:.6g}"
        )
    return ValidationReport(ok=not checks, violations=tuple(checks))


def vertex_visibility_connected(graph: GsbmGraph) -> bool:
    """Connectivity of the radius graph on vertices (distance <= radius).

    Union-find / component labeling over cell-index candidate pairs;
    the empty graph counts as connected.
    """
    if graph.n_vertices == 0:
        return True
    labels = kernels.visibility_components(*graph.kernel_args())
    return int(labels.max()) == 0
