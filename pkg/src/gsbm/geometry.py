"""Toroidal geometry: wrap-around metric, cell-list index, block distances.

Points live in a d-dimensional cube of volume n with opposite faces
identified.  Coordinates are stored in [0, side); the metric is
translation invariant, so the shift away from a centered box is
unobservable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TorusBox:
    """The sampling region: a d-cube of volume n with wrap-around."""

    d: int
    side: float
    n: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if abs(self.side**self.d - self.n) > 1e-9 * max(self.n, 1.0):
            raise ValueError("side^d must equal the volume n")

    @classmethod
    def from_volume(cls, n: float, d: int) -> "TorusBox":
        return cls(d=d, side=float(n) ** (1.0 / d), n=float(n))


def torus_distance(u, v, box: TorusBox) -> float:
    """Wrap-around Euclidean distance; axis gaps are min(|du|, side - |du|)."""
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    dx = np.abs(u - v)
    dx = np.minimum(dx, box.side - dx)
    return float(np.sqrt(np.sum(dx * dx, axis=-1)))


def pairwise_torus_distance_sq(a: np.ndarray, b: np.ndarray, side: float) -> np.ndarray:
    """(len(a), len(b)) matrix of squared wrap distances."""
    dx = np.abs(a[:, None, :] - b[None, :, :])
    dx = np.minimum(dx, side - dx)
    return np.einsum("ijk,ijk->ij", dx, dx)


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in d dimensions."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


@dataclass(frozen=True, eq=False)
class CellIndex:
    """Uniform grid over the torus for fixed-radius neighbor queries.

    cell_side >= the build radius, so a radius query inspects at most
    3^d cells.  When the box is too small for three cells per axis the
    index degenerates to a single cell (full scan).
    """

    side: float
    d: int
    cell_side: float
    cells_per_axis: int
    order: np.ndarray   # vertex ids grouped by cell
    start: np.ndarray   # start[c]:start[c+1] slices order for flat cell c

    @property
    def total_cells(self) -> int:
        return self.cells_per_axis**self.d

    def cell_members(self, flat_cell: int) -> np.ndarray:
        return self.order[self.start[flat_cell] : self.start[flat_cell + 1]]


def cell_coords(positions: np.ndarray, index: CellIndex) -> np.ndarray:
    """Per-axis integer cell coordinates of each position."""
    m = index.cells_per_axis
    coords = np.floor(positions / index.cell_side).astype(np.int64)
    return np.minimum(coords, m - 1)


def build_cell_index(positions: np.ndarray, side: float, radius: float) -> CellIndex:
    """Index positions (N, d) with cells at least `radius` wide."""
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    n_pts, d = positions.shape
    m = int(side // radius)
    if m < 3:
        m = 1
    cell_side = side / m
    idx = CellIndex(
        side=float(side),
        d=d,
        cell_side=cell_side,
        cells_per_axis=m,
        order=np.empty(0, dtype=np.int64),
        start=np.empty(0, dtype=np.int64),
    )
    coords = cell_coords(positions, idx) if n_pts else np.empty((0, d), dtype=np.int64)
    flat = np.ravel_multi_index(coords.T, (m,) * d) if n_pts else np.empty(0, dtype=np.int64)
    order = np.argsort(flat, kind="stable").astype(np.int64)
    counts = np.bincount(flat, minlength=m**d)
    start = np.zeros(m**d + 1, dtype=np.int64)
    np.cumsum(counts, out=start[1:])
    object.__setattr__(idx, "order", order)
    object.__setattr__(idx, "start", start)
    return idx


def neighbors_within(
    index: CellIndex, positions: np.ndarray, v: int, radius: float
) -> np.ndarray:
    """Ids u != v with torus_distance(u, v) strictly below `radius`.

    Requires radius <= the cell side the index was built with.  Output
    is sorted, hence deterministic.
    """
    n_pts = len(positions)
    if not 0 <= v < n_pts:
        raise ValueError(f"unknown vertex id {v}")
    if radius > index.cell_side * (1 + 1e-12):
        raise ValueError("query radius exceeds the index cell size")
    cand = _candidate_ids(index, positions, v)
    dx = np.abs(positions[cand] - positions[v])
    dx = np.minimum(dx, index.side - dx)
    d2 = np.einsum("ij,ij->i", dx, dx)
    out = cand[d2 < radius * radius]
    return np.sort(out[out != v])


def visible_ids(
    index: CellIndex, positions: np.ndarray, v: int, radius: float
) -> np.ndarray:
    """Like neighbors_within but inclusive (distance <= radius)."""
    n_pts = len(positions)
    if not 0 <= v < n_pts:
        raise ValueError(f"unknown vertex id {v}")
    cand = _candidate_ids(index, positions, v)
    dx = np.abs(positions[cand] - positions[v])
    dx = np.minimum(dx, index.side - dx)
    d2 = np.einsum("ij,ij->i", dx, dx)
    out = cand[d2 <= radius * radius]
    return np.sort(out[out != v])


def _candidate_ids(index: CellIndex, positions: np.ndarray, v: int) -> np.ndarray:
    m = index.cells_per_axis
    if m == 1:
        return index.order
    coord = cell_coords(positions[v : v + 1], index)[0]
    chunks = []
    for off in np.ndindex(*(3,) * index.d):
        nb = tuple((coord[i] + off[i] - 1) % m for i in range(index.d))
        flat = int(np.ravel_multi_index(nb, (m,) * index.d))
        chunks.append(index.cell_members(flat))
    return np.concatenate(chunks)


def _axis_sup(lo_a, hi_a, lo_b, hi_b, circ: float) -> float:
    """Sup of wrap distance between points of two intervals on a circle."""
    w = ((hi_a - lo_a) + (hi_b - lo_b)) / 2.0
    if 2.0 * w >= circ:
        return circ / 2.0
    c = ((lo_a + hi_a) - (lo_b + hi_b)) / 2.0
    cm = c % circ
    if abs(cm - circ / 2.0) <= w:
        # the set of coordinate differences covers a point at circular
        # distance circ/2, the diameter of the circle
        return circ / 2.0

    def wrap(x: float) -> float:
        x = abs(x) % circ
        return min(x, circ - x)

    return max(
        wrap(lo_a - lo_b), wrap(lo_a - hi_b), wrap(hi_a - lo_b), wrap(hi_a - hi_b)
    )


def block_sup_distance(block_a, block_b, box: TorusBox) -> float:
    """Sup over x in A, y in B of the toroidal distance.

    Blocks are axis-aligned boxes given as (lo, hi) coordinate arrays;
    the sup decomposes per axis on a torus.
    """
    lo_a, hi_a = (np.atleast_1d(np.asarray(x, dtype=np.float64)) for x in block_a)
    lo_b, hi_b = (np.atleast_1d(np.asarray(x, dtype=np.float64)) for x in block_b)
    total = 0.0
    for i in range(box.d):
        s = _axis_sup(lo_a[i], hi_a[i], lo_b[i], hi_b[i], box.side)
        total += s * s
    return math.sqrt(total)
