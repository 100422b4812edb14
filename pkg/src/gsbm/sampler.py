"""GSBM instance generation.

Vertex count is Poisson(lambda * n); positions are uniform on the
torus; labels are uniform on {-1, +1}; every pair within the
visibility radius r * (log n)^(1/d) gets an independent Bernoulli edge
draw with success probability f_in or f_out (evaluated at the wrap
distance divided by (log n)^(1/d)) according to label agreement.

Edge draws are keyed by (seed, low id, high id) through a counter-based
hash, so the result is independent of iteration order: sampling is
deterministic for a given (parameters, seed) and stays deterministic
under refactors of the pair enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .geometry import CellIndex, TorusBox, build_cell_index
from .profiles import Profile, evaluate
from .rng import edge_stream_seed

GRAPH_FORMAT_VERSION = "gsbm v1"


@dataclass(eq=False)
class GsbmGraph:
    """A sampled instance: geometry, hidden labels, adjacency."""

    box: TorusBox
    lam: float
    profile: Profile
    positions: np.ndarray      # (N, d) float64 in [0, side)
    sigma_star: np.ndarray     # (N,) int8 in {-1, +1}
    indptr: np.ndarray         # CSR adjacency, neighbor ids sorted per row
    indices: np.ndarray
    seed: int
    visibility_radius: float
    _cells: CellIndex | None = field(default=None, repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def d(self) -> int:
        return self.box.d

    @property
    def inv_scale(self) -> float:
        """1 / (log n)^(1/d), the factor mapping distances to profile units."""
        return 1.0 / math.log(self.box.n) ** (1.0 / self.box.d)

    @property
    def cells(self) -> CellIndex:
        if self._cells is None:
            self._cells = build_cell_index(
                self.positions, self.box.side, self.visibility_radius
            )
        return self._cells

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        k = np.searchsorted(row, v)
        return k < len(row) and row[k] == v

    def kernel_args(self):
        """Cell-index argument bundle shared by all kernels."""
        c = self.cells
        r = self.visibility_radius
        return (
            self.positions,
            c.order,
            c.start,
            c.cells_per_axis,
            c.cell_side,
            self.box.side,
            r * r,
        )

    def profile_tables(self):
        p = self.profile
        return (
            p.knots,
            p.f_in.left_values,
            p.f_in.slopes,
            p.f_out.left_values,
            p.f_out.slopes,
        )

    def scaled_eval(self, distance):
        """Profile values at graph-scale distances."""
        return evaluate(self.profile, np.asarray(distance) * self.inv_scale)

    def with_sigma(self, sigma_star: np.ndarray) -> "GsbmGraph":
        """Same geometry and edges, different ground-truth labels."""
        return replace(self, sigma_star=np.asarray(sigma_star, dtype=np.int8))


def _csr_from_edges(ei: np.ndarray, ej: np.ndarray, n: int):
    rows = np.concatenate([ei, ej])
    cols = np.concatenate([ej, ei])
    order = np.lexsort((cols, rows))
    indices = cols[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return indptr, indices.astype(np.int64)


def sample(lam: float, n: float, profile: Profile, d: int, seed: int) -> GsbmGraph:
    """Draw one instance; deterministic given (lam, n, profile, d, seed).

    Stream layout: one PCG64 generator seeded with `seed` draws the
    vertex count, then positions, then labels; edges use the per-pair
    hash stream derived from the same seed.
    """
    if lam <= 0.0:
        raise ValueError("intensity lambda must be positive")
    if n <= 1.0:
        raise ValueError("volume n must exceed 1")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    box = TorusBox.from_volume(n, d)
    radius = profile.r * math.log(n) ** (1.0 / d)

    rng = np.random.default_rng(seed)
    count = int(rng.poisson(lam * n))
    positions = rng.random((count, d)) * box.side
    sigma = (rng.integers(0, 2, size=count, dtype=np.int64) * 2 - 1).astype(np.int8)

    graph = GsbmGraph(
        box=box,
        lam=float(lam),
        profile=profile,
        positions=positions,
        sigma_star=sigma,
        indptr=np.zeros(count + 1, dtype=np.int64),
        indices=np.empty(0, dtype=np.int64),
        seed=int(seed),
        visibility_radius=radius,
    )
    ei, ej = kernels.sample_edges(
        positions,
        sigma,
        *graph.kernel_args()[1:],
        graph.inv_scale,
        *graph.profile_tables(),
        edge_stream_seed(seed),
    )
    order = np.lexsort((ej, ei))
    graph.indptr, graph.indices = _csr_from_edges(ei[order], ej[order], count)
    return graph


def mean_degree(graph: GsbmGraph) -> float:
    """2|E| / |V|; 0 for the empty graph."""
    if graph.n_vertices == 0:
        return 0.0
    return 2.0 * graph.n_edges / graph.n_vertices


def edge_list(graph: GsbmGraph) -> np.ndarray:
    """(E, 2) array of edges with id_lo < id_hi, lexicographically sorted."""
    n = graph.n_vertices
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(graph.indptr))
    mask = rows < graph.indices
    return np.column_stack([rows[mask], graph.indices[mask]])


def save_graph(graph: GsbmGraph, path) -> None:
    """Line-oriented text format with exact decimal float round-trip."""
    with open(path, "w") as fh:
        fh.write(
            f"{GRAPH_FORMAT_VERSION} d={graph.box.d} n={graph.box.n!r} "
            f"lambda={graph.lam!r} r={graph.profile.r!r} seed={graph.seed} "
            f"count={graph.n_vertices}\n"
        )
        for i in range(graph.n_vertices):
            coords = " ".join(repr(float(x)) for x in graph.positions[i])
            fh.write(f"v {i} {coords} {int(graph.sigma_star[i])}\n")
        for lo, hi in edge_list(graph):
            fh.write(f"e {lo} {hi}\n")


def load_graph(path, profile: Profile) -> GsbmGraph:
    """Read a graph file; the profile is supplied by the caller's config."""
    with open(path) as fh:
        header = fh.readline().split()
        if header[:2] != GRAPH_FORMAT_VERSION.split():
            raise ValueError("not a gsbm v1 graph file")
        meta = dict(tok.split("=", 1) for tok in header[2:])
        d = int(meta["d"])
        n = float(meta["n"])
        lam = float(meta["lambda"])
        r = float(meta["r"])
        seed = int(meta["seed"])
        count = int(meta["count"])
        if profile.r != r:
            raise ValueError(
                f"profile cutoff {profile.r!r} does not match graph file r={r!r}"
            )
        positions = np.empty((count, d), dtype=np.float64)
        sigma = np.empty(count, dtype=np.int8)
        ei, ej = [], []
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                vid = int(parts[1])
                positions[vid] = [float(x) for x in parts[2 : 2 + d]]
                sigma[vid] = int(parts[2 + d])
            elif parts[0] == "e":
                ei.append(int(parts[1]))
                ej.append(int(parts[2]))
            else:
                raise ValueError(f"unrecognized line in graph file: {line!r}")
    box = TorusBox.from_volume(n, d)
    ei_a = np.asarray(ei, dtype=np.int64)
    ej_a = np.asarray(ej, dtype=np.int64)
    indptr, indices = _csr_from_edges(ei_a, ej_a, count)
    return GsbmGraph(
        box=box,
        lam=lam,
        profile=profile,
        positions=positions,
        sigma_star=sigma,
        indptr=indptr,
        indices=indices,
        seed=seed,
        visibility_radius=r * math.log(n) ** (1.0 / d),
    )
