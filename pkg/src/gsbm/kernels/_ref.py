"""Pure-Python (NumPy) kernel backend.

Mirrors the compiled backend in gsbm.kernels._fast: identical per-pair
hash RNG and identical arithmetic in the edge-decision path, so both
backends produce bit-identical graphs.  Candidate pairs come from a
cell-list grid; each unordered pair is visited exactly once.

All kernels take the flattened cell index (order, start, cells per
axis) plus the profile piece tables (knots, left values, slopes).
"""

from __future__ import annotations

from itertools import product

import numpy as np

_U64 = np.uint64
_C1 = _U64(0xBF58476D1CE4E5B9)
_C2 = _U64(0x94D049BB133111EB)
_PAIR_SALT_LO = _U64(0x9E3779B97F4A7C15)
_PAIR_SALT_HI = _U64(0xC2B2AE3D27D4EB4F)
_INV_2_53 = 2.0**-53


def _smix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U64(30))) * _C1
    z = (z ^ (z >> _U64(27))) * _C2
    return z ^ (z >> _U64(31))


def pair_uniforms(seed: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) per pair, keyed by (seed, lo, hi); order independent."""
    with np.errstate(over="ignore"):
        x = (lo.astype(np.uint64) * _PAIR_SALT_LO) ^ _U64(seed)
        x = _smix(x)
        x = _smix(x ^ (hi.astype(np.uint64) * _PAIR_SALT_HI))
    return (x >> _U64(11)).astype(np.float64) * _INV_2_53


def _eval_pieces(t, knots, lo_vals, slopes):
    idx = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, len(lo_vals) - 1)
    return lo_vals[idx] + slopes[idx] * (t - knots[idx])


def _half_offsets(d: int):
    return [o for o in product((-1, 0, 1), repeat=d) if o > (0,) * d]


def _iter_candidate_batches(positions, order, start, m, cell_side, side, r2, strict):
    """Yield (lo, hi, d2) batches of candidate pairs within the radius.

    Pairs are canonical (lo < hi by vertex id) and each unordered pair
    appears in exactly one batch.
    """
    d = positions.shape[1]
    total = m**d
    offsets = _half_offsets(d) if m >= 3 else []
    strides = np.array([m**k for k in range(d - 1, -1, -1)], dtype=np.int64)

    def filtered(ia, ib):
        dx = np.abs(positions[ia] - positions[ib])
        dx = np.minimum(dx, side - dx)
        d2 = np.einsum("ij,ij->i", dx, dx)
        mask = d2 < r2 if strict else d2 <= r2
        ia, ib, d2 = ia[mask], ib[mask], d2[mask]
        return np.minimum(ia, ib), np.maximum(ia, ib), d2

    for c in range(total):
        ids_a = order[start[c] : start[c + 1]]
        ka = len(ids_a)
        if ka == 0:
            continue
        if ka >= 2:
            iu, jv = np.triu_indices(ka, 1)
            yield filtered(ids_a[iu], ids_a[jv])
        if not offsets:
            continue
        coords = np.array(np.unravel_index(c, (m,) * d), dtype=np.int64)
        for off in offsets:
            nb = int(np.dot((coords + np.asarray(off, dtype=np.int64)) % m, strides))
            ids_b = order[start[nb] : start[nb + 1]]
            if len(ids_b) == 0:
                continue
            ia = np.repeat(ids_a, len(ids_b))
            ib = np.tile(ids_b, ka)
            yield filtered(ia, ib)


def sample_edges(
    positions, labels, order, start, m, cell_side, side, r2, inv_scale,
    knots, fin_lo, fin_m, fout_lo, fout_m, seed,
):
    """Bernoulli edge decisions over all pairs within the radius."""
    out_i, out_j = [], []
    for lo, hi, d2 in _iter_candidate_batches(
        positions, order, start, m, cell_side, side, r2, strict=False
    ):
        if len(lo) == 0:
            continue
        t = np.sqrt(d2) * inv_scale
        fin = _eval_pieces(t, knots, fin_lo, fin_m)
        fout = _eval_pieces(t, knots, fout_lo, fout_m)
        p = np.where(labels[lo] == labels[hi], fin, fout)
        keep = pair_uniforms(seed, lo, hi) < p
        out_i.append(lo[keep])
        out_j.append(hi[keep])
    if not out_i:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    return np.concatenate(out_i), np.concatenate(out_j)


def collect_pairs(positions, order, start, m, cell_side, side, r2, strict):
    """All pairs within the radius: (lo, hi, squared distance)."""
    ii, jj, dd = [], [], []
    for lo, hi, d2 in _iter_candidate_batches(
        positions, order, start, m, cell_side, side, r2, strict
    ):
        ii.append(lo)
        jj.append(hi)
        dd.append(d2)
    if not ii:
        e = np.empty(0, dtype=np.int64)
        return e, e.copy(), np.empty(0, dtype=np.float64)
    return np.concatenate(ii), np.concatenate(jj), np.concatenate(dd)


def _half_edge_keys(indptr, indices, n):
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    mask = rows < indices
    return rows[mask] * n + indices[mask]


def tau_accumulate(
    positions, sigma, indptr, indices, order, start, m, cell_side, side,
    r2, inv_scale, knots, fin_lo, fin_m, fout_lo, fout_m,
):
    """Log-likelihood-ratio scores for every vertex under labeling sigma.

    For each pair within the radius the edge (or non-edge) log ratio is
    added to each endpoint's score, signed by the other endpoint's
    label; entries with sigma == 0 contribute nothing.
    """
    n = len(positions)
    tau = np.zeros(n, dtype=np.float64)
    keys = _half_edge_keys(indptr, indices, n)
    sf = sigma.astype(np.float64)
    for lo, hi, d2 in _iter_candidate_batches(
        positions, order, start, m, cell_side, side, r2, strict=False
    ):
        if len(lo) == 0:
            continue
        t = np.sqrt(d2) * inv_scale
        fin = _eval_pieces(t, knots, fin_lo, fin_m)
        fout = _eval_pieces(t, knots, fout_lo, fout_m)
        qk = lo * n + hi
        pos = np.searchsorted(keys, qk)
        pos_c = np.minimum(pos, len(keys) - 1) if len(keys) else pos
        is_edge = (pos < len(keys)) & (keys[pos_c] == qk) if len(keys) else np.zeros(len(qk), bool)
        w = np.where(is_edge, np.log(fin / fout), np.log((1.0 - fin) / (1.0 - fout)))
        np.add.at(tau, lo, sf[hi] * w)
        np.add.at(tau, hi, sf[lo] * w)
    return tau


def visibility_components(positions, order, start, m, cell_side, side, r2):
    """Connected-component labels of the radius graph (inclusive)."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    n = len(positions)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    ii, jj = [], []
    for lo, hi, _ in _iter_candidate_batches(
        positions, order, start, m, cell_side, side, r2, strict=False
    ):
        ii.append(lo)
        jj.append(hi)
    if ii:
        rows = np.concatenate(ii).astype(np.int32)
        cols = np.concatenate(jj).astype(np.int32)
    else:
        rows = np.empty(0, dtype=np.int32)
        cols = np.empty(0, dtype=np.int32)
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return labels.astype(np.int64)
