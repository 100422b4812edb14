"""Ground-truth-aware baselines: genie labels, flip-bad census, tiny MLE.

A vertex is flip-bad when flipping its label does not decrease the
likelihood of the observed graph, i.e. sigma*(v) * tau(v, sigma*) <= 0
with the non-strict boundary convention.  Any flip-bad vertex is a
witness that the maximum likelihood estimator fails, which is how the
below-threshold regime is instrumented empirically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .recovery import label_log_odds, refine
from .sampler import GsbmGraph

MLE_MAX_VERTICES = 20


@dataclass(eq=False)
class FlipBadReport:
    count: int
    vertex_ids: np.ndarray
    tau_values: np.ndarray


def genie_label(graph: GsbmGraph, v: int) -> int:
    """Label v from the likelihood ratio with all true labels revealed."""
    return refine(graph, graph.sigma_star, v)


def flip_bad_census(graph: GsbmGraph) -> FlipBadReport:
    """All vertices whose label flip does not decrease the likelihood."""
    tau = label_log_odds(graph, graph.sigma_star)
    bad = graph.sigma_star.astype(np.float64) * tau <= 0.0
    return FlipBadReport(
        count=int(np.sum(bad)),
        vertex_ids=np.flatnonzero(bad).astype(np.int64),
        tau_values=tau,
    )


def _pair_terms(graph: GsbmGraph):
    """Visible pairs with their edge/non-edge log-probability terms."""
    lo, hi, d2 = kernels.collect_pairs(*graph.kernel_args(), False)
    fin, fout = graph.scaled_eval(np.sqrt(d2))
    n = graph.n_vertices
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(graph.indptr))
    half = rows < graph.indices
    edge_keys = rows[half] * n + graph.indices[half]
    qk = lo * n + hi
    pos = np.searchsorted(edge_keys, qk)
    pos_c = np.minimum(pos, max(len(edge_keys) - 1, 0))
    is_edge = (
        (pos < len(edge_keys)) & (edge_keys[pos_c] == qk)
        if len(edge_keys)
        else np.zeros(len(qk), dtype=bool)
    )
    w_in = np.where(is_edge, np.log(fin), np.log1p(-fin))
    w_out = np.where(is_edge, np.log(fout), np.log1p(-fout))
    return lo, hi, w_in, w_out


def likelihood(graph: GsbmGraph, labeling) -> float:
    """Log-probability of the observed edge pattern given the labels.

    Sums, over pairs within the visibility radius, log f_in or
    log(1 - f_in) when the labels agree and the f_out analogues when
    they differ.
    """
    sigma = np.asarray(getattr(labeling, "values", labeling), dtype=np.int64)
    if np.any(sigma == 0):
        raise ValueError("likelihood needs labels in {-1, +1}")
    lo, hi, w_in, w_out = _pair_terms(graph)
    if len(lo) == 0:
        return 0.0
    agree = sigma[lo] * sigma[hi] > 0
    return float(np.sum(np.where(agree, w_in, w_out)))


def brute_force_mle(graph: GsbmGraph) -> tuple[np.ndarray, float]:
    """Exhaustive maximum-likelihood labeling for tiny instances.

    Vertex 0 is pinned to +1 (sign symmetry); the remaining 2^(V-1)
    labelings are scored exactly.  Ties resolve to the labeling whose
    (sigma(1), sigma(2), ...) tuple is lexicographically smallest with
    +1 ordered before -1.
    """
    n = graph.n_vertices
    if n > MLE_MAX_VERTICES:
        raise ValueError(f"brute-force MLE is capped at {MLE_MAX_VERTICES} vertices")
    if n == 0:
        return np.empty(0, dtype=np.int8), 0.0
    lo, hi, w_in, w_out = _pair_terms(graph)
    n_lab = 1 << (n - 1)
    codes = np.arange(n_lab, dtype=np.int64)
    signs = np.ones((n_lab, n), dtype=np.int8)
    for j in range(1, n):
        bit = (codes >> (n - 1 - j)) & 1
        signs[:, j] = 1 - 2 * bit.astype(np.int8)
    scores = np.zeros(n_lab, dtype=np.float64)
    for p in range(len(lo)):
        agree = signs[:, lo[p]] == signs[:, hi[p]]
        scores += np.where(agree, w_in[p], w_out[p])
    best = int(np.argmax(scores))
    return signs[best].copy(), float(scores[best])
