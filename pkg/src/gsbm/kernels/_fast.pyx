# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend.

Same contract as gsbm.kernels._ref.  The edge-decision path (distance,
piece evaluation, per-pair hash) uses the identical IEEE arithmetic as
the NumPy backend, so sampled graphs are bit-identical across backends.
"""

from libc.math cimport sqrt, log
from libcpp.vector cimport vector

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef unsigned long long u64
ctypedef long long i64

cdef u64 _C1 = 0xBF58476D1CE4E5B9ULL
cdef u64 _C2 = 0x94D049BB133111EBULL
cdef u64 _SALT_LO = 0x9E3779B97F4A7C15ULL
cdef u64 _SALT_HI = 0xC2B2AE3D27D4EB4FULL
cdef double _INV_2_53 = 1.0 / 9007199254740992.0


cdef inline u64 _smix(u64 z) nogil:
    z = (z ^ (z >> 30)) * _C1
    z = (z ^ (z >> 27)) * _C2
    return z ^ (z >> 31)


cdef inline double _pair_uniform(u64 seed, u64 lo, u64 hi) nogil:
    cdef u64 x = (lo * _SALT_LO) ^ seed
    x = _smix(x)
    x = _smix(x ^ (hi * _SALT_HI))
    return <double>(x >> 11) * _INV_2_53


cdef inline Py_ssize_t _piece_of(double t, const double[::1] knots) nogil:
    # first index with knots[idx] > t, minus one, clipped to a valid piece
    cdef Py_ssize_t lo = 0, hi = knots.shape[0], mid, idx
    while lo < hi:
        mid = (lo + hi) >> 1
        if knots[mid] <= t:
            lo = mid + 1
        else:
            hi = mid
    idx = lo - 1
    if idx < 0:
        idx = 0
    if idx > knots.shape[0] - 2:
        idx = knots.shape[0] - 2
    return idx


cdef inline double _dist2(const double[:, ::1] pos, Py_ssize_t a, Py_ssize_t b,
                          double side) nogil:
    cdef double acc = 0.0, dx
    cdef Py_ssize_t k
    for k in range(pos.shape[1]):
        dx = pos[a, k] - pos[b, k]
        if dx < 0.0:
            dx = -dx
        if side - dx < dx:
            dx = side - dx
        acc += dx * dx
    return acc


def pair_uniforms(seed, lo, hi):
    """Vectorized per-pair uniforms, identical to the reference backend."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] lo_a = np.ascontiguousarray(lo, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hi_a = np.ascontiguousarray(hi, dtype=np.int64)
    cdef Py_ssize_t n = lo_a.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef u64 s = <u64>seed
    for i in range(n):
        out[i] = _pair_uniform(s, <u64>lo_a[i], <u64>hi_a[i])
    return out


cdef class _CellWalk:
    """Iteration state over cells and canonical neighbor offsets."""
    cdef const i64[::1] order, start
    cdef i64 m
    cdef int d
    cdef i64[:, ::1] offsets
    cdef i64[::1] strides

    def __init__(self, order, start, m, d):
        self.order = order
        self.start = start
        self.m = m
        self.d = d
        offs = []
        if m >= 3:
            from itertools import product
            offs = [o for o in product((-1, 0, 1), repeat=d) if o > (0,) * d]
        self.offsets = np.asarray(offs, dtype=np.int64).reshape(len(offs), d)
        self.strides = np.array([m ** k for k in range(d - 1, -1, -1)], dtype=np.int64)

    cdef inline i64 neighbor(self, const i64[::1] coords, Py_ssize_t which) nogil:
        cdef i64 flat = 0, c
        cdef Py_ssize_t k
        for k in range(self.d):
            c = (coords[k] + self.offsets[which, k] + self.m) % self.m
            flat += c * self.strides[k]
        return flat


def sample_edges(positions, labels, order, start, m, cell_side, side, r2,
                 inv_scale, knots, fin_lo, fin_m, fout_lo, fout_m, seed):
    cdef const double[:, ::1] pos = positions
    cdef const signed char[::1] lab = labels
    cdef const double[::1] kn = knots
    cdef const double[::1] fi0 = fin_lo, fim = fin_m, fo0 = fout_lo, fom = fout_m
    cdef _CellWalk walk = _CellWalk(order, start, m, positions.shape[1])
    cdef double sd = side, rr2 = r2, isc = inv_scale
    cdef u64 sseed = <u64>seed
    cdef vector[i64] out_i, out_j
    cdef i64 total = 1
    cdef Py_ssize_t k
    for k in range(walk.d):
        total *= walk.m
    cdef i64[::1] coords = np.zeros(walk.d, dtype=np.int64)
    cdef i64 c, nb, rem
    cdef Py_ssize_t ai, bi, a0, a1, b0, b1, w
    cdef i64 ia, ib, lo_id, hi_id
    cdef double d2, t, fin, fout, p
    cdef Py_ssize_t pc

    for c in range(total):
        a0 = walk.start[c]
        a1 = walk.start[c + 1]
        if a1 == a0:
            continue
        rem = c
        for k in range(walk.d - 1, -1, -1):
            coords[k] = rem % walk.m
            rem //= walk.m
        # same-cell pairs
        for ai in range(a0, a1):
            ia = walk.order[ai]
            for bi in range(ai + 1, a1):
                ib = walk.order[bi]
                d2 = _dist2(pos, ia, ib, sd)
                if d2 <= rr2:
                    if ia < ib:
                        lo_id = ia; hi_id = ib
                    else:
                        lo_id = ib; hi_id = ia
                    t = sqrt(d2) * isc
                    pc = _piece_of(t, kn)
                    if lab[lo_id] == lab[hi_id]:
                        p = fi0[pc] + fim[pc] * (t - kn[pc])
                    else:
                        p = fo0[pc] + fom[pc] * (t - kn[pc])
                    if _pair_uniform(sseed, <u64>lo_id, <u64>hi_id) < p:
                        out_i.push_back(lo_id)
                        out_j.push_back(hi_id)
        # cross-cell pairs, each unordered cell pair visited once
        for w in range(walk.offsets.shape[0]):
            nb = walk.neighbor(coords, w)
            b0 = walk.start[nb]
            b1 = walk.start[nb + 1]
            for ai in range(a0, a1):
                ia = walk.order[ai]
                for bi in range(b0, b1):
                    ib = walk.order[bi]
                    d2 = _dist2(pos, ia, ib, sd)
                    if d2 <= rr2:
                        if ia < ib:
                            lo_id = ia; hi_id = ib
                        else:
                            lo_id = ib; hi_id = ia
                        t = sqrt(d2) * isc
                        pc = _piece_of(t, kn)
                        if lab[lo_id] == lab[hi_id]:
                            p = fi0[pc] + fim[pc] * (t - kn[pc])
                        else:
                            p = fo0[pc] + fom[pc] * (t - kn[pc])
                        if _pair_uniform(sseed, <u64>lo_id, <u64>hi_id) < p:
                            out_i.push_back(lo_id)
                            out_j.push_back(hi_id)

    cdef cnp.ndarray[cnp.int64_t, ndim=1] ei = np.empty(out_i.size(), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ej = np.empty(out_j.size(), dtype=np.int64)
    for k in range(<Py_ssize_t>out_i.size()):
        ei[k] = out_i[k]
        ej[k] = out_j[k]
    return ei, ej


def collect_pairs(positions, order, start, m, cell_side, side, r2, strict):
    cdef const double[:, ::1] pos = positions
    cdef _CellWalk walk = _CellWalk(order, start, m, positions.shape[1])
    cdef double sd = side, rr2 = r2
    cdef bint want_strict = strict
    cdef vector[i64] out_i, out_j
    cdef vector[double] out_d
    cdef i64 total = 1
    cdef Py_ssize_t k
    for k in range(walk.d):
        total *= walk.m
    cdef i64[::1] coords = np.zeros(walk.d, dtype=np.int64)
    cdef i64 c, nb, rem, ia, ib
    cdef Py_ssize_t ai, bi, a0, a1, b0, b1, w
    cdef double d2
    cdef bint take

    for c in range(total):
        a0 = walk.start[c]
        a1 = walk.start[c + 1]
        if a1 == a0:
            continue
        rem = c
        for k in range(walk.d - 1, -1, -1):
            coords[k] = rem % walk.m
            rem //= walk.m
        for ai in range(a0, a1):
            ia = walk.order[ai]
            for bi in range(ai + 1, a1):
                ib = walk.order[bi]
                d2 = _dist2(pos, ia, ib, sd)
                take = d2 < rr2 if want_strict else d2 <= rr2
                if take:
                    out_i.push_back(min(ia, ib))
                    out_j.push_back(max(ia, ib))
                    out_d.push_back(d2)
        for w in range(walk.offsets.shape[0]):
            nb = walk.neighbor(coords, w)
            b0 = walk.start[nb]
            b1 = walk.start[nb + 1]
            for ai in range(a0, a1):
                ia = walk.order[ai]
                for bi in range(b0, b1):
                    ib = walk.order[bi]
                    d2 = _dist2(pos, ia, ib, sd)
                    take = d2 < rr2 if want_strict else d2 <= rr2
                    if take:
                        out_i.push_back(min(ia, ib))
                        out_j.push_back(max(ia, ib))
                        out_d.push_back(d2)

    cdef cnp.ndarray[cnp.int64_t, ndim=1] pi = np.empty(out_i.size(), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pj = np.empty(out_j.size(), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dd = np.empty(out_d.size(), dtype=np.float64)
    for k in range(<Py_ssize_t>out_i.size()):
        pi[k] = out_i[k]
        pj[k] = out_j[k]
        dd[k] = out_d[k]
    return pi, pj, dd


cdef inline bint _has_edge(const i64[::1] indptr, const i64[::1] indices,
                           i64 u, i64 v) nogil:
    cdef Py_ssize_t lo = indptr[u], hi = indptr[u + 1], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if indices[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo < indptr[u + 1] and indices[lo] == v


def tau_accumulate(positions, sigma, indptr, indices, order, start, m, cell_side,
                   side, r2, inv_scale, knots, fin_lo, fin_m, fout_lo, fout_m):
    cdef const double[:, ::1] pos = positions
    cdef const signed char[::1] sig = sigma
    cdef const i64[::1] iptr = indptr
    cdef const i64[::1] idx = indices
    cdef const double[::1] kn = knots
    cdef const double[::1] fi0 = fin_lo, fim = fin_m, fo0 = fout_lo, fom = fout_m
    cdef _CellWalk walk = _CellWalk(order, start, m, positions.shape[1])
    cdef double sd = side, rr2 = r2, isc = inv_scale
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tau_arr = np.zeros(len(positions))
    cdef double[::1] tau = tau_arr
    cdef i64 total = 1
    cdef Py_ssize_t k
    for k in range(walk.d):
        total *= walk.m
    cdef i64[::1] coords = np.zeros(walk.d, dtype=np.int64)
    cdef i64 c, nb, rem, ia, ib, lo_id, hi_id
    cdef Py_ssize_t ai, bi, a0, a1, b0, b1, w
    cdef double d2, t, fin, fout, wgt
    cdef Py_ssize_t pc

    for c in range(total):
        a0 = walk.start[c]
        a1 = walk.start[c + 1]
        if a1 == a0:
            continue
        rem = c
        for k in range(walk.d - 1, -1, -1):
            coords[k] = rem % walk.m
            rem //= walk.m
        for ai in range(a0, a1):
            ia = walk.order[ai]
            for bi in range(ai + 1, a1):
                ib = walk.order[bi]
                d2 = _dist2(pos, ia, ib, sd)
                if d2 <= rr2:
                    lo_id = min(ia, ib); hi_id = max(ia, ib)
                    t = sqrt(d2) * isc
                    pc = _piece_of(t, kn)
                    fin = fi0[pc] + fim[pc] * (t - kn[pc])
                    fout = fo0[pc] + fom[pc] * (t - kn[pc])
                    if _has_edge(iptr, idx, lo_id, hi_id):
                        wgt = log(fin / fout)
                    else:
                        wgt = log((1.0 - fin) / (1.0 - fout))
                    tau[lo_id] += sig[hi_id] * wgt
                    tau[hi_id] += sig[lo_id] * wgt
        for w in range(walk.offsets.shape[0]):
            nb = walk.neighbor(coords, w)
            b0 = walk.start[nb]
            b1 = walk.start[nb + 1]
            for ai in range(a0, a1):
                ia = walk.order[ai]
                for bi in range(b0, b1):
                    ib = walk.order[bi]
                    d2 = _dist2(pos, ia, ib, sd)
                    if d2 <= rr2:
                        lo_id = min(ia, ib); hi_id = max(ia, ib)
                        t = sqrt(d2) * isc
                        pc = _piece_of(t, kn)
                        fin = fi0[pc] + fim[pc] * (t - kn[pc])
                        fout = fo0[pc] + fom[pc] * (t - kn[pc])
                        if _has_edge(iptr, idx, lo_id, hi_id):
                            wgt = log(fin / fout)
                        else:
                            wgt = log((1.0 - fin) / (1.0 - fout))
                        tau[lo_id] += sig[hi_id] * wgt
                        tau[hi_id] += sig[lo_id] * wgt
    return tau_arr


cdef i64 _uf_find(i64[::1] parent, i64 x) nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def visibility_components(positions, order, start, m, cell_side, side, r2):
    """Component labels (first-occurrence numbering) of the radius graph."""
    cdef const double[:, ::1] pos = positions
    cdef _CellWalk walk = _CellWalk(order, start, m, positions.shape[1])
    cdef double sd = side, rr2 = r2
    cdef Py_ssize_t n = positions.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] parent_arr = np.arange(n, dtype=np.int64)
    cdef i64[::1] parent = parent_arr
    cdef i64 total = 1
    cdef Py_ssize_t k
    for k in range(walk.d):
        total *= walk.m
    cdef i64[::1] coords = np.zeros(walk.d, dtype=np.int64)
    cdef i64 c, nb, rem, ia, ib, ra, rb
    cdef Py_ssize_t ai, bi, a0, a1, b0, b1, w

    for c in range(total):
        a0 = walk.start[c]
        a1 = walk.start[c + 1]
        if a1 == a0:
            continue
        rem = c
        for k in range(walk.d - 1, -1, -1):
            coords[k] = rem % walk.m
            rem //= walk.m
        for ai in range(a0, a1):
            ia = walk.order[ai]
            for bi in range(ai + 1, a1):
                ib = walk.order[bi]
                if _dist2(pos, ia, ib, sd) <= rr2:
                    ra = _uf_find(parent, ia)
                    rb = _uf_find(parent, ib)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
        for w in range(walk.offsets.shape[0]):
            nb = walk.neighbor(coords, w)
            b0 = walk.start[nb]
            b1 = walk.start[nb + 1]
            for ai in range(a0, a1):
                ia = walk.order[ai]
                for bi in range(b0, b1):
                    ib = walk.order[bi]
                    if _dist2(pos, ia, ib, sd) <= rr2:
                        ra = _uf_find(parent, ia)
                        rb = _uf_find(parent, ib)
                        if ra != rb:
                            parent[max(ra, rb)] = min(ra, rb)

    cdef cnp.ndarray[cnp.int64_t, ndim=1] labels = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] remap = np.full(n, -1, dtype=np.int64)
    cdef i64 next_label = 0, root
    cdef Py_ssize_t v
    for v in range(n):
        root = _uf_find(parent, v)
        if remap[root] < 0:
            remap[root] = next_label
            next_label += 1
        labels[v] = remap[root]
    return labels
