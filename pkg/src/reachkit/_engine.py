"""Numba kernels behind the defect sweep.

The sweep enumerates every pair at half-length <= max_scale through a uniform
CSR grid, evaluates the exact farthest-from-cloud distance over each pair's
segment (lower envelope of equal-curvature parabolas), and folds the results
into per-scale maxima. Pairs are independent, shared state is read-only, and
the reduction is a max, so the parallel schedule cannot change the result.

Per pair the exact value is found by cutting planes: the envelope over a
growing site subset bounds the max from above, nearest-neighbor probes at the
subset argmax bound it from below, and the two meet after a handful of steps.
The fallback path collects the full capsule of radius half-length around the
segment, which provably contains every point that can define the envelope on
the segment (the endpoints belong to the cloud, so the min distance along the
segment never exceeds the half-length).
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

MAX_GRID_CELLS_PER_AXIS = 512


def build_csr_grid(pts: np.ndarray, cell: float):
    """Bucket points into a dense row-major grid stored in CSR form."""
    n, dim = pts.shape
    origin = pts.min(axis=0)
    idx = np.floor((pts - origin) / cell).astype(np.int64)
    dims = idx.max(axis=0) + 1
    strides = np.ones(dim, dtype=np.int64)
    for d in range(dim - 2, -1, -1):
        strides[d] = strides[d + 1] * dims[d + 1]
    lin = idx @ strides
    order = np.argsort(lin, kind="stable").astype(np.int64)
    ncells = int(dims.prod())
    starts = np.zeros(ncells + 1, dtype=np.int64)
    np.add.at(starts, lin + 1, 1)
    starts = np.cumsum(starts)
    return origin.astype(np.float64), dims, strides, starts, order


def grid_cell_size(pts: np.ndarray) -> float:
    """Cell size targeting a few points per occupied cell, with a bounded
    per-axis cell count so dense grids stay cheap even for skewed clouds."""
    n, dim = pts.shape
    span = float((pts.max(axis=0) - pts.min(axis=0)).max())
    if span <= 0.0:
        return 1.0
    k = int(max(1, min(MAX_GRID_CELLS_PER_AXIS, round((2.0 * n) ** (1.0 / dim)))))
    return span / k


@njit(cache=True)
def _envelope_max_sq(u, c, m, lsq, site, z):
    """Max over s in [0,1] of the lower envelope of lsq*(s-u_i)^2 + c_i.

    Sites occupy u[:m], c[:m]; `site` and `z` are scratch arrays of length
    >= m and m+1. Returns (s_star, max) with the max in squared units."""
    if m <= 64:
        # insertion sort: avoids per-call allocation on the hot path
        order = site[m : 2 * m] if site.shape[0] >= 2 * m else np.empty(m, dtype=np.int64)
        for i in range(m):
            key = u[i]
            j = i - 1
            while j >= 0 and u[order[j]] > key:
                order[j + 1] = order[j]
                j -= 1
            order[j + 1] = i
    else:
        order = np.argsort(u[:m])
    site[0] = order[0]
    z[0] = -np.inf
    k = 0
    for oi in range(1, m):
        i = order[oi]
        while True:
            j = site[k]
            du = u[i] - u[j]
            if du <= 0.0:
                if c[i] >= c[j]:
                    break
                k -= 1
                if k < 0:
                    k = 0
                    site[0] = i
                    z[0] = -np.inf
                    break
                continue
            s = 0.5 * (u[i] + u[j]) + (c[i] - c[j]) / (2.0 * lsq * du)
            if k > 0 and s <= z[k]:
                k -= 1
                continue
            k += 1
            site[k] = i
            z[k] = s
            break
    p0 = k
    for piece in range(k + 1):
        if z[piece] > 0.0:
            p0 = piece - 1
            break
    j = site[p0]
    best_s = 0.0
    best = lsq * u[j] * u[j] + c[j]
    p1 = k
    for piece in range(k, -1, -1):
        if z[piece] <= 1.0:
            p1 = piece
            break
    j = site[p1]
    v = lsq * (1.0 - u[j]) * (1.0 - u[j]) + c[j]
    if v > best:
        best_s = 1.0
        best = v
    for piece in range(1, k + 1):
        s = z[piece]
        if 0.0 < s < 1.0:
            j = site[piece]
            v = lsq * (s - u[j]) * (s - u[j]) + c[j]
            if v > best:
                best_s = s
                best = v
    return best_s, best


@njit(cache=True)
def _box_scan(pts, q, rad, origin, dims, strides, starts, order, cell):
    """Nearest cloud point to q within the axis box of half-width rad, as
    (squared distance, index); (inf, -1) when the box is empty."""
    dim = pts.shape[1]
    lo = np.empty(dim, dtype=np.int64)
    hi = np.empty(dim, dtype=np.int64)
    cur = np.empty(dim, dtype=np.int64)
    for d in range(dim):
        lo[d] = max(np.int64(np.floor((q[d] - rad - origin[d]) / cell)), 0)
        hi[d] = min(np.int64(np.floor((q[d] + rad - origin[d]) / cell)), dims[d] - 1)
        cur[d] = lo[d]
    best = np.inf
    best_idx = np.int64(-1)
    while True:
        lin = np.int64(0)
        for d in range(dim):
            lin += cur[d] * strides[d]
        for kk in range(starts[lin], starts[lin + 1]):
            x = order[kk]
            dd2 = 0.0
            for d in range(dim):
                dd = pts[x, d] - q[d]
                dd2 += dd * dd
            if dd2 < best:
                best = dd2
                best_idx = x
        advanced = False
        for d in range(dim - 1, -1, -1):
            if cur[d] < hi[d]:
                cur[d] += 1
                for e in range(d + 1, dim):
                    cur[e] = lo[e]
                advanced = True
                break
        if not advanced:
            break
    return best, best_idx


@njit(cache=True)
def build_nearest_field(pts, origin, dims, strides, starts, order, cell):
    """Per-cell candidate nearest point, by two Danielsson-style raster
    sweeps over the dense cell grid.

    Candidates are heuristic (distances must be recomputed against the query
    point); they serve as cheap improving cuts, never as certificates.
    """
    dim = pts.shape[1]
    ncells = starts.shape[0] - 1
    cand = np.full(ncells, -1, dtype=np.int64)
    for lin in range(ncells):
        if starts[lin + 1] > starts[lin]:
            cand[lin] = order[starts[lin]]
    coords = np.empty(dim, dtype=np.int64)
    center = np.empty(dim, dtype=np.float64)
    for sweep in range(2):
        if sweep == 0:
            begin, end, step = 0, ncells, 1
        else:
            begin, end, step = ncells - 1, -1, -1
        lin = begin
        while lin != end:
            rem = lin
            for d in range(dim):
                coords[d] = rem // strides[d]
                rem -= coords[d] * strides[d]
                center[d] = origin[d] + (coords[d] + 0.5) * cell
            best = np.inf
            if cand[lin] >= 0:
                best = 0.0
                for d in range(dim):
                    dd = pts[cand[lin], d] - center[d]
                    best += dd * dd
            # Pull candidates from the causal neighbor in each axis.
            for d in range(dim):
                nb = coords[d] - step
                if nb < 0 or nb >= dims[d]:
                    continue
                nlin = lin - step * strides[d]
                cx = cand[nlin]
                if cx < 0:
                    continue
                dd2 = 0.0
                for e in range(dim):
                    dd = pts[cx, e] - center[e]
                    dd2 += dd * dd
                if dd2 < best:
                    best = dd2
                    cand[lin] = cx
            lin += step
    return cand


@njit(cache=True)
def _cell_candidate(q, cand, origin, dims, strides, cell):
    dim = origin.shape[0]
    lin = np.int64(0)
    for d in range(dim):
        cc = np.int64(np.floor((q[d] - origin[d]) / cell))
        if cc < 0:
            cc = 0
        elif cc >= dims[d]:
            cc = dims[d] - 1
        lin += cc * strides[d]
    return cand[lin]


@njit(cache=True)
def _collect_tube(pts, ia, ib, d2, bound, origin, dims, strides, starts, order, cell, ubuf, cbuf):
    """Gather parabola sites for cloud points within the capsule of radius
    `bound` around segment (pts[ia], pts[ib]); returns the site count.

    Cells are rasterized column by column along the segment's dominant axis,
    so the work scales with the tube volume, not the segment's bounding box.
    """
    dim = pts.shape[1]
    b2 = bound * bound * (1.0 + 1e-12)
    umargin = bound / np.sqrt(d2) * (1.0 + 1e-12)
    dmax = 0
    span = -1.0
    for d in range(dim):
        ad = abs(pts[ib, d] - pts[ia, d])
        if ad > span:
            span = ad
            dmax = d
    am = pts[ia, dmax]
    abm = pts[ib, dmax] - pts[ia, dmax]
    ext = bound + umargin * abs(abm)
    lo_m = min(am, am + abm) - ext
    hi_m = max(am, am + abm) + ext
    c0 = max(np.int64(np.floor((lo_m - origin[dmax]) / cell)), 0)
    c1 = min(np.int64(np.floor((hi_m - origin[dmax]) / cell)), dims[dmax] - 1)
    nlo = np.empty(dim, dtype=np.int64)
    nhi = np.empty(dim, dtype=np.int64)
    ncur = np.empty(dim, dtype=np.int64)
    m = 0
    for col in range(c0, c1 + 1):
        xlo = origin[dmax] + col * cell
        xhi = xlo + cell
        if abm != 0.0:
            s1 = (xlo - bound - am) / abm
            s2 = (xhi + bound - am) / abm
            slo = min(s1, s2)
            shi = max(s1, s2)
            if slo < -umargin:
                slo = -umargin
            if shi > 1.0 + umargin:
                shi = 1.0 + umargin
            if slo > shi:
                continue
        else:
            slo = -umargin
            shi = 1.0 + umargin
        for d in range(dim):
            if d == dmax:
                nlo[d] = col
                nhi[d] = col
            else:
                ab_d = pts[ib, d] - pts[ia, d]
                p1 = pts[ia, d] + slo * ab_d
                p2 = pts[ia, d] + shi * ab_d
                lo_c = min(p1, p2) - bound
                hi_c = max(p1, p2) + bound
                nlo[d] = max(np.int64(np.floor((lo_c - origin[d]) / cell)), 0)
                nhi[d] = min(np.int64(np.floor((hi_c - origin[d]) / cell)), dims[d] - 1)
            ncur[d] = nlo[d]
        empty = False
        for d in range(dim):
            if nlo[d] > nhi[d]:
                empty = True
        if empty:
            continue
        while True:
            nlin = np.int64(0)
            for d in range(dim):
                nlin += ncur[d] * strides[d]
            for qq in range(starts[nlin], starts[nlin + 1]):
                x = order[qq]
                ux = 0.0
                r2 = 0.0
                for d in range(dim):
                    rel = pts[x, d] - pts[ia, d]
                    ux += rel * (pts[ib, d] - pts[ia, d])
                    r2 += rel * rel
                ux /= d2
                if ux < -umargin or ux > 1.0 + umargin:
                    continue
                cx = r2 - ux * ux * d2
                if cx < 0.0:
                    cx = 0.0
                elif cx > b2:
                    continue
                ubuf[m] = ux
                cbuf[m] = cx
                m += 1
            advanced = False
            for d in range(dim - 1, -1, -1):
                if d == dmax:
                    continue
                if ncur[d] < nhi[d]:
                    ncur[d] += 1
                    for e in range(d + 1, dim):
                        if e != dmax:
                            ncur[e] = nlo[e]
                    advanced = True
                    break
            if not advanced:
                break
    return m


MAX_REFINE_STEPS = 48


@njit(cache=True)
def _add_site(pts, ia, ib, d2, x, ubuf, cbuf, m):
    ux = 0.0
    r2 = 0.0
    dim = pts.shape[1]
    for d in range(dim):
        rel = pts[x, d] - pts[ia, d]
        ux += rel * (pts[ib, d] - pts[ia, d])
        r2 += rel * rel
    ux /= d2
    cx = r2 - ux * ux * d2
    if cx < 0.0:
        cx = 0.0
    ubuf[m] = ux
    cbuf[m] = cx


@njit(cache=True)
def _segment_farthest_sq(pts, ia, ib, half, d2, origin, dims, strides, starts, order,
                         cell, cand, ubuf, cbuf, site, z, probe, pref, slot, max_refine):
    """Squared max-min over the segment (pts[ia], pts[ib]).

    Cutting-plane refinement: the envelope over a subset of sites bounds the
    true max from above, a nearest-neighbor probe at its argmax bounds it
    from below; when they meet the value is exact. Probes resolve through the
    per-cell candidate field first (an O(1) improving cut in the common
    case); a box scan only runs to certify near-final values. A rare
    non-convergence falls back to the capsule collection at the best known
    upper bound.

    Returns -1.0 when the pair is dominated: its upper bound dropped to or
    below pref[slot], the running prefix maximum of values already recorded
    at scales <= this pair's, so it cannot change any profile value.
    """
    dim = pts.shape[1]
    ubuf[0] = 0.0
    cbuf[0] = 0.0
    ubuf[1] = 1.0
    cbuf[1] = 0.0
    m = 2
    # Seed with the cell candidates along the segment: one envelope built from
    # the local nearest-point structure usually lands within a probe or two of
    # the exact value.
    nseed = np.int64(2.0 * half / cell) + 1
    if nseed > 48:
        nseed = 48
    last = np.int64(-1)
    for k in range(nseed + 1):
        s = k / nseed
        for d in range(dim):
            probe[d] = pts[ia, d] + s * (pts[ib, d] - pts[ia, d])
        x = _cell_candidate(probe, cand, origin, dims, strides, cell)
        if x >= 0 and x != last and x != ia and x != ib:
            _add_site(pts, ia, ib, d2, x, ubuf, cbuf, m)
            m += 1
            last = x
    v2 = half * half
    for _ in range(max_refine):
        s_star, v2 = _envelope_max_sq(ubuf, cbuf, m, d2, site, z)
        if v2 <= 0.0:
            return 0.0
        lb = pref[slot]
        if v2 <= lb * lb:
            return -1.0
        for d in range(dim):
            probe[d] = pts[ia, d] + s_star * (pts[ib, d] - pts[ia, d])
        x = _cell_candidate(probe, cand, origin, dims, strides, cell)
        if x >= 0:
            dd2 = 0.0
            for d in range(dim):
                dd = pts[x, d] - probe[d]
                dd2 += dd * dd
            if dd2 < v2 * (1.0 - 1e-13):
                _add_site(pts, ia, ib, d2, x, ubuf, cbuf, m)
                m += 1
                continue
        dd2, x = _box_scan(pts, probe, np.sqrt(v2), origin, dims, strides, starts,
                           order, cell)
        if x < 0 or dd2 >= v2 * (1.0 - 1e-13):
            return v2
        _add_site(pts, ia, ib, d2, x, ubuf, cbuf, m)
        m += 1
    bound = min(np.sqrt(v2) * (1.0 + 1e-12), half)
    m = _collect_tube(pts, ia, ib, d2, bound, origin, dims, strides, starts, order,
                      cell, ubuf, cbuf)
    _, v2 = _envelope_max_sq(ubuf, cbuf, m, d2, site, z)
    return v2


@njit(cache=True, parallel=True)
def pair_sweep(pts, origin, dims, strides, starts, order, cell, cand, scales, max_scale, out, pref, max_refine):
    """Slot maxima of pair contributions over the scale grid.

    out[i, g] ends up holding the largest exact segment-farthest value among
    pairs (i, j), j > i, whose half-length lands in scale slot g (the first
    grid scale >= half-length), except for pairs provably dominated by a
    value already recorded at a smaller-or-equal slot; the prefix maximum
    over all rows (the profile) is invariant under those skips and under the
    thread schedule. pref caches running prefix maxima; it is only ever
    raised to an already-recorded value, so even with stale or lost updates
    across threads it stays a valid pruning bound.
    """
    n, dim = pts.shape
    ng = scales.shape[0]
    reach = 2.0 * max_scale
    scratch = n + 2 * MAX_REFINE_STEPS + 130
    for i in prange(n):
        ubuf = np.empty(scratch, dtype=np.float64)
        cbuf = np.empty(scratch, dtype=np.float64)
        site = np.empty(2 * scratch, dtype=np.int64)
        z = np.empty(scratch + 1, dtype=np.float64)
        lo = np.empty(dim, dtype=np.int64)
        hi = np.empty(dim, dtype=np.int64)
        cur = np.empty(dim, dtype=np.int64)
        probe = np.empty(dim, dtype=np.float64)
        for d in range(dim):
            lo[d] = max(np.int64(np.floor((pts[i, d] - reach - origin[d]) / cell)), 0)
            hi[d] = min(np.int64(np.floor((pts[i, d] + reach - origin[d]) / cell)), dims[d] - 1)
            cur[d] = lo[d]
        while True:
            lin = np.int64(0)
            for d in range(dim):
                lin += cur[d] * strides[d]
            for kk in range(starts[lin], starts[lin + 1]):
                j = order[kk]
                if j <= i:
                    continue
                d2 = 0.0
                for d in range(dim):
                    dd = pts[j, d] - pts[i, d]
                    d2 += dd * dd
                half = 0.5 * np.sqrt(d2)
                if half > max_scale or d2 == 0.0:
                    continue
                slot = np.searchsorted(scales, half)
                if slot >= ng:
                    continue
                if half <= pref[slot]:
                    continue
                v2 = _segment_farthest_sq(pts, i, j, half, d2, origin, dims, strides,
                                          starts, order, cell, cand, ubuf, cbuf,
                                          site, z, probe, pref, slot, max_refine)
                if v2 < 0.0:
                    continue
                v = np.sqrt(v2)
                if v > out[i, slot]:
                    out[i, slot] = v
                for g in range(slot, ng):
                    if v > pref[g]:
                        pref[g] = v
                    else:
                        break
            advanced = False
            for d in range(dim - 1, -1, -1):
                if cur[d] < hi[d]:
                    cur[d] += 1
                    for e in range(d + 1, dim):
                        cur[e] = lo[e]
                    advanced = True
                    break
            if not advanced:
                break


def pair_profile_values(pts: np.ndarray, scales: np.ndarray, max_scale: float,
                        max_refine: int = MAX_REFINE_STEPS) -> np.ndarray:
    """Prefix-max profile of exact pair contributions over the scale grid."""
    cell = grid_cell_size(pts)
    pts = np.ascontiguousarray(pts)
    origin, dims, strides, starts, order = build_csr_grid(pts, cell)
    cand = build_nearest_field(pts, origin, dims, strides, starts, order, cell)
    out = np.zeros((pts.shape[0], scales.shape[0]), dtype=np.float64)
    pref = np.zeros(scales.shape[0], dtype=np.float64)
    pair_sweep(
        pts,
        origin,
        dims,
        strides,
        starts,
        order,
        cell,
        cand,
        np.ascontiguousarray(scales, dtype=np.float64),
        float(max_scale),
        out,
        pref,
        int(max_refine),
    )
    return np.maximum.accumulate(out.max(axis=0))


def warmup():
    """Trigger JIT compilation on a tiny instance."""
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    pair_profile_values(pts, np.array([0.5, 1.0]), 1.0)
