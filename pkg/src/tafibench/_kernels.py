"""Compiled inner loops for block matching and global-motion search.

Everything here is exact integer/IEEE-double arithmetic so results are
reproducible run to run; the pure-numpy brute-force oracles in the test
suite must match these kernels bit for bit.
"""
from __future__ import annotations

import numpy as np
from numba import njit

#: SAD sentinel for shifts whose displaced block leaves the frame.
INVALID_SAD = np.int32(2 ** 30)


def candidate_shifts(search_range: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integer shift candidates in canonical tie-break order.

    Order is (|dx|+|dy|, dy, dx) ascending, so a first-minimum scan over this
    axis implements the tie-break: smallest cost, then smallest |v|1, then
    smallest dy, then smallest dx. Returns (dxs, dys, l1) int32 arrays.
    """
    r = int(search_range)
    shifts = sorted(((dx, dy) for dy in range(-r, r + 1) for dx in range(-r, r + 1)),
                    key=lambda v: (abs(v[0]) + abs(v[1]), v[1], v[0]))
    dxs = np.array([s[0] for s in shifts], dtype=np.int32)
    dys = np.array([s[1] for s in shifts], dtype=np.int32)
    return dxs, dys, np.abs(dxs) + np.abs(dys)


@njit(cache=True)
def sad_table(prev, nxt, bs, dxs, dys):
    """Per-block SAD for every candidate shift.

    Returns int32 (grid_h, grid_w, n_shifts); shifts that move a block (even
    partially) outside the frame hold INVALID_SAD. Blocks are anchored on a
    bs grid over ``prev``; edge blocks may be smaller than bs.
    """
    h, w = prev.shape
    gh = (h + bs - 1) // bs
    gw = (w + bs - 1) // bs
    ns = dxs.shape[0]
    out = np.full((gh, gw, ns), INVALID_SAD, dtype=np.int32)
    for s in range(ns):
        dx = dxs[s]
        dy = dys[s]
        for by in range(gh):
            y0 = by * bs
            y1 = min(y0 + bs, h)
            if y0 + dy < 0 or y1 + dy > h:
                continue
            for bx in range(gw):
                x0 = bx * bs
                x1 = min(x0 + bs, w)
                if x0 + dx < 0 or x1 + dx > w:
                    continue
                acc = np.int32(0)
                for y in range(y0, y1):
                    prow = prev[y]
                    nrow = nxt[y + dy]
                    racc = np.uint16(0)
                    for x in range(x0, x1):
                        a = prow[x]
                        b = nrow[x + dx]
                        racc += np.uint16(a - b if a > b else b - a)
                    acc += np.int32(racc)
                out[by, bx, s] = acc
    return out


@njit(cache=True)
def select_vectors(sad, dxs, dys, l1, lam):
    """Pick one shift per block: argmin of SAD + lam * |v - median(causal neighbors)|1.

    Blocks are decided in raster order; the predictor is the component-wise
    median over already-decided 8-neighbors (left, top-left, top, top-right).
    The first block of the raster has no decided neighbors and pays no
    smoothness penalty. Candidates arrive in canonical tie-break order, so
    keeping the first strict minimum realizes the declared tie-break.
    Returns (vectors int32 (gh, gw, 2) as (dx, dy), matched SAD int32 (gh, gw)).
    """
    gh, gw, ns = sad.shape
    vec = np.zeros((gh, gw, 2), dtype=np.int32)
    matched = np.zeros((gh, gw), dtype=np.int32)
    nbx = np.empty(4, dtype=np.float64)
    nby = np.empty(4, dtype=np.float64)
    for by in range(gh):
        for bx in range(gw):
            m = 0
            if bx > 0:
                nbx[m] = vec[by, bx - 1, 0]
                nby[m] = vec[by, bx - 1, 1]
                m += 1
            if by > 0:
                if bx > 0:
                    nbx[m] = vec[by - 1, bx - 1, 0]
                    nby[m] = vec[by - 1, bx - 1, 1]
                    m += 1
                nbx[m] = vec[by - 1, bx, 0]
                nby[m] = vec[by - 1, bx, 1]
                m += 1
                if bx + 1 < gw:
                    nbx[m] = vec[by - 1, bx + 1, 0]
                    nby[m] = vec[by - 1, bx + 1, 1]
                    m += 1
            mx = _median_small(nbx, m)
            my = _median_small(nby, m)
            pen = lam if m > 0 else 0.0
            best = -1
            best_cost = np.float64(np.inf)
            row = sad[by, bx]
            for s in range(ns):
                if row[s] >= INVALID_SAD:
                    continue
                cost = row[s] + pen * (abs(dxs[s] - mx) + abs(dys[s] - my))
                if cost < best_cost:
                    best_cost = cost
                    best = s
            vec[by, bx, 0] = dxs[best]
            vec[by, bx, 1] = dys[best]
            matched[by, bx] = sad[by, bx, best]
    return vec, matched


@njit(cache=True)
def _median_small(vals, m):
    # median of vals[:m]; (0, 0) predictor when the neighbor set is empty
    if m == 0:
        return 0.0
    buf = np.empty(m, dtype=np.float64)
    for i in range(m):
        buf[i] = vals[i]
    buf.sort()
    if m % 2:
        return buf[m // 2]
    return 0.5 * (buf[m // 2 - 1] + buf[m // 2])


# ---------------------------------------------------------------------------
# seeded lattice noise
# ---------------------------------------------------------------------------

_KX = np.uint64(0x8864A9FD8F7BF3E5)
_KY = np.uint64(0xD1B54A32D192ED03)
_KZ = np.uint64(0xE7037ED1A0B428DB)
_KS = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TO_UNIT = 2.0 / 2.0 ** 64


@njit(cache=True, inline="always")
def _finalize(acc):
    acc ^= acc >> np.uint64(30)
    acc *= _MIX1
    acc ^= acc >> np.uint64(27)
    acc *= _MIX2
    acc ^= acc >> np.uint64(31)
    return np.float64(acc) * _TO_UNIT - 1.0


@njit(cache=True, inline="always")
def _hash2(ix, iy, seed):
    return _finalize(np.uint64(ix) * _KX + np.uint64(iy) * _KY + seed * _KS)


@njit(cache=True, inline="always")
def _hash3(ix, iy, iz, seed):
    return _finalize(np.uint64(ix) * _KX + np.uint64(iy) * _KY
                     + np.uint64(iz) * _KZ + seed * _KS)


@njit(cache=True, inline="always")
def _quintic(t):
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


@njit(cache=True, inline="always")
def _vnoise2(x, y, seed):
    x0 = np.floor(x)
    y0 = np.floor(y)
    fx = _quintic(x - x0)
    fy = _quintic(y - y0)
    ix = np.int64(x0)
    iy = np.int64(y0)
    v00 = _hash2(ix, iy, seed)
    v10 = _hash2(ix + 1, iy, seed)
    v01 = _hash2(ix, iy + 1, seed)
    v11 = _hash2(ix + 1, iy + 1, seed)
    top = v00 + (v10 - v00) * fx
    bot = v01 + (v11 - v01) * fx
    return top + (bot - top) * fy


@njit(cache=True, inline="always")
def _vnoise3(x, y, z, seed):
    x0 = np.floor(x)
    y0 = np.floor(y)
    z0 = np.floor(z)
    fx = _quintic(x - x0)
    fy = _quintic(y - y0)
    fz = _quintic(z - z0)
    ix = np.int64(x0)
    iy = np.int64(y0)
    iz = np.int64(z0)
    e00 = _hash3(ix, iy, iz, seed) + (_hash3(ix + 1, iy, iz, seed)
                                      - _hash3(ix, iy, iz, seed)) * fx
    e10 = _hash3(ix, iy + 1, iz, seed) + (_hash3(ix + 1, iy + 1, iz, seed)
                                          - _hash3(ix, iy + 1, iz, seed)) * fx
    e01 = _hash3(ix, iy, iz + 1, seed) + (_hash3(ix + 1, iy, iz + 1, seed)
                                          - _hash3(ix, iy, iz + 1, seed)) * fx
    e11 = _hash3(ix, iy + 1, iz + 1, seed) + (_hash3(ix + 1, iy + 1, iz + 1, seed)
                                              - _hash3(ix, iy + 1, iz + 1, seed)) * fx
    f0 = e00 + (e10 - e00) * fy
    f1 = e01 + (e11 - e01) * fy
    return f0 + (f1 - f0) * fz


@njit(cache=True)
def vnoise2_grid(xs, ys, seed):
    h, w = xs.shape
    out = np.empty((h, w), dtype=np.float64)
    for i in range(h):
        for j in range(w):
            out[i, j] = _vnoise2(xs[i, j], ys[i, j], seed)
    return out


@njit(cache=True)
def vnoise3_grid(xs, ys, z, seed):
    h, w = xs.shape
    out = np.empty((h, w), dtype=np.float64)
    for i in range(h):
        for j in range(w):
            out[i, j] = _vnoise3(xs[i, j], ys[i, j], z, seed)
    return out


@njit(cache=True)
def fbm2_grid(xs, ys, seeds, gain):
    h, w = xs.shape
    out = np.zeros((h, w), dtype=np.float64)
    norm = 0.0
    amp = 1.0
    for o in range(seeds.shape[0]):
        f = 2.0 ** o
        for i in range(h):
            for j in range(w):
                out[i, j] += amp * _vnoise2(xs[i, j] * f, ys[i, j] * f, seeds[o])
        norm += amp
        amp *= gain
    return out / norm


@njit(cache=True)
def fbm3_grid(xs, ys, z, seeds, gain):
    h, w = xs.shape
    out = np.zeros((h, w), dtype=np.float64)
    norm = 0.0
    amp = 1.0
    for o in range(seeds.shape[0]):
        f = 2.0 ** o
        for i in range(h):
            for j in range(w):
                out[i, j] += amp * _vnoise3(xs[i, j] * f, ys[i, j] * f, z * f,
                                            seeds[o])
        norm += amp
        amp *= gain
    return out / norm


@njit(cache=True)
def obmc_accumulate(plane, half_vec, bs, win):
    """Overlapped-block pull-compensation with a (2bs x 2bs) window.

    Returns (acc, wacc) sized like plane: the window-weighted sum of valid
    contributions and the accumulated window mass (0 where nothing landed).
    """
    h, w = plane.shape
    gh, gw = half_vec.shape[0], half_vec.shape[1]
    pad = bs // 2
    acc = np.zeros((h, w), dtype=np.float64)
    wacc = np.zeros((h, w), dtype=np.float64)
    for by in range(gh):
        for bx in range(gw):
            vx = half_vec[by, bx, 0]
            vy = half_vec[by, bx, 1]
            y0 = by * bs - pad
            x0 = bx * bs - pad
            for wy in range(2 * bs):
                ty = y0 + wy
                if ty < 0 or ty >= h:
                    continue
                sy = ty - vy
                if sy < 0 or sy >= h:
                    continue
                wrow = win[wy]
                prow = plane[sy]
                for wx in range(2 * bs):
                    tx = x0 + wx
                    if tx < 0 or tx >= w:
                        continue
                    sx = tx - vx
                    if sx < 0 or sx >= w:
                        continue
                    weight = wrow[wx]
                    acc[ty, tx] += weight * prow[sx]
                    wacc[ty, tx] += weight
    return acc, wacc


@njit(cache=True)
def global_sad(prev, nxt, dxs, dys):
    """Whole-frame SAD and overlap pixel count for every candidate shift.

    Used for global-translation compensation: residual mean for shift s is
    sums[s] / counts[s] over the overlap region.
    """
    h, w = prev.shape
    ns = dxs.shape[0]
    sums = np.zeros(ns, dtype=np.int64)
    counts = np.zeros(ns, dtype=np.int64)
    for s in range(ns):
        dx = dxs[s]
        dy = dys[s]
        y0 = max(0, -dy)
        y1 = min(h, h - dy)
        x0 = max(0, -dx)
        x1 = min(w, w - dx)
        if y1 <= y0 or x1 <= x0:
            continue
        acc = np.int64(0)
        for y in range(y0, y1):
            prow = prev[y]
            nrow = nxt[y + dy]
            racc = np.int64(0)
            for x in range(x0, x1):
                a = prow[x]
                b = nrow[x + dx]
                racc += np.int64(a - b if a > b else b - a)
            acc += racc
        sums[s] = acc
        counts[s] = (y1 - y0) * (x1 - x0)
    return sums, counts
