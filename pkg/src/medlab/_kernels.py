"""Compiled sliding-window kernels.

1-D medians use a Fenwick tree over the global ranks of the input, so a
window update costs O(log N). 2-D medians keep block counts over ranks
instead and walk the median pointer. Windows are clipped to
the grid; the reported statistic is the order statistic at 0-based rank
``count // 2`` (upper-middle for even counts).
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _bit_add(tree, pos, delta):
    size = tree.shape[0] - 1
    k = pos + 1
    while k <= size:
        tree[k] += delta
        k += k & (-k)


@njit(cache=True, nogil=True)
def _bit_kth(tree, k, top):
    # smallest position p with prefix count > k (k is 0-based)
    pos = 0
    step = top
    while step > 0:
        nxt = pos + step
        if nxt < tree.shape[0] and tree[nxt] <= k:
            pos = nxt
            k -= tree[nxt]
        step >>= 1
    return pos


@njit(cache=True, nogil=True)
def _top_bit(size):
    top = 1
    while top * 2 <= size:
        top *= 2
    return top


@njit(cache=True, nogil=True)
def running_median_1d(x, radius):
    n = x.shape[0]
    order = np.argsort(x, kind="mergesort")
    rank = np.empty(n, dtype=np.int64)
    for k in range(n):
        rank[order[k]] = k
    tree = np.zeros(n + 1, dtype=np.int64)
    top = _top_bit(n)
    out = np.empty(n, dtype=np.float64)
    hi = min(n - 1, radius)
    for j in range(hi + 1):
        _bit_add(tree, rank[j], 1)
    count = hi + 1
    for i in range(n):
        out[i] = x[order[_bit_kth(tree, count // 2, top)]]
        add = i + radius + 1
        if add < n:
            _bit_add(tree, rank[add], 1)
            count += 1
        drop = i - radius
        if drop >= 0:
            _bit_add(tree, rank[drop], -1)
            count -= 1
    return out


@njit(cache=True, nogil=True)
def box_mean_2d(x, half_widths):
    n0, n1 = x.shape
    r = (half_widths.shape[0] - 1) // 2
    pref = np.zeros((n0, n1 + 1), dtype=np.float64)
    for a in range(n0):
        s = 0.0
        for b in range(n1):
            s += x[a, b]
            pref[a, b + 1] = s
    out = np.empty((n0, n1), dtype=np.float64)
    for a in range(n0):
        for b in range(n1):
            total = 0.0
            count = 0
            for t in range(2 * r + 1):
                row = a + t - r
                if row < 0 or row >= n0:
                    continue
                w = half_widths[t]
                lo = max(0, b - w)
                hi = min(n1 - 1, b + w)
                total += pref[row, hi + 1] - pref[row, lo]
                count += hi - lo + 1
            out[a, b] = total / count
    return out


@njit(cache=True, nogil=True)
def running_median_1d_multi(x, radii):
    """Rows of running medians of ``x``, one per radius, sharing one ranking."""
    n = x.shape[0]
    order = np.argsort(x, kind="mergesort")
    rank = np.empty(n, dtype=np.int64)
    for k in range(n):
        rank[order[k]] = k
    top = _top_bit(n)
    out = np.empty((radii.shape[0], n), dtype=np.float64)
    tree = np.zeros(n + 1, dtype=np.int64)
    for t in range(radii.shape[0]):
        radius = radii[t]
        if radius == 0:
            out[t, :] = x
            continue
        tree[:] = 0
        hi = min(n - 1, radius)
        for j in range(hi + 1):
            _bit_add(tree, rank[j], 1)
        count = hi + 1
        for i in range(n):
            out[t, i] = x[order[_bit_kth(tree, count // 2, top)]]
            add = i + radius + 1
            if add < n:
                _bit_add(tree, rank[add], 1)
                count += 1
            drop = i - radius
            if drop >= 0:
                _bit_add(tree, rank[drop], -1)
                count -= 1
    return out


@njit(cache=True, nogil=True)
def block_medians_1d(x, block, n_cells):
    out = np.empty(n_cells, dtype=np.float64)
    n = x.shape[0]
    for k in range(n_cells):
        lo = k * block
        hi = n if k == n_cells - 1 else lo + block
        buf = np.sort(x[lo:hi])
        out[k] = buf[(hi - lo) // 2]
    return out


@njit(cache=True, nogil=True)
def block_medians_2d(x, block, n_cells):
    out = np.empty((n_cells, n_cells), dtype=np.float64)
    n = x.shape[0]
    for k0 in range(n_cells):
        lo0 = k0 * block
        hi0 = n if k0 == n_cells - 1 else lo0 + block
        for k1 in range(n_cells):
            lo1 = k1 * block
            hi1 = n if k1 == n_cells - 1 else lo1 + block
            buf = np.sort(x[lo0:hi0, lo1:hi1].copy().ravel())
            out[k0, k1] = buf[buf.shape[0] // 2]
    return out


@njit(cache=True, nogil=True)
def _walk_kth(cnt, bcnt, shift, state, k):
    # state = [current block, number of window elements in earlier blocks]
    pb = state[0]
    below = state[1]
    while below > k:
        pb -= 1
        below -= bcnt[pb]
    while below + bcnt[pb] <= k:
        below += bcnt[pb]
        pb += 1
    state[0] = pb
    state[1] = below
    j = pb << shift
    acc = below
    while True:
        acc += cnt[j]
        if acc > k:
            return j
        j += 1


@njit(cache=True, nogil=True)
def _blk_add(cnt, bcnt, shift, state, q, d):
    cnt[q] += d
    blk = q >> shift
    bcnt[blk] += d
    if blk < state[0]:
        state[1] += d


@njit(cache=True, nogil=True)
def running_median_2d(x, half_widths):
    """Median over a disc-shaped window described by per-row half widths.

    ``half_widths[dy + r]`` is the largest ``dx`` with ``dx**2 + dy**2 <= R**2``.
    Rank counts are kept per element and per block of 64 ranks; the median
    pointer walks from its previous block, which moves little between
    neighbouring windows, so an update costs O(1).
    """
    n0, n1 = x.shape
    r = (half_widths.shape[0] - 1) // 2
    flat = x.ravel()
    size = flat.shape[0]
    order = np.argsort(flat, kind="mergesort")
    rank = np.empty(size, dtype=np.int64)
    for k in range(size):
        rank[order[k]] = k
    rank2 = rank.reshape(n0, n1)
    shift = 6
    cnt = np.zeros(size + 64, dtype=np.int32)
    bcnt = np.zeros((size >> shift) + 2, dtype=np.int64)
    state = np.zeros(2, dtype=np.int64)
    out = np.empty((n0, n1), dtype=np.float64)
    for a in range(n0):
        count = 0
        for t in range(2 * r + 1):
            row = a + t - r
            if row < 0 or row >= n0:
                continue
            w = half_widths[t]
            for c in range(0, min(n1 - 1, w) + 1):
                _blk_add(cnt, bcnt, shift, state, rank2[row, c], 1)
                count += 1
        for b in range(n1):
            out[a, b] = flat[order[_walk_kth(cnt, bcnt, shift, state, count // 2)]]
            if b == n1 - 1:
                break
            for t in range(2 * r + 1):
                row = a + t - r
                if row < 0 or row >= n0:
                    continue
                w = half_widths[t]
                add = b + w + 1
                if add < n1:
                    _blk_add(cnt, bcnt, shift, state, rank2[row, add], 1)
                    count += 1
                drop = b - w
                if drop >= 0:
                    _blk_add(cnt, bcnt, shift, state, rank2[row, drop], -1)
                    count -= 1
        for t in range(2 * r + 1):
            row = a + t - r
            if row < 0 or row >= n0:
                continue
            w = half_widths[t]
            for c in range(max(0, n1 - 1 - w), n1):
                _blk_add(cnt, bcnt, shift, state, rank2[row, c], -1)
    return out
