"""Compiled inner loops. All arrays are CSR pieces from graph.py."""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)

# attempts before falling back to direct selection among the valid targets
MAX_REJECT = 64

RULE_ALG1 = 0
RULE_PA1 = 1

# stats slots filled by train_kernel / sequence_kernel
ST_POS, ST_NEG, ST_SHORT, ST_SKIP, ST_UPD, ST_CORRECT, ST_SCORED = range(7)
NUM_STATS = 7


@njit(cache=True)
def splitmix64(z):
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def draw_key(seed, node, index):
    return splitmix64(splitmix64(splitmix64(seed) ^ np.uint64(node)) + np.uint64(index))


@njit(cache=True)
def row_contains(tgt, lo, hi, x):
    while lo < hi:
        mid = (lo + hi) >> 1
        v = tgt[mid]
        if v < x:
            lo = mid + 1
        elif v > x:
            hi = mid
        else:
            return True
    return False


@njit(cache=True)
def kth_valid(tgt, lo, hi, d, k):
    """k-th smallest id not in tgt[lo:hi] and not equal to d."""
    cand = k
    i = lo
    pending = True
    while True:
        if i < hi and (not pending or tgt[i] <= d):
            e = tgt[i]
            i += 1
            if pending and e == d:
                pending = False
        elif pending:
            e = d
            pending = False
        else:
            break
        if e <= cand:
            cand += 1
        else:
            break
    return cand


@njit(cache=True)
def num_valid(n, tgt, lo, hi, d):
    excluded = hi - lo
    if not row_contains(tgt, lo, hi, d):
        excluded += 1
    return n - excluded


@njit(cache=True)
def draw_negative(seed, d, n, rej_tgt, lo, hi, valid, counter):
    """Uniform r with (d, r) not an arc and r != d. Returns (r, next counter)."""
    un = np.uint64(n)
    for _ in range(MAX_REJECT):
        r = np.int64(draw_key(seed, d, counter) % un)
        counter += 1
        if r != d and not row_contains(rej_tgt, lo, hi, r):
            return r, counter
    k = np.int64(draw_key(seed, d, counter) % np.uint64(valid))
    counter += 1
    return kth_valid(rej_tgt, lo, hi, d, k), counter


@njit(cache=True)
def pair_sum(W, c_off, c_ids, a, b):
    s = 0.0
    for i in range(c_off[a], c_off[a + 1]):
        row = c_ids[i]
        for j in range(c_off[b], c_off[b + 1]):
            s += W[row, c_ids[j]]
    return s


@njit(cache=True)
def pa_step(W, c_off, c_ids, a, b, y, K, rule, clamp, learn, stats):
    """One example of the update loop; returns the per-cell delta."""
    na = c_off[a + 1] - c_off[a]
    nb = c_off[b + 1] - c_off[b]
    if na == 0 or nb == 0:
        stats[ST_SKIP] += 1
        return 0.0
    mu = pair_sum(W, c_off, c_ids, a, b)
    stats[ST_SCORED] += 1
    if y * mu > 0:
        stats[ST_CORRECT] += 1
    if not learn:
        return 0.0
    rho = 1.0 / (na * nb)
    loss = 1.0 - y * mu * rho
    if rule == RULE_ALG1:
        step = rho * min(K, loss)
    else:
        step = min(K * rho, loss)
    if clamp and step < 0.0:
        step = 0.0
    delta = y * step
    if delta != 0.0:
        stats[ST_UPD] += 1
        for i in range(c_off[a], c_off[a + 1]):
            row = c_ids[i]
            for j in range(c_off[b], c_off[b + 1]):
                W[row, c_ids[j]] += delta
    return delta


@njit(cache=True)
def train_kernel(W, pos_off, pos_tgt, rej_off, rej_tgt, c_off, c_ids,
                 K, seed, passes, rule, clamp, learn, stats):
    n = pos_off.shape[0] - 1
    for _ in range(passes):
        for d in range(n):
            emitted = 0
            for j in range(pos_off[d], pos_off[d + 1]):
                t = pos_tgt[j]
                if t == d:
                    continue
                emitted += 1
                stats[ST_POS] += 1
                pa_step(W, c_off, c_ids, d, t, 1.0, K, rule, clamp, learn, stats)
            if emitted == 0:
                continue
            lo = rej_off[d]
            hi = rej_off[d + 1]
            valid = num_valid(n, rej_tgt, lo, hi, d)
            if valid <= 0:
                stats[ST_SHORT] += emitted
                continue
            counter = 0
            for _k in range(emitted):
                r, counter = draw_negative(seed, d, n, rej_tgt, lo, hi, valid, counter)
                stats[ST_NEG] += 1
                pa_step(W, c_off, c_ids, d, r, -1.0, K, rule, clamp, learn, stats)


@njit(cache=True)
def sequence_kernel(pos_off, pos_tgt, rej_off, rej_tgt, seed, out_src, out_tgt, out_lab, stats):
    """Same example order as train_kernel (one pass); returns the emitted length."""
    n = pos_off.shape[0] - 1
    k = 0
    for d in range(n):
        emitted = 0
        for j in range(pos_off[d], pos_off[d + 1]):
            t = pos_tgt[j]
            if t == d:
                continue
            out_src[k] = d
            out_tgt[k] = t
            out_lab[k] = 1
            k += 1
            emitted += 1
            stats[ST_POS] += 1
        if emitted == 0:
            continue
        lo = rej_off[d]
        hi = rej_off[d + 1]
        valid = num_valid(n, rej_tgt, lo, hi, d)
        if valid <= 0:
            stats[ST_SHORT] += emitted
            continue
        counter = 0
        for _k in range(emitted):
            r, counter = draw_negative(seed, d, n, rej_tgt, lo, hi, valid, counter)
            out_src[k] = d
            out_tgt[k] = r
            out_lab[k] = -1
            k += 1
            stats[ST_NEG] += 1
    return k


@njit(cache=True)
def score_pairs_kernel(W, c_off, c_ids, src, tgt, out):
    for i in range(src.shape[0]):
        out[i] = pair_sum(W, c_off, c_ids, src[i], tgt[i])


@njit(cache=True)
def bfs_distances(offsets, targets, source, dist, queue):
    """Unweighted BFS; dist must be pre-filled with -1. Returns visit count."""
    dist[source] = 0
    queue[0] = source
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for j in range(offsets[u], offsets[u + 1]):
            v = targets[j]
            if dist[v] < 0:
                dist[v] = du
                queue[tail] = v
                tail += 1
    return tail


@njit(cache=True)
def harmonic_kernel(offsets, targets, sources, out):
    """out[x] += 1/dist(s, x) for every source s and reachable x != s."""
    n = offsets.shape[0] - 1
    dist = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for s in sources:
        dist[:] = -1
        visited = bfs_distances(offsets, targets, s, dist, queue)
        for i in range(1, visited):
            x = queue[i]
            out[x] += 1.0 / dist[x]


@njit(cache=True)
def nearest_label_kernel(offsets, targets, seeds, labels, dist):
    """Level-synchronous multi-source BFS; ties go to the smallest seed label.

    ``seeds`` must be sorted; labels[x] is the index into ``seeds``.
    """
    n = offsets.shape[0] - 1
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    size = 0
    for i in range(seeds.shape[0]):
        s = seeds[i]
        if dist[s] < 0:
            dist[s] = 0
            labels[s] = i
            frontier[size] = s
            size += 1
    level = 0
    while size > 0:
        level += 1
        nsize = 0
        for f in range(size):
            u = frontier[f]
            lu = labels[u]
            for j in range(offsets[u], offsets[u + 1]):
                v = targets[j]
                if dist[v] < 0:
                    dist[v] = level
                    labels[v] = lu
                    nxt[nsize] = v
                    nsize += 1
                elif dist[v] == level and lu < labels[v]:
                    labels[v] = lu
        for f in range(nsize):
            frontier[f] = nxt[f]
        size = nsize
