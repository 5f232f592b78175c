"""Compiled hot loops. Pure numpy/numba, no package imports.

Everything here is deterministic given its explicit seed argument; kernels
that need randomness seed numba's own generator locally.
"""

import numba
import numpy as np
from numba import njit


@njit(cache=True)
def bfs_ball_sizes(indptr, indices, src, r_max):
    """Closed-ball sizes |B_0(src)| .. |B_rmax(src)|."""
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, np.int32)
    queue = np.empty(n, np.int32)
    dist[src] = 0
    queue[0] = src
    head, tail = 0, 1
    sizes = np.zeros(r_max + 1, np.int64)
    sizes[0] = 1
    while head < tail:
        v = queue[head]
        head += 1
        d = dist[v]
        if d >= r_max:
            continue
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if dist[u] < 0:
                dist[u] = d + 1
                sizes[d + 1] += 1
                queue[tail] = u
                tail += 1
    for r in range(1, r_max + 1):
        sizes[r] += sizes[r - 1]
    return sizes


@njit(cache=True)
def bfs_distances_capped(indptr, indices, src, cap):
    """Hop distances from src, -1 beyond cap or unreachable."""
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, np.int32)
    queue = np.empty(n, np.int32)
    dist[src] = 0
    queue[0] = src
    head, tail = 0, 1
    while head < tail:
        v = queue[head]
        head += 1
        d = dist[v]
        if d >= cap:
            continue
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if dist[u] < 0:
                dist[u] = d + 1
                queue[tail] = u
                tail += 1
    return dist


@njit(cache=True)
def common_neighbor_counts(indptr, indices, us, vs):
    """Merge-intersect sorted adjacency rows for each pair."""
    out = np.empty(us.shape[0], np.int64)
    for i in range(us.shape[0]):
        ia, ea = indptr[us[i]], indptr[us[i] + 1]
        ib, eb = indptr[vs[i]], indptr[vs[i] + 1]
        c = 0
        while ia < ea and ib < eb:
            x = indices[ia]
            y = indices[ib]
            if x == y:
                c += 1
                ia += 1
                ib += 1
            elif x < y:
                ia += 1
            else:
                ib += 1
        out[i] = c
    return out


@njit(cache=True)
def louvain_local_phase(indptr, indices, weights, self_w, comm, order,
                        resolution, m, max_sweeps):
    """Sequential local moves until a full sweep makes none.

    comm is mutated in place. Gains are measured against staying put;
    ties keep the current community, ties between new candidates take
    the smallest community id. Returns the number of moves made.
    """
    n = indptr.shape[0] - 1
    k = np.empty(n, np.float64)
    for v in range(n):
        s = 2.0 * self_w[v]
        for e in range(indptr[v], indptr[v + 1]):
            s += weights[e]
        k[v] = s
    comm_tot = np.zeros(n, np.float64)
    for v in range(n):
        comm_tot[comm[v]] += k[v]
    w_to = np.zeros(n, np.float64)
    seen = np.full(n, -1, np.int64)
    touched = np.empty(n, np.int64)
    token = 0
    total_moves = 0
    for _sweep in range(max_sweeps):
        moves = 0
        for i in range(n):
            v = order[i]
            cv = comm[v]
            kv = k[v]
            ntouch = 0
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                if u == v:
                    continue
                cu = comm[u]
                if seen[cu] != token:
                    seen[cu] = token
                    w_to[cu] = 0.0
                    touched[ntouch] = cu
                    ntouch += 1
                w_to[cu] += weights[e]
            if seen[cv] != token:
                seen[cv] = token
                w_to[cv] = 0.0
                touched[ntouch] = cv
                ntouch += 1
            comm_tot[cv] -= kv
            best_c = cv
            best_gain = w_to[cv] / m - resolution * kv * comm_tot[cv] / (2.0 * m * m)
            for j in range(ntouch):
                c = touched[j]
                if c == cv:
                    continue
                gain = w_to[c] / m - resolution * kv * comm_tot[c] / (2.0 * m * m)
                if gain > best_gain or (gain == best_gain and best_c != cv
                                        and c < best_c):
                    best_c = c
                    best_gain = gain
            comm_tot[best_c] += kv
            if best_c != cv:
                comm[v] = best_c
                moves += 1
            token += 1
        total_moves += moves
        if moves == 0:
            break
    return total_moves


@njit(cache=True)
def labelprop_sweep(indptr, indices, weights, labels, order):
    """One sequential weighted-majority sweep; ties to the smallest label.

    Mutates labels in place, returns the number of changes.
    """
    n = indptr.shape[0] - 1
    w_to = np.zeros(n, np.float64)
    seen = np.full(n, -1, np.int64)
    touched = np.empty(n, np.int64)
    token = 0
    changes = 0
    for i in range(n):
        v = order[i]
        ntouch = 0
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if u == v:
                continue
            lu = labels[u]
            if seen[lu] != token:
                seen[lu] = token
                w_to[lu] = 0.0
                touched[ntouch] = lu
                ntouch += 1
            w_to[lu] += weights[e]
        token += 1
        if ntouch == 0:
            continue
        best = touched[0]
        for j in range(1, ntouch):
            c = touched[j]
            if w_to[c] > w_to[best] or (w_to[c] == w_to[best] and c < best):
                best = c
        if best != labels[v]:
            labels[v] = best
            changes += 1
    return changes


@njit(cache=True)
def best_partition_exhaustive(adj, resolution):
    """Exhaustive modularity maximum via restricted growth strings."""
    n = adj.shape[0]
    k = np.zeros(n, np.float64)
    for i in range(n):
        for j in range(n):
            k[i] += adj[i, j]
    two_m = k.sum()
    a = np.zeros(n, np.int64)
    b = np.zeros(n, np.int64)  # b[i] = 1 + max(a[:i]), b[0] = 0 unused
    best_q = -1e18
    best_a = np.zeros(n, np.int64)
    tot = np.zeros(n, np.float64)
    while True:
        win = 0.0
        for i in range(n):
            tot[a[i]] = 0.0
        for i in range(n):
            tot[a[i]] += k[i]
            for j in range(n):
                if a[i] == a[j]:
                    win += adj[i, j]
        q = win / two_m
        for i in range(n):
            if tot[a[i]] != 0.0:
                q -= resolution * (tot[a[i]] / two_m) ** 2
                tot[a[i]] = 0.0
        if q > best_q:
            best_q = q
            best_a[:] = a
        # successor restricted growth string
        i = n - 1
        while i > 0:
            if a[i] <= b[i]:
                break
            i -= 1
        if i == 0:
            return best_a, best_q
        a[i] += 1
        mx = b[i]
        if a[i] > mx:
            mx = a[i]
        for j in range(i + 1, n):
            a[j] = 0
            b[j] = mx
    return best_a, best_q


@njit(cache=True)
def balanced_fill(sizes, p):
    """Assign each item in order to the currently lightest of p bins."""
    totals = np.zeros(p, np.int64)
    out = np.empty(sizes.shape[0], np.int32)
    for i in range(sizes.shape[0]):
        g = 0
        for j in range(1, p):
            if totals[j] < totals[g]:
                g = j
        out[i] = g
        totals[g] += sizes[i]
    return out


@njit(cache=True)
def ba_edges(n, m, seed):
    """Preferential attachment: node t >= m attaches to m distinct targets."""
    np.random.seed(seed)
    n_edges = (n - m) * m
    src = np.empty(n_edges, np.int32)
    dst = np.empty(n_edges, np.int32)
    repeated = np.empty(2 * n_edges, np.int32)
    rep_len = 0
    targets = np.empty(m, np.int32)
    for j in range(m):
        targets[j] = j
    e = 0
    for source in range(m, n):
        for j in range(m):
            src[e] = source
            dst[e] = targets[j]
            e += 1
            repeated[rep_len] = targets[j]
            rep_len += 1
            repeated[rep_len] = source
            rep_len += 1
        if source == n - 1:
            break
        # next target set: m distinct draws from the degree-repeated list
        cnt = 0
        while cnt < m:
            cand = repeated[np.random.randint(0, rep_len)]
            dup = False
            for j in range(cnt):
                if targets[j] == cand:
                    dup = True
                    break
            if not dup:
                targets[cnt] = cand
                cnt += 1
    return src[:e], dst[:e]


@njit(cache=True)
def simulate_invitations(indptr, indices, treated, participant0, blocks,
                         cross_affinity, p_t, p_c, horizon, seed):
    """Day loop: participants attempt each unrealized incident edge.

    Success probability is the inviter's arm rate, damped by
    cross_affinity when the endpoints sit in different blocks. Invitees
    activate the following day. Each unordered edge is realized at most
    once. Returns (src, dst, day, participant_mask).
    """
    np.random.seed(seed)
    n = indptr.shape[0] - 1
    nnz = indices.shape[0]
    have_blocks = blocks.shape[0] > 0
    edge_done = np.zeros(nnz, np.uint8)
    participant = participant0.copy()
    pending = np.zeros(n, np.uint8)
    cap = nnz // 2 + 16
    src = np.empty(cap, np.int32)
    dst = np.empty(cap, np.int32)
    day_of = np.empty(cap, np.int32)
    cnt = 0
    for day in range(1, horizon + 1):
        for v in range(n):
            if participant[v] == 0:
                continue
            pv = p_t if treated[v] == 1 else p_c
            for e in range(indptr[v], indptr[v + 1]):
                if edge_done[e]:
                    continue
                u = indices[e]
                prob = pv
                if have_blocks and blocks[v] != blocks[u]:
                    prob *= cross_affinity
                if np.random.random() < prob:
                    edge_done[e] = 1
                    lo = indptr[u]
                    hi = indptr[u + 1]
                    while lo < hi:  # reverse edge, rows are sorted
                        mid = (lo + hi) // 2
                        if indices[mid] < v:
                            lo = mid + 1
                        else:
                            hi = mid
                    edge_done[lo] = 1
                    src[cnt] = v
                    dst[cnt] = u
                    day_of[cnt] = day
                    cnt += 1
                    if participant[u] == 0:
                        pending[u] = 1
        for v in range(n):
            if pending[v] == 1:
                participant[v] = 1
                pending[v] = 0
    return src[:cnt], dst[:cnt], day_of[:cnt], participant


def warm_up():
    """Trigger compilation of every kernel on a toy input."""
    indptr = np.array([0, 2, 4, 6], np.int64)
    indices = np.array([1, 2, 0, 2, 0, 1], np.int32)
    w = np.ones(6, np.float64)
    bfs_ball_sizes(indptr, indices, 0, 2)
    bfs_distances_capped(indptr, indices, 0, 2)
    common_neighbor_counts(indptr, indices,
                           np.array([0], np.int32), np.array([1], np.int32))
    comm = np.arange(3, dtype=np.int64)
    louvain_local_phase(indptr, indices, w, np.zeros(3), comm,
                        np.arange(3, dtype=np.int64), 1.0, 3.0, 4)
    labelprop_sweep(indptr, indices, w, np.arange(3, dtype=np.int64),
                    np.arange(3, dtype=np.int64))
    best_partition_exhaustive(np.ones((2, 2)) - np.eye(2), 1.0)
    balanced_fill(np.array([1, 2], np.int64), 2)
    ba_edges(5, 2, 0)
    simulate_invitations(indptr, indices, np.zeros(3, np.uint8),
                         np.ones(3, np.uint8), np.empty(0, np.int32),
                         1.0, 0.5, 0.1, 2, 0)
