"""Compiled inner loops over the sorted-adjacency (CSR) representation.

Every kernel takes an explicit ``sources`` array and writes into caller-owned
accumulators, so callers can split sources across threads and merge the
private results by addition. All kernels release the GIL.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit


@njit(nogil=True, cache=True)
def _has_edge(indptr, indices, u, v):
    lo = indptr[u]
    hi = indptr[u + 1]
    while lo < hi:
        mid = (lo + hi) >> 1
        x = indices[mid]
        if x < v:
            lo = mid + 1
        elif x > v:
            hi = mid
        else:
            return True
    return False


@njit(nogil=True, cache=True)
def _lower_bound(indices, lo, hi, v):
    while lo < hi:
        mid = (lo + hi) >> 1
        if indices[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(nogil=True, cache=True)
def node_triangles(indptr, indices, sources, tri):
    """Add, for each triangle u < v < w with u in ``sources``, one to each corner."""
    for s in range(sources.size):
        u = sources[s]
        end_u = indptr[u + 1]
        for a in range(indptr[u], end_u):
            v = indices[a]
            if v <= u:
                continue
            end_v = indptr[v + 1]
            p = a + 1
            q = _lower_bound(indices, indptr[v], end_v, v + 1)
            while p < end_u and q < end_v:
                x = indices[p]
                y = indices[q]
                if x < y:
                    p += 1
                elif x > y:
                    q += 1
                else:
                    tri[u] += 1
                    tri[v] += 1
                    tri[x] += 1
                    p += 1
                    q += 1


@njit(nogil=True, cache=True)
def census_sources(indptr, indices, sources, upper_only, cap, offsets, lookup,
                   pair_count, linked_count, bag, counter, touched):
    """Common-neighborhood census for the pairs discovered from ``sources``.

    ``counter`` (zeroed, length n) and ``touched`` (length n) are scratch.
    With ``upper_only`` a pair (i, j) is only produced from source i < j.
    """
    cn = np.empty(max(cap, 1), dtype=indices.dtype)
    for s in range(sources.size):
        i = sources[s]
        ntouch = 0
        for a in range(indptr[i], indptr[i + 1]):
            w = indices[a]
            end_w = indptr[w + 1]
            if upper_only:
                b0 = _lower_bound(indices, indptr[w], end_w, i + 1)
            else:
                b0 = indptr[w]
            for b in range(b0, end_w):
                j = indices[b]
                if j == i:
                    continue
                if counter[j] == 0:
                    touched[ntouch] = j
                    ntouch += 1
                counter[j] += 1
        for t in range(ntouch):
            j = touched[t]
            c = counter[j]
            counter[j] = 0
            bag[c] += 1
            if c > cap:
                continue
            # V^ij in ascending node order
            p = indptr[i]
            end_p = indptr[i + 1]
            q = indptr[j]
            end_q = indptr[j + 1]
            m = 0
            while p < end_p and q < end_q:
                x = indices[p]
                y = indices[q]
                if x < y:
                    p += 1
                elif x > y:
                    q += 1
                else:
                    cn[m] = x
                    m += 1
                    p += 1
                    q += 1
            mask = 0
            bit = 0
            for u in range(c):
                for v in range(u + 1, c):
                    if _has_edge(indptr, indices, cn[u], cn[v]):
                        mask |= 1 << bit
                    bit += 1
            cid = lookup[offsets[c] + mask]
            pair_count[cid] += 1
            if _has_edge(indptr, indices, i, j):
                linked_count[cid] += 1


@njit(nogil=True, cache=True)
def pair_records(indptr, indices, sources, upper_only, cap, offsets, lookup,
                 out_i, out_j, out_cn, out_cls, out_link, counter, touched):
    """Like :func:`census_sources` but writes one record per pair.

    Output arrays must be sized to the number of pairs; returns the count
    written. ``out_cls`` is -1 for pairs whose neighborhood exceeds ``cap``.
    """
    cn = np.empty(max(cap, 1), dtype=indices.dtype)
    k = 0
    for s in range(sources.size):
        i = sources[s]
        ntouch = 0
        for a in range(indptr[i], indptr[i + 1]):
            w = indices[a]
            end_w = indptr[w + 1]
            if upper_only:
                b0 = _lower_bound(indices, indptr[w], end_w, i + 1)
            else:
                b0 = indptr[w]
            for b in range(b0, end_w):
                j = indices[b]
                if j == i:
                    continue
                if counter[j] == 0:
                    touched[ntouch] = j
                    ntouch += 1
                counter[j] += 1
        # ascending partner order keeps the stream reproducible
        part = np.sort(touched[:ntouch])
        for t in range(ntouch):
            j = part[t]
            c = counter[j]
            counter[j] = 0
            out_i[k] = i
            out_j[k] = j
            out_cn[k] = c
            out_link[k] = _has_edge(indptr, indices, i, j)
            out_cls[k] = -1
            if c <= cap:
                p = indptr[i]
                end_p = indptr[i + 1]
                q = indptr[j]
                end_q = indptr[j + 1]
                m = 0
                while p < end_p and q < end_q:
                    x = indices[p]
                    y = indices[q]
                    if x < y:
                        p += 1
                    elif x > y:
                        q += 1
                    else:
                        cn[m] = x
                        m += 1
                        p += 1
                        q += 1
                mask = 0
                bit = 0
                for u in range(c):
                    for v in range(u + 1, c):
                        if _has_edge(indptr, indices, cn[u], cn[v]):
                            mask |= 1 << bit
                        bit += 1
                out_cls[k] = lookup[offsets[c] + mask]
            k += 1
    return k


@njit(nogil=True, cache=True)
def eccentricities(indptr, indices, sources, out, dist, queue):
    """BFS eccentricity (within the source's component) for each source."""
    for s in range(sources.size):
        src = sources[s]
        dist[src] = 0
        queue[0] = src
        head = 0
        tail = 1
        far = 0
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            if du > far:
                far = du
            for a in range(indptr[u], indptr[u + 1]):
                v = indices[a]
                if dist[v] < 0:
                    dist[v] = du + 1
                    queue[tail] = v
                    tail += 1
        for t in range(tail):
            dist[queue[t]] = -1
        out[s] = far


@njit(nogil=True, cache=True)
def bfs_farthest(indptr, indices, src, dist, queue):
    """Return (farthest node, eccentricity) of ``src``; ties to the smaller id."""
    dist[src] = 0
    queue[0] = src
    head = 0
    tail = 1
    best = src
    far = 0
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        if du > far or (du == far and u < best):
            far = du
            best = u
        for a in range(indptr[u], indptr[u + 1]):
            v = indices[a]
            if dist[v] < 0:
                dist[v] = du + 1
                queue[tail] = v
                tail += 1
    for t in range(tail):
        dist[queue[t]] = -1
    return best, far


@njit(nogil=True, cache=True)
def edge_triangles_and_cliques(indptr, indices, sources, tri_pairs, k4):
    """Accumulate sum over edges of C(t(e), 2) and the number of 4-cliques.

    Each edge u < v with u in ``sources`` is visited once. ``tri_pairs`` and
    ``k4`` are length-1 accumulators.
    """
    maxdeg = 0
    for u in range(indptr.size - 1):
        maxdeg = max(maxdeg, indptr[u + 1] - indptr[u])
    buf = np.empty(maxdeg + 1, dtype=indices.dtype)
    for s in range(sources.size):
        u = sources[s]
        end_u = indptr[u + 1]
        for a in range(indptr[u], end_u):
            v = indices[a]
            if v <= u:
                continue
            # all common neighbors of the edge, ascending
            p = indptr[u]
            q = indptr[v]
            end_v = indptr[v + 1]
            m = 0
            while p < end_u and q < end_v:
                x = indices[p]
                y = indices[q]
                if x < y:
                    p += 1
                elif x > y:
                    q += 1
                else:
                    buf[m] = x
                    m += 1
                    p += 1
                    q += 1
            tri_pairs[0] += m * (m - 1) // 2
            # 4-cliques u < v < w < x counted once at their lowest edge
            for b in range(m):
                w = buf[b]
                if w <= v:
                    continue
                for c in range(b + 1, m):
                    if _has_edge(indptr, indices, w, buf[c]):
                        k4[0] += 1


def resolve_jobs(n_jobs):
    if n_jobs is None:
        env = os.environ.get("CNDIVERSITY_THREADS")
        n_jobs = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(n_jobs))


def run_partitioned(task, sources, n_jobs):
    """Run ``task(sub_sources)`` over a strided partition of ``sources``.

    Returns the list of per-worker results in worker order; the caller merges
    them by addition, so the outcome does not depend on ``n_jobs``.
    """
    n_jobs = resolve_jobs(n_jobs)
    sources = np.ascontiguousarray(sources, dtype=np.int64)
    parts = [np.ascontiguousarray(sources[w::n_jobs]) for w in range(n_jobs)]
    if n_jobs == 1:
        return [task(parts[0])]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(task, parts))
