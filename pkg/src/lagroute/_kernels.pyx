# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled routing kernel.  Same contract and results as ``_pykernels``."""

from libc.math cimport INFINITY
from libc.stdlib cimport calloc, malloc, realloc, free, qsort

cdef double INF = INFINITY


cdef struct Entry:
    double d
    int h
    int v


cdef inline bint _less(Entry a, Entry b) noexcept nogil:
    if a.d != b.d:
        return a.d < b.d
    if a.h != b.h:
        return a.h < b.h
    return a.v < b.v


cdef inline void _push(Entry* heap, int* size, Entry x) noexcept nogil:
    cdef int i = size[0]
    cdef int parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(x, heap[parent]):
            heap[i] = heap[parent]
            i = parent
        else:
            break
    heap[i] = x


cdef inline Entry _pop(Entry* heap, int* size) noexcept nogil:
    cdef Entry top = heap[0]
    cdef int n = size[0] - 1
    cdef Entry last = heap[n]
    cdef int i = 0
    cdef int child
    size[0] = n
    while True:
        child = 2 * i + 1
        if child >= n:
            break
        if child + 1 < n and _less(heap[child + 1], heap[child]):
            child += 1
        if _less(heap[child], last):
            heap[i] = heap[child]
            i = child
        else:
            break
    if n > 0:
        heap[i] = last
    return top


cdef int _cmp_int(const void* a, const void* b) noexcept nogil:
    cdef int x = (<const int*> a)[0]
    cdef int y = (<const int*> b)[0]
    return (x > y) - (x < y)


cdef inline int _source(int v, double* dist, int* hops, char* done, char* in_tree,
                        Entry** heap, int* size, int* cap) noexcept nogil:
    cdef Entry ent
    in_tree[v] = 1
    dist[v] = 0.0
    hops[v] = 0
    done[v] = 0
    ent.d = 0.0
    ent.h = 0
    ent.v = v
    return _push_grow(heap, size, cap, ent)


cdef inline int _push_grow(Entry** heap, int* size, int* cap, Entry x) noexcept nogil:
    cdef Entry* grown
    if size[0] == cap[0]:
        grown = <Entry*> realloc(heap[0], 2 * cap[0] * sizeof(Entry))
        if grown == NULL:
            return -1
        heap[0] = grown
        cap[0] *= 2
    _push(heap[0], size, x)
    return 0


cdef int _route_one(int n_v, const int* nbr_v, const int* nbr_e, const double* cost,
                    const int* terms, int n_terms, int* out,
                    double* dist, int* hops, char* done, char* in_tree, char* is_term,
                    int* touched, int* path, Entry** heap, int* cap) noexcept nogil:
    # Returns the edge count, -1 if the terminals are disconnected, -2 on allocation failure.
    # Every vertex whose label is written is recorded in ``touched`` and reset on exit.
    cdef int i, j, u, v, x, nh, target, base, n_path
    cdef int n_touched = 0, n_edges = 0, remaining = 0, size = 0, status = 0
    cdef double nd
    cdef Entry cur, ent

    cdef int root = terms[0]
    for i in range(n_terms):
        if not is_term[terms[i]]:
            is_term[terms[i]] = 1
            remaining += 1
        if terms[i] < root:
            root = terms[i]
    remaining -= 1
    touched[n_touched] = root
    n_touched += 1
    if _source(root, dist, hops, done, in_tree, heap, &size, cap) < 0:
        remaining = 0
        status = -2

    while remaining > 0:
        target = -1
        while size > 0:
            cur = _pop(heap[0], &size)
            v = cur.v
            if done[v] or cur.d != dist[v] or cur.h != hops[v]:
                continue
            done[v] = 1
            if is_term[v] and not in_tree[v]:
                target = v
                break
            nh = cur.h + 1
            base = 4 * v
            for j in range(4):
                u = nbr_v[base + j]
                if u < 0:
                    continue
                nd = cur.d + cost[nbr_e[base + j]]
                if nd < dist[u] or (nd == dist[u] and nh < hops[u]):
                    if dist[u] == INF:
                        touched[n_touched] = u
                        n_touched += 1
                    dist[u] = nd
                    hops[u] = nh
                    done[u] = 0
                    ent.d = nd
                    ent.h = nh
                    ent.v = u
                    if _push_grow(heap, &size, cap, ent) < 0:
                        status = -2
                        break
            if status < 0:
                break
        if status < 0:
            break
        if target < 0:
            status = -1
            break
        # walk back along the smallest-index neighbour realising each label
        x = target
        n_path = 0
        while not in_tree[x]:
            path[n_path] = x
            n_path += 1
            base = 4 * x
            for j in range(4):
                u = nbr_v[base + j]
                if u >= 0 and hops[u] + 1 == hops[x] and dist[u] + cost[nbr_e[base + j]] == dist[x]:
                    out[n_edges] = nbr_e[base + j]
                    n_edges += 1
                    x = u
                    break
        for i in range(n_path):
            if _source(path[i], dist, hops, done, in_tree, heap, &size, cap) < 0:
                status = -2
                break
        if status < 0:
            break
        remaining -= 1

    for i in range(n_touched):
        v = touched[i]
        dist[v] = INF
        hops[v] = 0
        done[v] = 0
        in_tree[v] = 0
    for i in range(n_terms):
        is_term[terms[i]] = 0
    if status < 0:
        return status
    if n_edges > 1:
        qsort(out, n_edges, sizeof(int), _cmp_int)
    return n_edges


def route_block(const int[:, ::1] nbr_vertex, const int[:, ::1] nbr_edge,
                const double[::1] costs, const int[::1] term_ptr, const int[::1] terms,
                int lo, int hi, int[:, ::1] out_edges, int[::1] out_count):
    """Route nets ``lo..hi-1`` writing sorted edge indices into ``out_edges[net]``.

    Releases the GIL for the whole block.
    """
    cdef int n_v = nbr_vertex.shape[0]
    cdef int cap = 4 * n_v + 16
    cdef double* dist = <double*> malloc(n_v * sizeof(double))
    cdef int* hops = <int*> calloc(n_v, sizeof(int))
    cdef char* done = <char*> calloc(n_v, 1)
    cdef char* in_tree = <char*> calloc(n_v, 1)
    cdef char* is_term = <char*> calloc(n_v, 1)
    cdef int* touched = <int*> malloc(n_v * sizeof(int))
    cdef int* path = <int*> malloc(n_v * sizeof(int))
    cdef Entry* heap = <Entry*> malloc(cap * sizeof(Entry))
    cdef int net, n, i
    cdef int failed = -1, status = 0
    try:
        if n_v == 0 or lo >= hi:
            return
        if not (dist and hops and done and in_tree and is_term and touched and path and heap):
            raise MemoryError()
        for i in range(n_v):
            dist[i] = INF
        with nogil:
            for net in range(lo, hi):
                n = _route_one(n_v, &nbr_vertex[0, 0], &nbr_edge[0, 0], &costs[0],
                               &terms[term_ptr[net]], term_ptr[net + 1] - term_ptr[net],
                               &out_edges[net, 0], dist, hops, done, in_tree, is_term,
                               touched, path, &heap, &cap)
                if n < 0:
                    failed = net
                    status = n
                    break
                out_count[net] = n
    finally:
        free(dist); free(hops); free(done); free(in_tree); free(is_term)
        free(touched); free(path); free(heap)
    if status == -2:
        raise MemoryError()
    if failed >= 0:
        raise ValueError(f"net index {failed}: terminals are disconnected")
