# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels; same contracts as ``_pykernels``."""

from libc.stdlib cimport malloc, free
from libc.stdint cimport uint64_t

BACKEND = "cython"


cdef int _traverse(int n, long *labels, long *out_off, long *out_nbr, long *out_aux,
                   long *in_off, long *in_nbr, long *in_aux, int root,
                   long *code, int *order, int *pos) nogil:
    # returns code length; order/pos are scratch of size n
    cdef int i, u, v, k, head = 0, tail = 1, clen = 0
    for i in range(n):
        pos[i] = -1
    pos[root] = 0
    order[0] = root
    while head < tail:
        u = order[head]
        code[clen] = labels[u]
        code[clen + 1] = in_off[u + 1] - in_off[u]
        code[clen + 2] = out_off[u + 1] - out_off[u]
        clen += 3
        for k in range(out_off[u], out_off[u + 1]):
            v = <int>out_nbr[k]
            if v < 0:
                code[clen] = -1
            else:
                if pos[v] < 0:
                    pos[v] = tail
                    order[tail] = v
                    tail += 1
                code[clen] = pos[v]
            code[clen + 1] = out_aux[k]
            clen += 2
        for k in range(in_off[u], in_off[u + 1]):
            v = <int>in_nbr[k]
            if v < 0:
                code[clen] = -1
            else:
                if pos[v] < 0:
                    pos[v] = tail
                    order[tail] = v
                    tail += 1
                code[clen] = pos[v]
            code[clen + 1] = in_aux[k]
            clen += 2
        head += 1
    return clen


cdef long *_copy(list xs) except NULL:
    cdef Py_ssize_t i, m = len(xs)
    cdef long *buf = <long *>malloc((m + 1) * sizeof(long))
    if buf == NULL:
        raise MemoryError()
    for i in range(m):
        buf[i] = xs[i]
    return buf


def traversal_code(labels, out_off, out_nbr, out_aux, in_off, in_nbr, in_aux, int root):
    cdef int n = len(labels)
    cdef int width = 3 * n + 2 * (len(out_nbr) + len(in_nbr)) + 1
    cdef long *lb = _copy(list(labels))
    cdef long *oo = _copy(list(out_off))
    cdef long *on = _copy(list(out_nbr))
    cdef long *oa = _copy(list(out_aux))
    cdef long *io = _copy(list(in_off))
    cdef long *inn = _copy(list(in_nbr))
    cdef long *ia = _copy(list(in_aux))
    cdef long *code = <long *>malloc(width * sizeof(long))
    cdef int *order = <int *>malloc((n + 1) * sizeof(int))
    cdef int *pos = <int *>malloc((n + 1) * sizeof(int))
    cdef int clen, i, visited
    try:
        clen = _traverse(n, lb, oo, on, oa, io, inn, ia, root, code, order, pos)
        visited = 0
        for i in range(n):
            if pos[i] >= 0:
                visited += 1
        return [code[i] for i in range(clen)], [order[i] for i in range(visited)]
    finally:
        free(lb); free(oo); free(on); free(oa); free(io); free(inn); free(ia)
        free(code); free(order); free(pos)


cdef int _cmp(long *a, int alen, long *b, int blen) nogil:
    cdef int i, m = alen if alen < blen else blen
    for i in range(m):
        if a[i] < b[i]:
            return -1
        if a[i] > b[i]:
            return 1
    if alen < blen:
        return -1
    if alen > blen:
        return 1
    return 0


def canonical_components(labels, out_off, out_nbr, out_aux, in_off, in_nbr, in_aux):
    cdef int n = len(labels)
    cdef int width = 3 * n + 2 * (len(out_nbr) + len(in_nbr)) + 1
    cdef long *lb = _copy(list(labels))
    cdef long *oo = _copy(list(out_off))
    cdef long *on = _copy(list(out_nbr))
    cdef long *oa = _copy(list(out_aux))
    cdef long *io = _copy(list(in_off))
    cdef long *inn = _copy(list(in_nbr))
    cdef long *ia = _copy(list(in_aux))
    cdef long *code = <long *>malloc(width * sizeof(long))
    cdef long *best = <long *>malloc(width * sizeof(long))
    cdef int *order = <int *>malloc((n + 1) * sizeof(int))
    cdef int *best_order = <int *>malloc((n + 1) * sizeof(int))
    cdef int *pos = <int *>malloc((n + 1) * sizeof(int))
    cdef char *seen = <char *>malloc(n + 1)
    cdef int start, root, i, clen, blen, size
    comps = []
    try:
        for i in range(n):
            seen[i] = 0
        for start in range(n):
            if seen[start]:
                continue
            blen = _traverse(n, lb, oo, on, oa, io, inn, ia, start, best, best_order, pos)
            size = 0
            for i in range(n):
                if pos[i] >= 0:
                    seen[i] = 1
                    size += 1
            # members in increasing index order; start is the smallest
            members = [i for i in range(n) if pos[i] >= 0]
            for root in members[1:]:
                clen = _traverse(n, lb, oo, on, oa, io, inn, ia, root, code, order, pos)
                if _cmp(code, clen, best, blen) < 0:
                    for i in range(clen):
                        best[i] = code[i]
                    for i in range(size):
                        best_order[i] = order[i]
                    blen = clen
            comps.append(([best[i] for i in range(blen)], [best_order[i] for i in range(size)]))
    finally:
        free(lb); free(oo); free(on); free(oa); free(io); free(inn); free(ia)
        free(code); free(best); free(order); free(best_order); free(pos); free(seen)
    comps.sort(key=lambda c: c[0])
    return comps


cdef int _esu(uint64_t *adj, uint64_t sub, uint64_t nbhd, uint64_t ext,
              uint64_t low_mask, list out, Py_ssize_t cap) except -1:
    cdef uint64_t w, fresh
    cdef int widx
    out.append(sub)
    if len(out) > cap:
        return 0
    while ext:
        w = ext & (~ext + 1)
        ext ^= w
        widx = 0
        while (w >> widx) != 1:
            widx += 1
        fresh = adj[widx] & ~(sub | nbhd) & ~low_mask
        if not _esu(adj, sub | w, nbhd | adj[widx], ext | fresh, low_mask, out, cap):
            return 0
    return 1


def connected_subsets(adjacency, cap):
    cdef int n = len(adjacency)
    cdef int v
    cdef uint64_t low_mask
    cdef uint64_t *adj
    if n > 63:
        from . import _pykernels
        return _pykernels.connected_subsets(adjacency, cap)
    adj = <uint64_t *>malloc((n + 1) * sizeof(uint64_t))
    out = []
    try:
        for v in range(n):
            adj[v] = adjacency[v]
        for v in range(n):
            low_mask = ((<uint64_t>1) << (v + 1)) - 1
            if not _esu(adj, (<uint64_t>1) << v, adj[v], adj[v] & ~low_mask, low_mask, out, cap):
                return None
    finally:
        free(adj)
    return [int(x) for x in out]
