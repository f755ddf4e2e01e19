# cython: language_level=3
"""Compiled kernels: edge sampling, BFS on lattice boxes, connected sets.

Vertices of a box with side ``n`` in dimension ``d`` are linearized row-major
(last coordinate fastest). Nearest-neighbour edges (sup-norm distance 1) are
never stored; they are generated on the fly from the coordinates.

Every function here has a twin in ``_pycore.py`` with identical output.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, floor
from libc.stdlib cimport malloc, realloc, free
from libc.stdint cimport uint64_t, int64_t, uint8_t, int32_t

cnp.import_array()

DEF MAXD = 8

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV52 = 1.0 / 4503599627370496.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double to_unit(uint64_t bits) noexcept nogil:
    return (<double>(bits >> 12) + 0.5) * INV52


cdef struct EdgeBuf:
    int64_t* a
    int64_t* b
    uint8_t* f
    Py_ssize_t size
    Py_ssize_t cap


cdef int buf_init(EdgeBuf* buf, Py_ssize_t cap) except -1:
    if cap < 16:
        cap = 16
    buf.a = <int64_t*>malloc(cap * sizeof(int64_t))
    buf.b = <int64_t*>malloc(cap * sizeof(int64_t))
    buf.f = <uint8_t*>malloc(cap * sizeof(uint8_t))
    if buf.a == NULL or buf.b == NULL or buf.f == NULL:
        raise MemoryError()
    buf.size = 0
    buf.cap = cap
    return 0


cdef int buf_push(EdgeBuf* buf, int64_t a, int64_t b, uint8_t f) except -1:
    cdef Py_ssize_t cap
    if buf.size == buf.cap:
        cap = buf.cap * 2
        buf.a = <int64_t*>realloc(buf.a, cap * sizeof(int64_t))
        buf.b = <int64_t*>realloc(buf.b, cap * sizeof(int64_t))
        buf.f = <uint8_t*>realloc(buf.f, cap * sizeof(uint8_t))
        if buf.a == NULL or buf.b == NULL or buf.f == NULL:
            raise MemoryError()
        buf.cap = cap
    buf.a[buf.size] = a
    buf.b[buf.size] = b
    buf.f[buf.size] = f
    buf.size += 1
    return 0


cdef void buf_free(EdgeBuf* buf) noexcept:
    free(buf.a)
    free(buf.b)
    free(buf.f)


cdef tuple buf_export(EdgeBuf* buf, bint with_flags):
    cdef Py_ssize_t i
    a = np.empty(buf.size, dtype=np.int64)
    b = np.empty(buf.size, dtype=np.int64)
    cdef int64_t[::1] av = a
    cdef int64_t[::1] bv = b
    for i in range(buf.size):
        av[i] = buf.a[i]
        bv[i] = buf.b[i]
    if not with_flags:
        return a, b
    f = np.empty(buf.size, dtype=np.uint8)
    cdef uint8_t[::1] fv = f
    for i in range(buf.size):
        fv[i] = buf.f[i]
    return a, b, f


cdef inline void class_geometry(int n, int d, const int64_t[:, ::1] deltas, Py_ssize_t k,
                                int64_t* cnt, int64_t* lo, int64_t* total,
                                int64_t* shift) noexcept nogil:
    cdef int i
    cdef int64_t stride = 1
    total[0] = 1
    shift[0] = 0
    for i in range(d - 1, -1, -1):
        cnt[i] = n - (deltas[k, i] if deltas[k, i] >= 0 else -deltas[k, i])
        lo[i] = -deltas[k, i] if deltas[k, i] < 0 else 0
        if cnt[i] <= 0:
            total[0] = 0
        else:
            total[0] *= cnt[i]
        shift[0] += deltas[k, i] * stride
        stride *= n


cdef inline int64_t class_vertex(int n, int d, int64_t j, int64_t* cnt, int64_t* lo) noexcept nogil:
    cdef int i
    cdef int64_t lin = 0, stride = 1, q
    for i in range(d - 1, -1, -1):
        q = j % cnt[i]
        j = j // cnt[i]
        lin += (lo[i] + q) * stride
        stride *= n
    return lin


def sample_edges_skip(int n, int d, const int64_t[:, ::1] deltas, const double[::1] probs,
                      uint64_t word):
    """Bernoulli sweep over every pair ``(u, u + delta)`` via geometric skipping.

    Each delta class has a single probability, so open positions within the
    class are found by jumping ``floor(log U / log(1 - p))`` candidates.
    """
    if d > MAXD:
        raise ValueError("dimension too large")
    cdef Py_ssize_t K = deltas.shape[0], k
    cdef int64_t cnt[MAXD]
    cdef int64_t lo[MAXD]
    cdef int64_t total, shift, j, u
    cdef uint64_t counter = 0
    cdef double p, lq, s, expected = 0.0
    cdef EdgeBuf buf
    for k in range(K):
        class_geometry(n, d, deltas, k, cnt, lo, &total, &shift)
        expected += probs[k] * total
    buf_init(&buf, <Py_ssize_t>(expected * 1.25) + 64)
    try:
        for k in range(K):
            p = probs[k]
            if p <= 0.0:
                continue
            class_geometry(n, d, deltas, k, cnt, lo, &total, &shift)
            if total <= 0:
                continue
            if p >= 1.0:
                for j in range(total):
                    u = class_vertex(n, d, j, cnt, lo)
                    buf_push(&buf, u, u + shift, 1)
                continue
            lq = log1p(-p)
            j = -1
            while True:
                counter += 1
                s = floor(log(to_unit(mix64(word + counter * GOLDEN))) / lq)
                if <double>(j + 1) + s >= <double>total:
                    break
                j = j + 1 + <int64_t>s
                u = class_vertex(n, d, j, cnt, lo)
                buf_push(&buf, u, u + shift, 1)
        return buf_export(&buf, False)
    finally:
        buf_free(&buf)


def sample_edges_pairwise(int n, int d, const int64_t[::1] origin,
                          const int64_t[:, ::1] deltas, const double[:, ::1] probs,
                          uint64_t word):
    """One uniform per candidate pair, keyed by the pair's absolute coordinates.

    ``probs`` has one column per kernel (at most 8). Bit ``f`` of the returned
    flag is set iff the pair's uniform is below column ``f``. Pairs open under
    no kernel are dropped.
    """
    if d > MAXD:
        raise ValueError("dimension too large")
    cdef Py_ssize_t K = deltas.shape[0], F = probs.shape[1], k, f
    if F > 8:
        raise ValueError("at most 8 kernels")
    cdef int64_t cnt[MAXD]
    cdef int64_t lo[MAXD]
    cdef int64_t cu[MAXD]
    cdef int64_t total, shift, j, u, jj, q, i
    cdef uint64_t h
    cdef double x, pmax
    cdef uint8_t flag
    cdef EdgeBuf buf
    buf_init(&buf, 1024)
    try:
        for k in range(K):
            pmax = 0.0
            for f in range(F):
                if probs[k, f] > pmax:
                    pmax = probs[k, f]
            if pmax <= 0.0:
                continue
            class_geometry(n, d, deltas, k, cnt, lo, &total, &shift)
            for j in range(total):
                jj = j
                for i in range(d - 1, -1, -1):
                    q = jj % cnt[i]
                    jj = jj // cnt[i]
                    cu[i] = lo[i] + q
                h = mix64(word ^ 0x5851F42D4C957F2DULL)
                for i in range(d):
                    h = mix64(h ^ <uint64_t>(origin[i] + cu[i]))
                h = mix64(h ^ 0x14057B7EF767814FULL)
                for i in range(d):
                    h = mix64(h ^ <uint64_t>(origin[i] + cu[i] + deltas[k, i]))
                x = to_unit(mix64(h + GOLDEN))
                flag = 0
                for f in range(F):
                    if x < probs[k, f]:
                        flag |= <uint8_t>(1 << f)
                if flag:
                    u = class_vertex(n, d, j, cnt, lo)
                    buf_push(&buf, u, u + shift, flag)
        return buf_export(&buf, True)
    finally:
        buf_free(&buf)


def build_csr(Py_ssize_t nv, const int64_t[::1] a, const int64_t[::1] b):
    """Symmetric CSR adjacency from an undirected edge list (counting sort)."""
    cdef Py_ssize_t m = a.shape[0], i, x
    indptr = np.zeros(nv + 1, dtype=np.int64)
    indices = np.empty(2 * m, dtype=np.int64)
    cdef int64_t[::1] ip = indptr
    cdef int64_t[::1] ix = indices
    cdef int64_t[::1] fill
    for i in range(m):
        ip[a[i] + 1] += 1
        ip[b[i] + 1] += 1
    for x in range(nv):
        ip[x + 1] += ip[x]
    fill = indptr[:nv].copy()
    for i in range(m):
        ix[fill[a[i]]] = b[i]
        fill[a[i]] += 1
        ix[fill[b[i]]] = a[i]
        fill[b[i]] += 1
    return indptr, indices


cdef inline int decode(int n, int d, int64_t x, int64_t* c) noexcept nogil:
    cdef int i
    for i in range(d - 1, -1, -1):
        c[i] = x % n
        x = x // n
    return 0


cdef int make_offsets(int d, int n, int64_t* offs, int64_t* lin) noexcept nogil:
    """Fill the 3^d - 1 nonzero sup-norm unit offsets; returns their count."""
    cdef int m = 1, i, t, r, count = 0, nonzero
    cdef int64_t stride
    for i in range(d):
        m *= 3
    for t in range(m):
        r = t
        stride = 1
        nonzero = 0
        lin[count] = 0
        for i in range(d - 1, -1, -1):
            offs[count * d + i] = (r % 3) - 1
            if offs[count * d + i] != 0:
                nonzero = 1
            lin[count] += offs[count * d + i] * stride
            stride *= n
            r = r // 3
        if nonzero:
            count += 1
    return count


cdef class _Lattice:
    cdef int n, d, noff
    cdef int64_t nv
    cdef int64_t* offs
    cdef int64_t* olin

    def __cinit__(self, int n, int d):
        cdef int m = 1, i
        for i in range(d):
            m *= 3
        self.n = n
        self.d = d
        self.nv = 1
        for i in range(d):
            self.nv *= n
        self.offs = <int64_t*>malloc(m * d * sizeof(int64_t))
        self.olin = <int64_t*>malloc(m * sizeof(int64_t))
        self.noff = make_offsets(d, n, self.offs, self.olin)

    def __dealloc__(self):
        free(self.offs)
        free(self.olin)


cdef inline int neighbor(_Lattice L, int64_t* c, int t, int64_t x, int64_t* y) noexcept nogil:
    cdef int i
    cdef int64_t z
    for i in range(L.d):
        z = c[i] + L.offs[t * L.d + i]
        if z < 0 or z >= L.n:
            return 0
    y[0] = x + L.olin[t]
    return 1


cdef Py_ssize_t _bfs(_Lattice L, const int64_t[::1] indptr, const int64_t[::1] indices,
                     int64_t* sources, Py_ssize_t ns, const uint8_t* allowed,
                     const uint8_t* labels, int32_t* dist, int64_t* queue) noexcept nogil:
    """Multi-source BFS; returns the number of vertices reached."""
    cdef Py_ssize_t head = 0, tail = 0, i
    cdef int64_t x, y, e
    cdef int64_t c[MAXD]
    cdef int t
    cdef int32_t dx
    for i in range(L.nv):
        dist[i] = -1
    for i in range(ns):
        x = sources[i]
        if dist[x] < 0:
            dist[x] = 0
            queue[tail] = x
            tail += 1
    while head < tail:
        x = queue[head]
        head += 1
        dx = dist[x] + 1
        decode(L.n, L.d, x, c)
        for t in range(L.noff):
            if neighbor(L, c, t, x, &y) == 0:
                continue
            if dist[y] >= 0:
                continue
            if allowed != NULL and allowed[y] == 0:
                continue
            if labels != NULL and labels[x] != 0 and labels[y] != 0 and labels[x] != labels[y]:
                continue
            dist[y] = dx
            queue[tail] = y
            tail += 1
        for e in range(indptr[x], indptr[x + 1]):
            y = indices[e]
            if dist[y] >= 0:
                continue
            if allowed != NULL and allowed[y] == 0:
                continue
            if labels != NULL and labels[x] != 0 and labels[y] != 0 and labels[x] != labels[y]:
                continue
            dist[y] = dx
            queue[tail] = y
            tail += 1
    return tail


def bfs(int n, int d, const int64_t[::1] indptr, const int64_t[::1] indices,
        const int64_t[::1] sources, allowed=None, labels=None):
    """Hop distances from a source set; -1 marks unreachable vertices.

    ``allowed`` (uint8 per vertex) confines the search to a vertex subset.
    ``labels`` (uint8 per vertex, 0/1/2) removes every edge joining a
    label-1 vertex to a label-2 vertex.
    """
    cdef _Lattice L = _Lattice(n, d)
    dist = np.empty(L.nv, dtype=np.int32)
    queue = np.empty(L.nv, dtype=np.int64)
    cdef int32_t[::1] dv = dist
    cdef int64_t[::1] qv = queue
    cdef int64_t[::1] sv = np.ascontiguousarray(sources, dtype=np.int64)
    cdef const uint8_t[::1] av
    cdef const uint8_t[::1] lv
    cdef const uint8_t* ap = NULL
    cdef const uint8_t* lp = NULL
    cdef int64_t* sp = NULL
    if sv.shape[0] > 0:
        sp = &sv[0]
    if allowed is not None:
        av = allowed
        ap = &av[0]
    if labels is not None:
        lv = labels
        lp = &lv[0]
    with nogil:
        _bfs(L, indptr, indices, sp, sv.shape[0],
             ap, lp, &dv[0], &qv[0])
    return dist


def eccentricities(int n, int d, const int64_t[::1] indptr, const int64_t[::1] indices,
                   const int64_t[::1] starts):
    """Eccentricity (max hop distance) of each start vertex; -1 if disconnected."""
    cdef _Lattice L = _Lattice(n, d)
    dist = np.empty(L.nv, dtype=np.int32)
    queue = np.empty(L.nv, dtype=np.int64)
    out = np.empty(starts.shape[0], dtype=np.int64)
    cdef int32_t[::1] dv = dist
    cdef int64_t[::1] qv = queue
    cdef int64_t[::1] ov = out
    cdef int64_t src[1]
    cdef Py_ssize_t i, reached
    cdef int64_t x
    with nogil:
        for i in range(starts.shape[0]):
            src[0] = starts[i]
            reached = _bfs(L, indptr, indices, src, 1, NULL, NULL, &dv[0], &qv[0])
            if reached < L.nv:
                ov[i] = -1
            else:
                ov[i] = dv[qv[reached - 1]]
    return out


def diameter_exact(int n, int d, const int64_t[::1] indptr, const int64_t[::1] indices):
    cdef _Lattice L = _Lattice(n, d)
    dist = np.empty(L.nv, dtype=np.int32)
    queue = np.empty(L.nv, dtype=np.int64)
    cdef int32_t[::1] dv = dist
    cdef int64_t[::1] qv = queue
    cdef int64_t src[1]
    cdef Py_ssize_t reached
    cdef int64_t x, best = 0
    with nogil:
        for x in range(L.nv):
            src[0] = x
            reached = _bfs(L, indptr, indices, src, 1, NULL, NULL, &dv[0], &qv[0])
            if dv[qv[reached - 1]] > best:
                best = dv[qv[reached - 1]]
    return best


def degrees(int n, int d, const int64_t[::1] indptr):
    """Total degree of every vertex (implicit lattice neighbours + long edges)."""
    cdef _Lattice L = _Lattice(n, d)
    out = np.empty(L.nv, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef int64_t x, y
    cdef int64_t c[MAXD]
    cdef int t, k
    for x in range(L.nv):
        decode(n, d, x, c)
        k = 0
        for t in range(L.noff):
            k += neighbor(L, c, t, x, &y)
        ov[x] = k + indptr[x + 1] - indptr[x]
    return out


cdef struct SetWalk:
    int64_t* ext
    uint8_t* mark
    int64_t* counts
    int64_t* best
    const int64_t* deg
    int kmax


cdef void _grow(_Lattice L, const int64_t[::1] indptr, const int64_t[::1] indices,
                SetWalk* W, int size, Py_ssize_t start, Py_ssize_t length,
                int64_t degsum) noexcept nogil:
    cdef Py_ssize_t i, top, nlen, r
    cdef int64_t w, y, e, s
    cdef int64_t c[MAXD]
    cdef int t
    for i in range(length):
        w = W.ext[start + i]
        s = degsum + W.deg[w]
        W.counts[size + 1] += 1
        if s > W.best[size + 1]:
            W.best[size + 1] = s
        if size + 1 >= W.kmax:
            continue
        top = start + length
        nlen = 0
        for r in range(i + 1, length):
            W.ext[top + nlen] = W.ext[start + r]
            nlen += 1
        decode(L.n, L.d, w, c)
        for t in range(L.noff):
            if neighbor(L, c, t, w, &y) and W.mark[y] == 0:
                W.mark[y] = 1
                W.ext[top + nlen] = y
                nlen += 1
        for e in range(indptr[w], indptr[w + 1]):
            y = indices[e]
            if W.mark[y] == 0:
                W.mark[y] = 1
                W.ext[top + nlen] = y
                nlen += 1
        _grow(L, indptr, indices, W, size + 1, top, nlen, s)
        for r in range(length - i - 1, nlen):
            W.mark[W.ext[top + r]] = 0


def connected_sets(int n, int d, const int64_t[::1] indptr, const int64_t[::1] indices,
                   const int64_t[::1] deg, int64_t root, int kmax):
    """Count connected vertex sets containing ``root`` by size, 1..kmax.

    Returns ``(counts, best)`` where ``best[k]`` is the largest degree sum over
    the sets of size ``k``. Each set is generated exactly once: a branch that
    skips an extension vertex never adds it back.
    """
    cdef _Lattice L = _Lattice(n, d)
    cdef int64_t maxdeg = 0, x
    for x in range(L.nv):
        if deg[x] > maxdeg:
            maxdeg = deg[x]
    cdef Py_ssize_t cap = (kmax + 1) * (kmax + 1) * (maxdeg + 1) + 16
    counts = np.zeros(kmax + 1, dtype=np.int64)
    best = np.zeros(kmax + 1, dtype=np.int64)
    ext = np.empty(cap, dtype=np.int64)
    mark = np.zeros(L.nv, dtype=np.uint8)
    cdef int64_t[::1] cv = counts
    cdef int64_t[::1] bv = best
    cdef int64_t[::1] ev = ext
    cdef uint8_t[::1] mv = mark
    cdef SetWalk W
    W.ext = &ev[0]
    W.mark = &mv[0]
    W.counts = &cv[0]
    W.best = &bv[0]
    W.deg = &deg[0]
    W.kmax = kmax
    cdef int64_t c[MAXD]
    cdef int64_t y, e
    cdef int t
    cdef Py_ssize_t nlen = 0
    cv[1] = 1
    bv[1] = deg[root]
    if kmax <= 1:
        return counts, best
    mv[root] = 1
    decode(n, d, root, c)
    for t in range(L.noff):
        if neighbor(L, c, t, root, &y) and mv[y] == 0:
            mv[y] = 1
            ev[nlen] = y
            nlen += 1
    for e in range(indptr[root], indptr[root + 1]):
        y = indices[e]
        if mv[y] == 0:
            mv[y] = 1
            ev[nlen] = y
            nlen += 1
    with nogil:
        _grow(L, indptr, indices, &W, 1, 0, nlen, deg[root])
    return counts, best


cdef int _sample_skip_into(int n, int d, const int64_t[:, ::1] deltas, const double[::1] probs,
                           uint64_t word, EdgeBuf* buf) except -1:
    cdef Py_ssize_t K = deltas.shape[0], k
    cdef int64_t cnt[MAXD]
    cdef int64_t lo[MAXD]
    cdef int64_t total, shift, j, u
    cdef uint64_t counter = 0
    cdef double p, lq, s
    buf.size = 0
    for k in range(K):
        p = probs[k]
        if p <= 0.0:
            continue
        class_geometry(n, d, deltas, k, cnt, lo, &total, &shift)
        if total <= 0:
            continue
        if p >= 1.0:
            for j in range(total):
                u = class_vertex(n, d, j, cnt, lo)
                buf_push(buf, u, u + shift, 1)
            continue
        lq = log1p(-p)
        j = -1
        while True:
            counter += 1
            s = floor(log(to_unit(mix64(word + counter * GOLDEN))) / lq)
            if <double>(j + 1) + s >= <double>total:
                break
            j = j + 1 + <int64_t>s
            u = class_vertex(n, d, j, cnt, lo)
            buf_push(buf, u, u + shift, 1)
    return 0


cdef void _csr_fill(int64_t nv, EdgeBuf* buf, int64_t[::1] ip, int64_t[::1] ix,
                    int64_t[::1] fill) noexcept:
    cdef Py_ssize_t i
    cdef int64_t x
    for x in range(nv + 1):
        ip[x] = 0
    for i in range(buf.size):
        ip[buf.a[i] + 1] += 1
        ip[buf.b[i] + 1] += 1
    for x in range(nv):
        ip[x + 1] += ip[x]
        fill[x] = ip[x]
    for i in range(buf.size):
        ix[fill[buf.a[i]]] = buf.b[i]
        fill[buf.a[i]] += 1
        ix[fill[buf.b[i]]] = buf.a[i]
        fill[buf.b[i]] += 1


def replicate_bfs(int n, int d, const int64_t[:, ::1] deltas, const double[::1] probs,
                  const uint64_t[::1] words, const int64_t[::1] sources,
                  const int64_t[::1] targets, labels=None, bint reduce_min=False):
    """Sample one configuration per stream word and run a BFS on each.

    Equivalent to ``sample_edges_skip`` + ``build_csr`` + ``bfs`` per word.
    Returns ``int32[R, T]`` distances at ``targets``, or ``int32[R]`` holding
    the minimum reachable target distance (-1 if none) when ``reduce_min``.
    """
    if d > MAXD:
        raise ValueError("dimension too large")
    cdef _Lattice L = _Lattice(n, d)
    cdef Py_ssize_t R = words.shape[0], T = targets.shape[0], r, t
    cdef EdgeBuf buf
    cdef int32_t best, v
    indptr = np.empty(L.nv + 1, dtype=np.int64)
    fill = np.empty(L.nv + 1, dtype=np.int64)
    indices = np.empty(64, dtype=np.int64)
    dist = np.empty(L.nv, dtype=np.int32)
    queue = np.empty(L.nv, dtype=np.int64)
    cdef int32_t[::1] dv = dist
    cdef int64_t[::1] qv = queue
    cdef int64_t[::1] ipv = indptr
    cdef int64_t[::1] fv = fill
    cdef int64_t[::1] ixv = indices
    cdef int64_t[::1] sv = np.ascontiguousarray(sources, dtype=np.int64)
    cdef const uint8_t[::1] lv
    cdef const uint8_t* lp = NULL
    if labels is not None:
        lv = labels
        lp = &lv[0]
    if reduce_min:
        out = np.empty(R, dtype=np.int32)
    else:
        out = np.empty((R, T), dtype=np.int32)
    cdef int32_t[::1] o1
    cdef int32_t[:, ::1] o2
    if reduce_min:
        o1 = out
    else:
        o2 = out
    buf_init(&buf, 1024)
    try:
        for r in range(R):
            _sample_skip_into(n, d, deltas, probs, words[r], &buf)
            if ixv.shape[0] < 2 * buf.size + 1:
                indices = np.empty(4 * buf.size + 64, dtype=np.int64)
                ixv = indices
            _csr_fill(L.nv, &buf, ipv, ixv, fv)
            _bfs(L, ipv, ixv, &sv[0], sv.shape[0], NULL, lp, &dv[0], &qv[0])
            if reduce_min:
                best = -1
                for t in range(T):
                    v = dv[targets[t]]
                    if v >= 0 and (best < 0 or v < best):
                        best = v
                o1[r] = best
            else:
                for t in range(T):
                    o2[r, t] = dv[targets[t]]
        return out
    finally:
        buf_free(&buf)


def replicate_diameter(int n, int d, const int64_t[:, ::1] deltas, const double[::1] probs,
                       const uint64_t[::1] words):
    """Exact diameter of one sampled configuration per stream word."""
    cdef _Lattice L = _Lattice(n, d)
    cdef Py_ssize_t R = words.shape[0], r, reached
    cdef EdgeBuf buf
    cdef int64_t x, best
    cdef int64_t src[1]
    indptr = np.empty(L.nv + 1, dtype=np.int64)
    fill = np.empty(L.nv + 1, dtype=np.int64)
    indices = np.empty(64, dtype=np.int64)
    dist = np.empty(L.nv, dtype=np.int32)
    queue = np.empty(L.nv, dtype=np.int64)
    out = np.empty(R, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef int32_t[::1] dv = dist
    cdef int64_t[::1] qv = queue
    cdef int64_t[::1] ipv = indptr
    cdef int64_t[::1] fv = fill
    cdef int64_t[::1] ixv = indices
    buf_init(&buf, 1024)
    try:
        for r in range(R):
            _sample_skip_into(n, d, deltas, probs, words[r], &buf)
            if ixv.shape[0] < 2 * buf.size + 1:
                indices = np.empty(4 * buf.size + 64, dtype=np.int64)
                ixv = indices
            _csr_fill(L.nv, &buf, ipv, ixv, fv)
            best = 0
            with nogil:
                for x in range(L.nv):
                    src[0] = x
                    reached = _bfs(L, ipv, ixv, src, 1, NULL, NULL, &dv[0], &qv[0])
                    if dv[qv[reached - 1]] > best:
                        best = dv[qv[reached - 1]]
            ov[r] = best
        return out
    finally:
        buf_free(&buf)
