"""Pure-Python implementation of the kernels in ``_core.pyx``.

Used when the extension is not built, or when ``LRPERC_PURE=1``. Outputs are
bit-identical to the compiled versions; only speed differs.
"""
from __future__ import annotations

import math
from collections import deque

import numpy as np

from .rng import GOLDEN, MASK64, bits_to_uniform, mix64


def _offsets(n: int, d: int):
    offs = []
    for t in range(3**d):
        r, o = t, [0] * d
        for i in range(d - 1, -1, -1):
            o[i] = (r % 3) - 1
            r //= 3
        if any(o):
            lin = 0
            stride = 1
            for i in range(d - 1, -1, -1):
                lin += o[i] * stride
                stride *= n
            offs.append((tuple(o), lin))
    return offs


def _decode(n: int, d: int, x: int):
    c = [0] * d
    for i in range(d - 1, -1, -1):
        c[i] = x % n
        x //= n
    return c


def _class_geometry(n, d, delta):
    cnt = [n - abs(int(v)) for v in delta]
    lo = [-int(v) if v < 0 else 0 for v in delta]
    total = 1
    for c in cnt:
        total = total * c if c > 0 else 0
    shift = 0
    stride = 1
    for i in range(d - 1, -1, -1):
        shift += int(delta[i]) * stride
        stride *= n
    return cnt, lo, total, shift


def _class_vertex(n, d, j, cnt, lo):
    lin, stride = 0, 1
    for i in range(d - 1, -1, -1):
        q = j % cnt[i]
        j //= cnt[i]
        lin += (lo[i] + q) * stride
        stride *= n
    return lin


def sample_edges_skip(n, d, deltas, probs, word):
    a, b = [], []
    counter = 0
    for k in range(deltas.shape[0]):
        p = float(probs[k])
        if p <= 0.0:
            continue
        cnt, lo, total, shift = _class_geometry(n, d, deltas[k])
        if total <= 0:
            continue
        if p >= 1.0:
            for j in range(total):
                u = _class_vertex(n, d, j, cnt, lo)
                a.append(u)
                b.append(u + shift)
            continue
        lq = math.log1p(-p)
        j = -1
        while True:
            counter += 1
            s = math.floor(math.log(bits_to_uniform(mix64(word + counter * GOLDEN))) / lq)
            if float(j + 1) + s >= float(total):
                break
            j = j + 1 + int(s)
            u = _class_vertex(n, d, j, cnt, lo)
            a.append(u)
            b.append(u + shift)
    return np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)


def sample_edges_pairwise(n, d, origin, deltas, probs, word):
    F = probs.shape[1]
    if F > 8:
        raise ValueError("at most 8 kernels")
    a, b, flags = [], [], []
    origin = [int(o) for o in origin]
    for k in range(deltas.shape[0]):
        row = [float(x) for x in probs[k]]
        if max(row) <= 0.0:
            continue
        delta = [int(v) for v in deltas[k]]
        cnt, lo, total, shift = _class_geometry(n, d, delta)
        for j in range(total):
            jj, cu = j, [0] * d
            for i in range(d - 1, -1, -1):
                cu[i] = lo[i] + jj % cnt[i]
                jj //= cnt[i]
            h = mix64(word ^ 0x5851F42D4C957F2D)
            for i in range(d):
                h = mix64(h ^ ((origin[i] + cu[i]) & MASK64))
            h = mix64(h ^ 0x14057B7EF767814F)
            for i in range(d):
                h = mix64(h ^ ((origin[i] + cu[i] + delta[i]) & MASK64))
            x = bits_to_uniform(mix64(h + GOLDEN))
            flag = 0
            for f in range(F):
                if x < row[f]:
                    flag |= 1 << f
            if flag:
                u = _class_vertex(n, d, j, cnt, lo)
                a.append(u)
                b.append(u + shift)
                flags.append(flag)
    return (
        np.asarray(a, dtype=np.int64),
        np.asarray(b, dtype=np.int64),
        np.asarray(flags, dtype=np.uint8),
    )


def build_csr(nv, a, b):
    m = len(a)
    indptr = np.zeros(nv + 1, dtype=np.int64)
    np.add.at(indptr, np.asarray(a, dtype=np.int64) + 1, 1)
    np.add.at(indptr, np.asarray(b, dtype=np.int64) + 1, 1)
    np.cumsum(indptr, out=indptr)
    indices = np.empty(2 * m, dtype=np.int64)
    fill = indptr[:nv].copy()
    for i in range(m):
        x, y = int(a[i]), int(b[i])
        indices[fill[x]] = y
        fill[x] += 1
        indices[fill[y]] = x
        fill[y] += 1
    return indptr, indices


def _neighbors(n, d, offs, indptr, indices, x):
    c = _decode(n, d, x)
    for o, lin in offs:
        if all(0 <= c[i] + o[i] < n for i in range(d)):
            yield x + lin
    for e in range(indptr[x], indptr[x + 1]):
        yield int(indices[e])


def _bfs(n, d, offs, indptr, indices, sources, allowed, labels):
    nv = n**d
    dist = np.full(nv, -1, dtype=np.int32)
    order = []
    queue = deque()
    for s in sources:
        s = int(s)
        if dist[s] < 0:
            dist[s] = 0
            queue.append(s)
    while queue:
        x = queue.popleft()
        order.append(x)
        dx = dist[x] + 1
        for y in _neighbors(n, d, offs, indptr, indices, x):
            if dist[y] >= 0:
                continue
            if allowed is not None and not allowed[y]:
                continue
            if labels is not None and labels[x] and labels[y] and labels[x] != labels[y]:
                continue
            dist[y] = dx
            queue.append(y)
    return dist, order


def bfs(n, d, indptr, indices, sources, allowed=None, labels=None):
    dist, _ = _bfs(n, d, _offsets(n, d), indptr, indices, sources, allowed, labels)
    return dist


def eccentricities(n, d, indptr, indices, starts):
    offs = _offsets(n, d)
    nv = n**d
    out = np.empty(len(starts), dtype=np.int64)
    for i, s in enumerate(starts):
        dist, order = _bfs(n, d, offs, indptr, indices, [s], None, None)
        out[i] = -1 if len(order) < nv else int(dist[order[-1]])
    return out


def diameter_exact(n, d, indptr, indices):
    ecc = eccentricities(n, d, indptr, indices, np.arange(n**d, dtype=np.int64))
    return int(ecc.max()) if len(ecc) else 0


def degrees(n, d, indptr):
    offs = _offsets(n, d)
    out = np.empty(n**d, dtype=np.int64)
    for x in range(n**d):
        c = _decode(n, d, x)
        k = sum(1 for o, _ in offs if all(0 <= c[i] + o[i] < n for i in range(d)))
        out[x] = k + indptr[x + 1] - indptr[x]
    return out


def connected_sets(n, d, indptr, indices, deg, root, kmax):
    offs = _offsets(n, d)
    counts = np.zeros(kmax + 1, dtype=np.int64)
    best = np.zeros(kmax + 1, dtype=np.int64)
    counts[1] = 1
    best[1] = deg[root]
    if kmax <= 1:
        return counts, best
    mark = {int(root)}
    ext = []
    for y in _neighbors(n, d, offs, indptr, indices, int(root)):
        if y not in mark:
            mark.add(y)
            ext.append(y)

    def grow(size, ext, degsum):
        for i, w in enumerate(ext):
            s = degsum + int(deg[w])
            counts[size + 1] += 1
            best[size + 1] = max(best[size + 1], s)
            if size + 1 >= kmax:
                continue
            new = list(ext[i + 1:])
            added = []
            for y in _neighbors(n, d, offs, indptr, indices, w):
                if y not in mark:
                    mark.add(y)
                    new.append(y)
                    added.append(y)
            grow(size + 1, new, s)
            mark.difference_update(added)

    grow(1, ext, int(deg[root]))
    return counts, best




def replicate_bfs(n, d, deltas, probs, words, sources, targets, labels=None, reduce_min=False):
    targets = np.asarray(targets, dtype=np.int64)
    rows = []
    for w in words:
        a, b = sample_edges_skip(n, d, deltas, probs, int(w))
        indptr, indices = build_csr(n**d, a, b)
        dist = bfs(n, d, indptr, indices, sources, None, labels)[targets]
        if reduce_min:
            hit = dist[dist >= 0]
            rows.append(int(hit.min()) if len(hit) else -1)
        else:
            rows.append(dist)
    if reduce_min:
        return np.asarray(rows, dtype=np.int32)
    return np.asarray(rows, dtype=np.int32).reshape(len(rows), len(targets))


def replicate_diameter(n, d, deltas, probs, words):
    out = np.empty(len(words), dtype=np.int64)
    for r, w in enumerate(words):
        a, b = sample_edges_skip(n, d, deltas, probs, int(w))
        indptr, indices = build_csr(n**d, a, b)
        out[r] = diameter_exact(n, d, indptr, indices)
    return out


__all__ = [
    "sample_edges_skip",
    "sample_edges_pairwise",
    "build_csr",
    "bfs",
    "eccentricities",
    "diameter_exact",
    "degrees",
    "connected_sets",
    "replicate_bfs",
    "replicate_diameter",
]
