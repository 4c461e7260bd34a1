"""Compiled CSR graph kernels (strong components and masked reachability)."""

import numpy as np
from numba import njit


@njit(cache=True)
def tarjan(indptr, indices, n):
    """Iterative Tarjan. Returns (label, count) with labels in finishing order.

    Finishing order is a reverse topological order of the condensation, so an
    edge between distinct components always points to a smaller label.
    """
    index = np.full(n, -1, np.int64)
    low = np.zeros(n, np.int64)
    onstack = np.zeros(n, np.bool_)
    stack = np.empty(n, np.int64)
    call_node = np.empty(n, np.int64)
    call_edge = np.empty(n, np.int64)
    label = np.full(n, -1, np.int64)
    sp = 0
    count = 0
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = counter
        low[root] = counter
        counter += 1
        stack[sp] = root
        sp += 1
        onstack[root] = True
        call_node[0] = root
        call_edge[0] = indptr[root]
        cp = 1
        while cp > 0:
            v = call_node[cp - 1]
            e = call_edge[cp - 1]
            if e < indptr[v + 1]:
                call_edge[cp - 1] = e + 1
                w = indices[e]
                if index[w] == -1:
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    stack[sp] = w
                    sp += 1
                    onstack[w] = True
                    call_node[cp] = w
                    call_edge[cp] = indptr[w]
                    cp += 1
                elif onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            else:
                if low[v] == index[v]:
                    while True:
                        sp -= 1
                        w = stack[sp]
                        onstack[w] = False
                        label[w] = count
                        if w == v:
                            break
                    count += 1
                cp -= 1
                if cp > 0:
                    u = call_node[cp - 1]
                    if low[v] < low[u]:
                        low[u] = low[v]
    return label, count


@njit(cache=True)
def reach(indptr, indices, seeds, allowed):
    """Nodes reachable from ``seeds`` (inclusive) through ``allowed`` nodes."""
    n = len(seeds)
    seen = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    qt = 0
    for v in range(n):
        if seeds[v] and allowed[v]:
            seen[v] = True
            queue[qt] = v
            qt += 1
    qh = 0
    while qh < qt:
        v = queue[qh]
        qh += 1
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if allowed[w] and not seen[w]:
                seen[w] = True
                queue[qt] = w
                qt += 1
    return seen


@njit(cache=True)
def shortest_path(indptr, indices, source, target, max_len):
    """BFS path of at least one edge from ``source`` to ``target``; empty if none."""
    n = len(indptr) - 1
    parent = np.full(n, -1, np.int64)
    depth = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    qh = 0
    qt = 0
    # the source is re-enterable so that closed walks are found
    for e in range(indptr[source], indptr[source + 1]):
        w = indices[e]
        if depth[w] == -1:
            depth[w] = 1
            parent[w] = source
            queue[qt] = w
            qt += 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        if v == target:
            break
        if depth[v] >= max_len:
            continue
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if depth[w] == -1:
                depth[w] = depth[v] + 1
                parent[w] = v
                queue[qt] = w
                qt += 1
    if depth[target] == -1:
        return np.empty(0, np.int64)
    L = depth[target]
    path = np.empty(L + 1, np.int64)
    v = target
    for i in range(L, 0, -1):
        path[i] = v
        v = parent[v]
    path[0] = source
    return path


@njit(cache=True)
def self_loops(indptr, indices):
    n = len(indptr) - 1
    out = np.zeros(n, np.bool_)
    for v in range(n):
        for e in range(indptr[v], indptr[v + 1]):
            if indices[e] == v:
                out[v] = True
                break
    return out


@njit(cache=True)
def longest_rank(indptr, indices, transient, order):
    """Longest-path rank inside ``transient``: 1 + max rank of transient successors.

    ``order`` lists transient nodes so that successors come first. The flag is
    false when an edge violates that order (a cycle inside ``transient``).
    """
    n = len(indptr) - 1
    rank = np.zeros(n, np.int64)
    for i in range(len(order)):
        v = order[i]
        r = 1
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if transient[w]:
                if rank[w] == 0:
                    return rank, False
                if rank[w] + 1 > r:
                    r = rank[w] + 1
        rank[v] = r
    return rank, True


@njit(cache=True)
def emit_edges(ilo, ihi, shape, circular, offset, extra):
    """Row-major successor lists for boxes whose covers span ``ilo..ihi``.

    ``ilo``/``ihi`` are inclusive per-axis index ranges (already clipped on
    non-circular axes, possibly out of range on circular ones). ``offset`` is
    added to every box id; ``extra[b] >= 0`` appends one more successor.
    Rows with ``ilo > ihi`` on some axis get no box successors.
    """
    nb, d = ilo.shape
    counts = np.zeros(nb, np.int64)
    lo = np.empty((nb, d), np.int64)
    span = np.empty((nb, d), np.int64)
    for b in range(nb):
        c = 1
        for k in range(d):
            a = ilo[b, k]
            z = ihi[b, k]
            if z < a:
                c = 0
                span[b, k] = 0
                lo[b, k] = 0
                continue
            if circular[k]:
                s = z - a + 1
                if s >= shape[k]:
                    a = 0
                    s = shape[k]
                lo[b, k] = a % shape[k]
                span[b, k] = s
            else:
                lo[b, k] = a
                span[b, k] = z - a + 1
            c *= span[b, k]
        counts[b] = c + (1 if extra[b] >= 0 else 0)
    indptr = np.zeros(nb + 1, np.int64)
    for b in range(nb):
        indptr[b + 1] = indptr[b] + counts[b]
    out = np.empty(indptr[nb], np.int64)
    strides = np.ones(d, np.int64)
    for k in range(d - 2, -1, -1):
        strides[k] = strides[k + 1] * shape[k + 1]
    cur = np.zeros(d, np.int64)
    for b in range(nb):
        pos = indptr[b]
        nbox = counts[b] - (1 if extra[b] >= 0 else 0)
        if nbox > 0:
            for k in range(d):
                cur[k] = 0
            for _ in range(nbox):
                flat = 0
                for k in range(d):
                    ik = lo[b, k] + cur[k]
                    if circular[k]:
                        ik %= shape[k]
                    flat += ik * strides[k]
                out[pos] = flat + offset
                pos += 1
                # odometer, last axis fastest
                k = d - 1
                while k >= 0:
                    cur[k] += 1
                    if cur[k] < span[b, k]:
                        break
                    cur[k] = 0
                    k -= 1
            out[indptr[b]:pos] = np.sort(out[indptr[b]:pos])
        if extra[b] >= 0:
            out[pos] = extra[b]
    return indptr, out


@njit(cache=True)
def topo_order_min_key(indptr, indices, key):
    """Kahn's algorithm on a DAG, always emitting the ready vertex of least key."""
    n = len(indptr) - 1
    indeg = np.zeros(n, np.int64)
    for e in range(len(indices)):
        indeg[indices[e]] += 1
    heap_k = np.empty(n, np.int64)
    heap_v = np.empty(n, np.int64)
    size = 0
    order = np.empty(n, np.int64)
    out = 0
    for v in range(n):
        if indeg[v] == 0:
            # push
            i = size
            size += 1
            heap_k[i] = key[v]
            heap_v[i] = v
            while i > 0:
                par = (i - 1) // 2
                if heap_k[par] <= heap_k[i]:
                    break
                heap_k[par], heap_k[i] = heap_k[i], heap_k[par]
                heap_v[par], heap_v[i] = heap_v[i], heap_v[par]
                i = par
    while size > 0:
        v = heap_v[0]
        order[out] = v
        out += 1
        size -= 1
        heap_k[0] = heap_k[size]
        heap_v[0] = heap_v[size]
        i = 0
        while True:
            l = 2 * i + 1
            r = l + 1
            s = i
            if l < size and heap_k[l] < heap_k[s]:
                s = l
            if r < size and heap_k[r] < heap_k[s]:
                s = r
            if s == i:
                break
            heap_k[s], heap_k[i] = heap_k[i], heap_k[s]
            heap_v[s], heap_v[i] = heap_v[i], heap_v[s]
            i = s
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            indeg[w] -= 1
            if indeg[w] == 0:
                i = size
                size += 1
                heap_k[i] = key[w]
                heap_v[i] = w
                while i > 0:
                    par = (i - 1) // 2
                    if heap_k[par] <= heap_k[i]:
                        break
                    heap_k[par], heap_k[i] = heap_k[i], heap_k[par]
                    heap_v[par], heap_v[i] = heap_v[i], heap_v[par]
                    i = par
    return order[:out]


@njit(cache=True)
def transpose_csr(indptr, indices, n):
    """Reverse graph in CSR form (predecessor lists sorted ascending)."""
    tptr = np.zeros(n + 1, np.int64)
    for e in range(len(indices)):
        tptr[indices[e] + 1] += 1
    for v in range(n):
        tptr[v + 1] += tptr[v]
    fill = tptr[:-1].copy()
    tind = np.empty(len(indices), indices.dtype)
    for v in range(n):
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            tind[fill[w]] = v
            fill[w] += 1
    return tptr, tind


@njit(cache=True)
def condense(indptr, indices, label, count):
    """Distinct edges between different labels, as a sorted CSR on labels."""
    n = len(indptr) - 1
    # group nodes by label
    start = np.zeros(count + 1, np.int64)
    for v in range(n):
        start[label[v] + 1] += 1
    for c in range(count):
        start[c + 1] += start[c]
    members = np.empty(n, np.int64)
    fill = start[:-1].copy()
    for v in range(n):
        members[fill[label[v]]] = v
        fill[label[v]] += 1
    mark = np.full(count, -1, np.int64)
    cptr = np.zeros(count + 1, np.int64)
    for c in range(count):
        k = 0
        for i in range(start[c], start[c + 1]):
            v = members[i]
            for e in range(indptr[v], indptr[v + 1]):
                b = label[indices[e]]
                if b != c and mark[b] != c:
                    mark[b] = c
                    k += 1
        cptr[c + 1] = cptr[c] + k
    cind = np.empty(cptr[count], np.int64)
    mark[:] = -1
    for c in range(count):
        pos = cptr[c]
        for i in range(start[c], start[c + 1]):
            v = members[i]
            for e in range(indptr[v], indptr[v + 1]):
                b = label[indices[e]]
                if b != c and mark[b] != c:
                    mark[b] = c
                    cind[pos] = b
                    pos += 1
        cind[cptr[c]:pos] = np.sort(cind[cptr[c]:pos])
    return cptr, cind


@njit(cache=True)
def leaves(indptr, indices, mask):
    """True when some edge goes from a ``mask`` node to a node outside ``mask``."""
    n = len(indptr) - 1
    for v in range(n):
        if mask[v]:
            for e in range(indptr[v], indptr[v + 1]):
                if not mask[indices[e]]:
                    return True
    return False


@njit(cache=True)
def pair_edge_scan(indptr, indices, scc, l, transient, state):
    """Accumulate per-edge Lyapunov bookkeeping for one pair function.

    ``state`` bits: 1 some l_n increases, 2 some l_n changes inside a
    component, 4 some l_n drops, 8 the source is transient for some pair and
    the edge joins different components.
    """
    n = len(indptr) - 1
    for v in range(n):
        lv = l[v]
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            lw = l[w]
            s = state[e]
            if lw > lv:
                s |= 1
            if lw < lv:
                s |= 4
            if scc[v] == scc[w]:
                if lw != lv:
                    s |= 2
            elif transient[v]:
                s |= 8
            state[e] = s


@njit(cache=True)
def count_increases(indptr, indices, L):
    n = len(indptr) - 1
    k = 0
    for v in range(n):
        for e in range(indptr[v], indptr[v + 1]):
            if L[indices[e]] > L[v]:
                k += 1
    return k


@njit(cache=True)
def cover_counts(ilo, ihi, shape, circular, extra):
    """Successor count per row as :func:`emit_edges` would produce it."""
    nb, d = ilo.shape
    counts = np.zeros(nb, np.int64)
    for b in range(nb):
        c = 1
        for k in range(d):
            s = ihi[b, k] - ilo[b, k] + 1
            if s <= 0:
                c = 0
                break
            if circular[k] and s > shape[k]:
                s = shape[k]
            c *= s
        counts[b] = c + (1 if extra[b] >= 0 else 0)
    return counts
