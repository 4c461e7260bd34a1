"""Chain recurrence, attractor-repeller pairs and chain queries on a digraph.

Combinatorial dictionary used throughout:

* chain recurrent set: union of cyclic strong components (size > 1 or a
  self-loop);
* attractor: forward-invariant node set, generated as a forward closure;
* basin of ``A``: nodes from which every infinite walk enters ``A``;
* repeller: nodes outside the basin that lie on bi-infinite walks avoiding it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from . import base as _base
from .digraph import Digraph
from .errors import NotForwardInvariant, NotFound
from .grid import build_grid
from .systems import CocycleSystem, evolve, integrate


@dataclass(frozen=True)
class MorseDecomposition:
    """Strong components numbered so that every inter-component edge increases the id.

    Component ids therefore already are a topological order of the
    condensation; ``topo_order`` is kept as an explicit array anyway.
    """

    scc_id: np.ndarray
    n_scc: int
    cyclic: np.ndarray
    sizes: np.ndarray
    condensation: Digraph
    topo_order: np.ndarray

    @property
    def recurrent(self) -> np.ndarray:
        """Per-node chain recurrence mask."""
        return self.cyclic[self.scc_id]

    @property
    def cyclic_ids(self) -> np.ndarray:
        return np.nonzero(self.cyclic)[0]

    def members(self, scc: int) -> np.ndarray:
        return np.nonzero(self.scc_id == scc)[0]


def morse(graph: Digraph) -> MorseDecomposition:
    """Strong components, cyclic flags and the condensation DAG.

    Components are numbered in topological order, breaking ties by the
    smallest node they contain, so labels depend only on the graph.
    """
    n = graph.n_nodes
    label, count = _kernels.tarjan(graph.indptr, graph.indices, n)
    first = np.full(count, n, dtype=np.int64)
    np.minimum.at(first, label, np.arange(n, dtype=np.int64))
    rptr, rind = _kernels.condense(graph.indptr, graph.indices, label, count)
    order = _kernels.topo_order_min_key(rptr, rind, first)
    relabel = np.empty(count, dtype=np.int64)
    relabel[order] = np.arange(count, dtype=np.int64)
    scc = relabel[label]
    sizes = np.bincount(scc, minlength=count)
    loops = _kernels.self_loops(graph.indptr, graph.indices)
    cyclic = sizes > 1
    cyclic[scc[loops]] = True
    cptr, cind = _kernels.condense(graph.indptr, graph.indices, scc, count)
    cond = Digraph(cptr, cind)
    return MorseDecomposition(scc, int(count), cyclic, sizes, cond, np.arange(count, dtype=np.int64))


def _mask(graph: Digraph, nodes) -> np.ndarray:
    nodes = np.asarray(nodes)
    if nodes.dtype == bool and nodes.shape == (graph.n_nodes,):
        return nodes.copy()
    m = np.zeros(graph.n_nodes, dtype=bool)
    m[np.asarray(nodes, dtype=np.int64)] = True
    return m


def forward_closure(graph: Digraph, nodes) -> np.ndarray:
    seeds = _mask(graph, nodes)
    return _kernels.reach(graph.indptr, graph.indices, seeds, np.ones(graph.n_nodes, dtype=bool))


def backward_closure(graph: Digraph, nodes, allowed=None) -> np.ndarray:
    tptr, tind = graph.transpose()
    allowed = np.ones(graph.n_nodes, dtype=bool) if allowed is None else allowed
    return _kernels.reach(tptr, tind, _mask(graph, nodes), allowed)


def attractor_from_seed(graph: Digraph, md: MorseDecomposition, seed: int) -> np.ndarray:
    """Smallest forward-invariant set containing strong component ``seed``."""
    if not 0 <= seed < md.n_scc:
        raise ValueError(f"no strong component {seed}")
    return forward_closure(graph, md.scc_id == seed)


def omega_attractor(graph: Digraph, md: MorseDecomposition, nodes) -> np.ndarray:
    """Forward closure of the cyclic components reachable from ``nodes``.

    This is the set of all possible end points of long walks started in
    ``nodes``; it is empty when no cycle is reachable.
    """
    reach = forward_closure(graph, nodes)
    return forward_closure(graph, reach & md.recurrent)


def is_forward_invariant(graph: Digraph, nodes) -> bool:
    return not _kernels.leaves(graph.indptr, graph.indices, _mask(graph, nodes))


def basin(graph: Digraph, md: MorseDecomposition, A) -> np.ndarray:
    """Nodes from which no walk avoids ``A`` forever.

    Complement of the set of nodes that reach a cyclic component inside the
    subgraph with ``A`` removed. Cyclic components of that subgraph are the
    cyclic components of the full graph disjoint from ``A`` (``A`` is forward
    invariant, so no component straddles it).
    """
    A = _mask(graph, A)
    if not is_forward_invariant(graph, A):
        raise NotForwardInvariant("basin needs a forward-invariant attractor")
    escape = backward_closure(graph, md.recurrent & ~A, allowed=~A)
    return ~escape


def repeller(graph: Digraph, md: MorseDecomposition, A, B) -> tuple[np.ndarray, np.ndarray]:
    """``(R, X \\ B)``: the invariant core of the basin complement and the complement itself."""
    A = _mask(graph, A)
    coarse = ~_mask(graph, B)
    R = _kernels.reach(graph.indptr, graph.indices, md.recurrent & coarse, coarse)
    R &= backward_closure(graph, md.recurrent & coarse, allowed=coarse)
    return R, coarse


@dataclass(frozen=True)
class AttractorRepellerPair:
    A: np.ndarray
    B: np.ndarray
    R: np.ndarray
    R_coarse: np.ndarray
    origin: tuple[str, int]

    @property
    def transient(self) -> np.ndarray:
        return self.B & ~self.A


def make_pair(graph: Digraph, md: MorseDecomposition, A, origin=("set", -1)) -> AttractorRepellerPair:
    A = _mask(graph, A)
    B = basin(graph, md, A)
    R, coarse = repeller(graph, md, A, B)
    return AttractorRepellerPair(A, B, R, coarse, origin)


def enumerate_pairs(graph: Digraph, md: MorseDecomposition, cover: bool = True) -> list[AttractorRepellerPair]:
    """Canonical family of attractor-repeller pairs.

    First one pair per cyclic component, seeded by its forward closure, in
    topological order of the seed. With ``cover`` set, further pairs are
    appended until every transient node lies in some ``B \\ A``: for the
    smallest uncovered node ``v`` the attractor is the forward closure of the
    cycles reachable from ``v`` (every walk from ``v`` ends there, and ``v``
    itself is outside it). Pairs with an already seen attractor are dropped.
    """
    pairs: list[AttractorRepellerPair] = []
    seen: set[bytes] = set()

    def add(A, origin):
        key = np.packbits(A).tobytes()
        if key in seen:
            return None
        seen.add(key)
        pair = make_pair(graph, md, A, origin)
        pairs.append(pair)
        return pair

    for c in md.topo_order:
        if md.cyclic[c]:
            add(attractor_from_seed(graph, md, int(c)), ("scc", int(c)))
    if not cover:
        return pairs
    covered = md.recurrent.copy()
    for pair in pairs:
        covered |= pair.transient
    while not covered.all():
        v = int(np.argmin(covered))
        A = omega_attractor(graph, md, [v])
        pair = add(A, ("node", v))
        if pair is None:  # same attractor seen already: v is in its basin by construction
            key = np.packbits(A).tobytes()
            pair = next(p for p in pairs if np.packbits(p.A).tobytes() == key)
        covered |= pair.transient
        covered[v] = True
    return pairs


def verify_decomposition(graph: Digraph, md: MorseDecomposition, pairs) -> dict:
    """Residuals of the two set identities (as sorted node lists).

    ``gradient``: symmetric difference of ``X \\ CR`` and the union of
    ``B \\ A``; ``recurrent``: symmetric difference of ``CR`` and the
    intersection of ``A u R`` over all pairs (the whole node set for an empty
    family).
    """
    n = graph.n_nodes
    cr = md.recurrent
    union = np.zeros(n, dtype=bool)
    inter = np.ones(n, dtype=bool)
    for p in pairs:
        union |= p.B & ~p.A
        inter &= p.A | p.R
    grad_res = np.nonzero((~cr) ^ union)[0]
    rec_res = np.nonzero(cr ^ inter)[0]
    return {
        "gradient_residual": grad_res.tolist(),
        "recurrent_residual": rec_res.tolist(),
        "ok": not len(grad_res) and not len(rec_res),
        "pairs": len(pairs),
        "chain_recurrent": int(cr.sum()),
    }


def chain_exists(graph: Digraph, source: int, target: int, max_len: int | None = None) -> dict:
    """Shortest walk with at least one edge from ``source`` to ``target``."""
    max_len = graph.n_nodes if max_len is None else int(max_len)
    path = _kernels.shortest_path(graph.indptr, graph.indices, int(source), int(target), max_len)
    if len(path) == 0:
        return {"reachable": False, "chain": None}
    return {"reachable": True, "chain": path.tolist()}


def chain_tolerance(graph) -> float:
    """Jump size certified by each graph edge: padding plus box resolution."""
    return float(graph.meta.get("eps_pad", 0.0)) + graph.grid.diameter


# ---------------------------------------------------------------------------
# numerical chains


def _leg_start(b, q, T):
    return q - T if b.kind == "line" else q


def numeric_chain(sys: CocycleSystem, p, x, y, eps: float, T: float, max_legs: int = 1000,
                  lo=None, hi=None) -> dict:
    """Search for an ``(eps, T)`` chain from ``x`` to ``y`` over the base orbit of ``p``.

    Candidate chain points are ``x``, ``y`` and the box centers of a grid of
    diameter at most ``eps / 2``; a leg joins two candidates when the time-T
    image of the first lies within ``eps`` of the second (measured by direct
    integration). Periodic and finite bases must return to the fiber of ``p``,
    which needs ``T`` to divide the period. Raises :class:`NotFound` when no
    chain exists in this candidate graph.
    """
    if not (eps > 0 and T > 0):
        raise ValueError("numeric_chain needs eps > 0 and T > 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lo = np.array(sys.lo if lo is None else lo, dtype=float)
    hi = np.array(sys.hi if hi is None else hi, dtype=float)
    d = sys.dim
    depth = [max(0, math.ceil(math.log2((hi[k] - lo[k]) * 2.0 * math.sqrt(d) / eps))) for k in range(d)]
    grid = build_grid(lo, hi, depth, sys.circular)
    pts = np.vstack([x, y, grid.center(np.arange(grid.n_boxes))])
    npts = len(pts)
    b = sys.base
    if b.kind == "trivial":
        fibers, closing = [p], True
    elif b.kind == "line":
        # the fiber of p is stepped by its pullback map, as in the transition graph
        fibers, closing = [p], True
    else:
        length = b.period if b.kind == "periodic" else b.size
        m = round(length / T)
        if m < 1 or abs(m * T - length) > 1e-9 * length:
            raise ValueError(f"T={T} does not divide the base period {length}")
        fibers, closing = [_base.shift(b, p, k * T) for k in range(m)], True
    nf = len(fibers)
    src_all, dst_all = [], []
    for f, q in enumerate(fibers):
        if not closing and f == nf - 1:
            break
        img, bad = integrate(sys, _leg_start(b, q, T), pts, T)
        nxt = (f + 1) % nf if closing else f + 1
        # y (and x) are chain points in every fiber
        for special in (0, 1):
            ok = (sys.distance(img, pts[special]) < eps) & ~bad
            src = np.nonzero(ok)[0]
            src_all.append(f * npts + src)
            dst_all.append(np.full(len(src), nxt * npts + special))
        u = img - eps
        v = img + eps
        ilo = np.floor((u - grid.lo) / grid.widths).astype(np.int64)
        ihi = np.floor((v - grid.lo) / grid.widths).astype(np.int64)
        for k in range(d):
            if not grid.circular[k]:
                ilo[:, k] = np.clip(ilo[:, k], 0, grid.shape[k] - 1)
                ihi[:, k] = np.clip(ihi[:, k], -1, grid.shape[k] - 1)
        ihi[bad] = ilo[bad] - 1
        ptr, cand = _kernels.emit_edges(ilo, ihi, np.array(grid.shape, dtype=np.int64),
                                        np.array(grid.circular), 0, np.full(npts, -1, np.int64))
        src = np.repeat(np.arange(npts), np.diff(ptr))
        close = sys.distance(img[src], pts[2 + cand]) < eps
        src_all.append(f * npts + src[close])
        dst_all.append(nxt * npts + 2 + cand[close])
    src = np.concatenate(src_all)
    dst = np.concatenate(dst_all)
    g = Digraph.from_edges(nf * npts, zip(src.tolist(), dst.tolist()))
    targets = [1] if closing else [f * npts + 1 for f in range(1, nf)]
    best = None
    for t in targets:
        res = chain_exists(g, 0, t, max_len=max_legs)
        if res["reachable"] and (best is None or len(res["chain"]) < len(best)):
            best = res["chain"]
            if not closing:
                break
    if best is None:
        raise NotFound(f"no ({eps:g}, {T:g}) chain within {max_legs} legs at resolution {grid.diameter:g}")
    chain_pts = [pts[v % npts] for v in best]
    chain_pts[0] = x
    chain_pts[-1] = y
    defects = []
    for k in range(len(best) - 1):
        q = fibers[(best[k] // npts)]
        defects.append(float(sys.distance(evolve(sys, _leg_start(b, q, T), chain_pts[k], T), chain_pts[k + 1])))
    return {
        "points": [c.tolist() for c in chain_pts],
        "times": [T] * (len(best) - 1),
        "defects": defects,
        "eps": eps,
        "max_defect": max(defects),
    }
