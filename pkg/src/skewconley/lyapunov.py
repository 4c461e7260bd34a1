"""Complete Lyapunov functions: the graph version and the trajectory version."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from . import base as _base
from .conley import AttractorRepellerPair, MorseDecomposition
from .digraph import Digraph
from .errors import CycleInTransientSet, Diverged
from .grid import Grid
from .systems import CocycleSystem, integrate


def pair_function(graph: Digraph, md: MorseDecomposition, pair: AttractorRepellerPair) -> tuple[np.ndarray, int]:
    """Per-node values of the pair function and its rank normalisation.

    ``0`` on ``A``, ``1`` off the basin, and ``rank / (rank_max + 1)`` on the
    transient part ``B \\ A``, where ``rank`` is one more than the largest
    rank among transient successors (``1`` when every successor is in ``A``).
    The value strictly drops along every edge leaving a transient node.
    """
    S = pair.B & ~pair.A
    l = np.where(pair.A, 0.0, 1.0)
    if not S.any():
        return l, 0
    if np.any(md.recurrent & S):
        raise CycleInTransientSet("a cyclic component lies in B \\ A")
    nodes = np.nonzero(S)[0]
    # larger component id means further downstream; visit downstream first
    order = nodes[np.argsort(-md.scc_id[nodes], kind="stable")]
    rank, ok = _kernels.longest_rank(graph.indptr, graph.indices, S, order)
    if not ok:
        raise CycleInTransientSet("transient set is not acyclic")
    rank_max = int(rank[nodes].max())
    l[nodes] = rank[nodes] / (rank_max + 1.0)
    return l, rank_max


@dataclass
class LyapunovField:
    pairs: list
    l: list            # per pair, per node values (kept only when requested)
    L: np.ndarray
    rank_max: list
    report: dict = field(default_factory=dict)

    @property
    def truncation_error(self) -> float:
        return 3.0 ** (-len(self.pairs))


def complete_lyapunov(graph: Digraph, md: MorseDecomposition, pairs, keep_components: bool = True) -> LyapunovField:
    """``L = sum_n 2 l_n / 3^n`` over the enumerated pairs, with property checks.

    Checks are done exactly on the individual pair functions (``L`` in floating
    point cannot resolve more than about 33 ternary digits):

    * ``constant_on_scc``: no edge inside a component changes any ``l_n``;
    * ``monotone_violations``: edges along which some ``l_n`` increases;
    * ``strict_violations``: edges between components whose source is
      transient for some pair but where no ``l_n`` drops;
    * ``cantor_digits``: every ``l_n`` on recurrent nodes is 0 or 1;
    * ``separates_components``: distinct cyclic components get distinct digit
      strings (hence distinct ``L``).
    """
    n = graph.n_nodes
    L = np.zeros(n)
    ls, ranks = [], []
    state = np.zeros(graph.n_edges, dtype=np.uint8)
    rec_nodes = np.nonzero(md.recurrent)[0]
    digits = np.zeros((len(rec_nodes), len(pairs)), dtype=np.uint8)
    cantor_ok = True
    for k, pair in enumerate(pairs):
        l, rmax = pair_function(graph, md, pair)
        L += 2.0 * l / 3.0 ** (k + 1)
        ranks.append(rmax)
        if keep_components:
            ls.append(l)
        _kernels.pair_edge_scan(graph.indptr, graph.indices, md.scc_id, l, pair.B & ~pair.A, state)
        vals = l[rec_nodes]
        cantor_ok &= bool(np.all((vals == 0.0) | (vals == 1.0)))
        digits[:, k] = vals == 1.0
    comp = md.scc_id[rec_nodes]
    first = {}
    separates = True
    for c, row in zip(comp.tolist(), map(bytes, np.packbits(digits, axis=1))):
        first.setdefault(row, c)
        if first[row] != c:
            separates = False
            break
    rec_L = {}
    for c, v in zip(comp.tolist(), L[rec_nodes].tolist()):
        rec_L[c] = v
    float_distinct = len(set(rec_L.values())) == len(rec_L)
    report = {
        "pairs": len(pairs),
        "edges": graph.n_edges,
        "monotone_violations": int(np.count_nonzero(state & 1)),
        "float_monotone_violations": int(_kernels.count_increases(graph.indptr, graph.indices, L)),
        "constant_on_scc": not bool(np.any(state & 2)),
        "strict_violations": int(np.count_nonzero((state & 12) == 8)),
        "cantor_digits": bool(cantor_ok),
        "separates_components": bool(separates),
        "float_distinct_components": bool(float_distinct),
        "truncation_error": 3.0 ** (-len(pairs)),
    }
    report["a_constant_on_scc"] = report["constant_on_scc"]
    report["b_monotone"] = report["monotone_violations"] == 0 and report["strict_violations"] == 0
    report["c_cantor"] = report["cantor_digits"]
    report["d_distinct"] = report["separates_components"]
    report["ok"] = all(report[k] for k in ("a_constant_on_scc", "b_monotone", "c_cantor", "d_distinct"))
    return LyapunovField(list(pairs), ls, L, ranks, report)


# ---------------------------------------------------------------------------
# trajectory version


def box_union_distance(X, boxes, grid: Grid) -> np.ndarray:
    """Euclidean distance from each point to the union of ``boxes`` (``inf`` if empty)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    boxes = np.asarray(boxes, dtype=np.int64).ravel()
    if len(boxes) == 0:
        return np.full(len(X), np.inf)
    lo, hi = grid.bounds(boxes)
    out = np.full(len(X), np.inf)
    width = np.array(grid.hi) - np.array(grid.lo)
    circ = np.array(grid.circular)
    for start in range(0, len(boxes), 4096):
        blo, bhi = lo[start:start + 4096], hi[start:start + 4096]
        gap_lo = blo[None, :, :] - X[:, None, :]
        gap_hi = X[:, None, :] - bhi[None, :, :]
        gap = np.maximum(np.maximum(gap_lo, gap_hi), 0.0)
        if circ.any():
            # shortest way around the circle, zero when inside the arc
            inside = np.mod(-gap_lo, width) <= (bhi - blo)[None, :, :]
            around = np.minimum(np.mod(gap_lo, width), np.mod(gap_hi, width))
            gap = np.where(circ, np.where(inside, 0.0, around), gap)
        out = np.minimum(out, np.sqrt((gap * gap).sum(axis=-1)).min(axis=1))
    return out


def lambda_ratio(x, A_boxes, R_boxes, grid: Grid) -> np.ndarray | float:
    """``d(x, A) / (d(x, A) + d(x, R))`` with distance 1 to an empty set."""
    X = np.asarray(x, dtype=float)
    single = X.ndim <= 1
    X = X.reshape(-1, grid.dim)
    dA = box_union_distance(X, A_boxes, grid)
    dR = box_union_distance(X, R_boxes, grid)
    dA = np.where(np.isinf(dA), 1.0, dA)
    dR = np.where(np.isinf(dR), 1.0, dR)
    lam = dA / (dA + dR)
    return float(lam[0]) if single else lam


def _resolve(boxes, q):
    return boxes(q) if callable(boxes) else boxes


def lambda_trace(sys: CocycleSystem, p, x, horizon: float, dt: float, A_boxes, R_boxes, grid: Grid):
    """Times, states and ``lambda`` along the orbit sampled every ``dt`` up to ``horizon``.

    ``A_boxes``/``R_boxes`` are box index arrays or callables of the base point.
    """
    n = int(round(horizon / dt))
    X = np.atleast_2d(np.asarray(x, dtype=float)).reshape(-1, sys.dim)
    times = np.arange(n + 1) * dt
    lam = np.empty((n + 1, len(X)))
    states = np.empty((n + 1,) + X.shape)
    q = p
    for k in range(n + 1):
        states[k] = X
        lam[k] = lambda_ratio(X, _resolve(A_boxes, q), _resolve(R_boxes, q), grid)
        if k == n:
            break
        X, bad = integrate(sys, q, X, dt)
        if bad.any():
            raise Diverged(f"{sys.name}: orbit left the blow-up bound before t={horizon:g}")
        q = _base.shift(sys.base, q, dt)
    return times, states, lam


def sup_g(sys: CocycleSystem, p, x, horizon: float, dt: float, A_boxes, R_boxes, grid: Grid):
    """``max`` of ``lambda`` over the sampled orbit on ``[0, horizon]``."""
    _, _, lam = lambda_trace(sys, p, x, horizon, dt, A_boxes, R_boxes, grid)
    g = lam.max(axis=0)
    return float(g[0]) if np.asarray(x).ndim <= 1 else g


def lyapunov_l(sys: CocycleSystem, p, x, horizon: float, dt: float, A_boxes, R_boxes, grid: Grid,
               trace: bool = False) -> dict:
    """Trapezoid value of ``int_0^horizon e^-t g(orbit(t)) dt``.

    ``g`` at time ``t`` is the running sup of ``lambda`` over ``[t, t + horizon]``,
    so the orbit is followed up to ``2 * horizon``. Since ``0 <= g <= 1`` the
    neglected tail is at most ``e^-horizon``.
    """
    times, _, lam = lambda_trace(sys, p, x, 2.0 * horizon, dt, A_boxes, R_boxes, grid)
    n = int(round(horizon / dt))
    # suffix maximum over a window of n samples
    g = np.empty((n + 1, lam.shape[1]))
    for k in range(n + 1):
        g[k] = lam[k:k + n + 1].max(axis=0)
    weights = np.exp(-times[:n + 1])[:, None]
    trapezoid = getattr(np, "trapezoid", None) or np.trapz  # renamed in numpy 2
    value = trapezoid(weights * g, dx=dt, axis=0)
    single = np.asarray(x).ndim <= 1
    out = {"value": float(value[0]) if single else value, "tail_bound": math.exp(-horizon)}
    if trace:
        partial = np.concatenate([np.zeros((1, g.shape[1])),
                                  np.cumsum(0.5 * dt * (weights[1:] * g[1:] + weights[:-1] * g[:-1]), axis=0)])
        out["trace"] = {"t": times[:n + 1], "lambda": lam[:n + 1], "g": g, "l_partial": partial}
    return out
