"""Brute-force reference implementation of the combinatorial decomposition.

Everything here is computed straight from the definitions with dense numpy
arrays and plain loops, sharing no code with the compiled kernels, so it can
be used to cross-check them. Meant for graphs with a handful of nodes (the
exhaustive attractor enumeration is exponential); the walk fixpoints also
run on mid-sized graphs.
"""

from __future__ import annotations

import itertools

import numpy as np

from .conley import enumerate_pairs, morse, verify_decomposition
from .digraph import Digraph


def random_digraph(rng: np.random.Generator, max_nodes: int = 8) -> Digraph:
    n = int(rng.integers(1, max_nodes + 1))
    p = float(rng.uniform(0.05, 0.5))
    adj = rng.random((n, n)) < p
    edges = np.argwhere(adj)
    return Digraph.from_edges(n, edges)


def adjacency(graph: Digraph) -> np.ndarray:
    n = graph.n_nodes
    adj = np.zeros((n, n), dtype=bool)
    E = graph.edges()
    adj[E[:, 0], E[:, 1]] = True
    return adj


def path_matrix(graph: Digraph) -> np.ndarray:
    """``P[u, v]``: some walk with at least one edge leads from ``u`` to ``v`` (Warshall)."""
    P = adjacency(graph)
    for k in range(graph.n_nodes):
        P |= P[:, k:k + 1] & P[k:k + 1, :]
    return P


def _any_successor(graph: Digraph, mask: np.ndarray) -> np.ndarray:
    """Per node: does some successor lie in ``mask``."""
    out = np.zeros(graph.n_nodes, dtype=bool)
    src = np.repeat(np.arange(graph.n_nodes), np.diff(graph.indptr))
    np.logical_or.at(out, src, mask[graph.indices])
    return out


def _any_predecessor(graph: Digraph, mask: np.ndarray) -> np.ndarray:
    out = np.zeros(graph.n_nodes, dtype=bool)
    src = np.repeat(np.arange(graph.n_nodes), np.diff(graph.indptr))
    np.logical_or.at(out, graph.indices, mask[src])
    return out


def long_walks(graph: Digraph, allowed: np.ndarray, backward: bool = False) -> np.ndarray:
    """Nodes starting (or, backward, ending) a walk of ``2 |V|`` edges inside ``allowed``.

    Computed by the length recursion ``W_{k+1} = allowed & (some neighbour in W_k)``
    (stopping early once it stabilises, which does not change the answer).
    A walk that long must repeat a node, so this is the set of nodes with an
    infinite walk inside ``allowed``.
    """
    step = _any_predecessor if backward else _any_successor
    W = allowed.copy()
    for _ in range(2 * graph.n_nodes):
        nxt = allowed & step(graph, W)
        if np.array_equal(nxt, W):
            break
        W = nxt
    return W


def brute_components(graph: Digraph):
    """``(same, cyclic)``: mutual reachability relation and per-node cycle flag."""
    P = path_matrix(graph)
    same = (P & P.T) | np.eye(graph.n_nodes, dtype=bool)
    return same, np.diag(P).copy()


def brute_closure(graph: Digraph, seeds: np.ndarray) -> np.ndarray:
    P = path_matrix(graph)
    return seeds | P[seeds].any(axis=0)


def brute_basin(graph: Digraph, A: np.ndarray) -> np.ndarray:
    return ~long_walks(graph, ~A)


def brute_repeller(graph: Digraph, B: np.ndarray) -> np.ndarray:
    C = ~B
    return long_walks(graph, C) & long_walks(graph, C, backward=True)


def all_attractors(graph: Digraph) -> list[np.ndarray]:
    """Every forward-invariant node set, i.e. the closures of all node subsets."""
    n = graph.n_nodes
    P = path_matrix(graph)
    seen = {}
    for bits in itertools.product((False, True), repeat=n):
        s = np.array(bits, dtype=bool)
        A = s | P[s].any(axis=0) if n else s
        seen.setdefault(A.tobytes(), A)
    return list(seen.values())


def brute_identities(graph: Digraph) -> dict:
    """Both decomposition identities over the family of *all* attractors."""
    n = graph.n_nodes
    _, cyc = brute_components(graph)
    union = np.zeros(n, dtype=bool)
    inter = np.ones(n, dtype=bool)
    for A in all_attractors(graph):
        B = brute_basin(graph, A)
        R = brute_repeller(graph, B)
        union |= B & ~A
        inter &= A | R
    return {"gradient_ok": bool(np.array_equal(~cyc, union)), "recurrent_ok": bool(np.array_equal(cyc, inter))}


def check_graph(graph: Digraph, exhaustive: bool = True) -> list[str]:
    """Compare the fast decomposition of ``graph`` against the definitions.

    Returns a list of human-readable mismatches (empty when everything agrees).
    ``exhaustive`` adds the all-attractor identity check and the pairwise
    component relation (only sensible for small graphs).
    """
    problems = []
    md = morse(graph)
    pairs = enumerate_pairs(graph, md)
    if exhaustive:
        same, cyc = brute_components(graph)
        if not np.array_equal(md.scc_id[:, None] == md.scc_id[None, :], same):
            problems.append("strong components differ")
        if not np.array_equal(md.recurrent, cyc):
            problems.append("cyclic flags differ")
        ids = brute_identities(graph)
        if not (ids["gradient_ok"] and ids["recurrent_ok"]):
            problems.append(f"identities fail over all attractors: {ids}")
    E = graph.edges()
    if len(E) and np.any(md.scc_id[E[:, 0]] > md.scc_id[E[:, 1]]):
        problems.append("component ids are not a topological order")
    for k, pair in enumerate(pairs):
        if _any_successor(graph, ~pair.A)[pair.A].any():
            problems.append(f"pair {k}: A not forward invariant")
        if exhaustive:
            seed = np.zeros(graph.n_nodes, dtype=bool)
            kind, val = pair.origin
            if kind == "scc":
                seed = md.scc_id == val
                if not np.array_equal(brute_closure(graph, seed), pair.A):
                    problems.append(f"pair {k}: attractor differs from closure of its seed")
        if not np.array_equal(brute_basin(graph, pair.A), pair.B):
            problems.append(f"pair {k}: basin differs")
        if not np.array_equal(brute_repeller(graph, pair.B), pair.R):
            problems.append(f"pair {k}: repeller differs")
        if np.any(pair.A & pair.R):
            problems.append(f"pair {k}: A and R intersect")
        if np.any(md.recurrent & pair.B & ~pair.A):
            problems.append(f"pair {k}: recurrent node in B \\ A")
    rep = verify_decomposition(graph, md, pairs)
    if not rep["ok"]:
        problems.append(f"identity residuals {rep['gradient_residual']} / {rep['recurrent_residual']}")
    return problems


def run_suite(count: int = 500, seed: int = 0, max_nodes: int = 8) -> dict:
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(count):
        g = random_digraph(rng, max_nodes)
        problems = check_graph(g)
        if problems:
            failures.append({"graph": i, "edges": g.edges().tolist(), "n": g.n_nodes, "problems": problems})
    return {"graphs": count, "seed": seed, "max_nodes": max_nodes, "failures": failures, "ok": not failures}
