"""Glue between a run configuration and the computational modules, plus plot-data writers."""

from __future__ import annotations

import dataclasses
import io
import itertools
import math

import numpy as np

from . import _kernels
from . import config as _config
from .conley import MorseDecomposition, enumerate_pairs, morse, verify_decomposition
from .digraph import Digraph
from .errors import ConfigError
from .grid import BaseSampling, Grid, build_grid, sample_base
from .systems import CocycleSystem, make_builtin
from .transition import TransitionGraph, build_transition


def system_from_config(cfg: dict) -> CocycleSystem:
    sys = make_builtin(cfg["system.name"], _config.params(cfg), cfg["system.h"])
    if cfg["system.blowup"] is not None:
        sys = dataclasses.replace(sys, blowup=float(cfg["system.blowup"]))
    return sys


def _per_axis(value, dim: int, key: str) -> list:
    if isinstance(value, list):
        if len(value) != dim:
            raise ConfigError(f"{key} needs {dim} entries, got {len(value)}")
        return list(value)
    return [value] * dim


def grid_from_config(cfg: dict, sys: CocycleSystem) -> Grid:
    d = sys.dim
    lo = sys.lo if cfg["grid.lo"] is None else _per_axis(cfg["grid.lo"], d, "grid.lo")
    hi = sys.hi if cfg["grid.hi"] is None else _per_axis(cfg["grid.hi"], d, "grid.hi")
    circ = sys.circular if cfg["grid.circular"] is None else _per_axis(cfg["grid.circular"], d, "grid.circular")
    return build_grid(lo, hi, _per_axis(cfg["grid.depth"], d, "grid.depth"), circ or None)


def sampling_from_config(cfg: dict, sys: CocycleSystem) -> BaseSampling:
    m = cfg["base.m"]
    if m is None:
        m = {"trivial": 1, "finite": len(sys.base.perm)}.get(sys.base.kind, 8)
    return sample_base(sys.base, m, cfg["base.T"])


def build_from_config(cfg: dict, workers: int | None = None) -> TransitionGraph:
    sys = system_from_config(cfg)
    grid = grid_from_config(cfg, sys)
    sampling = sampling_from_config(cfg, sys)
    return build_transition(sys, grid, sampling, cfg["transition.scheme"], cfg["transition.eps_pad"],
                            cfg["transition.spread_factor"], cfg["transition.escape"],
                            workers or cfg["workers"])


def decompose(graph: TransitionGraph):
    md = morse(graph)
    pairs = enumerate_pairs(graph, md)
    return md, pairs, verify_decomposition(graph, md, pairs)


def conley_summary(graph: TransitionGraph, md: MorseDecomposition, pairs, report: dict) -> dict:
    rec = md.recurrent
    real = rec[:graph.n_real]
    per_fiber = real.reshape(graph.sampling.m, graph.grid.n_boxes)
    return {
        "system": graph.meta.get("system"),
        "meta_hash": graph.meta_hash(),
        "nodes": graph.n_nodes,
        "edges": graph.n_edges,
        "escaped": int(graph.escaped.sum()),
        "outside": graph.outside,
        "scc_count": md.n_scc,
        "cyclic_scc_count": int(md.cyclic.sum()),
        "chain_recurrent_nodes": int(rec.sum()),
        "cyclic_fraction": float(real.mean()),
        "cr_boxes_per_fiber": per_fiber.sum(axis=1).tolist(),
        "cr_clusters_per_fiber": cr_clusters(graph, md),
        "pair_count": len(pairs),
        "pairs_with_repeller": int(sum(bool(p.R_coarse.any()) for p in pairs)),
        "gradient_residual": report["gradient_residual"],
        "recurrent_residual": report["recurrent_residual"],
        "identities_ok": report["ok"],
    }


def cr_clusters(graph: TransitionGraph, md: MorseDecomposition) -> list[int]:
    """Per fiber, the number of groups of chain recurrent boxes that touch (corners included)."""
    grid = graph.grid
    nb = grid.n_boxes
    offsets = np.array(list(itertools.product((-1, 0, 1), repeat=grid.dim)))
    shape = np.array(grid.shape)
    circ = np.array(grid.circular)
    out = []
    for i in range(graph.sampling.m):
        boxes = np.nonzero(md.recurrent[i * nb:(i + 1) * nb])[0]
        if len(boxes) == 0:
            out.append(0)
            continue
        idx = grid.multi_index(boxes)
        edges = []
        for off in offsets:
            nbr = idx + off
            nbr = np.where(circ, nbr % shape, nbr)
            ok = np.all((nbr >= 0) & (nbr < shape), axis=1)
            flat = grid.flat_index(np.where(ok[:, None], nbr, 0))
            j = np.minimum(np.searchsorted(boxes, flat), len(boxes) - 1)
            hit = ok & (boxes[j] == flat)
            edges.append(np.stack([np.nonzero(hit)[0], j[hit]], axis=1))
        g = Digraph.from_edges(len(boxes), np.concatenate(edges))
        _, count = _kernels.tarjan(g.indptr, g.indices, g.n_nodes)
        out.append(int(count))
    return out


def node_table(graph: TransitionGraph, md: MorseDecomposition, pairs, field=None) -> str:
    """Per-node CSV; with a :class:`LyapunovField` the ``L`` and ``l_n`` columns are appended."""
    K = len(pairs)
    cols = ["base_index", "box_index", "scc_id", "cyclic"]
    cols += [f"in_A_{k}" for k in range(K)] + [f"in_R_{k}" for k in range(K)]
    data = [*graph.split(np.arange(graph.n_nodes)), md.scc_id, md.recurrent.astype(np.int64)]
    data += [p.A.astype(np.int64) for p in pairs] + [p.R.astype(np.int64) for p in pairs]
    fmt = ["%d"] * len(data)
    if field is not None:
        cols += ["L"] + [f"l_{k}" for k in range(len(field.l))]
        data += [field.L] + list(field.l)
        fmt += ["%.17g"] * (1 + len(field.l))
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    np.savetxt(buf, np.column_stack(data) if data else np.zeros((0, 0)), fmt=",".join(fmt), delimiter=",")
    return buf.getvalue()


def condensation_dot(md: MorseDecomposition) -> str:
    lines = ["digraph condensation {"]
    for c in range(md.n_scc):
        shape = "doubleoctagon" if md.cyclic[c] else "ellipse"
        lines.append(f'  c{c} [label="{c} ({int(md.sizes[c])})", shape={shape}];')
    src = np.repeat(np.arange(md.n_scc), np.diff(md.condensation.indptr))
    for a, b in zip(src.tolist(), md.condensation.indices.tolist()):
        lines.append(f"  c{a} -> c{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def boxes_in(grid: Grid, lo, hi) -> np.ndarray:
    """Boxes lying inside the closed window ``[lo, hi]`` (rounding-tolerant)."""
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (grid.dim,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (grid.dim,))
    blo, bhi = grid.bounds(np.arange(grid.n_boxes))
    tol = 1e-9 * grid.widths
    ok = np.all((blo >= lo - tol) & (bhi <= hi + tol), axis=1)
    return np.nonzero(ok)[0]


def nearest_sample(sampling: BaseSampling, q: float) -> int:
    """Index of the base sample closest to ``q`` (cyclically for periodic bases)."""
    s = np.asarray(sampling.samples, dtype=float)
    d = np.abs(s - q)
    if sampling.base.kind == "periodic":
        per = sampling.base.period
        d = np.minimum(d % per, per - d % per)
    return int(np.argmin(d)) if len(s) else 0


def fiber_boxes(graph: TransitionGraph, mask: np.ndarray, i: int) -> np.ndarray:
    nb = graph.grid.n_boxes
    return np.nonzero(mask[i * nb:(i + 1) * nb])[0]


def json_ready(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON output."""
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return json_ready(obj.tolist())
    if isinstance(obj, np.generic):
        return json_ready(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj
