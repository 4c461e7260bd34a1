"""Outer approximation of the time-T skew-product map as a directed graph.

Nodes are ``(base_index, box)`` pairs flattened as ``base_index * n_boxes +
box``; when some box image leaves the window and the escape policy is
``"absorb"`` one extra self-looped ``OUTSIDE`` node is appended. On a line
base the edges of fiber ``p`` come from ``phi(T, theta_{-T} p)`` and stay in
that fiber.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import _kernels
from .base import BaseFlow
from .digraph import Digraph, index_dtype
from .errors import CorruptHeader, FormatVersionMismatch
from .grid import BaseSampling, Grid, build_grid
from .systems import CocycleSystem, integrate

MAGIC = "CNDS1"
FORMAT_VERSION = 1
ESCAPE_POLICIES = ("absorb", "drop")
CHUNK = 1 << 15


class TransitionGraph(Digraph):
    """Skew-node graph plus the grid, base sampling and build metadata."""

    def __init__(self, grid: Grid, sampling: BaseSampling, indptr, indices, escaped,
                 outside: int = -1, meta: dict | None = None):
        super().__init__(indptr, indices)
        self.grid = grid
        self.sampling = sampling
        self.escaped = np.asarray(escaped, dtype=bool)
        self.outside = int(outside)
        self.meta = dict(meta or {})
        self.build_seconds = None

    @property
    def n_real(self) -> int:
        return self.sampling.m * self.grid.n_boxes

    def node(self, base_index: int, box: int) -> int:
        return int(base_index) * self.grid.n_boxes + int(box)

    def split(self, v) -> tuple[np.ndarray, np.ndarray]:
        """``(base_index, box_index)`` of nodes (``-1, -1`` for OUTSIDE)."""
        v = np.asarray(v, dtype=np.int64)
        nb = self.grid.n_boxes
        real = v < self.n_real
        return np.where(real, v // nb, -1), np.where(real, v % nb, -1)

    def meta_hash(self) -> str:
        return _meta_hash(_header_fields(self))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransitionGraph):
            return NotImplemented
        return (self.grid == other.grid and self.sampling == other.sampling
                and self.outside == other.outside and self.meta == other.meta
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.escaped, other.escaped))

    __hash__ = None


# ---------------------------------------------------------------------------
# construction


def _sample_offsets(grid: Grid, scheme) -> tuple[int, bool]:
    """Lattice points per axis per box and whether box centers are added."""
    if scheme in ("corners+center", "default", None):
        return 2, True
    n = int(scheme)
    if n < 1:
        raise ValueError("sample scheme needs at least one point per axis")
    return n, False


def _fiber_images(sys: CocycleSystem, grid: Grid, p, T: float, scheme):
    """Integrate the shared sample lattice of one fiber.

    Returns ``(lattice_images, lattice_bad, center_images, center_bad, n_per_axis)``.
    """
    n, with_center = _sample_offsets(grid, scheme)
    shape = np.array(grid.shape)
    lo = np.array(grid.lo)
    w = grid.widths
    if n >= 2:
        axes = [lo[k] + np.arange((n - 1) * shape[k] + 1) * (w[k] / (n - 1)) for k in range(grid.dim)]
        lat = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, grid.dim)
        lat_img, lat_bad = integrate(sys, p, lat, T)
    else:
        lat_img, lat_bad = None, None
    if with_center or n == 1:
        centers = grid.center(np.arange(grid.n_boxes))
        c_img, c_bad = integrate(sys, p, centers, T)
    else:
        c_img, c_bad = None, None
    return lat_img, lat_bad, c_img, c_bad, n


def _box_sample_ids(grid: Grid, boxes: np.ndarray, n: int) -> np.ndarray:
    idx = grid.multi_index(boxes)
    lat_shape = tuple((n - 1) * s + 1 for s in grid.shape)
    offs = np.array(np.meshgrid(*[np.arange(n)] * grid.dim, indexing="ij")).reshape(grid.dim, -1).T
    pts = idx[:, None, :] * (n - 1) + offs[None, :, :]
    return np.ravel_multi_index(tuple(pts[..., k] for k in range(grid.dim)), lat_shape)


def hull_cover(grid: Grid, Y: np.ndarray, diverged: np.ndarray, eps_pad: float, spread_factor: float = 0.0):
    """Inclusive per-axis box ranges covering the dilated hull of each image group.

    ``Y`` has shape ``(groups, samples, dim)``. Ranges are clipped to the window
    on non-circular axes; a group is flagged escaped when its dilated hull
    leaves the window or one of its samples diverged (diverged groups get an
    empty range).
    """
    lo = np.array(grid.lo)
    hi = np.array(grid.hi)
    w = grid.widths
    shape = np.array(grid.shape, dtype=np.int64)
    circ = np.array(grid.circular)
    width = hi - lo
    if circ.any():
        # unwrap circular coordinates around the first sample image
        ref = Y[:, :1, :]
        delta = Y - ref
        delta[..., circ] -= width[circ] * np.round(delta[..., circ] / width[circ])
        Y = ref + delta
    ymin = Y.min(axis=1)
    ymax = Y.max(axis=1)
    if spread_factor:
        diff = Y[:, :, None, :] - Y[:, None, :, :]
        spread = np.sqrt((diff * diff).sum(axis=-1)).max(axis=(1, 2))
    else:
        spread = np.zeros(len(Y))
    r = (eps_pad + spread_factor * spread)[:, None]
    u = ymin - r
    v = ymax + r
    with np.errstate(invalid="ignore", over="ignore"):
        ilo = np.floor(np.nan_to_num((u - lo) / w)).astype(np.int64)
        ihi = np.ceil(np.nan_to_num((v - lo) / w)).astype(np.int64) - 1
    ihi = np.maximum(ihi, ilo)  # degenerate covers own the cell containing them
    exits = np.zeros(len(Y), dtype=bool)
    for k in range(grid.dim):
        if circ[k]:
            continue
        top = v[:, k] >= hi[k]
        ihi[top, k] = np.minimum(ihi[top, k], shape[k] - 1)
        exits |= (u[:, k] < lo[k]) | (v[:, k] > hi[k])
        ilo[:, k] = np.clip(ilo[:, k], 0, shape[k] - 1)
        ihi[:, k] = np.clip(ihi[:, k], -1, shape[k] - 1)
        outside_axis = (v[:, k] < lo[k]) | (u[:, k] > hi[k])
        ihi[outside_axis, k] = ilo[outside_axis, k] - 1
    escaped = exits | diverged
    ihi[diverged] = ilo[diverged] - 1
    return ilo, ihi, escaped


def _fiber_covers(sys, grid, sampling, i, scheme, eps_pad, spread_factor, policy, outside_id):
    """Per-box cover ranges of fiber ``i``: ``(ilo, ihi, extra, escaped)``."""
    p = sampling.leg_start(i)
    lat_img, lat_bad, c_img, c_bad, n = _fiber_images(sys, grid, p, sampling.T, scheme)
    nb = grid.n_boxes
    ilo = np.empty((nb, grid.dim), dtype=np.int64)
    ihi = np.empty((nb, grid.dim), dtype=np.int64)
    escaped = np.empty(nb, dtype=bool)
    for start in range(0, nb, CHUNK):
        boxes = np.arange(start, min(start + CHUNK, nb))
        parts, bads = [], []
        if lat_img is not None:
            ids = _box_sample_ids(grid, boxes, n)
            parts.append(lat_img[ids])
            bads.append(lat_bad[ids])
        if c_img is not None:
            parts.append(c_img[boxes][:, None, :])
            bads.append(c_bad[boxes][:, None])
        Y = np.concatenate(parts, axis=1)
        diverged = np.concatenate(bads, axis=1).any(axis=1)
        sl = slice(start, start + len(boxes))
        ilo[sl], ihi[sl], escaped[sl] = hull_cover(grid, Y, diverged, eps_pad, spread_factor)
    extra = np.full(nb, -1, dtype=np.int64)
    if policy == "absorb":
        extra[escaped] = outside_id
    return ilo, ihi, extra, escaped


def default_eps_pad(grid: Grid) -> float:
    return grid.diameter


def build_transition(sys: CocycleSystem, grid: Grid, sampling: BaseSampling, scheme="corners+center",
                     eps_pad: float | None = None, spread_factor: float = 0.0, escape: str = "absorb",
                     workers: int = 1) -> TransitionGraph:
    """Sampled outer approximation of ``(p_i, box) -> (theta_T p_i, phi(T, p_i, box))``.

    Each box is sampled (by default at its corners and center), the samples
    are evolved for time ``T`` and every box meeting the axis-aligned hull of
    the images, dilated by ``eps_pad + spread_factor * spread`` (``spread`` is
    the largest pairwise distance between the images), becomes a successor.
    The result is independent of ``workers``.
    """
    if escape not in ESCAPE_POLICIES:
        raise ValueError(f"escape policy must be one of {ESCAPE_POLICIES}")
    eps_pad = default_eps_pad(grid) if eps_pad is None else float(eps_pad)
    if eps_pad < 0:
        raise ValueError("eps_pad must be >= 0")
    t0 = time.perf_counter()
    m = sampling.m
    nb = grid.n_boxes
    outside_id = m * nb

    def job(i):
        return _fiber_covers(sys, grid, sampling, i, scheme, eps_pad, spread_factor, escape, outside_id)

    if workers > 1 and m > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            covers = list(pool.map(job, range(m)))
    else:
        covers = [job(i) for i in range(m)]
    shape = np.array(grid.shape, dtype=np.int64)
    circ = np.array(grid.circular)
    escaped = np.concatenate([c[3] for c in covers])
    has_outside = escape == "absorb" and bool(escaped.any())
    counts = np.concatenate([_kernels.cover_counts(c[0], c[1], shape, circ, c[2]) for c in covers]
                            + [np.ones(1 if has_outside else 0, dtype=np.int64)])
    indptr = np.zeros(len(counts) + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    # fill one preallocated edge array chunk by chunk to keep peak memory low
    indices = np.empty(indptr[-1], dtype=index_dtype(len(counts)))
    for i, (ilo, ihi, extra, _) in enumerate(covers):
        target = sampling.perm[i] * nb
        for start in range(0, nb, CHUNK):
            sl = slice(start, min(start + CHUNK, nb))
            _, ind = _kernels.emit_edges(ilo[sl], ihi[sl], shape, circ, target, extra[sl])
            a = indptr[i * nb + start]
            indices[a:a + len(ind)] = ind
    if has_outside:
        indices[-1] = outside_id
    meta = {
        "system": sys.name,
        "T": float(sampling.T),
        "eps_pad": eps_pad,
        "spread_factor": float(spread_factor),
        "scheme": str(scheme),
        "h": float(sys.h),
        "method": sys.method,
        "blowup": float(sys.blowup),
        "escape": escape,
    }
    g = TransitionGraph(grid, sampling, indptr, indices, escaped, outside_id if has_outside else -1, meta)
    g.build_seconds = time.perf_counter() - t0
    return g


# ---------------------------------------------------------------------------
# persistence


def _base_fields(base: BaseFlow) -> dict:
    return {"kind": base.kind, "period": base.period, "origin": base.origin, "perm": list(base.perm),
            "window": None if base.window is None else list(base.window), "description": base.description}


def _header_fields(g: TransitionGraph) -> list[tuple[str, object]]:
    s = g.sampling
    fields = [
        ("grid.lo", list(g.grid.lo)),
        ("grid.hi", list(g.grid.hi)),
        ("grid.depth", list(g.grid.depth)),
        ("grid.circular", [int(c) for c in g.grid.circular]),
        ("base.flow", _base_fields(s.base)),
        ("base.m", s.m),
        ("base.T", float(s.T)),
        ("base.samples", [float(x) for x in s.samples]),
        ("base.perm", list(s.perm)),
    ]
    fields += [(f"meta.{k}", g.meta[k]) for k in sorted(g.meta)]
    return fields


def _meta_hash(fields) -> str:
    text = "\n".join(f"{k}={json.dumps(v, sort_keys=True)}" for k, v in fields)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _body_lines(g: TransitionGraph) -> list[str]:
    lines = []
    ind = g.indices
    ptr = g.indptr
    for v in range(g.n_nodes):
        flag = "!" if v < g.n_real and g.escaped[v] else ""
        succ = " ".join(map(str, ind[ptr[v]:ptr[v + 1]].tolist()))
        lines.append(f"{v}{flag}: {succ}" if succ else f"{v}{flag}:")
    return lines


def dumps_graph(g: TransitionGraph) -> str:
    fields = _header_fields(g)
    body = _body_lines(g)
    digest = hashlib.sha256("\n".join(body).encode()).hexdigest()
    head = [MAGIC, f"version={FORMAT_VERSION}"]
    head += [f"{k}={json.dumps(v, sort_keys=True)}" for k, v in fields]
    head += [f"meta_hash={_meta_hash(fields)}", f"nodes={g.n_nodes}", f"edges={g.n_edges}",
             f"outside={g.outside}", f"checksum={digest}"]
    return "\n".join(head + body) + "\n"


def save_graph(g: TransitionGraph, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_graph(g))
    return path


def loads_graph(text: str) -> TransitionGraph:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != MAGIC:
        if lines and lines[0].startswith("CNDS"):
            raise FormatVersionMismatch(f"unsupported graph format {lines[0]!r}, expected {MAGIC}")
        raise CorruptHeader("missing CNDS1 magic line")
    header: dict[str, str] = {}
    i = 1
    while i < len(lines) and not lines[i][:1].isdigit():
        key, sep, value = lines[i].partition("=")
        if not sep:
            raise CorruptHeader(f"malformed header line {i + 1}: {lines[i]!r}")
        header[key] = value
        i += 1
    try:
        version = int(header["version"])
        n_nodes = int(header["nodes"])
        n_edges = int(header["edges"])
        outside = int(header["outside"])
        checksum = header["checksum"]
    except (KeyError, ValueError) as exc:
        raise CorruptHeader(f"incomplete header: {exc}") from None
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(f"graph format version {version}, expected {FORMAT_VERSION}")
    body = lines[i:]
    if len(body) != n_nodes:
        raise CorruptHeader(f"expected {n_nodes} node lines, found {len(body)} (truncated file?)")
    if hashlib.sha256("\n".join(body).encode()).hexdigest() != checksum:
        raise CorruptHeader("node section checksum mismatch")
    try:
        vals = {k: json.loads(v) for k, v in header.items() if k.startswith(("grid.", "base.", "meta."))}
    except json.JSONDecodeError as exc:
        raise CorruptHeader(f"unparseable header value: {exc}") from None
    bf = vals["base.flow"]
    base = BaseFlow(bf["kind"], period=bf["period"], origin=bf["origin"], perm=tuple(bf["perm"]),
                    window=None if bf["window"] is None else tuple(bf["window"]), description=bf["description"])
    grid = build_grid(vals["grid.lo"], vals["grid.hi"], vals["grid.depth"], [bool(c) for c in vals["grid.circular"]])
    sampling = BaseSampling(base, int(vals["base.m"]), float(vals["base.T"]),
                            tuple(vals["base.samples"]), tuple(vals["base.perm"]))
    meta = {k[5:]: v for k, v in vals.items() if k.startswith("meta.")}
    counts = np.zeros(n_nodes, dtype=np.int64)
    escaped = np.zeros(sampling.m * grid.n_boxes, dtype=bool)
    chunks = []
    for v, line in enumerate(body):
        head, _, rest = line.partition(":")
        flagged = head.endswith("!")
        if int(head.rstrip("!")) != v:
            raise CorruptHeader(f"node lines out of order at {v}")
        if flagged:
            escaped[v] = True
        succ = np.array(rest.split(), dtype=np.int64)
        counts[v] = len(succ)
        chunks.append(succ)
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.concatenate(chunks) if chunks else np.zeros(0, np.int64)
    if len(indices) != n_edges:
        raise CorruptHeader("edge count mismatch")
    g = TransitionGraph(grid, sampling, indptr, indices, escaped, outside, meta)
    if header.get("meta_hash") != g.meta_hash():
        raise CorruptHeader("meta hash mismatch")
    return g


def load_graph(path) -> TransitionGraph:
    try:
        text = Path(path).read_text(encoding="ascii")
    except UnicodeDecodeError as exc:
        raise CorruptHeader(f"{path} is not a text graph file") from exc
    return loads_graph(text)
