"""Fiberwise pullback attractors from iterated pullback images of a box set."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from . import base as _base
from .errors import Diverged, NotNested
from .grid import Grid
from .lyapunov import box_union_distance
from .systems import CocycleSystem, integrate
from .transition import hull_cover


def box_samples(grid: Grid, boxes, scheme="corners+center") -> np.ndarray:
    """Sample points of each box, shape ``(len(boxes), k, dim)``."""
    boxes = np.asarray(boxes, dtype=np.int64).ravel()
    lo, _ = grid.bounds(boxes)
    w = grid.widths
    if scheme in ("corners+center", "default", None):
        n, center = 2, True
    else:
        n, center = int(scheme), False
        if n < 1:
            raise ValueError("sample scheme needs at least one point per axis")
    parts = []
    if n >= 2:
        offs = np.array(np.meshgrid(*[np.arange(n)] * grid.dim, indexing="ij")).reshape(grid.dim, -1).T
        parts.append(lo[:, None, :] + offs[None, :, :] * (w / (n - 1)))
    if center or n == 1:
        parts.append((lo + 0.5 * w)[:, None, :])
    return np.concatenate(parts, axis=1)


def _pulled_images(sys: CocycleSystem, grid: Grid, p, boxes, s: float, scheme):
    P = box_samples(grid, boxes, scheme)
    k = P.shape[1]
    q = _base.shift(sys.base, p, -s)
    Y, bad = integrate(sys, q, P.reshape(-1, grid.dim), s)
    if bad.any():
        raise Diverged(f"{sys.name}: pullback image from time -{s:g} left the blow-up bound")
    return Y.reshape(-1, k, grid.dim)


def pullback_image(sys: CocycleSystem, grid: Grid, p, U_boxes, s: float, scheme="corners+center",
                   eps_pad: float = 0.0) -> np.ndarray:
    """Boxes covering ``phi(s, theta_{-s} p) U``.

    Each box of ``U`` contributes the boxes meeting the axis-aligned hull of its
    sample images, dilated by ``eps_pad``. Parts of the image outside the grid
    window are cut off. Returns a sorted box index array.
    """
    if s < 0:
        raise ValueError("pullback time must be >= 0")
    U = np.unique(np.asarray(U_boxes, dtype=np.int64))
    if len(U) == 0:
        return U
    Y = _pulled_images(sys, grid, p, U, s, scheme)
    ilo, ihi, _ = hull_cover(grid, Y, np.zeros(len(U), dtype=bool), eps_pad)
    _, out = _kernels.emit_edges(ilo, ihi, np.array(grid.shape, dtype=np.int64), np.array(grid.circular),
                                 0, np.full(len(U), -1, dtype=np.int64))
    return np.unique(out)


def _semi(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    """``sup_{x in a} inf_{y in b} |x - y|`` over box centers (0 if either is empty)."""
    if len(a) == 0 or len(b) == 0:
        return 0.0
    ca, cb = grid.center(a), grid.center(b)
    width = np.array(grid.hi) - np.array(grid.lo)
    circ = np.array(grid.circular)
    best = 0.0
    for start in range(0, len(ca), 2048):
        d = ca[start:start + 2048, None, :] - cb[None, :, :]
        if circ.any():
            d[..., circ] -= width[circ] * np.round(d[..., circ] / width[circ])
        best = max(best, float(np.sqrt((d * d).sum(axis=-1)).min(axis=1).max()))
    return best


def hausdorff(grid: Grid, a, b) -> float:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    return max(_semi(grid, a, b), _semi(grid, b, a))


@dataclass
class PullbackResult:
    p: float
    U: np.ndarray
    schedule: list
    coverings: list
    A_approx: np.ndarray
    nested_from: int | None
    converged: bool
    reenters: list = field(default_factory=list)
    steps: list = field(default_factory=list)   # Hausdorff distance between successive coverings

    @property
    def nested(self) -> bool:
        return self.nested_from is not None

    def summary(self) -> dict:
        return {
            "p": float(self.p),
            "schedule": [float(s) for s in self.schedule],
            "covering_sizes": [int(len(c)) for c in self.coverings],
            "nested": self.nested,
            "nested_from": self.nested_from,
            "converged": bool(self.converged),
            "reenters": [bool(r) for r in self.reenters],
            "A_approx_size": int(len(self.A_approx)),
            "final_step": float(self.steps[-1]) if self.steps else 0.0,
        }


def pullback_attractor(sys: CocycleSystem, grid: Grid, p, U_boxes, schedule, tol: float | None = None,
                       scheme="corners+center", eps_pad: float = 0.0) -> PullbackResult:
    """Iterated pullback coverings of ``U`` and their stabilised intersection.

    ``nested_from`` is the first schedule index from which every covering
    lies in ``U`` and contains the next one. Convergence means the last two
    coverings are within ``tol`` (default: one box diameter) in Hausdorff
    distance. Raises :class:`NotNested` when no covering returns into ``U``.
    """
    schedule = [float(s) for s in schedule]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    tol = grid.diameter if tol is None else float(tol)
    U = np.unique(np.asarray(U_boxes, dtype=np.int64))
    cov = [pullback_image(sys, grid, p, U, s, scheme, eps_pad) for s in schedule]
    inside = [bool(np.isin(c, U).all()) for c in cov]
    if not any(inside):
        raise NotNested("no pullback covering returns into U; U is not a pre-attractor at this resolution")
    K = len(cov)
    nested_from = None
    for k in range(K - 1, -1, -1):
        if not inside[k]:
            break
        if k < K - 1 and not np.isin(cov[k + 1], cov[k]).all():
            break
        nested_from = k
    if nested_from is not None:
        A = cov[nested_from]
        for c in cov[nested_from + 1:]:
            A = np.intersect1d(A, c)
    else:
        A = cov[-1]
    steps = [hausdorff(grid, a, b) for a, b in zip(cov, cov[1:])]
    converged = nested_from is not None and (not steps or steps[-1] <= tol)
    return PullbackResult(p, U, schedule, cov, A, nested_from, converged, inside, steps)


def pullback_convergence(sys: CocycleSystem, grid: Grid, p, D_boxes, A_boxes, schedule,
                         scheme="corners+center") -> np.ndarray:
    """``dist(phi(s, theta_{-s} p) D, A)`` for each ``s``, on sampled image points.

    The semi-metric is ``sup`` over the image samples of the distance to the
    box union of ``A``; it is 0 when ``D`` or ``A`` is empty.
    """
    D = np.unique(np.asarray(D_boxes, dtype=np.int64))
    A = np.unique(np.asarray(A_boxes, dtype=np.int64))
    out = np.zeros(len(schedule))
    if len(D) == 0 or len(A) == 0:
        return out
    for k, s in enumerate(schedule):
        Y = _pulled_images(sys, grid, p, D, float(s), scheme).reshape(-1, grid.dim)
        out[k] = box_union_distance(Y, A, grid).max()
    return out
