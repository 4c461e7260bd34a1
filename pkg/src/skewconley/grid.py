"""Uniform box grids on a state window and compatible samplings of the base."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .base import BaseFlow, permutation_power
from .errors import IncompatibleSampling, TooManyBoxes

MAX_TOTAL_DEPTH = 26


@dataclass(frozen=True)
class Grid:
    """Uniform partition of ``[lo, hi]`` into ``prod(2**depth)`` boxes.

    Boxes are enumerated row-major (axis 0 varies slowest). Each box is the
    half-open cell ``[lo_k + i w_k, lo_k + (i+1) w_k)``; the last cell of a
    non-circular axis also owns the upper endpoint ``hi``.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    depth: tuple[int, ...]
    circular: tuple[bool, ...]

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(1 << k for k in self.depth)

    @property
    def n_boxes(self) -> int:
        return 1 << sum(self.depth)

    @property
    def widths(self) -> np.ndarray:
        return (np.array(self.hi) - np.array(self.lo)) / np.array(self.shape, dtype=float)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.widths))

    def multi_index(self, boxes) -> np.ndarray:
        return np.stack(np.unravel_index(np.asarray(boxes, dtype=np.int64), self.shape), axis=-1)

    def flat_index(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        return np.ravel_multi_index(tuple(idx[..., k] for k in range(self.dim)), self.shape)

    def bounds(self, boxes) -> tuple[np.ndarray, np.ndarray]:
        idx = self.multi_index(boxes)
        w = self.widths
        lo = np.array(self.lo) + idx * w
        return lo, lo + w

    def center(self, boxes) -> np.ndarray:
        lo, hi = self.bounds(boxes)
        return 0.5 * (lo + hi)

    def box_of(self, x) -> np.ndarray | int:
        """Box index of each point, ``-1`` outside the window."""
        X = np.asarray(x, dtype=float)
        single = X.ndim <= 1
        X = X.reshape(-1, self.dim)
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        rel = (X - lo) / self.widths
        idx = np.floor(rel).astype(np.int64)
        # the division can round across a box edge; settle against the edges bounds() reports
        with np.errstate(invalid="ignore"):
            idx -= X < lo + idx * self.widths
            idx += X >= lo + (idx + 1) * self.widths
        inside = np.ones(len(X), dtype=bool)
        for k in range(self.dim):
            n = self.shape[k]
            if self.circular[k]:
                idx[:, k] %= n
            else:
                top = X[:, k] == hi[k]
                idx[top, k] = n - 1
                inside &= (idx[:, k] >= 0) & (idx[:, k] < n)
        out = np.full(len(X), -1, dtype=np.int64)
        out[inside] = self.flat_index(idx[inside])
        return int(out[0]) if single else out

    def children(self, boxes, axes: Sequence[int]) -> np.ndarray:
        """Indices (in the grid subdivided along ``axes``) of each box's children."""
        idx = self.multi_index(np.atleast_1d(boxes))
        fine = subdivide(self, axes)
        offsets = np.array(np.meshgrid(*[[0, 1] if k in axes else [0] for k in range(self.dim)],
                                       indexing="ij")).reshape(self.dim, -1).T
        scale = np.array([2 if k in axes else 1 for k in range(self.dim)])
        kids = idx[:, None, :] * scale + offsets[None, :, :]
        return fine.flat_index(kids)

    def parent(self, boxes, coarse: "Grid") -> np.ndarray:
        """Map boxes of this (finer) grid to the box of ``coarse`` containing them."""
        shift = np.array(self.depth) - np.array(coarse.depth)
        if np.any(shift < 0) or coarse.lo != self.lo or coarse.hi != self.hi:
            raise ValueError("coarse grid is not a coarsening of this grid")
        idx = self.multi_index(boxes) >> shift
        return coarse.flat_index(idx)

    def header(self) -> dict:
        return {
            "grid.lo": list(self.lo),
            "grid.hi": list(self.hi),
            "grid.depth": list(self.depth),
            "grid.circular": [int(c) for c in self.circular],
        }


def build_grid(lo, hi, depth, circular=None, max_total_depth: int = MAX_TOTAL_DEPTH) -> Grid:
    lo = tuple(float(v) for v in np.atleast_1d(lo))
    hi = tuple(float(v) for v in np.atleast_1d(hi))
    d = len(lo)
    depth = tuple(int(k) for k in np.atleast_1d(depth))
    if len(depth) == 1 and d > 1:
        depth = depth * d
    circular = tuple(bool(c) for c in (circular if circular is not None else (False,) * d))
    if len(hi) != d or len(depth) != d or len(circular) != d:
        raise ValueError("window, depth and circular flags must have one entry per axis")
    if any(not a < b for a, b in zip(lo, hi)):
        raise ValueError("window needs lo < hi on every axis")
    if any(k < 0 for k in depth):
        raise ValueError("depth must be non-negative")
    if sum(depth) > max_total_depth:
        raise TooManyBoxes(f"2^{sum(depth)} boxes exceeds the cap of 2^{max_total_depth}")
    return Grid(lo, hi, depth, circular)


def subdivide(grid: Grid, axes: Sequence[int] | None = None, max_total_depth: int = MAX_TOTAL_DEPTH) -> Grid:
    axes = range(grid.dim) if axes is None else axes
    depth = list(grid.depth)
    for k in axes:
        depth[k] += 1
    return build_grid(grid.lo, grid.hi, depth, grid.circular, max_total_depth)


@dataclass(frozen=True)
class BaseSampling:
    """Base samples closed under the one-step shift ``theta_T``."""

    base: BaseFlow
    m: int
    T: float
    samples: tuple
    perm: tuple[int, ...]

    @property
    def pullback(self) -> bool:
        """Line bases never come back, so each fiber is stepped by its pullback map."""
        return self.base.kind == "line"

    def leg_start(self, i: int) -> float:
        """Base point from which the time-T map of fiber ``i`` is taken."""
        p = self.samples[i]
        return p - self.T if self.pullback else p

    def header(self) -> dict:
        return {
            "base.kind": self.base.kind,
            "base.m": self.m,
            "base.T": repr(float(self.T)),
            "base.samples": [repr(float(s)) for s in self.samples],
            "base.perm": list(self.perm),
        }


def sample_base(base: BaseFlow, m: int, T: float | None = None) -> BaseSampling:
    """Choose ``m`` base samples and the step ``T`` that permutes them.

    Periodic bases use ``T = period / m``. A line base is sampled on its
    window with ``T = width / m``; since ``theta_T`` leaves the sample set,
    each line fiber ``p`` is mapped to itself by ``phi(T, theta_{-T} p)`` and
    the permutation is the identity.
    """
    if m < 1:
        raise IncompatibleSampling("need at least one base sample")
    kind = base.kind
    if kind == "trivial":
        if m != 1:
            raise IncompatibleSampling("a trivial base has exactly one sample")
        if T is None or not T > 0:
            raise IncompatibleSampling("trivial base needs an explicit time step T > 0")
        return BaseSampling(base, 1, float(T), (0.0,), (0,))
    if kind == "finite":
        if m != base.size:
            raise IncompatibleSampling(f"finite base of size {base.size} needs m = {base.size}, got {m}")
        k = 1 if T is None else T
        if int(k) != k or k < 1:
            raise IncompatibleSampling("finite base needs an integral step T >= 1")
        return BaseSampling(base, m, float(k), tuple(range(m)), permutation_power(base, int(k)))
    if kind == "periodic":
        origin, length = base.origin, base.period
    else:
        if base.window is None:
            raise IncompatibleSampling("line base needs a sampling window")
        origin, length = base.window[0], base.window[1] - base.window[0]
    step = length / m
    if T is not None and abs(T - step) > 1e-12 * length:
        raise IncompatibleSampling(f"T={T} does not divide the base period {length} into {m} steps")
    samples = tuple(origin + float(Fraction(i, m) * Fraction(length)) for i in range(m))
    perm = tuple(range(m)) if kind == "line" else tuple((i + 1) % m for i in range(m))
    return BaseSampling(base, m, step, samples, perm)
