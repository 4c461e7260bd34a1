"""Minimal CSR digraph shared by the transition graph and combinatorial tests."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from . import _kernels

INT32_MAX = np.iinfo(np.int32).max


def index_dtype(n: int):
    """Narrowest id type for ``n`` nodes (edge lists dominate memory)."""
    return np.int32 if n <= INT32_MAX else np.int64


class Digraph:
    """Directed graph on ``0..n-1`` with sorted, duplicate-free successor lists."""

    outside = -1

    def __init__(self, indptr: np.ndarray, indices: np.ndarray):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=index_dtype(len(self.indptr) - 1))
        self._transpose = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Digraph":
        E = edges if isinstance(edges, np.ndarray) else list(edges)
        E = np.asarray(E, dtype=np.int64).reshape(-1, 2)
        if len(E):
            E = np.unique(E, axis=0)
            if E.min() < 0 or E.max() >= n:
                raise ValueError("edge endpoint out of range")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(E[:, 0], minlength=n), out=indptr[1:])
        return cls(indptr, E[:, 1].copy())

    @property
    def n_nodes(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return int(self.indptr[-1])

    def successors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edges(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n_nodes, dtype=np.int64), np.diff(self.indptr))
        return np.stack([src, self.indices], axis=1)

    def transpose(self) -> tuple[np.ndarray, np.ndarray]:
        if self._transpose is None:
            self._transpose = _kernels.transpose_csr(self.indptr, self.indices, self.n_nodes)
        return self._transpose
