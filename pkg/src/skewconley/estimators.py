"""scikit-learn style wrappers.

The "training data" here is the dynamical system itself, named through the
estimator parameters, so ``fit`` ignores ``X``. ``predict`` and
``transform`` then act on state samples: rows of ``X`` are states, or
``(base point, state)`` when ``X`` has one extra leading column.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import pipeline
from .conley import enumerate_pairs, morse, verify_decomposition
from .grid import build_grid, sample_base
from .lyapunov import complete_lyapunov
from .pullback import pullback_attractor
from .systems import make_builtin
from .transition import build_transition


class _SystemMixin:
    def _system(self):
        return make_builtin(self.system, self.params, self.h)

    def _grid(self, sys_):
        depth = self.depth if np.ndim(self.depth) else [self.depth] * sys_.dim
        lo = sys_.lo if self.lo is None else self.lo
        hi = sys_.hi if self.hi is None else self.hi
        return build_grid(lo, hi, depth, sys_.circular or None)


class ConleyDecomposition(_SystemMixin, TransformerMixin, BaseEstimator):
    """Morse decomposition and complete Lyapunov function of a builtin system.

    ``predict`` gives the strong-component id of the skew node holding each
    sample (``-1`` outside the window); ``transform`` gives ``L`` followed by
    the pair functions ``l_n``.
    """

    def __init__(self, system="double-well", params=None, h=None, depth=6, lo=None, hi=None, m=None, T=None,
                 scheme="corners+center", eps_pad=None, spread_factor=0.0, escape="absorb", workers=1):
        self.system = system
        self.params = params
        self.h = h
        self.depth = depth
        self.lo = lo
        self.hi = hi
        self.m = m
        self.T = T
        self.scheme = scheme
        self.eps_pad = eps_pad
        self.spread_factor = spread_factor
        self.escape = escape
        self.workers = workers

    def fit(self, X=None, y=None):
        sys_ = self._system()
        grid = self._grid(sys_)
        m = self.m if self.m is not None else {"trivial": 1, "finite": len(sys_.base.perm)}.get(sys_.base.kind, 8)
        sampling = sample_base(sys_.base, m, self.T)
        self.graph_ = build_transition(sys_, grid, sampling, self.scheme, self.eps_pad, self.spread_factor,
                                       self.escape, self.workers)
        self.morse_ = morse(self.graph_)
        self.pairs_ = enumerate_pairs(self.graph_, self.morse_)
        self.report_ = verify_decomposition(self.graph_, self.morse_, self.pairs_)
        self.lyapunov_ = complete_lyapunov(self.graph_, self.morse_, self.pairs_)
        self.n_features_in_ = sys_.dim
        return self

    def _nodes(self, X) -> np.ndarray:
        check_is_fitted(self, "graph_")
        X = check_array(X, dtype=float)
        g = self.graph_
        d = g.grid.dim
        if X.shape[1] == d:
            base_idx = np.zeros(len(X), dtype=np.int64)
            states = X
        elif X.shape[1] == d + 1:
            base_idx = np.array([pipeline.nearest_sample(g.sampling, q) for q in X[:, 0]], dtype=np.int64)
            states = X[:, 1:]
        else:
            raise ValueError(f"X has {X.shape[1]} columns; expected {d} or {d + 1}")
        box = np.atleast_1d(g.grid.box_of(states))
        return np.where(box >= 0, base_idx * g.grid.n_boxes + box, -1)

    def predict(self, X) -> np.ndarray:
        v = self._nodes(X)
        return np.where(v >= 0, self.morse_.scc_id[np.maximum(v, 0)], -1)

    def transform(self, X) -> np.ndarray:
        v = self._nodes(X)
        cols = [self.lyapunov_.L] + list(self.lyapunov_.l)
        out = np.column_stack([c[np.maximum(v, 0)] for c in cols])
        out[v < 0] = np.nan
        return out


class PullbackAttractor(_SystemMixin, BaseEstimator):
    """Pullback attractor approximation in the fiber of base point ``p``.

    ``predict`` flags samples lying in a box of the approximation.
    """

    def __init__(self, system="double-well", params=None, h=None, depth=6, lo=None, hi=None, p=0.0,
                 U_lo=None, U_hi=None, schedule=(1.0, 2.0, 3.0, 4.0, 5.0), tol=None, scheme="corners+center",
                 eps_pad=0.0):
        self.system = system
        self.params = params
        self.h = h
        self.depth = depth
        self.lo = lo
        self.hi = hi
        self.p = p
        self.U_lo = U_lo
        self.U_hi = U_hi
        self.schedule = schedule
        self.tol = tol
        self.scheme = scheme
        self.eps_pad = eps_pad

    def fit(self, X=None, y=None):
        sys_ = self._system()
        self.grid_ = self._grid(sys_)
        U_lo = self.grid_.lo if self.U_lo is None else self.U_lo
        U_hi = self.grid_.hi if self.U_hi is None else self.U_hi
        U = pipeline.boxes_in(self.grid_, U_lo, U_hi)
        self.result_ = pullback_attractor(sys_, self.grid_, self.p, U, list(self.schedule), self.tol,
                                          self.scheme, self.eps_pad)
        self.n_features_in_ = sys_.dim
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "result_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.grid_.dim:
            raise ValueError(f"X has {X.shape[1]} columns; expected {self.grid_.dim}")
        box = np.atleast_1d(self.grid_.box_of(X))
        return np.isin(box, self.result_.A_approx) & (box >= 0)
