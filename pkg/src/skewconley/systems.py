"""Cocycles over base flows, the fixed-step integrator and the built-in systems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import base as _base
from .base import BaseFlow
from .errors import DegenerateProbe, Diverged, UnknownName

ClosedForm = Callable[[float, object, np.ndarray], np.ndarray]
VectorField = Callable[[object, np.ndarray], np.ndarray]

DEFAULT_H = 1e-3
DEFAULT_BLOWUP = 1e8


@dataclass(frozen=True)
class CocycleSystem:
    """A cocycle ``phi(t, p, x)`` over ``base``.

    Exactly one of ``closed_form`` and ``vector_field`` is given.
    ``closed_form(t, p, X)`` maps an ``(n, dim)`` array; ``vector_field(q, X)``
    is the right-hand side evaluated at the current base point ``q``.
    """

    name: str
    base: BaseFlow
    dim: int
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    closed_form: ClosedForm | None = None
    vector_field: VectorField | None = None
    h: float = DEFAULT_H
    method: str = "rk4"
    blowup: float = DEFAULT_BLOWUP
    circular: tuple[bool, ...] = ()
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if (self.closed_form is None) == (self.vector_field is None):
            raise ValueError("give exactly one of closed_form / vector_field")
        if not self.h > 0:
            raise ValueError("integrator step must be positive")
        if self.method != "rk4":
            raise ValueError(f"unsupported integrator {self.method!r}")
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != self.dim or len(hi) != self.dim:
            raise ValueError("window dimension does not match dim")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        circ = tuple(bool(c) for c in self.circular) or (False,) * self.dim
        if len(circ) != self.dim:
            raise ValueError("circular flags do not match dim")
        object.__setattr__(self, "circular", circ)
        if self.vector_field is not None and self.base.kind == "finite":
            raise ValueError("vector-field cocycles need a continuous-time base")

    @property
    def exact(self) -> bool:
        return self.closed_form is not None

    def with_step(self, h: float) -> "CocycleSystem":
        return _replace(self, h=float(h))

    def wrap(self, X: np.ndarray) -> np.ndarray:
        """Reduce circular coordinates into the window."""
        if not any(self.circular):
            return X
        X = np.array(X, dtype=float, copy=True)
        for k, c in enumerate(self.circular):
            if c:
                width = self.hi[k] - self.lo[k]
                X[..., k] = self.lo[k] + np.mod(X[..., k] - self.lo[k], width)
        return X

    def distance(self, a, b) -> np.ndarray:
        """Euclidean distance, measured along the circle on circular axes."""
        d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
        for k, c in enumerate(self.circular):
            if c:
                width = self.hi[k] - self.lo[k]
                dk = np.mod(d[..., k], width)
                d[..., k] = np.minimum(dk, width - dk)
        return np.sqrt(np.sum(d * d, axis=-1))


def _replace(sys: CocycleSystem, **changes) -> CocycleSystem:
    import dataclasses

    return dataclasses.replace(sys, **changes)


def _as_points(sys: CocycleSystem, x) -> tuple[np.ndarray, bool]:
    X = np.asarray(x, dtype=float)
    single = X.ndim <= 1
    X = X.reshape(-1, sys.dim) if single else X
    if X.shape[-1] != sys.dim:
        raise ValueError(f"state dimension {X.shape[-1]} != {sys.dim}")
    return X, single


def _beyond(Y: np.ndarray, bound: float) -> np.ndarray:
    # NaN compares false, so non-finite rows are flagged too
    return ~(np.einsum("ij,ij->i", Y, Y) <= bound * bound)


def integrate(sys: CocycleSystem, p, X: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Evolve an ``(n, dim)`` batch for time ``t`` from base point ``p``.

    Returns ``(Y, diverged)``; rows that crossed the blow-up bound are frozen
    at their last admissible value and flagged instead of raising.
    """
    if t < 0:
        raise ValueError("evolve needs t >= 0")
    X = np.array(X, dtype=float, copy=True)
    bad = np.zeros(len(X), dtype=bool)
    if t == 0:
        return X, bad
    if sys.closed_form is not None:
        with np.errstate(over="ignore", invalid="ignore"):
            Y = np.asarray(sys.closed_form(t, p, X), dtype=float).reshape(X.shape)
            bad = _beyond(Y, sys.blowup)
        Y[bad] = X[bad]
        return sys.wrap(Y), bad

    f = sys.vector_field
    h = sys.h
    n = int(math.floor(t / h + 1e-9))
    rem = t - n * h
    steps = [(k * h, h) for k in range(n)]
    if rem > 1e-9 * h:
        steps.append((n * h, rem))
    b = sys.base
    for s, dt in steps:
        q0 = _base.shift(b, p, s)
        qm = _base.shift(b, p, s + 0.5 * dt)
        q1 = _base.shift(b, p, s + dt)
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = f(q0, X)
            k2 = f(qm, X + 0.5 * dt * k1)
            k3 = f(qm, X + 0.5 * dt * k2)
            k4 = f(q1, X + dt * k3)
            Y = X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            now_bad = _beyond(Y, sys.blowup)
        if now_bad.any():
            bad |= now_bad
            Y[bad] = X[bad]
        X = Y
    return sys.wrap(X), bad


def evolve(sys: CocycleSystem, p, x, t: float) -> np.ndarray:
    """``phi(t, p, x)`` for a single state or an ``(n, dim)`` batch."""
    X, single = _as_points(sys, x)
    Y, bad = integrate(sys, p, X, t)
    if bad.any():
        raise Diverged(f"{sys.name}: state norm exceeded {sys.blowup:g} before t={t:g}")
    return Y[0] if single else Y


def shift(base: BaseFlow, p, t):
    return _base.shift(base, p, t)


def cocycle_residual(sys: CocycleSystem, p, x, s: float, t: float) -> float:
    """``|phi(t+s, p, x) - phi(t, theta_s p, phi(s, p, x))|``."""
    direct = evolve(sys, p, x, t + s)
    composed = evolve(sys, _base.shift(sys.base, p, s), evolve(sys, p, x, s), t)
    return float(np.max(sys.distance(direct, composed)))


def stationary_residual(sys: CocycleSystem, x_map: Callable, p, t: float) -> float:
    """``|phi(t, p, x(p)) - x(theta_t p)|`` for a candidate stationary solution."""
    x0 = np.atleast_1d(np.asarray(x_map(p), dtype=float))
    x1 = np.atleast_1d(np.asarray(x_map(_base.shift(sys.base, p, t)), dtype=float))
    return float(sys.distance(evolve(sys, p, x0, t), x1))


# ---------------------------------------------------------------------------
# energy conditions for u' = A u + B(u, u) + f


@dataclass(frozen=True)
class BilinearSystemSpec:
    """``u' = A(q) u + B(q)(u, u) + f(q)``.

    ``B(q)`` returns a ``(dim, dim, dim)`` tensor ``T`` with
    ``B(u, v)_i = sum_jk T[i, j, k] u_j v_k``.
    """

    dim: int
    A: Callable[[object], np.ndarray]
    B: Callable[[object], np.ndarray]
    f: Callable[[object], np.ndarray]

    def bilinear(self, q, u, v) -> np.ndarray:
        return np.einsum("ijk,...j,...k->...i", np.asarray(self.B(q), dtype=float), u, v)

    def rhs(self, q, U: np.ndarray) -> np.ndarray:
        A = np.asarray(self.A(q), dtype=float)
        return U @ A.T + self.bilinear(q, U, U) + np.asarray(self.f(q), dtype=float)


def _unit_probes(rng: np.random.Generator, n: int, dim: int, max_redraw: int = 100) -> np.ndarray:
    out = np.empty((n, dim))
    for i in range(n):
        for _ in range(max_redraw):
            u = rng.standard_normal(dim)
            norm = np.linalg.norm(u)
            if norm > 0:
                out[i] = u / norm
                break
        else:
            raise DegenerateProbe("random generator keeps producing zero probe vectors")
    return out


def check_energy_conditions(spec: BilinearSystemSpec, base_samples: Sequence, probes: int = 200,
                            seed: int = 0, rng: np.random.Generator | None = None) -> dict:
    """Probe the dissipativity and energy-conservation conditions.

    ``alpha_estimate`` is the smallest observed ``-<A u, u>/|u|^2``;
    ``antisymmetry_defect`` the largest ``|<B(u,v),w> + <B(u,w),v>|`` over unit
    probes. ``C_B`` is a probe lower estimate of the bilinear norm and
    ``ratio_ok`` reports ``|f| C_B / alpha^2 < 1`` (false whenever
    ``alpha <= 0``).
    """
    if probes < 1:
        raise ValueError("probe count must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(seed)
    alpha = math.inf
    defect = 0.0
    c_b = 0.0
    f_norm = 0.0
    for q in base_samples:
        A = np.asarray(spec.A(q), dtype=float)
        U = _unit_probes(rng, probes, spec.dim)
        V = _unit_probes(rng, probes, spec.dim)
        W = _unit_probes(rng, probes, spec.dim)
        quad = np.einsum("ni,ij,nj->n", U, A, U)
        alpha = min(alpha, float(np.min(-quad)))
        buv = spec.bilinear(q, U, V)
        buw = spec.bilinear(q, U, W)
        defect = max(defect, float(np.max(np.abs(np.sum(buv * W, axis=1) + np.sum(buw * V, axis=1)))))
        c_b = max(c_b, float(np.max(np.linalg.norm(buv, axis=1))))
        f_norm = max(f_norm, float(np.linalg.norm(np.asarray(spec.f(q), dtype=float))))
    ratio = f_norm * c_b / alpha ** 2 if alpha > 0 else math.inf
    return {
        "alpha_estimate": alpha,
        "antisymmetry_defect": defect,
        "C_B": c_b,
        "f_norm": f_norm,
        "ratio": ratio,
        "ratio_ok": bool(alpha > 0 and ratio < 1.0),
    }


def bilinear_system(spec: BilinearSystemSpec, base: BaseFlow, lo, hi, name: str = "bilinear",
                    h: float = DEFAULT_H) -> CocycleSystem:
    return CocycleSystem(name=name, base=base, dim=spec.dim, lo=tuple(lo), hi=tuple(hi),
                         vector_field=spec.rhs, h=h)


# ---------------------------------------------------------------------------
# built-in systems

LORENZ_DEFAULTS = {"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0, "amplitude": 5.0, "forcing_period": 1.0}


def _example_5_1(params: dict) -> CocycleSystem:
    p_lo, p_hi = params.get("base_window", (-2.0, 2.0))
    lo, hi = params.get("lo", (-2.0,)), params.get("hi", (2.0,))

    def closed(t, p, X):
        # x' = 2 s x from initial time p
        return X * np.exp(t * t + 2.0 * t * p)

    return CocycleSystem("example-5-1", _base.line((p_lo, p_hi), "initial time"), 1, lo, hi,
                         closed_form=closed, params=dict(params))


def phi0_neg_cos(t: float, x: np.ndarray) -> np.ndarray:
    """Closed-form flow of ``x' = -cos x`` on the circle (result in ``[-pi, pi)``).

    On ``(-pi/2, pi/2)`` the solution is ``gd(gd^-1(x) - t)`` with the
    Gudermannian ``gd``; the other arc follows from ``x -> pi - x``.
    """
    x = np.mod(np.asarray(x, dtype=float) + 0.5 * np.pi, 2 * np.pi) - 0.5 * np.pi  # x in [-pi/2, 3pi/2)
    upper = x > 0.5 * np.pi
    y = np.where(upper, np.pi - x, x)
    with np.errstate(divide="ignore"):
        z = np.arcsin(np.tanh(np.arctanh(np.sin(y)) - t))
    # equilibria stay put (arctanh(+-1) = +-inf)
    z = np.where(np.abs(y) == 0.5 * np.pi, y, z)
    out = np.where(upper, np.pi - z, z)
    return np.mod(out + np.pi, 2 * np.pi) - np.pi


def _example_5_2(params: dict) -> CocycleSystem:
    two_pi = 2.0 * np.pi

    def field(q, X):
        # conjugate of x' = -cos x by the rotation psi(q) x = x + q with q' = 1
        return 1.0 - np.cos(X - q)

    return CocycleSystem("example-5-2-circle", _base.periodic(two_pi, 0.0, "phase"), 1, (0.0,), (two_pi,),
                         vector_field=field, circular=(True,), h=params.get("h", DEFAULT_H),
                         params=dict(params))


def _double_well(params: dict) -> CocycleSystem:
    lo, hi = params.get("lo", (-2.0,)), params.get("hi", (2.0,))

    def field(q, X):
        return X - X ** 3

    return CocycleSystem("double-well", _base.trivial(), 1, lo, hi, vector_field=field,
                         h=params.get("h", DEFAULT_H), params=dict(params))


def double_well_exact(t: float, x):
    """Closed-form flow of ``x' = x - x^3`` (used as an independent oracle)."""
    x = np.asarray(x, dtype=float)
    e = math.exp(2.0 * t)
    return x * math.exp(t) / np.sqrt(1.0 - x * x + x * x * e)


def _forced_lorenz(params: dict) -> CocycleSystem:
    prm = {**LORENZ_DEFAULTS, **{k: v for k, v in params.items() if k in LORENZ_DEFAULTS}}
    sigma, rho, beta = prm["sigma"], prm["rho"], prm["beta"]
    amp, period = prm["amplitude"], prm["forcing_period"]
    if period <= 0 or sigma <= 0 or beta <= 0:
        raise ValueError("forced-lorenz needs sigma, beta, forcing_period > 0")
    omega = 2.0 * np.pi / period

    def field(q, X):
        x, y, z = X[:, 0], X[:, 1], X[:, 2]
        out = np.empty_like(X)
        out[:, 0] = sigma * (y - x)
        out[:, 1] = x * (rho - z) - y + amp * math.sin(omega * q)
        out[:, 2] = x * y - beta * z
        return out

    lo = params.get("lo", (-30.0, -30.0, -10.0))
    hi = params.get("hi", (30.0, 30.0, 60.0))
    return CocycleSystem("forced-lorenz", _base.periodic(period, 0.0, "forcing phase"), 3, lo, hi,
                         vector_field=field, h=params.get("h", DEFAULT_H), params=prm)


def shifted_lorenz_spec(params: dict | None = None) -> BilinearSystemSpec:
    """Forced Lorenz in the variables ``(x, y, z - rho - sigma)``.

    In these coordinates ``<A u, u> = -sigma x^2 - y^2 - beta z^2`` and the
    quadratic part conserves ``|u|^2``.
    """
    prm = {**LORENZ_DEFAULTS, **(params or {})}
    sigma, rho, beta = prm["sigma"], prm["rho"], prm["beta"]
    amp, omega = prm["amplitude"], 2.0 * np.pi / prm["forcing_period"]
    A = np.array([[-sigma, sigma, 0.0], [-sigma, -1.0, 0.0], [0.0, 0.0, -beta]])
    T = np.zeros((3, 3, 3))
    T[1, 0, 2] = -1.0  # y' gets -x z
    T[2, 0, 1] = 1.0   # z' gets  x y
    return BilinearSystemSpec(
        dim=3,
        A=lambda q: A,
        B=lambda q: T,
        f=lambda q: np.array([0.0, amp * math.sin(omega * q), -beta * (rho + sigma)]),
    )


_BUILTINS = {
    "example-5-1": _example_5_1,
    "example-5-2-circle": _example_5_2,
    "forced-lorenz": _forced_lorenz,
    "double-well": _double_well,
}

BUILTIN_NAMES = tuple(_BUILTINS)


def make_builtin(name: str, params: dict | None = None, h: float | None = None) -> CocycleSystem:
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise UnknownName(f"unknown system {name!r}; builtins are {', '.join(_BUILTINS)}") from None
    sys = factory(dict(params or {}))
    return sys.with_step(h) if h is not None else sys
