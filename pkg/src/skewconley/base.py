"""Driving base flows: the group action that carries the time dependence."""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Sequence

import numpy as np

KINDS = ("trivial", "periodic", "finite", "line")


@dataclass(frozen=True)
class BaseFlow:
    """An invertible flow on the base space.

    ``kind`` is one of:

    * ``"trivial"``: a single point (autonomous systems), represented by ``0.0``.
    * ``"periodic"``: the circle ``[origin, origin + period)`` with translation.
    * ``"finite"``: ``{0, ..., size-1}`` with an integer-time permutation shift.
    * ``"line"``: the real line with translation. ``window`` only tells
      :func:`skewconley.grid.sample_base` where to sample.
    """

    kind: str
    period: float = 1.0
    origin: float = 0.0
    perm: tuple[int, ...] = ()
    window: tuple[float, float] | None = None
    description: str = ""
    _inverse: tuple[int, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown base kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "periodic" and not self.period > 0:
            raise ValueError("periodic base needs period > 0")
        if self.kind == "finite":
            perm = tuple(int(i) for i in self.perm)
            if sorted(perm) != list(range(len(perm))) or not perm:
                raise ValueError("finite base shift must be a bijection on {0..size-1}")
            inv = [0] * len(perm)
            for i, j in enumerate(perm):
                inv[j] = i
            object.__setattr__(self, "perm", perm)
            object.__setattr__(self, "_inverse", tuple(inv))
        if self.kind == "line" and self.window is not None:
            lo, hi = self.window
            if not lo < hi:
                raise ValueError("line base window needs lo < hi")

    @property
    def size(self) -> int:
        return len(self.perm)

    def contains(self, p) -> bool:
        if self.kind == "trivial":
            return p == 0 or p == 0.0
        if self.kind == "finite":
            return int(p) == p and 0 <= int(p) < self.size
        if self.kind == "periodic":
            return self.origin <= p < self.origin + self.period
        return bool(np.isfinite(p))

    def shift(self, p, t):
        return shift(self, p, t)


def trivial(description: str = "") -> BaseFlow:
    return BaseFlow("trivial", description=description)


def periodic(period: float, origin: float = 0.0, description: str = "") -> BaseFlow:
    return BaseFlow("periodic", period=float(period), origin=float(origin), description=description)


def finite(perm: Sequence[int], description: str = "") -> BaseFlow:
    return BaseFlow("finite", perm=tuple(perm), description=description)


def cyclic_shift(size: int, step: int = 1) -> BaseFlow:
    """Finite base ``i -> i + step mod size``."""
    return finite([(i + step) % size for i in range(size)], description=f"+{step} mod {size}")


def line(window: tuple[float, float] | None = None, description: str = "") -> BaseFlow:
    return BaseFlow("line", window=None if window is None else (float(window[0]), float(window[1])),
                    description=description)


def shift(base: BaseFlow, p, t):
    """Return ``theta_t p``.

    Finite bases only accept integral ``t``; negative times use the inverse
    permutation.
    """
    kind = base.kind
    if kind == "trivial":
        return 0.0
    if kind == "line":
        return p + t
    if kind == "periodic":
        r = (p - base.origin + t) % base.period
        if r >= base.period:  # float modulo can land on the upper endpoint
            r -= base.period
        return base.origin + r
    n = int(round(t))
    if n != t:
        raise ValueError(f"finite base needs integral time, got {t!r}")
    return permutation_power(base, n)[int(p)]


def permutation_power(base: BaseFlow, n: int) -> tuple[int, ...]:
    """The finite shift raised to the integer power ``n``."""
    perm = base.perm if n >= 0 else base._inverse
    n = abs(n) % _order(perm)
    out = list(range(len(perm)))
    for _ in range(n):
        out = [perm[i] for i in out]
    return tuple(out)


def _order(perm: tuple[int, ...]) -> int:
    seen = [False] * len(perm)
    order = 1
    for i in range(len(perm)):
        length = 0
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        if length:
            order = math.lcm(order, length)
    return order
