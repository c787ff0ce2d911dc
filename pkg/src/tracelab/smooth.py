"""Smooth test functions built from the kernel exp(-1/(1 - t^2)).

Both the bump V of the interval smoothing (Q = 1/Delta) and the master
function of the dyadic partition of unity are differences of the kernel's
normalised antiderivative, so they share one quadrature routine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(96)


def mollifier(t):
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def _integral(lo, hi):
    """int_lo^hi mollifier, elementwise, by Gauss-Legendre on each interval."""
    lo, hi = np.broadcast_arrays(np.asarray(lo, float), np.asarray(hi, float))
    half = (hi - lo)[..., None] / 2
    mid = (hi + lo)[..., None] / 2
    return np.sum(_GL_WEIGHTS * mollifier(mid + half * _GL_NODES), axis=-1) * half[..., 0]


_MASS = float(_integral(-1.0, 0.0) * 2)


def smooth_step(t):
    """Normalised antiderivative of the kernel: 0 for t <= -1, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=np.float64), -1.0, 1.0)
    # integrate from the nearer endpoint; F(-t) = 1 - F(t)
    a = np.abs(t)
    tail = _integral(a, np.ones_like(a)) / _MASS
    return np.where(t >= 0, 1.0 - tail, tail)


@dataclass(frozen=True)
class TestFunction:
    """A smooth weight V on [0, inf) with support in ``support`` and scale Q.

    The admissibility condition is |x^j V^(j)(x)| <= c_j Q^j.
    """

    __test__ = False  # not a pytest class

    func: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]
    Q: float
    name: str = "V"

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=np.float64))

    def derivative_constants(self, jmax: int = 4, npts: int = 1000) -> list[float]:
        """max over a grid of |x^j V^(j)(x)| / Q^j for j = 1..jmax (central differences)."""
        a, b = self.support
        x = np.linspace(a, b, npts)
        out = []
        for j in range(1, jmax + 1):
            h = 1e-16 ** (1 / (j + 2)) / self.Q  # balances rounding against truncation
            d = np.zeros_like(x)
            for k in range(j + 1):
                d += (-1) ** k * math.comb(j, k) * self(x + (j / 2 - k) * h)
            d /= h**j
            out.append(float(np.max(np.abs(x**j * d)) / self.Q**j))
        return out


def make_bump(delta: float) -> TestFunction:
    """V = 1 on [1, 2], 0 outside [1 - delta, 2 + delta], 0 <= V <= 1, Q = 1/delta.

    Obtained by convolving the indicator of [1 - delta/2, 2 + delta/2] with the
    kernel rescaled to half-width delta/2.
    """
    if not 0 < delta < 1:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    w = delta / 2
    lo, hi = 1 - w, 2 + w

    def bump(x):
        return smooth_step((x - lo) / w) - smooth_step((x - hi) / w)

    return TestFunction(bump, (1 - delta, 2 + delta), 1 / delta, name=f"bump({delta})")


def zero_function() -> TestFunction:
    return TestFunction(lambda x: np.zeros_like(x), (1.0, 2.0), 1.0, name="zero")


# ---------------------------------------------------------------------------
# dyadic partition of unity


def _psi(x):
    """1 on (-inf, 1], 0 on [2, inf)."""
    return 1.0 - smooth_step(2 * np.asarray(x, dtype=np.float64) - 3)


def master_bump(x):
    """W(x) = psi(x) - psi(2x): supported in (1/2, 2), W(x) + W(x/2) = 1 on [1, 2]."""
    x = np.asarray(x, dtype=np.float64)
    return _psi(x) - _psi(2 * x)


@dataclass(frozen=True)
class DyadicPartition:
    """V_l(x) = W(x / 2^l) for l = 0..l_max; the sum is 1 on [1, 2^l_max]."""

    l_max: int

    def __call__(self, l: int, x):
        return master_bump(np.asarray(x, dtype=np.float64) / 2.0**l)

    def total(self, x):
        x = np.asarray(x, dtype=np.float64)
        return sum(self(l, x) for l in range(self.l_max + 1))

    def support(self, l: int) -> tuple[float, float]:
        return (2.0 ** (l - 1), 2.0 ** (l + 1))


def dyadic_partition(l_max: int) -> DyadicPartition:
    if l_max < 1:
        raise ValidationError(f"l_max must be >= 1, got {l_max}")
    return DyadicPartition(l_max)
