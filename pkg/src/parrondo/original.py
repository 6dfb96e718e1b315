"""The original single-player games, where game B depends on capital mod 3.

Arithmetic is generic: pass :class:`fractions.Fraction` values for exact
results, floats otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import ReducibleChainError


@dataclass(frozen=True)
class OriginalParams:
    """Bias ``epsilon`` and mixing probability ``gamma``.

    ``p_b`` defaults to ``(1/10 - eps, 3/4 - eps, 3/4 - eps)``; its first
    entry is used when the capital is a multiple of three.
    """

    epsilon: float = 0
    gamma: float = 0
    p_b_override: tuple | None = None

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        for p in (self.p_a, *self.p_b):
            if not 0 <= p <= 1:
                raise ValueError(f"derived probability {p!r} outside [0, 1]")

    @property
    def p_a(self):
        return Fraction(1, 2) - self.epsilon

    @property
    def p_b(self):
        if self.p_b_override is not None:
            return tuple(self.p_b_override)
        e = self.epsilon
        return (Fraction(1, 10) - e, Fraction(3, 4) - e, Fraction(3, 4) - e)

    def win_probs(self):
        """Effective win probability for capital classes 0, 1, 2."""
        g = self.gamma
        return tuple(g * self.p_a + (1 - g) * p for p in self.p_b)


def original_stationary(params: OriginalParams):
    """Stationary occupancy of the capital classes 0, 1, 2.

    Eliminating the 3x3 balance equations gives, for each class ``c``,
    ``pi_c ~ 1 - w_{c+1} + w_{c+1} w_{c+2}`` (indices mod 3).
    """
    w = params.win_probs()
    for c in range(3):
        if w[c] in (0, 1):
            raise ReducibleChainError(
                f"reducible chain: capital class {c} has win probability {w[c]}", state=c
            )
    raw = [1 - w[(c + 1) % 3] + w[(c + 1) % 3] * w[(c + 2) % 3] for c in range(3)]
    z = sum(raw)
    return tuple(x / z for x in raw)


def original_current(params: OriginalParams):
    """Average gain per round, ``2 sum_c pi_c w_c - 1``."""
    pi = original_stationary(params)
    w = params.win_probs()
    return 2 * sum(p * x for p, x in zip(pi, w)) - 1


def original_sweep(epsilon=0.0, grid=1001):
    gammas = np.linspace(0.0, 1.0, grid)
    js = np.array([float(original_current(OriginalParams(epsilon, float(g)))) for g in gammas])
    return gammas, js


def original_no_inversion_check(epsilon=0.0, grid=1001, floor=-1e-12) -> bool:
    """True when the current never drops below ``floor`` on the gamma grid."""
    _, js = original_sweep(epsilon, grid)
    return bool(np.all(js >= floor))
