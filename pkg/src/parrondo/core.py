"""Exact solution of the N-player collective Parrondo games.

The collective state is the number of winners ``i`` among ``N`` players.
Each round one player is picked uniformly at random and plays game A
(with probability ``gamma``) or game B, whose win probability depends on
``i`` through three bands.  Because only one flag changes per round, the
lumped chain on ``0..N`` is a birth-death chain and its stationary state
has a product form.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "ThresholdMode",
    "GameParams",
    "TransitionRow",
    "SolverError",
    "ReducibleChainError",
    "band_indices",
    "win_prob_b",
    "effective_win_probs",
    "transition_row",
    "transition_vectors",
    "transition_matrix",
    "evolve",
    "stationary",
    "p_win",
    "current",
    "check_distribution",
]

NORM_TOL = 1e-12


class SolverError(ValueError):
    """Raised when a solve cannot produce a unique, meaningful answer."""


class ReducibleChainError(SolverError):
    """The chain does not connect every state, so the product-form
    stationary state is not unique."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ThresholdMode(str, enum.Enum):
    """How the band edges N/3 and 2N/3 are compared with the state index."""

    RAW = "raw"
    NEAREST = "nearest"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown threshold mode {value!r}; expected 'raw' or 'nearest'"
            ) from None


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class GameParams:
    """Full parameterization of the combined game A+B.

    ``p_b`` is ordered ``(upper band, middle band, lower band)``: the first
    entry applies when many players are winners, the last when few are.
    """

    n_players: int
    p_b: tuple[float, float, float]
    gamma: float = 0.0
    p_a: float = 0.5
    threshold_mode: ThresholdMode = ThresholdMode.RAW

    def __post_init__(self):
        if int(self.n_players) != self.n_players or self.n_players < 2:
            raise ValueError(f"n_players must be an integer >= 2, got {self.n_players!r}")
        object.__setattr__(self, "n_players", int(self.n_players))
        p_b = tuple(float(p) for p in self.p_b)
        if len(p_b) != 3:
            raise ValueError(f"p_b must have three entries, got {len(p_b)}")
        object.__setattr__(self, "p_b", p_b)
        object.__setattr__(self, "threshold_mode", ThresholdMode.parse(self.threshold_mode))
        _check_prob("p_a", self.p_a)
        _check_prob("gamma", self.gamma)
        for k, p in enumerate(p_b, start=1):
            _check_prob(f"p_b{k}", p)

    def with_gamma(self, gamma):
        return replace(self, gamma=gamma)

    def with_p_b(self, p_b):
        return replace(self, p_b=tuple(p_b))


@dataclass(frozen=True)
class TransitionRow:
    forward: float
    stay: float
    backward: float


def _nearest_int(x: Fraction) -> int:
    # x = k/3 is never a half-integer, so the tie rule never matters
    return int((x + Fraction(1, 2)) // 1)


@lru_cache(maxsize=None)
def _bands(n: int, mode: ThresholdMode) -> tuple[int, ...]:
    lower, upper = Fraction(n, 3), Fraction(2 * n, 3)
    if mode is ThresholdMode.NEAREST:
        lower, upper = Fraction(_nearest_int(lower)), Fraction(_nearest_int(upper))
    out = []
    for i in range(n + 1):
        if i > upper:
            out.append(0)
        elif i < lower:
            out.append(2)
        else:
            out.append(1)
    return tuple(out)


def band_indices(n, mode=ThresholdMode.RAW):
    """Index into ``p_b`` used by each state ``0..n`` (0 upper, 1 middle, 2 lower)."""
    return np.array(_bands(int(n), ThresholdMode.parse(mode)), dtype=np.intp)


def _check_state(i, n):
    if int(i) != i or not 0 <= i <= n:
        raise IndexError(f"state index {i!r} out of range [0, {n}]")
    return int(i)


def win_prob_b(i, params: GameParams) -> float:
    """Winning probability in game B when ``i`` players are winners."""
    i = _check_state(i, params.n_players)
    return params.p_b[_bands(params.n_players, params.threshold_mode)[i]]


def effective_win_probs(params: GameParams) -> np.ndarray:
    """``gamma * p_a + (1 - gamma) * p_B_i`` for every state."""
    pb = np.asarray(params.p_b)[band_indices(params.n_players, params.threshold_mode)]
    return params.gamma * params.p_a + (1.0 - params.gamma) * pb


def transition_vectors(params: GameParams):
    """Return ``(forward, stay, backward)`` arrays of length N+1."""
    n = params.n_players
    w = effective_win_probs(params)
    i = np.arange(n + 1)
    fwd = (n - i) / n * w
    lose = params.gamma * (1.0 - params.p_a) + (1.0 - params.gamma) * (1.0 - _pb_vector(params))
    bwd = i / n * lose
    stay = 1.0 - fwd - bwd
    return fwd, stay, bwd


def _pb_vector(params):
    return np.asarray(params.p_b)[band_indices(params.n_players, params.threshold_mode)]


def transition_row(i, params: GameParams) -> TransitionRow:
    i = _check_state(i, params.n_players)
    fwd, stay, bwd = transition_vectors(params)
    return TransitionRow(float(fwd[i]), float(stay[i]), float(bwd[i]))


def transition_matrix(params: GameParams) -> np.ndarray:
    """Row-stochastic (N+1)x(N+1) matrix, ``T[i, j] = Prob(i -> j)``."""
    fwd, stay, bwd = transition_vectors(params)
    n = params.n_players
    t = np.diag(stay)
    t[np.arange(n), np.arange(1, n + 1)] = fwd[:-1]
    t[np.arange(1, n + 1), np.arange(n)] = bwd[1:]
    return t


def check_distribution(dist, n=None, tol=NORM_TOL) -> np.ndarray:
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 1:
        raise ValueError("distribution must be one-dimensional")
    if n is not None and dist.shape[0] != n + 1:
        raise ValueError(f"distribution has {dist.shape[0]} entries, expected {n + 1}")
    if np.any(dist < 0):
        raise ValueError("distribution has negative entries")
    total = dist.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"distribution is not normalized (sum = {total!r})")
    return dist


def evolve(dist, params: GameParams) -> np.ndarray:
    """Advance a state distribution by one round."""
    p = check_distribution(dist, params.n_players)
    fwd, stay, bwd = transition_vectors(params)
    out = stay * p
    out[1:] += fwd[:-1] * p[:-1]
    out[:-1] += bwd[1:] * p[1:]
    return out


def _log_weights(fwd, bwd):
    # log of the unnormalized product weights, shifted so the max is 0
    with np.errstate(divide="ignore"):
        steps = np.log(fwd[..., :-1]) - np.log(bwd[..., 1:])
    logw = np.concatenate(
        [np.zeros(steps.shape[:-1] + (1,)), np.cumsum(steps, axis=-1)], axis=-1
    )
    return logw - logw.max(axis=-1, keepdims=True)


def _unnormalized_stationary(params):
    fwd, _, bwd = transition_vectors(params)
    n = params.n_players
    blocked = np.flatnonzero(fwd[:-1] <= 0.0)
    if blocked.size:
        i = int(blocked[0])
        raise ReducibleChainError(
            f"reducible chain: forward probability from state {i} is zero", state=i
        )
    blocked = np.flatnonzero(bwd[1:] <= 0.0)
    if blocked.size:
        i = int(blocked[0]) + 1
        raise ReducibleChainError(
            f"reducible chain: backward probability from state {i} is zero", state=i
        )
    assert fwd.shape == (n + 1,)
    return np.exp(_log_weights(fwd, bwd))


def stationary(params: GameParams) -> np.ndarray:
    """Stationary distribution over ``0..N`` winners.

    The weight of state ``i`` is ``p_0 ... p_{i-1} q_{i+1} ... q_N``; it is
    built from the ratios ``p_i / q_{i+1}`` in log space so large N cannot
    underflow.
    """
    u = _unnormalized_stationary(params)
    return u / u.sum()


def p_win(params: GameParams) -> float:
    """Average winning probability of the combined game in the stationary state."""
    u = _unnormalized_stationary(params)
    w = effective_win_probs(params)
    # same summation order in numerator and denominator keeps w == 1/2 exact
    return float(np.sum(w * u) / np.sum(u))


def current(params: GameParams) -> float:
    """Average capital gain per round, ``2 p_win - 1``."""
    return 2.0 * p_win(params) - 1.0


def batch_current(n, p_b, gamma, p_a=0.5, mode=ThresholdMode.RAW) -> np.ndarray:
    """Vectorized current for arrays of parameters.

    ``p_b`` has shape ``(..., 3)``; ``gamma`` broadcasts against its leading
    shape.  Reducible parameter points give ``nan`` instead of raising.
    """
    p_b = np.asarray(p_b, dtype=float)
    gamma = np.asarray(gamma, dtype=float)[..., None]
    pb_i = p_b[..., band_indices(n, mode)]
    w = gamma * p_a + (1.0 - gamma) * pb_i
    lose = gamma * (1.0 - p_a) + (1.0 - gamma) * (1.0 - pb_i)
    i = np.arange(n + 1)
    fwd = (n - i) / n * w
    bwd = i / n * lose
    bad = np.any(fwd[..., :-1] <= 0.0, axis=-1) | np.any(bwd[..., 1:] <= 0.0, axis=-1)
    with np.errstate(invalid="ignore"):
        u = np.exp(_log_weights(fwd, bwd))
        j = 2.0 * (np.sum(w * u, axis=-1) / np.sum(u, axis=-1)) - 1.0
    return np.where(bad, np.nan, j)
