"""Direct simulation of N players with winner/loser flags.

This is deliberately independent of the lumped chain in :mod:`.core`: it
tracks every player's flag and only uses the band rule to pick game B's
win probability from the current number of winners.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence, Union

import numpy as np

from .core import GameParams, band_indices

RNG_ALGORITHM = "numpy.random.Philox"
CHUNK = 1 << 16
BATCHES = 100


def default_burn_in(n):
    return 10 * n * (n + 1)


@dataclass(frozen=True)
class SimConfig:
    seed: int
    rounds: int
    burn_in: int | None = None
    initial_state: Union[str, Sequence[bool]] = "all-losers"

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.burn_in is not None and self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if isinstance(self.initial_state, str):
            if self.initial_state not in ("all-losers", "all-winners"):
                raise ValueError(f"unknown initial state {self.initial_state!r}")
        else:
            object.__setattr__(self, "initial_state", tuple(bool(x) for x in self.initial_state))

    def resolved_burn_in(self, n):
        return default_burn_in(n) if self.burn_in is None else int(self.burn_in)

    def initial_flags(self, n):
        if self.initial_state == "all-losers":
            return [False] * n
        if self.initial_state == "all-winners":
            return [True] * n
        if len(self.initial_state) != n:
            raise ValueError(f"initial_state has {len(self.initial_state)} flags, expected {n}")
        return list(self.initial_state)


@dataclass
class SimReport:
    current_estimate: float
    standard_error: float
    state_histogram: list[float]
    rounds_measured: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def _run(params, config):
    n = params.n_players
    burn = config.resolved_burn_in(n)
    total = burn + config.rounds
    rng = np.random.Generator(np.random.Philox(config.seed))
    p_b = [params.p_b[k] for k in band_indices(n, params.threshold_mode)]
    p_a, gamma = params.p_a, params.gamma

    flags = config.initial_flags(n)
    winners = sum(flags)
    counts = [0] * (n + 1)
    outcomes = bytearray(config.rounds)
    done = 0
    while done < total:
        size = min(CHUNK, total - done)
        players = rng.integers(0, n, size=size).tolist()
        play_a = (rng.random(size) < gamma).tolist()
        coin = rng.random(size).tolist()
        for k in range(size):
            prob = p_a if play_a[k] else p_b[winners]
            who = players[k]
            won = coin[k] < prob
            if won != flags[who]:
                flags[who] = won
                winners += 1 if won else -1
            t = done + k - burn
            if t >= 0:
                outcomes[t] = won
                counts[winners] += 1
        done += size
    return np.frombuffer(bytes(outcomes), dtype=np.uint8), counts, burn


def simulate(params: GameParams, config: SimConfig) -> SimReport:
    """Play ``burn_in + rounds`` rounds and measure the last ``rounds``.

    The current estimate is the mean capital increment per measured round.
    Increments are correlated through the collective state, so the variance
    entering the standard error is the long-run variance estimated from
    batch means, not the per-round sample variance.
    """
    outcomes, counts, burn = _run(params, config)
    m = config.rounds
    steps = 2.0 * outcomes - 1.0
    mean = float(steps.mean())
    se = math.sqrt(long_run_variance(steps) / m)
    return SimReport(
        current_estimate=mean,
        standard_error=se,
        state_histogram=[c / m for c in counts],
        rounds_measured=m,
        metadata={
            "rng": RNG_ALGORITHM,
            "numpy_version": np.__version__,
            "seed": int(config.seed),
            "burn_in": burn,
            "initial_state": config.initial_state
            if isinstance(config.initial_state, str)
            else list(config.initial_state),
        },
    )


def long_run_variance(steps, batches=BATCHES):
    """Batch-means estimate of ``lim m * Var(mean of m steps)``."""
    m = len(steps)
    b = min(batches, m // 2)
    if b < 2:
        return 0.0
    size = m // b
    means = steps[: b * size].reshape(b, size).mean(axis=1)
    return float(size * means.var(ddof=1))


def empirical_stationary(params: GameParams, config: SimConfig) -> np.ndarray:
    return np.asarray(simulate(params, config).state_histogram)


def merge_reports(reports: Sequence[SimReport]) -> SimReport:
    """Combine independent replicas by inverse-variance weighting.

    Histograms are pooled in proportion to measured rounds.
    """
    if not reports:
        raise ValueError("nothing to merge")
    se = np.array([r.standard_error for r in reports])
    est = np.array([r.current_estimate for r in reports])
    if np.any(se == 0):
        weights = (se == 0).astype(float)
    else:
        weights = 1.0 / se**2
    mean = float(np.sum(weights * est) / np.sum(weights))
    merged_se = float(np.sqrt(1.0 / np.sum(weights))) if np.all(se > 0) else 0.0
    rounds = np.array([r.rounds_measured for r in reports], dtype=float)
    hist = np.sum(rounds[:, None] * np.array([r.state_histogram for r in reports]), axis=0) / rounds.sum()
    return SimReport(
        current_estimate=mean,
        standard_error=merged_se,
        state_histogram=hist.tolist(),
        rounds_measured=int(rounds.sum()),
        metadata={"merged_seeds": [r.metadata.get("seed") for r in reports],
                  "rng": reports[0].metadata.get("rng")},
    )
