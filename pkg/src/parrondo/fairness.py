"""Middle-band probability that makes game B fair.

Closed forms exist for 2 to 5 players; any other size goes through the
numeric solver, which scans the middle-band probability for sign changes
of the game-B current and bisects each one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GameParams, SolverError, ThresholdMode, batch_current, current
from .roots import bisect, bisect_many, sign_changes

DEFAULT_TOL = 1e-12
COARSE_GRID = 65
# endpoints 0 and 1 make the middle band absorbing; sample just inside them
EDGE = 1e-12


class NoFairSolutionError(SolverError):
    def __init__(self, message, endpoint_currents=None):
        super().__init__(message)
        self.endpoint_currents = endpoint_currents


@dataclass(frozen=True)
class FairnessQuery:
    n_players: int
    p_b1: float
    p_b3: float
    tolerance: float = DEFAULT_TOL
    threshold_mode: ThresholdMode = ThresholdMode.RAW

    def __post_init__(self):
        if int(self.n_players) != self.n_players or self.n_players < 2:
            raise ValueError(f"n_players must be an integer >= 2, got {self.n_players!r}")
        for name in ("p_b1", "p_b3"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        object.__setattr__(self, "threshold_mode", ThresholdMode.parse(self.threshold_mode))


def _closed_n2(p1, p3):
    return (p1 - 1) / (p1 - p3 - 1)


def _closed_n3(p1, p3):
    # the printed "+" branch of the square root
    return ((p1 - 1) * (p3 + 1) + math.sqrt((p1 - 2) * (p1 - 1) * p3 * (p3 + 1))) / (
        p1 + p3 - 1
    )


def _closed_n4(p1, p3):
    return (p1 - 1) ** 2 * (p3 + 1) / (1 + p3 + (p1 - 2) * (p1 + p1 * p3 - p3**2))


def _closed_n5(p1, p3):
    ratio = (5 + 2 * p1 * (p1 - 3)) / (1 + 2 * p3 * (1 + p3))
    return 1.0 / (1 - p3 / (p1 - 1) * math.sqrt(ratio))


CLOSED_FORMS = {2: _closed_n2, 3: _closed_n3, 4: _closed_n4, 5: _closed_n5}


def fair_pb2_closed(query: FairnessQuery) -> float:
    """Closed-form fair middle-band probability for 2 to 5 players."""
    formula = CLOSED_FORMS.get(query.n_players)
    if formula is None:
        raise SolverError(
            f"no closed form for N={query.n_players}; use fair_pb2_numeric instead"
        )
    if query.threshold_mode is not ThresholdMode.RAW:
        raise SolverError("closed forms assume raw-fraction band thresholds")
    try:
        value = formula(float(query.p_b1), float(query.p_b3))
    except (ZeroDivisionError, ValueError) as exc:
        raise NoFairSolutionError(
            f"no fair p_B2 exists in range: closed form undefined at "
            f"p_B1={query.p_b1}, p_B3={query.p_b3} ({exc})"
        ) from None
    if not (math.isfinite(value) and 0.0 <= value <= 1.0):
        raise NoFairSolutionError(
            f"no fair p_B2 exists in range: closed form gives {value!r}"
        )
    return value


def _game_b(query, p2):
    return GameParams(
        query.n_players,
        (query.p_b1, p2, query.p_b3),
        gamma=0.0,
        threshold_mode=query.threshold_mode,
    )


def coarse_grid(points=COARSE_GRID):
    grid = np.linspace(0.0, 1.0, points)
    grid[0], grid[-1] = EDGE, 1.0 - EDGE
    return grid


def fair_pb2_numeric(query: FairnessQuery, grid_points=COARSE_GRID) -> list[float]:
    """All fair middle-band probabilities in ascending order.

    Raises :class:`NoFairSolutionError` when the game-B current does not
    change sign on ``[0, 1]``.
    """
    grid = coarse_grid(grid_points)
    p_b = np.column_stack(
        [np.full_like(grid, query.p_b1), grid, np.full_like(grid, query.p_b3)]
    )
    js = batch_current(query.n_players, p_b, 0.0, mode=query.threshold_mode)
    if np.isnan(js).any():
        # surfaces the reducible-chain message for the first bad point
        current(_game_b(query, float(grid[np.flatnonzero(np.isnan(js))[0]])))

    def f(p2):
        return current(_game_b(query, p2))

    brackets, nodes = sign_changes(js, zero_tol=query.tolerance)
    roots = [float(grid[k]) for k in nodes]
    for a, b in brackets:
        roots.append(bisect(f, grid[a], grid[b], query.tolerance, js[a], js[b]))
    if not roots:
        raise NoFairSolutionError(
            f"no fair p_B2 exists for N={query.n_players}, p_B1={query.p_b1}, "
            f"p_B3={query.p_b3}: J^B = {js[0]:.6g} at p_B2=0 and {js[-1]:.6g} at p_B2=1",
            endpoint_currents=(float(js[0]), float(js[-1])),
        )
    return sorted(roots)


def fair_pb2_batch(n, p_b1, p_b3, tol=DEFAULT_TOL, mode=ThresholdMode.RAW,
                   grid_points=COARSE_GRID):
    """Smallest fair middle-band probability for many ``(p_b1, p_b3)`` pairs.

    Vectorized counterpart of :func:`fair_pb2_numeric` used by the scanners.
    Pairs without a sign change (or with a reducible game B) give ``nan``.
    """
    p_b1, p_b3 = np.broadcast_arrays(np.asarray(p_b1, float), np.asarray(p_b3, float))
    shape = p_b1.shape
    p1, p3 = p_b1.ravel(), p_b3.ravel()
    grid = coarse_grid(grid_points)
    m, k = p1.size, grid.size
    p_b = np.empty((m, k, 3))
    p_b[..., 0] = p1[:, None]
    p_b[..., 1] = grid[None, :]
    p_b[..., 2] = p3[:, None]
    js = batch_current(n, p_b, 0.0, mode=mode)

    s = np.where(np.abs(js) <= tol, 0.0, np.sign(js))
    exact = s == 0
    flip = (s[:, :-1] * s[:, 1:]) < 0
    # first zero-crossing per row: an on-grid zero or a strict flip, whichever is first
    first_exact = np.where(exact.any(axis=1), exact.argmax(axis=1), k)
    first_flip = np.where(flip.any(axis=1), flip.argmax(axis=1), k)
    out = np.full(m, np.nan)

    take_exact = first_exact <= first_flip
    rows = np.flatnonzero(take_exact & (first_exact < k))
    out[rows] = grid[first_exact[rows]]

    rows = np.flatnonzero(~take_exact & (first_flip < k))
    if rows.size:
        a = first_flip[rows]

        def f(x, active):
            r = rows[active]
            pb = np.column_stack([p1[r], x, p3[r]])
            return batch_current(n, pb, 0.0, mode=mode)

        x, _ = bisect_many(f, grid[a], grid[a + 1], js[rows, a], js[rows, a + 1], tol)
        out[rows] = x
    return out.reshape(shape)


def is_fair(params: GameParams, tol: float) -> bool:
    return abs(current(params)) < tol
