"""Parameter-space scans of the combined game.

Everything here evaluates the exact current on grids: sweeps in the mixing
probability, inversion roots, labelled region maps, fair-surface curves at
fixed upper-band probability and zero-level curves at fixed mixing
probability.  Outputs are ordered by grid index, so results do not depend
on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .core import GameParams, SolverError, ThresholdMode, batch_current, current, effective_win_probs
from .fairness import DEFAULT_TOL, fair_pb2_batch
from .roots import bisect, bisect_many, sign_changes

CLASSIFY_TOL = 1e-3
ROOT_TOL = 1e-12
SWEEP_GRID = 1001
MAP_GRID = 101
# residual accepted when re-checking zero-level points
CHECK_TOL = 1e-10

FAIR, WINNING, LOSING, UNSOLVABLE = "fair", "winning", "losing", "unsolvable"

Axis = Union[int, float, Sequence[float]]


def axis_values(spec: Axis) -> np.ndarray:
    """Turn a grid spec into node values.

    An ``int`` is a node count spanning ``[0, 1]``, a ``float`` a single
    fixed value, and a sequence is used as given.
    """
    if isinstance(spec, (bool, np.bool_)):
        raise TypeError("grid spec cannot be a boolean")
    if isinstance(spec, (int, np.integer)):
        if spec < 2:
            raise ValueError(f"grid needs at least 2 nodes, got {spec}")
        return np.linspace(0.0, 1.0, int(spec))
    if isinstance(spec, (float, np.floating)):
        return np.array([float(spec)])
    values = np.asarray(spec, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("grid values must be a non-empty 1-d sequence")
    return values


def classify(j, tol=CLASSIFY_TOL):
    if np.isnan(j):
        return UNSOLVABLE
    if j >= tol:
        return WINNING
    if j <= -tol:
        return LOSING
    return FAIR


@dataclass
class SweepResult:
    gammas: np.ndarray
    currents: np.ndarray
    roots: list[float] = field(default_factory=list)
    root_tol: float = ROOT_TOL

    @property
    def points(self):
        return list(zip(self.gammas.tolist(), self.currents.tolist()))


def gamma_sweep(params: GameParams, grid: int = SWEEP_GRID, root_tol: float = ROOT_TOL) -> SweepResult:
    """Current at ``gamma = k / (grid - 1)`` plus its interior zero crossings.

    ``params.gamma`` is ignored.  Crossings touching ``gamma = 0`` or
    ``gamma = 1`` are not counted as inversions.
    """
    if int(grid) != grid or grid < 2:
        raise ValueError(f"grid must be an integer >= 2, got {grid!r}")
    gammas = np.linspace(0.0, 1.0, int(grid))
    js = batch_current(params.n_players, params.p_b, gammas, params.p_a, params.threshold_mode)
    bad = np.flatnonzero(np.isnan(js))
    if bad.size:
        g = float(gammas[bad[0]])
        try:
            current(params.with_gamma(g))
        except SolverError as exc:
            raise SolverError(f"at gamma={g}: {exc}") from exc

    def f(g):
        return current(params.with_gamma(g))

    roots = []
    if grid > 3:
        interior = js[1:-1]
        brackets, nodes = sign_changes(interior, zero_tol=root_tol)
        roots.extend(float(gammas[k + 1]) for k in nodes)
        for a, b in brackets:
            roots.append(bisect(f, gammas[a + 1], gammas[b + 1], root_tol, interior[a], interior[b]))
    roots.sort()
    return SweepResult(gammas, js, roots, root_tol)


@dataclass
class Extremum:
    lo: float
    hi: float
    gamma: float
    current: float


@dataclass
class InversionResult:
    roots: list[float]
    extrema: list[Extremum]
    sweep: SweepResult


def find_inversion(params: GameParams, grid: int = SWEEP_GRID) -> InversionResult:
    """Inversion roots in gamma and the strongest current between them.

    For each interval delimited by ``0``, the roots and ``1``, the point of
    largest ``|J|`` is located on the grid and polished with a bounded
    scalar minimizer.
    """
    sweep = gamma_sweep(params, grid)
    edges = [0.0, *sweep.roots, 1.0]
    extrema = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        inside = (sweep.gammas > lo) & (sweep.gammas < hi)
        if not inside.any():
            continue
        idx = np.flatnonzero(inside)
        k = idx[np.argmax(np.abs(sweep.currents[idx]))]
        sign = np.sign(sweep.currents[k]) or 1.0
        g0, j0 = float(sweep.gammas[k]), float(sweep.currents[k])
        a = float(sweep.gammas[max(k - 1, 0)])
        b = float(sweep.gammas[min(k + 1, len(sweep.gammas) - 1)])
        res = minimize_scalar(
            lambda g: -sign * current(params.with_gamma(g)),
            bounds=(max(a, lo), min(b, hi)),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if res.success and -res.fun * sign > abs(j0):
            g0, j0 = float(res.x), float(-res.fun * sign)
        extrema.append(Extremum(lo, hi, g0, j0))
    return InversionResult(sweep.roots, extrema, sweep)


def local_extrema(values) -> tuple[list[int], list[int]]:
    """Indices of strict interior local maxima and minima of a sampled curve."""
    v = np.asarray(values)
    up = (v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])
    down = (v[1:-1] < v[:-2]) & (v[1:-1] < v[2:])
    return (np.flatnonzero(up) + 1).tolist(), (np.flatnonzero(down) + 1).tolist()


@dataclass(frozen=True)
class RegionPoint:
    gamma: float
    pb1: float
    pb3: float
    pb2: float
    current: float
    label: str


def region_map(n, gamma: Axis = MAP_GRID, pb1: Axis = MAP_GRID, pb3: Axis = MAP_GRID,
               tol=CLASSIFY_TOL, mode=ThresholdMode.RAW, p_a=0.5, fair_tol=DEFAULT_TOL):
    """Label every ``(gamma, p_b1, p_b3)`` node as fair, winning or losing.

    The middle-band probability at each ``(p_b1, p_b3)`` is the smallest
    value making game B fair; nodes where none exists are labelled
    ``"unsolvable"``.  Points are ordered with ``gamma`` varying slowest.
    """
    gs, p1s, p3s = axis_values(gamma), axis_values(pb1), axis_values(pb3)
    P1, P3 = np.meshgrid(p1s, p3s, indexing="ij")
    p2 = fair_pb2_batch(n, P1, P3, fair_tol, mode)
    p_b = np.stack([P1, p2, P3], axis=-1)
    solvable = ~np.isnan(p2)
    js = np.full((gs.size,) + P1.shape, np.nan)
    if solvable.any():
        js[:, solvable] = batch_current(n, p_b[solvable][None, :, :], gs[:, None], p_a, mode)
    points = []
    for a, g in enumerate(gs):
        for b, x1 in enumerate(p1s):
            for c, x3 in enumerate(p3s):
                j = float(js[a, b, c])
                points.append(RegionPoint(float(g), float(x1), float(x3), float(p2[b, c]), j, classify(j, tol)))
    return points


@dataclass(frozen=True)
class SurfacePoint:
    n: int
    pb1: float
    pb2: float
    pb3: float

    @property
    def solvable(self):
        return not np.isnan(self.pb2)


def fair_surface_fixed_pb1(ns, p_b1, pb3: Axis = MAP_GRID, mode=ThresholdMode.RAW,
                           fair_tol=DEFAULT_TOL) -> list[SurfacePoint]:
    """Curve of fair ``(p_b2, p_b3)`` at fixed ``p_b1`` for one or many N.

    Nodes without a fair solution keep ``pb2 = nan``.
    """
    if np.isscalar(ns):
        ns = [ns]
    p3s = axis_values(pb3)
    out = []
    for n in ns:
        p2 = fair_pb2_batch(int(n), p_b1, p3s, fair_tol, mode)
        out.extend(SurfacePoint(int(n), float(p_b1), float(y), float(x)) for x, y in zip(p3s, p2))
    return out


@dataclass(frozen=True)
class CurvePoint:
    n: int
    gamma: float
    pb1: float
    pb3: float
    branch: str


TRIVIAL, NONTRIVIAL = "trivial", "nontrivial"


def _fair_current(n, gamma, p1, p3, mode, p_a, fair_tol):
    p2 = fair_pb2_batch(n, p1, p3, fair_tol, mode)
    p_b = np.stack([p1, p2, p3], axis=-1)
    return batch_current(n, p_b, gamma, p_a, mode)


def inversion_curve_fixed_gamma(n, gamma, pb1: Axis = MAP_GRID, pb3: Axis = MAP_GRID,
                                mode=ThresholdMode.RAW, p_a=0.5, root_tol=ROOT_TOL,
                                fair_tol=1e-14) -> list[CurvePoint]:
    """Zero set of the combined current over ``(p_b1, p_b3)`` at fixed ``gamma``.

    Game B is made fair at every point.  The diagonal ``p_b1 = 1 - p_b3``
    (always fair) is emitted as the ``"trivial"`` branch at each ``p_b3``
    node; crossings found by bisection along grid edges form the
    ``"nontrivial"`` branch.  Nontrivial points whose residual exceeds
    ``1e-10`` after bisection (discontinuities of the fair solution) are
    discarded.
    """
    p1s, p3s = axis_values(pb1), axis_values(pb3)
    P1, P3 = np.meshgrid(p1s, p3s, indexing="ij")
    js = _fair_current(n, gamma, P1, P3, mode, p_a, fair_tol)
    on_diag = np.abs(P1 + P3 - 1.0) < 1e-9
    # J vanishes to second order across the diagonal; keep its noise out of the scan
    js = np.where(on_diag, np.nan, js)
    zero = np.abs(js) < root_tol

    out = [CurvePoint(int(n), float(gamma), float(1.0 - x3), float(x3), TRIVIAL) for x3 in p3s
           if 0.0 <= 1.0 - x3 <= 1.0]

    starts, ends = [], []
    for axis in (0, 1):
        sl_a = [slice(None), slice(None)]
        sl_b = [slice(None), slice(None)]
        sl_a[axis], sl_b[axis] = slice(None, -1), slice(1, None)
        ja, jb = js[tuple(sl_a)], js[tuple(sl_b)]
        flip = (ja * jb < 0) & ~zero[tuple(sl_a)] & ~zero[tuple(sl_b)]
        ia = np.argwhere(flip)
        ib = ia.copy()
        ib[:, axis] += 1
        starts.append(ia)
        ends.append(ib)
    ia, ib = np.concatenate(starts), np.concatenate(ends)

    found = [(float(P1[i, j]), float(P3[i, j])) for i, j in np.argwhere(zero)]
    if len(ia):
        xa = np.column_stack([P1[ia[:, 0], ia[:, 1]], P3[ia[:, 0], ia[:, 1]]])
        xb = np.column_stack([P1[ib[:, 0], ib[:, 1]], P3[ib[:, 0], ib[:, 1]]])
        ja = js[ia[:, 0], ia[:, 1]]
        jb = js[ib[:, 0], ib[:, 1]]

        def f(t, active):
            pts = xa[active] + t[:, None] * (xb[active] - xa[active])
            return _fair_current(n, gamma, pts[:, 0], pts[:, 1], mode, p_a, fair_tol)

        t, res = bisect_many(f, np.zeros(len(ja)), np.ones(len(ja)), ja, jb, root_tol)
        pts = xa + t[:, None] * (xb - xa)
        keep = np.abs(res) < CHECK_TOL
        found.extend((float(a), float(b)) for a, b in pts[keep])
    found.sort()
    out.extend(CurvePoint(int(n), float(gamma), a, b, NONTRIVIAL) for a, b in found)
    return out


def site_classification(params: GameParams) -> list[str]:
    """``"winning"``, ``"losing"`` or ``"neutral"`` for each state."""
    w = effective_win_probs(params)
    return ["winning" if x > 0.5 else "losing" if x < 0.5 else "neutral" for x in w]
