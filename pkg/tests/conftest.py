import numpy as np
import pytest

from parrondo import GameParams

PARRONDO_N4_PB = (0.79, 0.65, 0.15)
INVERSION_N3_PB = (0.686, 0.423, 0.8)


@pytest.fixture
def parrondo_n4():
    return GameParams(4, PARRONDO_N4_PB)


@pytest.fixture
def inversion_n3():
    return GameParams(3, INVERSION_N3_PB)


def brute_matrix(params):
    """Transition matrix assembled entry by entry from the per-state rules."""
    n = params.n_players
    lower, upper = n / 3, 2 * n / 3
    t = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        if 3 * i > 2 * n:
            pb = params.p_b[0]
        elif 3 * i < n:
            pb = params.p_b[2]
        else:
            pb = params.p_b[1]
        win = params.gamma * params.p_a + (1 - params.gamma) * pb
        # a loser is picked with prob (n-i)/n and wins; a winner is picked and loses
        up = (n - i) / n * win
        down = i / n * (1 - win)
        if i < n:
            t[i, i + 1] = up
        if i > 0:
            t[i, i - 1] = down
        t[i, i] = 1 - up - down
    assert lower <= upper
    return t


def power_stationary(t, tol=1e-15, max_iter=1_000_000):
    """Stationary vector by plain power iteration ``v <- v T``."""
    v = np.full(t.shape[0], 1.0 / t.shape[0])
    for _ in range(max_iter):
        nxt = v @ t
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - v)) < tol:
            return nxt
        v = nxt
    raise RuntimeError("power iteration did not converge")


def random_params(rng, n_max=8, gamma=None):
    n = int(rng.integers(2, n_max + 1))
    p_b = tuple(rng.uniform(0.05, 0.95, 3))
    g = float(rng.uniform(0, 1)) if gamma is None else gamma
    return GameParams(n, p_b, g, float(rng.uniform(0.05, 0.95)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS.values():
            terminalreporter.write_line(line)
