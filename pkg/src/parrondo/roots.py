"""Sign-change bracketing and bisection, scalar and vectorized."""

from __future__ import annotations

import numpy as np

MAX_ITER = 200


def sign_changes(values, zero_tol=0.0):
    """Locate zero crossings in a sampled sequence.

    Values with ``|v| <= zero_tol`` count as zero.  Returns two lists:
    ``brackets`` of index pairs ``(k, k+1)`` with a strict sign flip, and
    ``nodes`` of indices that sit on a run of zeros separating opposite
    signs (the middle of the run is reported).
    """
    values = np.asarray(values, dtype=float)
    signs = np.where(np.abs(values) <= zero_tol, 0, np.sign(values)).astype(int)
    nonzero = np.flatnonzero(signs)
    brackets, nodes = [], []
    for a, b in zip(nonzero[:-1], nonzero[1:]):
        if signs[a] == signs[b]:
            continue
        if b == a + 1:
            brackets.append((int(a), int(b)))
        else:
            nodes.append(int((a + b) // 2))
    return brackets, nodes


def bisect(func, lo, hi, tol=1e-12, f_lo=None, f_hi=None, max_iter=MAX_ITER):
    """Bisect ``func`` on ``[lo, hi]`` until ``|func(x)| < tol``.

    If the interval shrinks to adjacent floats first, the endpoint with the
    smaller residual is returned.
    """
    f_lo = func(lo) if f_lo is None else f_lo
    f_hi = func(hi) if f_hi is None else f_hi
    lo, hi = float(lo), float(hi)
    if abs(f_lo) < tol:
        return lo
    if abs(f_hi) < tol:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise ValueError(f"no sign change on [{lo}, {hi}]: f = {f_lo}, {f_hi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = func(mid)
        if abs(f_mid) < tol:
            return float(mid)
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return lo if abs(f_lo) <= abs(f_hi) else hi


def bisect_many(func, lo, hi, f_lo, f_hi, tol=1e-12, max_iter=MAX_ITER):
    """Bisect many independent brackets at once.

    ``func`` maps an array of abscissae (one per bracket) to residuals.
    Returns ``(x, residual)`` arrays.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    f_lo = np.array(f_lo, dtype=float)
    f_hi = np.array(f_hi, dtype=float)
    best_x = np.where(np.abs(f_lo) <= np.abs(f_hi), lo, hi)
    best_f = np.where(np.abs(f_lo) <= np.abs(f_hi), f_lo, f_hi)
    active = np.abs(best_f) >= tol
    for _ in range(max_iter):
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        active &= (mid > lo) & (mid < hi)
        if not active.any():
            break
        f_mid = np.full_like(mid, np.nan)
        f_mid[active] = func(mid[active], active)
        improve = active & (np.abs(f_mid) < np.abs(best_f))
        best_x = np.where(improve, mid, best_x)
        best_f = np.where(improve, f_mid, best_f)
        left = active & (np.sign(f_mid) == np.sign(f_lo))
        right = active & ~left
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(right, mid, hi)
        f_hi = np.where(right, f_mid, f_hi)
        active &= ~(np.abs(f_mid) < tol)
    return best_x, best_f
