"""Quadrature kernels for measures on the real line.

Finite cells of a piecewise-linear density are integrated in closed form where
possible. Half-infinite and infinite ranges go through a tangent substitution
and an adaptive Simpson rule.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import QuadratureFailure

RTOL = 1e-10
ATOL = 1e-14


def adaptive_simpson(f: Callable[[float], complex], a: float, b: float, *,
                     rtol: float = RTOL, atol: float = ATOL,
                     max_depth: int = 60, max_evals: int = 400_000) -> complex:
    """Integrate ``f`` over the finite interval ``[a, b]``.

    Iterative adaptive Simpson rule with Richardson correction. ``f`` may be
    complex valued. Raises :class:`QuadratureFailure` when the evaluation budget
    is exhausted before every panel meets its share of the tolerance.
    """
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    # a coarse 8-panel pre-pass gives a scale for the relative tolerance
    xs = np.linspace(a, b, 17)
    scale = abs(sum(f(float(x)) for x in xs)) * (b - a) / 17.0
    tol = max(atol, rtol * max(scale, abs(whole)))
    evals = 20
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        evals += 2
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - s
        if abs(delta) <= 15.0 * eps or depth >= max_depth:
            if depth >= max_depth and abs(delta) > 15.0 * eps:
                raise QuadratureFailure(
                    f"adaptive Simpson stalled on [{lo}, {hi}] with error {abs(delta):.3e}")
            total += left + right + delta / 15.0
            continue
        if evals > max_evals:
            raise QuadratureFailure(f"adaptive Simpson exceeded {max_evals} evaluations")
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return total


def integrate_real_line(g: Callable[[float], complex], lo: float = -math.inf,
                        hi: float = math.inf, **kw) -> complex:
    """Integrate ``g`` over ``[lo, hi]`` (possibly infinite) with lambda = tan(theta)."""
    t0 = -math.pi / 2 if lo == -math.inf else math.atan(lo)
    t1 = math.pi / 2 if hi == math.inf else math.atan(hi)

    def h(t):
        c = math.cos(t)
        if c <= 0.0:
            return 0.0
        return g(math.tan(t)) / (c * c)

    return adaptive_simpson(h, t0, t1, **kw)


def integrate_log_tail(g: Callable[[float], complex], start: float, **kw) -> complex:
    """Integrate ``g`` over ``[start, inf)`` for ``start > 0``.

    Uses lambda = start * exp(tan(phi)), which turns algebraic tails into
    super-exponentially decaying integrands on a finite interval.
    """
    if start <= 0:
        raise ValueError("start must be positive")

    def h(phi):
        c = math.cos(phi)
        if c <= 1e-300:
            return 0.0
        u = math.tan(phi)
        if u > 300.0:
            return 0.0
        lam = start * math.exp(u)
        return g(lam) * lam / (c * c)

    return adaptive_simpson(h, 0.0, math.pi / 2, **kw)


# ---------------------------------------------------------------------------
# closed-form pieces for piecewise-linear densities


def _atan_diff(x0: np.ndarray, x1: np.ndarray) -> np.ndarray:
    """atan(x1) - atan(x0) without cancellation for narrow cells."""
    den = 1.0 + x0 * x1
    safe = den > 0
    out = np.arctan(x1) - np.arctan(x0)
    out[safe] = np.arctan((x1[safe] - x0[safe]) / den[safe])
    return out


def _log1p_complex(r: np.ndarray) -> np.ndarray:
    """Accurate complex log(1 + r)."""
    r = np.asarray(r, dtype=complex)
    out = np.log(1.0 + r)
    small = np.abs(r) < 1e-3
    if np.any(small):
        rs = r[small]
        acc = np.zeros_like(rs)
        p = rs.copy()
        for n in range(1, 12):
            acc += (-1) ** (n + 1) * p / n
            p = p * rs
        out[small] = acc
    return out


def _r_minus_log1p(r: np.ndarray) -> np.ndarray:
    """r - log(1 + r), accurate for small |r|."""
    r = np.asarray(r, dtype=complex)
    out = r - np.log(1.0 + r)
    small = np.abs(r) < 1e-2
    if np.any(small):
        rs = r[small]
        acc = np.zeros_like(rs)
        p = rs * rs
        for n in range(2, 14):
            acc += (-1) ** n * p / n
            p = p * rs
        out[small] = acc
    return out


def cauchy_cells(grid: np.ndarray, values: np.ndarray, z: complex) -> complex:
    """Exact integral of the piecewise-linear density against 1/(lambda - z).

    ``z`` must lie off the closed support cells (complex, or real outside every
    cell with positive density).
    """
    x0, x1 = grid[:-1], grid[1:]
    h = x1 - x0
    r0 = values[:-1]
    b = (values[1:] - r0) / h
    w = x0 - z
    r = h / w
    L = _log1p_complex(r)
    return complex(np.sum(r0 * L + b * w * _r_minus_log1p(r)))


def compensation_cells(grid: np.ndarray, values: np.ndarray) -> float:
    """Exact integral of the density against lambda/(1+lambda^2)."""
    x0, x1 = grid[:-1], grid[1:]
    h = x1 - x0
    r0 = values[:-1]
    b = (values[1:] - r0) / h
    a = r0 - b * x0  # density = a + b*lambda on the cell
    dlog = np.log1p(h * (x1 + x0) / (1.0 + x0 * x0))
    datan = _atan_diff(x0, x1)
    return float(np.sum(0.5 * a * dlog + b * (h - datan)))


def weighted_cells(grid: np.ndarray, values: np.ndarray, exponent: float) -> float:
    """Integral of the piecewise-linear density against (1+lambda^2)^exponent."""
    x0, x1 = grid[:-1], grid[1:]
    h = x1 - x0
    r0 = values[:-1]
    b = (values[1:] - r0) / h
    a = r0 - b * x0
    if exponent == 0.0:
        return float(np.sum(0.5 * h * (values[:-1] + values[1:])))
    if exponent == -1.0:
        dlog = np.log1p(h * (x1 + x0) / (1.0 + x0 * x0))
        return float(np.sum(a * _atan_diff(x0, x1) + 0.5 * b * dlog))
    if exponent == -2.0:
        f0 = 0.5 * (x1 / (1 + x1 * x1) - x0 / (1 + x0 * x0) + _atan_diff(x0, x1))
        f1 = -0.5 * (1.0 / (1 + x1 * x1) - 1.0 / (1 + x0 * x0))
        return float(np.sum(a * f0 + b * f1))
    # general exponent: adaptive Simpson in theta per cell
    total = 0.0
    e = exponent
    for lo, hi, aa, bb in zip(x0, x1, a, b):
        if aa == 0.0 and bb == 0.0:
            continue

        def g(t, aa=aa, bb=bb):
            c = math.cos(t)
            return (aa + bb * math.tan(t)) * c ** (-2.0 * e - 2.0)

        total += adaptive_simpson(g, math.atan(lo), math.atan(hi)).real
    return total
