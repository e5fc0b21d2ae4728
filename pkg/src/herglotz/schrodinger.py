"""Half-line Schrodinger operators -psi'' + q psi on [0, inf).

The Weyl-Titchmarsh function is obtained from Dirichlet truncations at a
doubling ladder of radii. Each truncation integrates the Riccati equation for
the log-derivative backwards from the cutoff, switching between
``R = psi'/psi`` and ``S = psi/psi'`` so neither blows up.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .branches import sqrt_upper
from .errors import (InvalidCombination, InvalidMeasure, NoConvergence,
                     StepSizeUnderflow)
from .herglotz_core import rotate_value

ODE_RTOL = 1e-11
ODE_ATOL = 1e-13
LADDER_TOL = 1e-8
MAX_DOUBLINGS = 12


@dataclass(frozen=True)
class Potential:
    """Real potential on [0, b_max].

    Use :meth:`zero`, :meth:`table` or :meth:`from_callable`. Tables are linearly
    interpolated and held constant past the last sample.
    """

    kind: str
    grid: np.ndarray | None = None
    values: np.ndarray | None = None
    func: Callable[[float], float] | None = None
    b_max: float = math.inf

    @classmethod
    def zero(cls) -> "Potential":
        return cls("zero")

    @classmethod
    def table(cls, grid, values, b_max: float = math.inf) -> "Potential":
        g = np.asarray(grid, dtype=float)
        v = np.asarray(values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size < 2:
            raise InvalidMeasure("potential table needs matching 1-d grid and values")
        if g[0] != 0.0 or np.any(np.diff(g) <= 0):
            raise InvalidMeasure("potential grid must start at 0 and increase strictly")
        if not np.all(np.isfinite(v)):
            raise InvalidMeasure("potential values must be finite reals")
        g.setflags(write=False)
        v.setflags(write=False)
        return cls("table", g, v, None, b_max)

    @classmethod
    def from_callable(cls, f: Callable[[float], float], b_max: float = math.inf) -> "Potential":
        return cls("callable", func=f, b_max=b_max)

    @classmethod
    def from_csv(cls, path) -> "Potential":
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
        try:
            data = np.array(rows, dtype=float)
        except ValueError:
            data = np.array(rows[1:], dtype=float)  # header row
        return cls.table(data[:, 0], data[:, 1])

    def __call__(self, x: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "table":
            return float(np.interp(x, self.grid, self.values))
        return float(self.func(x))

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 <= gamma < math.pi:
        raise InvalidMeasure("boundary angle must lie in [0, pi)")
    return gamma


def _solve(rhs, span, y0, t_eval=None, **kw):
    sol = solve_ivp(rhs, span, y0, method="DOP853", rtol=ODE_RTOL, atol=ODE_ATOL,
                    t_eval=t_eval, **kw)
    if sol.status < 0:
        raise StepSizeUnderflow(sol.message)
    return sol


def fundamental_system(q: Potential, gamma: float, z: complex, x):
    """(phi, phi', theta, theta') at ``x`` (scalar or increasing array).

    Initial data at 0: ``phi = -sin g, phi' = cos g, theta = cos g, theta' = sin g``.
    """
    gamma = _check_gamma(gamma)
    z = complex(z)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0) or np.any(xs > q.b_max):
        raise InvalidMeasure("x must lie in [0, b_max]")
    s, c = math.sin(gamma), math.cos(gamma)
    y0 = np.array([-s, c, c, s], dtype=complex)

    def rhs(t, y):
        w = q(t) - z
        return np.array([y[1], w * y[0], y[3], w * y[2]])

    xmax = float(xs.max())
    if xmax == 0.0:
        out = np.tile(y0[:, None], (1, xs.size))
    else:
        sol = _solve(rhs, (0.0, xmax), y0, t_eval=np.unique(xs))
        out = np.array([np.interp(xs, sol.t, sol.y[i].real) + 1j * np.interp(xs, sol.t, sol.y[i].imag)
                        for i in range(4)])
    if np.ndim(x) == 0:
        return tuple(complex(v) for v in out[:, 0])
    return tuple(out)


def wronskian(phi, dphi, theta, dtheta):
    """phi theta' - phi' theta (equals -1 for the fundamental system)."""
    return phi * dtheta - dphi * theta


# ---------------------------------------------------------------------------
# Riccati integration


def _riccati_backward(q: Potential, z: complex, b: float) -> tuple[str, complex]:
    """Log-derivative of the Dirichlet solution at 0 (psi(b) = 0).

    Returns ``("R", psi'/psi)`` or ``("S", psi/psi')`` at x = 0.
    """
    mode, y, x = "S", 0j, b

    def rhs_S(t, v):
        return [1.0 - (q(t) - z) * v[0] * v[0]]

    def rhs_R(t, v):
        return [(q(t) - z) - v[0] * v[0]]

    def big(t, v):
        return abs(v[0]) - 2.0

    big.terminal = True
    big.direction = 1
    for _ in range(100_000):
        sol = _solve(rhs_S if mode == "S" else rhs_R, (x, 0.0), np.array([y], dtype=complex),
                     events=big)
        y = complex(sol.y[0, -1])
        x = float(sol.t[-1])
        if sol.status == 1 and x > 0.0:
            mode = "R" if mode == "S" else "S"
            y = 1.0 / y
            continue
        return mode, y
    raise StepSizeUnderflow("Riccati integration did not reach x = 0")


def _m_from_riccati(mode: str, y: complex, gamma: float) -> complex:
    s, c = math.sin(gamma), math.cos(gamma)
    if mode == "R":
        return (y * c - s) / (c + y * s)
    return (c - y * s) / (y * c + s)


@dataclass
class WeylResult:
    value: complex
    truncation_radius: float
    richardson_error: float
    ladder: list = field(default_factory=list)

    def __complex__(self) -> complex:
        return self.value


def _start_radius(q: Potential, z: complex) -> float:
    kappa = float(sqrt_upper(z - q(0.0)).imag)
    if kappa <= 0:
        return 20.0
    return float(np.clip(25.0 / kappa, 0.5, 20.0))


def weyl_m(q: Potential, gamma: float, z: complex, *, tol: float = LADDER_TOL,
           real_ok: bool = False, b0: float | None = None) -> WeylResult:
    """Weyl-Titchmarsh m-function for boundary angle ``gamma``.

    Dirichlet truncations ``m_b`` on a doubling ladder of radii; accepted when
    two successive values differ by less than ``tol * max(1, |m|)``.

    Parameters
    ----------
    q : Potential
        Assumed limit point at infinity.
    gamma : float
        Boundary angle in [0, pi).
    z : complex
        Off the real axis, or real below the essential spectrum with ``real_ok``.
    """
    gamma = _check_gamma(gamma)
    z = complex(z)
    if z.imag == 0.0 and not real_ok:
        raise InvalidMeasure("z must be off the real axis (pass real_ok=True below the spectrum)")
    b = _start_radius(q, z) if b0 is None else float(b0)
    prev = None
    ladder = []
    for _ in range(MAX_DOUBLINGS + 1):
        if b > q.b_max:
            break
        mode, y = _riccati_backward(q, z, b)
        val = _m_from_riccati(mode, y, gamma)
        ladder.append((b, val))
        if prev is not None:
            err = abs(val - prev)
            if err < tol * max(1.0, abs(val)):
                return WeylResult(val, b, err, ladder)
        prev = val
        b *= 2.0
    diffs = [abs(v1 - v0) for (_, v0), (_, v1) in zip(ladder, ladder[1:])]
    raise NoConvergence(f"Weyl ladder did not settle at z={z}; successive differences {diffs}")


def truncated_norm(q: Potential, gamma: float, z: complex, b: float) -> float:
    """L^2[0, b] norm squared of the Dirichlet-truncated Weyl solution.

    The solution is normalised by ``sin(g) psi'(0) + cos(g) psi(0) = 1``.
    """
    gamma = _check_gamma(gamma)
    z = complex(z)

    def rhs(t, y):
        return [y[1], (q(t) - z) * y[0], abs(y[0]) ** 2]

    sol = _solve(rhs, (b, 0.0), np.array([0.0, 1.0, 0.0], dtype=complex))
    psi, dpsi, acc = sol.y[:, -1]
    norm = math.sin(gamma) * dpsi + math.cos(gamma) * psi
    return float(-acc.real) / abs(norm) ** 2


# ---------------------------------------------------------------------------
# asymptotics, conversion, bounds


@dataclass
class AsymptoticsReport:
    ys: list
    values: list
    residuals: list
    exponent: float | None
    passed: bool


def weyl_asymptotics_check(q: Potential, gamma: float, ys: Sequence[float] = (1e2, 1e3, 1e4),
                           shift: float = 0.0) -> AsymptoticsReport:
    """Large-|z| behaviour along z = iy.

    For gamma = 0 the residual ``|m - i sqrt(z - shift)|`` must not increase;
    otherwise ``|m - cot(gamma)|`` must decay like ``y**(-1/2)`` (fitted
    exponent within 0.15 of -1/2).
    """
    gamma = _check_gamma(gamma)
    vals, res = [], []
    for y in ys:
        z = 1j * y
        m = weyl_m(q, gamma, z).value
        vals.append(m)
        if gamma == 0.0:
            res.append(abs(m - 1j * sqrt_upper(z - shift)))
        else:
            res.append(abs(m - math.cos(gamma) / math.sin(gamma)))
    if gamma == 0.0:
        passed = all(r1 <= r0 * (1 + 1e-6) + 1e-9 for r0, r1 in zip(res, res[1:]))
        return AsymptoticsReport(list(ys), vals, res, None, passed)
    slope = float(np.polyfit(np.log(ys), np.log(res), 1)[0])
    return AsymptoticsReport(list(ys), vals, res, slope, abs(slope + 0.5) <= 0.15)


def gamma_of_alpha(q: Potential, alpha: float) -> float:
    """Boundary angle with cot g = -Re m0(i) - Im m0(i) tan(alpha), g in [0, pi)."""
    m0 = weyl_m(q, 0.0, 1j).value
    ca, sa = math.cos(alpha), math.sin(alpha)
    num = -m0.real * ca - m0.imag * sa  # cot(g) = num / ca
    if ca < 0:
        num, ca = -num, -ca
    g = math.atan2(ca, num)
    if g >= math.pi - 1e-14 or abs(ca) < 1e-15:
        g = 0.0 if abs(ca) < 1e-15 else g % math.pi
    return g


def weyl_to_donoghue(q: Potential, alpha: float, z: complex) -> complex:
    """Donoghue m-function of the extension at angle alpha."""
    g = gamma_of_alpha(q, alpha)
    mz = weyl_m(q, g, z).value
    mi = weyl_m(q, g, 1j).value
    return (mz - mi.real) / mi.imag


@dataclass
class SharpBounds:
    sup_derivative: float
    sup_value: float
    product: float
    sobolev_constant: float
    variational: float | None = None


def _variational_derivative_bound(q: Potential, n_scales: int = 10) -> float:
    """Largest |f'(0)|^2/(||f||^2 + ||-f'' + q f||^2) over a finite basis.

    Basis x^m exp(-s x), m in {1, 2, 3}, with scales on a geometric grid. Every
    basis function satisfies f(0) = 0, so it lies in the Dirichlet domain.
    """
    scales = np.geomspace(0.15, 8.0, n_scales)
    powers = (1, 2, 3)
    X = 80.0 / scales.min()
    nodes, weights = np.polynomial.legendre.leggauss(400)
    edges = np.concatenate([[0.0], np.geomspace(1e-3, X, 60)])
    xs = np.concatenate([0.5 * (b - a) * nodes + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    ws = np.concatenate([0.5 * (b - a) * weights for a, b in zip(edges[:-1], edges[1:])])
    qx = np.array([q(x) for x in xs]) if not q.is_zero else np.zeros_like(xs)
    F, HF, b = [], [], []
    for s in scales:
        e = np.exp(-s * xs)
        for m in powers:
            f = xs ** m * e
            d2 = (m * (m - 1) * xs ** max(m - 2, 0) - 2 * m * s * xs ** (m - 1) + s * s * xs ** m) * e
            F.append(f)
            HF.append(-d2 + qx * f)
            b.append(1.0 if m == 1 else 0.0)
    F, HF, b = np.array(F), np.array(HF), np.array(b)
    G = (F * ws) @ F.T + (HF * ws) @ HF.T
    w, V = np.linalg.eigh(G)
    keep = w > 1e-13 * w.max()
    c = V[:, keep].T @ b
    return float(np.sum(c * c / w[keep]))


def sharp_bounds(q: Potential, alpha: float, variational: bool = True) -> SharpBounds:
    """Sharp constants of the boundary-value and derivative functionals.

    ``sup_derivative = Im m0(i)``, ``sup_value = cos(alpha)^2 / Im m0(i)`` and
    their product ``cos(alpha)^2``. The Sobolev-type constant is the square root
    of ``sup_derivative``. With ``variational`` a Rayleigh-quotient maximisation
    over a finite basis supplies a lower estimate of ``sup_derivative``.
    """
    m0 = weyl_m(q, 0.0, 1j).value
    d = m0.imag
    c2 = math.cos(alpha) ** 2
    v = c2 / d
    var = _variational_derivative_bound(q) if variational else None
    return SharpBounds(d, v, d * v, math.sqrt(d), var)


# ---------------------------------------------------------------------------
# point interactions


def point_interaction_m(n: int, which: str, z):
    """Closed-form Donoghue functions of point interactions in dimensions 2 and 3.

    ``n = 2``: ``-(2/pi) log z + 2i`` (Friedrichs and Krein coincide).
    ``n = 3``: Friedrichs ``i (2z)^(1/2) + 1``, Krein ``i (2/z)^(1/2) - 1`` with
    the square root branch in the upper half-plane.
    """
    which = which.lower()
    if which not in ("friedrichs", "krein"):
        raise InvalidCombination("which must be 'Friedrichs' or 'Krein'")
    z = np.asarray(z, dtype=complex)
    if n == 2:
        if which == "krein":
            raise InvalidCombination("in dimension 2 the Friedrichs and Krein extensions coincide")
        # principal log in the upper half-plane, reflected below it
        out = -(2.0 / math.pi) * np.log(z) + np.where(z.imag < 0, -2j, 2j)
    elif n == 3:
        r = sqrt_upper(z)
        out = 1j * math.sqrt(2.0) * r + 1.0 if which == "friedrichs" else 1j * math.sqrt(2.0) / r - 1.0
    else:
        raise InvalidCombination("n must be 2 or 3")
    return out[()] if np.ndim(out) == 0 else out


def aronszajn_rotate(m_gamma: complex, gamma: float, delta: float) -> complex:
    """m_delta from m_gamma: rotation by delta - gamma."""
    return rotate_value(m_gamma, delta - gamma)
