"""Closed-form models on an interval [0, 2a] and on the line.

The periodic model has the Donoghue function ``-cot(az)/coth(a)``; rotating it
by an extension angle alpha gives a function whose measure is a lattice of
equal point masses at ``(beta + pi n)/a``. As ``a`` grows the functions tend to
the constant ``i``, the function of Lebesgue measure over pi.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .branches import stable_cot
from .errors import InvalidModel, SingularDenominator
from .measures import Measure, Tail


def _coth(a: float) -> float:
    return 1.0 / math.tanh(a)


def half_phase(rho: complex) -> float:
    """arg(rho)/2 taken in [0, pi).

    Both the lattice measure and the spectrum descriptor go through this
    function, so the two point sets agree bit for bit.
    """
    h = (cmath.phase(complex(rho)) % (2 * math.pi)) / 2
    return h - math.pi if h >= math.pi else h


@dataclass(frozen=True)
class LivsicInterval:
    """Interval model with half-length ``a`` and extension angle ``alpha``.

    ``beta`` locates the pole lattice: ``cot(beta) = -cot(alpha) coth(a)`` on
    (0, pi), and ``beta = 0`` for ``alpha = 0``.
    """

    a: float
    alpha: float

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise InvalidModel("half-length a must be positive and finite")
        if not 0.0 <= self.alpha < math.pi:
            raise InvalidModel("alpha must lie in [0, pi)")

    @property
    def rho(self) -> complex:
        if self.alpha == 0.0:
            return 1.0 + 0j
        s, c = math.sin(self.alpha), math.cos(self.alpha)
        return cmath.exp(2j * math.atan2(s, -c * _coth(self.a)))

    @property
    def beta(self) -> float:
        return half_phase(self.rho)

    def beta_residual(self) -> float:
        """|cos(beta) sin(alpha) + sin(beta) cos(alpha) coth(a)|.

        The defining relation with denominators cleared; 0 up to rounding.
        """
        b, al = self.beta, self.alpha
        return abs(math.cos(b) * math.sin(al) + math.sin(b) * math.cos(al) * _coth(self.a))

    @property
    def mass(self) -> float:
        """Common mass of the lattice atoms."""
        a, al = self.a, self.alpha
        ct = _coth(a)
        return ct / (a * (math.sin(al) ** 2 + math.cos(al) ** 2 * ct * ct))

    def poles(self, n: Sequence[int] | np.ndarray) -> np.ndarray:
        return _lattice(self.beta, self.a, n)


def _lattice(phase: float, a: float, n) -> np.ndarray:
    return (phase + math.pi * np.asarray(n, dtype=float)) / a


def periodic_donoghue_m(a: float, z):
    """``-cot(a z)/coth(a)`` with an overflow-free cotangent."""
    if not a > 0:
        raise InvalidModel("a must be positive")
    return -stable_cot(a * np.asarray(z, dtype=complex)) * math.tanh(a)


def livsic_rotated_m(model: LivsicInterval, z):
    """``(sin a - cos a c)/(cos a + sin a c)`` with ``c = cot(a z)/coth(a)``."""
    c = stable_cot(model.a * np.asarray(z, dtype=complex)) * math.tanh(model.a)
    s, co = math.sin(model.alpha), math.cos(model.alpha)
    den = co + s * c
    if np.any(np.abs(den) < 1e-14 * (abs(co) + np.abs(s * c))):
        raise SingularDenominator(z, math.inf)
    out = (s - co * c) / den
    return out[()] if np.ndim(out) == 0 else out


def livsic_measure(model: LivsicInterval, n_range: int = 10_000, periodic: bool = False) -> Measure:
    """Lattice measure of the rotated model.

    With ``periodic=False`` the atoms ``|n| <= n_range`` are listed explicitly;
    with ``periodic=True`` a single generator atom carries a periodic tail of
    period ``pi/a`` and represents the whole infinite lattice exactly.
    """
    if periodic:
        return Measure([(model.beta / model.a, model.mass)], tail=Tail.periodic(math.pi / model.a))
    if n_range < 1:
        raise ValueError("n_range must be >= 1")
    n = np.arange(-n_range, n_range + 1)
    return Measure(zip(model.poles(n), np.full(n.size, model.mass)))


def truncation_bound(model: LivsicInterval, n_range: int, z: complex) -> float:
    """Upper bound on the omitted lattice terms |n| > n_range of the transform at z.

    Each term is at most ``mass (1 + |l||z|)/((|l| - |z|)(1 + l^2))``; comparing
    the decreasing summand with an integral gives
    ``2 mass (a/pi)(1/L^2 + 2|z|/L)`` with ``L = pi (n_range - 1)/a``.
    """
    L = math.pi * (n_range - 1) / model.a
    az = abs(complex(z))
    if L < 2 * max(az, 1.0):
        return math.inf
    return 2.0 * model.mass * (model.a / math.pi) * (1.0 / L ** 2 + 2.0 * az / L)


def residue(f: Callable[[complex], complex], pole: float, radius: float = 1e-3, n: int = 64) -> complex:
    """Residue of ``f`` at ``pole`` from the trapezoid rule on a small circle."""
    t = 2 * np.pi * np.arange(n) / n
    w = radius * np.exp(1j * t)
    vals = np.array([complex(f(pole + wi)) for wi in w])
    return complex(np.mean(vals * w))


@dataclass
class LebesgueLimitReport:
    a_ladder: list
    distances: list
    monotone: bool

    def __bool__(self) -> bool:
        return self.monotone


def lebesgue_limit_check(a_ladder: Sequence[float], alpha: float,
                         test_z: Sequence[complex]) -> LebesgueLimitReport:
    """Sup-distance of the rotated model to the constant ``i`` along ``a_ladder``."""
    a_ladder = [float(a) for a in a_ladder]
    if any(b <= a for a, b in zip(a_ladder, a_ladder[1:])):
        raise ValueError("a_ladder must be increasing")
    zs = np.asarray(test_z, dtype=complex)
    dists = [float(np.max(np.abs(livsic_rotated_m(LivsicInterval(a, alpha), zs) - 1j)))
             for a in a_ladder]
    mono = all(d1 < d0 for d0, d1 in zip(dists, dists[1:]))
    return LebesgueLimitReport(a_ladder, dists, mono)


@dataclass(frozen=True)
class SpectrumDescriptor:
    """Closed-form spectrum: a real lattice, the empty set, or a closed half-plane."""

    kind: str
    phase: float = 0.0
    a: float = 1.0

    @property
    def offset(self) -> float:
        return self.phase / self.a

    @property
    def spacing(self) -> float:
        return math.pi / self.a

    def lattice(self, n: Sequence[int] | np.ndarray) -> np.ndarray:
        """Points ``(phase + pi n)/a``."""
        if self.kind != "lattice":
            raise InvalidModel(f"{self.kind} spectrum has no lattice points")
        return _lattice(self.phase, self.a, n)

    def contains(self, lam: complex, tol: float = 1e-12) -> bool:
        lam = complex(lam)
        if self.kind == "empty":
            return False
        if self.kind == "closed_upper_half_plane":
            return lam.imag >= 0
        if abs(lam.imag) > tol:
            return False
        r = (lam.real - self.offset) / self.spacing
        return abs(r - round(r)) * self.spacing <= tol


def quasihermitian_spectrum(model) -> SpectrumDescriptor:
    """Spectrum of the boundary-condition model.

    ``model`` is ``("interval", a, rho)`` with ``rho`` complex or ``math.inf``,
    or ``("line",)``. For ``|rho| = 1`` the spectrum is the lattice
    ``arg(rho)/(2a) + pi n/a``; ``rho = 0`` and ``rho = inf`` give the empty set;
    the line model gives the closed upper half-plane.
    """
    if not isinstance(model, tuple) or not model:
        raise InvalidModel("model must be ('interval', a, rho) or ('line',)")
    if model[0] == "line":
        if len(model) != 1:
            raise InvalidModel("line model takes no parameters")
        return SpectrumDescriptor("closed_upper_half_plane")
    if model[0] != "interval" or len(model) != 3:
        raise InvalidModel("model must be ('interval', a, rho) or ('line',)")
    a, rho = float(model[1]), model[2]
    if not a > 0:
        raise InvalidModel("a must be positive")
    if rho == 0 or (isinstance(rho, float) and math.isinf(rho)):
        return SpectrumDescriptor("empty")
    rho = complex(rho)
    if abs(abs(rho) - 1.0) > 1e-12:
        raise InvalidModel("only |rho| = 1, rho = 0 and rho = inf have closed-form spectra here")
    return SpectrumDescriptor("lattice", half_phase(rho), a)
