"""Scalar and matrix-valued spectral measures.

A scalar :class:`Measure` is a finite list of atoms, an optional
piecewise-linear density sampled on a grid, and an optional symbolic tail that
describes behaviour the grid cannot hold (an unbounded Lebesgue part, a power
law at infinity, or a periodically repeated atom lattice). Divergence questions
are answered from the tail tag and the endpoint exponent of the density, never
from raw quadrature.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np
from scipy import special

from . import quadrature as quad
from .errors import (DivergentIntegral, Inconclusive, InvalidMeasure, NotPSD,
                     UnsupportedMeasure, ZeroMeasure)

MERGE_TOL = 1e-10
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
SUPPORT_TOL = 1e-12
ENDPOINT_TOL = 1e-8
FIT_R2_MIN = 0.99
PERIODIC_TERMS = 4000


class ExtensionType(enum.Enum):
    FRIEDRICHS = "Friedrichs"
    KREIN = "Krein"
    FRIEDRICHS_EQUALS_KREIN = "FriedrichsEqualsKrein"
    NEITHER = "Neither"

    @property
    def short(self) -> str:
        """Label used by the m-function side ("Both" for the coincident case)."""
        return "Both" if self is ExtensionType.FRIEDRICHS_EQUALS_KREIN else self.value


@dataclass(frozen=True)
class Tail:
    """Symbolic tail of a scalar measure.

    kind
        ``"none"``, ``"lebesgue_over_pi"``, ``"power"`` or ``"periodic"``.
    exponent
        Power-law exponent p (``"power"`` only).
    scale
        Multiplier of the tail density. For ``"power"`` a value of ``None`` means
        continuity with the last density sample, or 1 without a density.
    period
        Lattice period (``"periodic"`` only): the atom list repeats at every
        integer multiple of the period.
    """

    kind: str = "none"
    exponent: float = 0.0
    scale: float | None = 1.0
    period: float = 0.0

    @classmethod
    def none(cls) -> "Tail":
        return cls()

    @classmethod
    def lebesgue(cls, scale: float = 1.0) -> "Tail":
        return cls("lebesgue_over_pi", scale=float(scale))

    @classmethod
    def power(cls, exponent: float, scale: float | None = None) -> "Tail":
        return cls("power", exponent=float(exponent), scale=scale)

    @classmethod
    def periodic(cls, period: float) -> "Tail":
        return cls("periodic", period=float(period))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Measure:
    """Positive Borel measure on the real line.

    Parameters
    ----------
    atoms : iterable of (location, mass)
        Point masses. Locations closer than 1e-10 are merged, zero masses
        dropped, negative masses rejected.
    density : (grid, values), optional
        Piecewise-linear density on a strictly increasing grid, zero outside it
        unless a tail says otherwise.
    tail : Tail, optional
        Symbolic tail; see :class:`Tail`. A power tail without density is the
        pure power law ``scale * lambda**p`` on (0, inf).
    """

    __slots__ = ("locations", "masses", "grid", "values", "tail")

    def __init__(self, atoms: Iterable[Sequence[float]] = (), density=None,
                 tail: Tail | None = None):
        pts = [(float(x), float(m)) for x, m in atoms]
        for x, m in pts:
            if not (math.isfinite(x) and math.isfinite(m)):
                raise InvalidMeasure("atom data must be finite")
            if m < 0:
                raise InvalidMeasure(f"negative atom mass {m} at {x}")
        pts.sort()
        locs: list[float] = []
        masses: list[float] = []
        for x, m in pts:
            if m == 0.0:
                continue
            if locs and x - locs[-1] <= MERGE_TOL:
                masses[-1] += m
            else:
                locs.append(x)
                masses.append(m)
        object.__setattr__(self, "locations", _readonly(np.array(locs, dtype=float)))
        object.__setattr__(self, "masses", _readonly(np.array(masses, dtype=float)))

        grid = values = None
        if density is not None:
            grid = np.array(density[0], dtype=float)
            values = np.array(density[1], dtype=float)
            if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
                raise InvalidMeasure("density grid and values must be 1-d of equal length >= 2")
            if not np.all(np.isfinite(grid)) or not np.all(np.isfinite(values)):
                raise InvalidMeasure("density data must be finite")
            if np.any(np.diff(grid) <= 0):
                raise InvalidMeasure("density grid must be strictly increasing")
            if np.any(values < 0):
                raise InvalidMeasure("density values must be nonnegative")
            grid, values = _readonly(grid), _readonly(values)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

        tail = tail or Tail.none()
        if tail.kind not in ("none", "lebesgue_over_pi", "power", "periodic"):
            raise InvalidMeasure(f"unknown tail kind {tail.kind!r}")
        if tail.kind == "power":
            p = tail.exponent
            if not math.isfinite(p):
                raise InvalidMeasure("power exponent must be finite")
            if grid is None:
                if p <= -1.0:
                    raise InvalidMeasure("pure power law needs exponent > -1 to be locally finite")
                scale = 1.0 if tail.scale is None else tail.scale
            else:
                if grid[-1] <= 0:
                    raise InvalidMeasure("power tail needs a grid ending at a positive point")
                scale = values[-1] / grid[-1] ** p if tail.scale is None else tail.scale
            tail = Tail("power", exponent=p, scale=float(scale))
        if tail.kind == "periodic":
            if not tail.period > 0:
                raise InvalidMeasure("periodic tail needs a positive period")
            if grid is not None:
                raise InvalidMeasure("periodic tail applies to atoms only")
            if self.locations.size and self.locations[-1] - self.locations[0] >= tail.period:
                raise InvalidMeasure("periodic generator atoms must fit in one period")
        if tail.scale is not None and (tail.scale < 0 or not math.isfinite(tail.scale)):
            raise InvalidMeasure("tail scale must be finite and nonnegative")
        object.__setattr__(self, "tail", tail)

    def __setattr__(self, name, value):
        raise AttributeError("Measure is immutable")

    def __repr__(self) -> str:
        parts = [f"atoms={len(self.locations)}"]
        if self.grid is not None:
            parts.append(f"density on [{self.grid[0]:g}, {self.grid[-1]:g}] ({self.grid.size} pts)")
        if self.tail.kind != "none":
            parts.append(f"tail={self.tail}")
        return f"Measure({', '.join(parts)})"

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.locations.tolist(), self.masses.tolist()))

    @property
    def has_density(self) -> bool:
        return self.grid is not None

    def scaled(self, c: float) -> "Measure":
        """Return ``c`` times the measure (``c >= 0``)."""
        if c < 0:
            raise InvalidMeasure("scale factor must be nonnegative")
        dens = None if self.grid is None else (self.grid, self.values * c)
        tail = self.tail
        if tail.kind in ("lebesgue_over_pi", "power"):
            tail = Tail(tail.kind, tail.exponent, tail.scale * c, tail.period)
        return Measure(zip(self.locations, self.masses * c), dens, tail)

    def density_at(self, lam) -> np.ndarray:
        """Absolutely continuous density (grid interpolation plus tail)."""
        lam = np.asarray(lam, dtype=float)
        out = np.zeros_like(lam)
        if self.grid is not None:
            inside = (lam >= self.grid[0]) & (lam <= self.grid[-1])
            out = np.where(inside, np.interp(lam, self.grid, self.values), 0.0)
        t = self.tail
        if t.kind == "lebesgue_over_pi":
            if self.grid is None:
                out = out + t.scale / math.pi
            else:
                outside = (lam < self.grid[0]) | (lam > self.grid[-1])
                out = np.where(outside, t.scale / math.pi, out)
        elif t.kind == "power":
            start = 0.0 if self.grid is None else self.grid[-1]
            with np.errstate(divide="ignore", invalid="ignore"):
                pw = t.scale * np.where(lam > start, np.abs(lam), 1.0) ** t.exponent
            out = np.where(lam > start, pw, out)
        return out

    def total_mass_is_infinite(self) -> bool:
        t = self.tail
        if t.kind == "lebesgue_over_pi":
            return t.scale > 0
        if t.kind == "power":
            return t.scale > 0 and t.exponent >= -1.0
        if t.kind == "periodic":
            return bool(self.masses.size)
        return False

    def support_lower_bound(self) -> float:
        """Infimum of the support (``-inf`` for two-sided tails)."""
        t = self.tail
        if (t.kind == "lebesgue_over_pi" and t.scale > 0) or (t.kind == "periodic" and self.masses.size):
            return -math.inf
        lows = []
        if self.locations.size:
            lows.append(self.locations[0])
        if self.grid is not None:
            pos = np.nonzero(self.values > 0)[0]
            if pos.size:
                i = pos[0]
                lows.append(self.grid[max(i - 1, 0)] if i > 0 else self.grid[0])
        if t.kind == "power" and t.scale > 0:
            lows.append(0.0 if self.grid is None else self.grid[-1])
        return min(lows) if lows else math.inf

    def distance_to_support(self, lam: float) -> float:
        """Distance from a real point to the closed support (conservative)."""
        t = self.tail
        if t.kind == "lebesgue_over_pi" and t.scale > 0:
            return 0.0
        d = math.inf
        if self.locations.size:
            if t.kind == "periodic":
                p = t.period
                r = (lam - self.locations) % p
                d = float(np.min(np.minimum(r, p - r)))
            else:
                d = float(np.min(np.abs(self.locations - lam)))
        if self.grid is not None:
            pos = self.values > 0
            cell_pos = pos[:-1] | pos[1:]
            if np.any(cell_pos):
                lo, hi = self.grid[:-1][cell_pos], self.grid[1:][cell_pos]
                dd = np.maximum(0.0, np.maximum(lo - lam, lam - hi))
                d = min(d, float(np.min(dd)))
        if t.kind == "power" and t.scale > 0:
            start = 0.0 if self.grid is None else self.grid[-1]
            d = min(d, max(0.0, start - lam))
        return d


# ---------------------------------------------------------------------------
# weighted mass


def _periodic_sum(x: float, p: float, exponent: float) -> float:
    """Sum over n of (1 + (x + n p)^2)^exponent."""
    if exponent == -1.0:
        s = 2.0 * math.pi / p
        c = math.cosh(s) if s < 700 else math.inf
        if not math.isfinite(c):
            return math.pi / p
        return (math.pi / p) * math.sinh(s) / (c - math.cos(2.0 * math.pi * x / p))
    n = np.arange(-PERIODIC_TERMS, PERIODIC_TERMS + 1)
    core = float(np.sum((1.0 + (x + n * p) ** 2) ** exponent))
    # remainder by the midpoint-integral approximation on both sides
    hi = (PERIODIC_TERMS + 0.5) * p

    def g(lam):
        return (1.0 + lam * lam) ** exponent

    rem = quad.integrate_log_tail(lambda l: g(l + x) + g(l - x), hi).real / p
    return core + rem


def weighted_mass(m: Measure, exponent: float) -> float:
    """Integral of ``(1 + lambda^2)**exponent`` against the measure.

    Parameters
    ----------
    m : Measure
    exponent : float

    Returns
    -------
    float

    Raises
    ------
    DivergentIntegral
        When the tail tag makes the integral infinite.
    QuadratureFailure
        When adaptive refinement stalls.
    """
    e = float(exponent)
    total = float(np.sum(m.masses * (1.0 + m.locations ** 2) ** e)) if m.masses.size else 0.0
    t = m.tail
    if t.kind == "periodic":
        if not m.masses.size:
            return 0.0
        if e >= -0.5:
            raise DivergentIntegral("periodic atom lattice has infinite weighted mass for exponent >= -1/2")
        return float(sum(mm * _periodic_sum(x, t.period, e) for x, mm in zip(m.locations, m.masses)))
    if m.grid is not None:
        total += quad.weighted_cells(m.grid, m.values, e)
    if t.kind == "lebesgue_over_pi" and t.scale > 0:
        if e >= -0.5:
            raise DivergentIntegral("Lebesgue tail has infinite weighted mass for exponent >= -1/2")
        full = special.beta(0.5, -e - 0.5)
        inner = 0.0
        if m.grid is not None:
            inner = quad.weighted_cells(m.grid, np.ones_like(m.grid), e)
        total += t.scale / math.pi * (full - inner)
    elif t.kind == "power" and t.scale > 0:
        p = t.exponent
        if p + 2.0 * e >= -1.0:
            raise DivergentIntegral(f"power tail lambda^{p} has infinite weighted mass for exponent {e}")
        if m.grid is None:
            total += t.scale * 0.5 * special.beta((p + 1.0) / 2.0, -e - (p + 1.0) / 2.0)
        else:
            start = m.grid[-1]
            total += t.scale * quad.integrate_log_tail(
                lambda lam: lam ** p * (1.0 + lam * lam) ** e, start).real
    return total


def donoghue_normalize(m: Measure) -> Measure:
    """Rescale so that the integral of 1/(1+lambda^2) equals one."""
    w = weighted_mass(m, -1.0)
    if not w > 0:
        raise ZeroMeasure("measure has zero weighted mass")
    return m.scaled(1.0 / w)


# ---------------------------------------------------------------------------
# extension-type classification


@dataclass(frozen=True)
class EndpointExponent:
    exponent: float
    r_squared: float


def endpoint_exponent(m: Measure, npts: int = 6) -> EndpointExponent | None:
    """Power-law exponent of the density at the origin, or None if it vanishes there.

    Only meaningful for densities whose grid reaches down to the origin
    (first grid point within 1e-8 of zero).
    """
    t = m.tail
    if m.grid is None:
        if t.kind == "power" and t.scale > 0:
            return EndpointExponent(t.exponent, 1.0)
        return None
    g, v = m.grid, m.values
    nonneg = g >= -SUPPORT_TOL
    g, v = g[nonneg], v[nonneg]
    if g.size == 0 or g[0] > ENDPOINT_TOL:
        return None
    if g[0] <= 0.0 and v[0] > 0:
        return EndpointExponent(0.0, 1.0)
    mask = (g > 0) & (v > 0)
    gs, vs = g[mask][:npts], v[mask][:npts]
    if gs.size == 0:
        return None
    if gs.size < 3:
        raise Inconclusive("too few density samples near the origin to fit an exponent")
    lx, ly = np.log(gs), np.log(vs)
    if np.ptp(ly) == 0.0:
        return EndpointExponent(0.0, 1.0)
    slope, icept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icept)
    r2 = 1.0 - float(np.sum(resid ** 2) / np.sum((ly - ly.mean()) ** 2))
    return EndpointExponent(float(slope), r2)


def _check_half_line_support(m: Measure) -> None:
    t = m.tail
    if (t.kind == "lebesgue_over_pi" and t.scale > 0) or (t.kind == "periodic" and m.masses.size):
        raise UnsupportedMeasure("measure support is not contained in [0, inf)")
    if m.locations.size and m.locations[0] < -SUPPORT_TOL:
        raise UnsupportedMeasure(f"atom at {m.locations[0]} lies below 0")
    if m.grid is not None:
        g, v = m.grid, m.values
        left_neg = g[:-1] < -SUPPORT_TOL
        cell_pos = (v[:-1] > 0) | (v[1:] > 0)
        if np.any(left_neg & cell_pos):
            raise UnsupportedMeasure("density is positive below 0")


def krein_divergent(m: Measure) -> bool:
    """Whether the integral of 1/lambda over (0, R] diverges."""
    if m.locations.size and abs(m.locations[0]) <= SUPPORT_TOL:
        return True
    ex = endpoint_exponent(m)
    if ex is None:
        return False
    if ex.r_squared < FIT_R2_MIN:
        raise Inconclusive(f"endpoint exponent fit has R^2={ex.r_squared:.4f} < {FIT_R2_MIN}")
    return ex.exponent < 0.01


def friedrichs_divergent(m: Measure) -> bool:
    """Whether the integral of 1/lambda over [R, inf) diverges."""
    t = m.tail
    return t.kind == "power" and t.scale > 0 and t.exponent >= 0.0


def classify_extension_type(m: Measure) -> ExtensionType:
    """Friedrichs/Krein type from the divergence of the integral of 1/lambda.

    Raises
    ------
    UnsupportedMeasure
        If the support leaks below 0.
    Inconclusive
        If the endpoint exponent at 0 cannot be fitted reliably.
    """
    _check_half_line_support(m)
    f = friedrichs_divergent(m)
    k = krein_divergent(m)
    if f and k:
        return ExtensionType.FRIEDRICHS_EQUALS_KREIN
    if f:
        return ExtensionType.FRIEDRICHS
    if k:
        return ExtensionType.KREIN
    return ExtensionType.NEITHER


# ---------------------------------------------------------------------------
# Cauchy transform of a scalar measure


def _power_closed_form(p: float, z: complex) -> complex:
    """Full-kernel transform of lambda^p on (0, inf), -1 < p < 1."""
    if abs(p) < 1e-14:
        return -np.log(-z)
    return -math.pi / math.sin(math.pi * p) * ((-z) ** p - math.cos(math.pi * p / 2.0))


def cauchy_transform(m: Measure, z: complex, compensated: bool = True) -> complex:
    """Integral of 1/(lambda - z) (minus lambda/(1+lambda^2) when compensated).

    ``z`` is either off the real axis or a real point off the support; callers
    are responsible for that check.
    """
    z = complex(z)
    t = m.tail
    total = 0j
    if t.kind == "periodic":
        if not compensated:
            raise InvalidMeasure("plain kernel needs a finite measure")
        from .branches import stable_cot
        p = t.period
        k = math.pi / p
        for x, mm in zip(m.locations, m.masses):
            total += mm * k * (stable_cot(k * (x - z)) - stable_cot(k * (x - 1j)).real)
        return complex(total)
    if m.masses.size:
        lam, w = m.locations, m.masses
        kern = 1.0 / (lam - z)
        if compensated:
            kern = kern - lam / (1.0 + lam * lam)
        total += complex(np.sum(w * kern))
    if m.grid is not None:
        total += quad.cauchy_cells(m.grid, m.values, z)
        if compensated:
            total -= quad.compensation_cells(m.grid, m.values)
    if t.kind == "lebesgue_over_pi" and t.scale > 0:
        if not compensated:
            raise InvalidMeasure("plain kernel needs a finite measure")
        inner = 0j
        if m.grid is not None:
            ones = np.ones_like(m.grid)
            inner = quad.cauchy_cells(m.grid, ones, z) - quad.compensation_cells(m.grid, ones)
        sgn = 1.0 if z.imag >= 0 else -1.0
        total += t.scale * (sgn * 1j - inner / math.pi)
    elif t.kind == "power" and t.scale > 0:
        p = t.exponent
        if m.grid is None:
            if not compensated:
                raise InvalidMeasure("plain kernel needs a finite measure")
            if p >= 1.0:
                raise InvalidMeasure("power tail needs exponent < 1 for a Herglotz transform")
            total += t.scale * _power_closed_form(p, z)
        else:
            if p >= 1.0:
                raise InvalidMeasure("power tail needs exponent < 1 for a Herglotz transform")
            if not compensated and p >= -1.0:
                raise InvalidMeasure("plain kernel needs a finite measure")
            if compensated:
                def g(lam):
                    return lam ** p * (1.0 + lam * z) / ((lam - z) * (1.0 + lam * lam))
            else:
                def g(lam):
                    return lam ** p / (lam - z)
            total += t.scale * quad.integrate_log_tail(g, m.grid[-1])
    return complex(total)


# ---------------------------------------------------------------------------
# matrix measures


def _hermitian_psd(W: np.ndarray, what: str) -> np.ndarray:
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise InvalidMeasure(f"{what} must be square")
    nrm = float(np.linalg.norm(W, 2)) if W.size else 0.0
    if np.linalg.norm(W - W.conj().T) > HERMITIAN_TOL * max(1.0, nrm):
        raise InvalidMeasure(f"{what} is not Hermitian")
    W = 0.5 * (W + W.conj().T)
    if nrm > 0 and np.linalg.eigvalsh(W)[0] < -PSD_TOL * nrm:
        raise NotPSD(f"{what} is not positive semidefinite")
    return W


class MatrixMeasure:
    """Finitely supported measure with Hermitian PSD k x k weights.

    Atoms closer than 1e-10 are merged by adding weights.
    """

    __slots__ = ("dimension", "locations", "weights")

    def __init__(self, atoms: Iterable[tuple[float, Any]], dimension: int | None = None):
        items = [(float(x), np.atleast_2d(np.asarray(W, dtype=complex))) for x, W in atoms]
        if dimension is None:
            if not items:
                raise InvalidMeasure("dimension required for an empty matrix measure")
            dimension = items[0][1].shape[0]
        k = int(dimension)
        if k < 1:
            raise InvalidMeasure("dimension must be positive")
        items.sort(key=lambda it: it[0])
        locs: list[float] = []
        ws: list[np.ndarray] = []
        for x, W in items:
            if W.shape != (k, k):
                raise InvalidMeasure(f"weight at {x} has shape {W.shape}, expected {(k, k)}")
            if not math.isfinite(x):
                raise InvalidMeasure("atom location must be finite")
            if locs and x - locs[-1] <= MERGE_TOL:
                ws[-1] = ws[-1] + W
            else:
                locs.append(x)
                ws.append(W)
        ws = [_hermitian_psd(W, f"weight at {x}") for x, W in zip(locs, ws)]
        object.__setattr__(self, "dimension", k)
        object.__setattr__(self, "locations", _readonly(np.array(locs, dtype=float)))
        arr = np.array(ws, dtype=complex).reshape(len(ws), k, k)
        object.__setattr__(self, "weights", _readonly(arr))

    def __setattr__(self, name, value):
        raise AttributeError("MatrixMeasure is immutable")

    def __len__(self) -> int:
        return len(self.locations)

    def __repr__(self) -> str:
        return f"MatrixMeasure(k={self.dimension}, atoms={len(self)})"

    @property
    def atoms(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.locations.tolist(), list(self.weights)))

    def total_mass(self) -> np.ndarray:
        return self.weights.sum(axis=0) if len(self) else np.zeros((self.dimension,) * 2, complex)

    def control_measure(self) -> Measure:
        """Scalar trace measure; dominates every entry of the weights."""
        return Measure(zip(self.locations, np.trace(self.weights, axis1=1, axis2=2).real))

    @classmethod
    def from_scalar(cls, m: Measure) -> "MatrixMeasure":
        if m.grid is not None or m.tail.kind != "none":
            raise InvalidMeasure("only purely atomic scalar measures convert to matrix measures")
        return cls([(x, [[w]]) for x, w in m.atoms], dimension=1)


@dataclass(frozen=True)
class WeightedL2Spec:
    """L^2 space of a matrix measure with weight (1+lambda^2)^r."""

    base: MatrixMeasure
    weight_exponent: float

    def __post_init__(self):
        if not math.isfinite(self.weight_exponent):
            raise InvalidMeasure("weight exponent must be finite")

    def weights(self) -> np.ndarray:
        return (1.0 + self.base.locations ** 2) ** self.weight_exponent

    def integral(self) -> np.ndarray:
        """Integral of the weight against the base measure (a k x k matrix)."""
        w = self.weights()
        return np.einsum("j,jab->ab", w, self.base.weights)

    def norm_squared(self, f: np.ndarray) -> float:
        """Squared norm of f given as one k-vector per atom."""
        f = np.asarray(f, dtype=complex).reshape(len(self.base), self.base.dimension)
        q = np.einsum("ja,jab,jb->j", f.conj(), self.base.weights, f).real
        return float(np.sum(self.weights() * q))


# ---------------------------------------------------------------------------
# JSON


def measure_to_dict(m: Measure) -> dict:
    d: dict[str, Any] = {"atoms": [{"x": x, "m": w} for x, w in m.atoms]}
    if m.grid is not None:
        d["density"] = {"grid": m.grid.tolist(), "values": m.values.tolist()}
    t = m.tail
    if t.kind == "none":
        d["tail"] = "none"
    elif t.kind == "lebesgue_over_pi":
        d["tail"] = "lebesgue_over_pi" if t.scale == 1.0 else {"lebesgue_over_pi": t.scale}
    elif t.kind == "power":
        d["tail"] = {"power": t.exponent, "scale": t.scale}
    else:
        d["tail"] = {"periodic": t.period}
    return d


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise InvalidMeasure(f"{where} must be a JSON object")
    extra = set(d) - allowed
    if extra:
        raise InvalidMeasure(f"unknown field(s) in {where}: {sorted(extra)}")


def measure_from_dict(d: dict) -> Measure:
    _reject_unknown(d, {"atoms", "density", "tail"}, "measure")
    atoms = []
    for a in d.get("atoms", []):
        _reject_unknown(a, {"x", "m"}, "atom")
        try:
            atoms.append((float(a["x"]), float(a["m"])))
        except KeyError as exc:
            raise InvalidMeasure(f"atom missing field {exc}") from None
    dens = None
    if d.get("density") is not None:
        dd = d["density"]
        _reject_unknown(dd, {"grid", "values"}, "density")
        try:
            dens = (dd["grid"], dd["values"])
        except KeyError as exc:
            raise InvalidMeasure(f"density missing field {exc}") from None
    raw = d.get("tail", "none")
    if raw in (None, "none"):
        tail = Tail.none()
    elif raw == "lebesgue_over_pi":
        tail = Tail.lebesgue()
    elif isinstance(raw, dict) and "power" in raw:
        _reject_unknown(raw, {"power", "scale"}, "tail")
        s = raw.get("scale")
        tail = Tail.power(float(raw["power"]), None if s is None else float(s))
    elif isinstance(raw, dict) and "lebesgue_over_pi" in raw:
        _reject_unknown(raw, {"lebesgue_over_pi"}, "tail")
        tail = Tail.lebesgue(float(raw["lebesgue_over_pi"]))
    elif isinstance(raw, dict) and "periodic" in raw:
        _reject_unknown(raw, {"periodic"}, "tail")
        tail = Tail.periodic(float(raw["periodic"]))
    else:
        raise InvalidMeasure(f"unrecognised tail {raw!r}")
    return Measure(atoms, dens, tail)


def complex_matrix_to_json(A) -> list:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    return [[[float(v.real), float(v.imag)] for v in row] for row in A]


def complex_matrix_from_json(rows) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise InvalidMeasure("matrix must be rows of [re, im] pairs") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InvalidMeasure("matrix must be rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def matrix_measure_to_dict(om: MatrixMeasure) -> dict:
    return {"dimension": om.dimension,
            "atoms": [{"x": x, "W": complex_matrix_to_json(W)} for x, W in om.atoms]}


def matrix_measure_from_dict(d: dict) -> MatrixMeasure:
    _reject_unknown(d, {"dimension", "atoms"}, "matrix measure")
    atoms = []
    for a in d.get("atoms", []):
        _reject_unknown(a, {"x", "W"}, "matrix atom")
        atoms.append((float(a["x"]), complex_matrix_from_json(a["W"])))
    return MatrixMeasure(atoms, dimension=d.get("dimension"))


def dumps_measure(m: Measure) -> str:
    return json.dumps(measure_to_dict(m))


def loads_measure(s: str) -> Measure:
    return measure_from_dict(json.loads(s))
