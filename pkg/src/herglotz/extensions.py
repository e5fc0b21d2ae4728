"""Extensions with deficiency indices (1, 1) in the Donoghue normalisation.

A :class:`DonoghueModel` is a measure normalised by the integral of
1/(1+lambda^2) and of infinite total mass; its m-function takes the value
``i`` at ``z = i``. Other self-adjoint extensions follow by the rotation
``m -> (-sin t + cos t m)/(cos t + sin t m)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import Inconclusive, InvalidMeasure
from .herglotz_core import HerglotzRep, evaluate, evaluate_real, rotate_value
from .measures import (ExtensionType, Measure, classify_extension_type,
                       weighted_mass)

NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class DonoghueModel:
    """Normalised measure of infinite mass with an extension angle alpha."""

    measure: Measure
    angle: float = 0.0
    validate: bool = True

    def __post_init__(self):
        if not 0.0 <= self.angle < math.pi:
            raise InvalidMeasure("angle must lie in [0, pi)")
        if self.validate:
            w = weighted_mass(self.measure, -1.0)
            if abs(w - 1.0) > NORMALIZATION_TOL:
                raise InvalidMeasure(f"measure is not normalised (weighted mass {w!r})")
            if not self.measure.total_mass_is_infinite():
                raise InvalidMeasure("model measure needs a tail of infinite total mass")

    @property
    def rep(self) -> HerglotzRep:
        return HerglotzRep(self.measure)

    def __call__(self, z):
        return donoghue_m(self, z)


def _rep_of(model) -> HerglotzRep:
    if isinstance(model, DonoghueModel):
        return model.rep
    if isinstance(model, Measure):
        return HerglotzRep(model)
    if isinstance(model, HerglotzRep):
        return model
    raise TypeError("expected a DonoghueModel, Measure or HerglotzRep")


def donoghue_m(model: DonoghueModel | Measure, z: complex) -> complex:
    """Integral of ``1/(lambda - z) - lambda/(1 + lambda^2)`` against the measure.

    A bare :class:`Measure` is accepted too (for example a truncated lattice),
    in which case no normalisation is enforced.
    """
    return complex(evaluate(_rep_of(model), z))


def donoghue_m_real(model: DonoghueModel | Measure, lam: float) -> float:
    """Real-axis value at a point more than 1e-8 away from the support."""
    return float(evaluate_real(_rep_of(model), lam).real)


@dataclass(frozen=True)
class ExtensionFamily:
    """Rotations of a base model at angle ``alpha0``."""

    base: DonoghueModel | Callable[[complex], complex]
    alpha0: float = 0.0

    def m(self, z: complex) -> complex:
        b = self.base
        return donoghue_m(b, z) if isinstance(b, DonoghueModel) else complex(b(z))

    def evaluator(self, beta: float) -> Callable[[complex], complex]:
        return lambda z: rotate_family(self, beta, z)


def rotate_family(fam: ExtensionFamily, beta: float, z: complex) -> complex:
    """m_beta(z) from m_alpha0(z) by the rotation with angle beta - alpha0."""
    return rotate_value(fam.m(z), float(beta) - fam.alpha0)


def functional_bound(model: DonoghueModel | Measure) -> float:
    """Integral of (1+lambda^2)^(-2): the sharp constant of the boundary functional."""
    m = model.measure if isinstance(model, DonoghueModel) else model
    return weighted_mass(m, -2.0)


# ---------------------------------------------------------------------------
# deficiency elements in the spectral representation


def u_hat_plus(lam):
    return 1.0 / (np.asarray(lam, dtype=float) - 1j)


def u_hat_minus(lam, alpha0: float):
    return -cmath.exp(-2j * alpha0) / (np.asarray(lam, dtype=float) + 1j)


def extension_element(lam, alpha: float, alpha0: float):
    """Closed form of ``u_plus + exp(2 i alpha) u_minus`` in the spectral picture."""
    lam = np.asarray(lam, dtype=float)
    ph = alpha - alpha0
    return 2j * cmath.exp(1j * ph) * (math.cos(ph) - lam * math.sin(ph)) / (1.0 + lam * lam)


def primeness_integral(m: Measure, alpha: float, alpha0: float) -> float:
    """Integral of lambda^2 |u_plus + exp(2 i alpha) u_minus|^2 over an atomic measure.

    Finite for any truncated measure; it grows without bound with the
    truncation when alpha != alpha0 and the full measure has infinite mass.
    """
    if m.grid is not None or m.tail.kind != "none":
        raise InvalidMeasure("primeness integral is evaluated on atomic truncations only")
    lam = m.locations
    e = extension_element(lam, alpha, alpha0)
    return float(np.sum(m.masses * lam * lam * np.abs(e) ** 2))


# ---------------------------------------------------------------------------
# Friedrichs / Krein identification from real-axis limits


LADDER_DECADES = 6
DIVERGE_SLOPE = -0.02
CONVERGE_SLOPE = -0.1
R2_MIN = 0.99


@dataclass
class LimitFit:
    """Fit of log10 |increment| against decade index along a ladder."""

    values: list
    slope: float
    r_squared: float
    divergent: bool | None

    @property
    def limit(self):
        if self.divergent:
            return None
        return self.values[-1]


def _fit_increments(values: list[float], expected_sign: float) -> LimitFit:
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    scale = max(1.0, float(np.max(np.abs(v))))
    if np.all(np.abs(d) <= 1e-13 * scale):
        return LimitFit(values, -math.inf, 1.0, False)
    if np.any(d * expected_sign <= 0):
        return LimitFit(values, math.nan, 0.0, None)
    y = np.log10(np.abs(d))
    x = np.arange(y.size, dtype=float)
    if np.ptp(y) < 1e-10:
        slope, r2 = 0.0, 1.0
    else:
        slope, icept = np.polyfit(x, y, 1)
        resid = y - (slope * x + icept)
        var = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid ** 2)) / var
        # a flat line is a perfect fit even when tiny wiggles make var ~ resid
        if abs(slope) * (y.size - 1) < 1e-6:
            r2 = 1.0
    if slope >= DIVERGE_SLOPE and r2 >= R2_MIN:
        verdict = True
    elif slope < CONVERGE_SLOPE and r2 >= R2_MIN:
        verdict = False
    else:
        verdict = None
    return LimitFit(values, float(slope), float(r2), verdict)


@dataclass
class FKVerdict:
    type: ExtensionType
    limits: dict
    confidence: float
    measure_side: ExtensionType | None = None
    fits: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def enc(x):
            if x is None:
                return None
            if isinstance(x, float) and math.isinf(x):
                return "+inf" if x > 0 else "-inf"
            return x
        return {"type": self.type.short, "limits": {k: enc(v) for k, v in self.limits.items()},
                "confidence": self.confidence}


def identify_friedrichs_krein(model, cross_check: bool = True, far_start: int = 0,
                              near_start: int = 0) -> FKVerdict:
    """Friedrichs/Krein verdict from m on the negative real axis.

    Parameters
    ----------
    model : DonoghueModel, Measure or callable
        A callable is treated as a real-axis evaluator ``lam -> m(lam)`` for
        ``lam < 0`` and skips the measure-side cross-check.
    cross_check : bool
        Compare with :func:`classify_extension_type` on the measure; a mismatch
        raises :class:`Inconclusive`.
    far_start, near_start : int
        First decade of each six-decade ladder: ``-10**j`` and ``-10**-j`` for
        ``j = start, ..., start + 6``. Shift them past any crossover scale of
        the model so the fit sees the asymptotic regime.

    Returns
    -------
    FKVerdict
        ``limits`` holds the limit at minus infinity and at 0 from below
        (``-inf``/``+inf`` when divergent).
    """
    if callable(model) and not isinstance(model, (DonoghueModel, Measure, HerglotzRep)):
        def f(lam):
            return float(complex(model(complex(lam, 0.0))).real)
        measure = None
    else:
        rep = _rep_of(model)
        measure = rep.measure
        if measure.support_lower_bound() < -1e-12:
            from .errors import UnsupportedMeasure
            raise UnsupportedMeasure("support must lie in [0, inf)")

        def f(lam):
            return float(evaluate_real(rep, lam).real)

    j = np.arange(LADDER_DECADES + 1, dtype=float)
    far = _fit_increments([f(-(10.0 ** k)) for k in j + far_start], -1.0)
    near = _fit_increments([f(-(10.0 ** -k)) for k in j + near_start], +1.0)
    if far.divergent is None or near.divergent is None:
        raise Inconclusive(
            f"ladder slopes not decisive (far {far.slope:.3f}, R2 {far.r_squared:.3f}; "
            f"near {near.slope:.3f}, R2 {near.r_squared:.3f})")
    fr, kr = far.divergent, near.divergent
    t = (ExtensionType.FRIEDRICHS_EQUALS_KREIN if fr and kr else ExtensionType.FRIEDRICHS if fr
         else ExtensionType.KREIN if kr else ExtensionType.NEITHER)
    limits = {"lambda_to_minus_inf": -math.inf if fr else far.values[-1],
              "lambda_to_zero_minus": math.inf if kr else near.values[-1]}
    conf = min(far.r_squared, near.r_squared)
    mside = None
    if cross_check and measure is not None:
        mside = classify_extension_type(measure)
        if mside is not t:
            raise Inconclusive(f"m-side verdict {t.value} disagrees with measure-side {mside.value}")
    return FKVerdict(t, limits, conf, mside, {"far": far, "near": near})
