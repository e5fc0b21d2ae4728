"""Evaluate, verify, invert, transform and continue Herglotz functions.

A Herglotz function here is represented by ``C + D z`` plus the integral of
``1/(lambda - z) - lambda/(1 + lambda^2)`` against a measure (the "full"
kernel), or plain ``1/(lambda - z)`` for finite measures. Values in the lower
half-plane come from the reflection ``M(conj z) = M(z)^*``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import optimize

from .errors import (EvalOnRealAxis, InvalidMeasure, NonHerglotzSample,
                     NotJUnitary, OutsideValidityRectangle, SingularDenominator)
from .measures import (MatrixMeasure, Measure, ExtensionType, cauchy_transform,
                       classify_extension_type, complex_matrix_from_json,
                       complex_matrix_to_json, weighted_mass)

HERMITIAN_TOL = 1e-12
JUNITARY_TOL = 1e-10
COND_MAX = 1e12
POSITIVITY_TOL = 1e-10
REAL_AXIS_GUARD = 1e-8
DEFAULT_EPS_LADDER = (1e-2, 5e-3, 2.5e-3, 1.25e-3)
ATOM_THRESHOLD = 1e-6
ATOM_DRIFT = 0.10


# ---------------------------------------------------------------------------
# representation


class HerglotzRep:
    """Constant, slope and measure of a Herglotz function.

    Parameters
    ----------
    measure : Measure or MatrixMeasure
    constant : array_like, optional
        Hermitian k x k matrix (a real number when k = 1).
    slope : array_like, optional
        Positive semidefinite k x k matrix.
    compensation : {"full", "plain"}
        ``"plain"`` drops the lambda/(1+lambda^2) term and needs a finite measure.
    """

    def __init__(self, measure: Measure | MatrixMeasure, constant=0.0, slope=0.0,
                 compensation: str = "full"):
        if compensation not in ("full", "plain"):
            raise ValueError("compensation must be 'full' or 'plain'")
        k = measure.dimension if isinstance(measure, MatrixMeasure) else 1
        C = np.asarray(constant, dtype=complex)
        D = np.asarray(slope, dtype=complex)
        C = C * np.eye(k) if C.ndim == 0 else C.reshape(k, k)
        D = D * np.eye(k) if D.ndim == 0 else D.reshape(k, k)
        if np.linalg.norm(C - C.conj().T) > HERMITIAN_TOL * max(1.0, np.linalg.norm(C)):
            raise InvalidMeasure("constant term must be Hermitian")
        if np.linalg.norm(D - D.conj().T) > HERMITIAN_TOL * max(1.0, np.linalg.norm(D)):
            raise InvalidMeasure("slope must be Hermitian")
        if np.linalg.eigvalsh(0.5 * (D + D.conj().T))[0] < -1e-12 * max(1.0, np.linalg.norm(D)):
            raise InvalidMeasure("slope must be positive semidefinite")
        if compensation == "plain" and isinstance(measure, Measure) and measure.total_mass_is_infinite():
            raise InvalidMeasure("plain kernel needs a measure of finite total mass")
        self.measure = measure
        self.k = k
        self.constant = 0.5 * (C + C.conj().T)
        self.slope = 0.5 * (D + D.conj().T)
        self.compensation = compensation

    @property
    def is_scalar(self) -> bool:
        return isinstance(self.measure, Measure)

    def __call__(self, z):
        if np.ndim(z) == 0:
            return evaluate(self, z)
        zs = np.asarray(z, dtype=complex)
        out = [evaluate(self, complex(w)) for w in zs.ravel()]
        return np.array(out).reshape(zs.shape + (() if self.is_scalar else (self.k, self.k)))


def _upper_value(rep: HerglotzRep, z: complex, real_ok: bool = False):
    full = rep.compensation == "full"
    if rep.is_scalar:
        val = cauchy_transform(rep.measure, z, compensated=full)
        return complex(rep.constant[0, 0].real + rep.slope[0, 0].real * z + val)
    om: MatrixMeasure = rep.measure
    lam = om.locations
    kern = 1.0 / (lam - z)
    if full:
        kern = kern - lam / (1.0 + lam * lam)
    S = np.einsum("j,jab->ab", kern, om.weights) if len(om) else np.zeros((rep.k, rep.k), complex)
    return rep.constant + rep.slope * z + S


def evaluate(rep: HerglotzRep, z: complex):
    """Value M(z) off the real axis.

    Returns a complex number for scalar representations and a k x k array
    otherwise. Lower half-plane values are conjugate transposes of upper ones,
    so the reflection rule holds exactly.
    """
    z = complex(z)
    if z.imag == 0.0:
        raise EvalOnRealAxis(f"cannot evaluate on the real axis at z={z}")
    if z.imag > 0:
        return _upper_value(rep, z)
    v = _upper_value(rep, z.conjugate())
    return v.conjugate() if rep.is_scalar else v.conj().T


eval = evaluate  # noqa: A001  (public name used throughout the docs)


def evaluate_real(rep: HerglotzRep, lam: float):
    """Value at a real point off the support (distance > 1e-8)."""
    lam = float(lam)
    if rep.is_scalar:
        d = rep.measure.distance_to_support(lam)
    else:
        locs = rep.measure.locations
        d = float(np.min(np.abs(locs - lam))) if locs.size else math.inf
    if not d > REAL_AXIS_GUARD:
        raise EvalOnRealAxis(f"real point {lam} is within {REAL_AXIS_GUARD} of the support")
    v = _upper_value(rep, complex(lam, 0.0))
    return complex(v.real) if rep.is_scalar else 0.5 * (v + v.conj().T)


# ---------------------------------------------------------------------------
# verification


@dataclass
class HerglotzReport:
    min_eigenvalue: float
    n_samples: int
    passed: bool
    bound_margin: float | None = None
    worst_z: complex | None = None

    def __bool__(self) -> bool:
        return self.passed


def _as_matrix(v) -> np.ndarray:
    return np.atleast_2d(np.asarray(v, dtype=complex))


def weyl_lower_bound(z: complex) -> float:
    """Lower bound for Im M(z)/Im z of a Donoghue-normalised function."""
    return 1.0 / (max(1.0, abs(z) ** 2) + abs(z.real))


def verify_herglotz(target: HerglotzRep | Callable, samples: Iterable[complex],
                    check_bound: bool = False, tol: float = POSITIVITY_TOL) -> HerglotzReport:
    """Sample the positivity of Im M on points of the upper half-plane.

    With ``check_bound`` the report also carries the smallest value of
    ``Im M(z)/Im z - 1/(max(1,|z|^2) + |Re z|)`` (smallest eigenvalue in the
    matrix case), which is nonnegative for Donoghue-normalised functions.
    """
    mins = math.inf
    margin = math.inf
    worst = None
    n = 0
    for z in samples:
        z = complex(z)
        if not z.imag > 0:
            raise ValueError(f"sample {z} is not in the open upper half-plane")
        M = _as_matrix(target(z))
        imM = (M - M.conj().T) / 2j
        ev = float(np.linalg.eigvalsh(imM)[0])
        if ev < mins:
            mins, worst = ev, z
        if check_bound:
            margin = min(margin, ev / z.imag - weyl_lower_bound(z))
        n += 1
    passed = mins >= -tol and (not check_bound or margin >= -1e-8)
    return HerglotzReport(mins, n, passed, margin if check_bound else None, worst)


# ---------------------------------------------------------------------------
# J-unitary linear fractional transformations


def j_matrix(k: int) -> np.ndarray:
    Z, I = np.zeros((k, k)), np.eye(k)
    return np.block([[Z, -I], [I, Z]]).astype(complex)


@dataclass(frozen=True)
class JUnitary:
    """Block matrix A with A^* J A = J, J = [[0, -I], [I, 0]]."""

    A11: np.ndarray
    A12: np.ndarray
    A21: np.ndarray
    A22: np.ndarray

    def __post_init__(self):
        blocks = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in
                  (self.A11, self.A12, self.A21, self.A22)]
        k = blocks[0].shape[0]
        if any(b.shape != (k, k) for b in blocks):
            raise NotJUnitary("all blocks must be k x k")
        for name, b in zip(("A11", "A12", "A21", "A22"), blocks):
            b.setflags(write=False)
            object.__setattr__(self, name, b)
        res = self.residual()
        if res > JUNITARY_TOL * max(1.0, np.linalg.norm(self.matrix) ** 2):
            raise NotJUnitary(f"A*JA - J has norm {res:.3e}")

    @property
    def k(self) -> int:
        return self.A11.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.A11, self.A12], [self.A21, self.A22]])

    def residual(self) -> float:
        A = self.matrix
        J = j_matrix(self.k)
        return float(np.linalg.norm(A.conj().T @ J @ A - J))

    @classmethod
    def from_matrix(cls, A) -> "JUnitary":
        A = np.asarray(A, dtype=complex)
        k = A.shape[0] // 2
        return cls(A[:k, :k], A[:k, k:], A[k:, :k], A[k:, k:])

    @classmethod
    def identity(cls, k: int = 1) -> "JUnitary":
        I, Z = np.eye(k), np.zeros((k, k))
        return cls(I, Z, Z, I)

    @classmethod
    def rotation(cls, theta: float, k: int = 1) -> "JUnitary":
        """Extension rotation by angle theta: m -> (-s + c m)/(c + s m)."""
        c, s = math.cos(theta), math.sin(theta)
        I = np.eye(k)
        return cls(c * I, s * I, -s * I, c * I)

    @classmethod
    def shift(cls, dL) -> "JUnitary":
        """A = [[I, dL], [0, I]] for Hermitian dL: M -> M (I + dL M)^{-1}."""
        dL = np.atleast_2d(np.asarray(dL, dtype=complex))
        k = dL.shape[0]
        I, Z = np.eye(k), np.zeros((k, k))
        return cls(I, dL, Z, I)

    def __matmul__(self, other: "JUnitary") -> "JUnitary":
        return JUnitary.from_matrix(self.matrix @ other.matrix)

    def to_dict(self) -> dict:
        return {n: complex_matrix_to_json(getattr(self, n)) for n in ("A11", "A12", "A21", "A22")}

    @classmethod
    def from_dict(cls, d: dict) -> "JUnitary":
        extra = set(d) - {"A11", "A12", "A21", "A22"}
        if extra:
            raise InvalidMeasure(f"unknown field(s) in JUnitary: {sorted(extra)}")
        try:
            return cls(*(complex_matrix_from_json(d[n]) for n in ("A11", "A12", "A21", "A22")))
        except KeyError as exc:
            raise InvalidMeasure(f"JUnitary missing block {exc}") from None


def _lft_value(A: JUnitary, M, z=None):
    scalar = np.ndim(M) == 0
    M = _as_matrix(M)
    den = A.A11 + A.A12 @ M
    cond = np.linalg.cond(den)
    if not cond < COND_MAX:
        raise SingularDenominator(z, cond)
    num = A.A21 + A.A22 @ M
    out = np.linalg.solve(den.T, num.T).T  # num @ den^{-1}
    return complex(out[0, 0]) if scalar else out


def lft_apply(A: JUnitary, M, zs: Sequence[complex] | None = None):
    """Linear fractional transform ``(A21 + A22 M)(A11 + A12 M)^{-1}``.

    ``M`` may be a value (scalar or k x k), a stack of values, or a callable
    evaluator. For a callable the result is an evaluator, or its values at
    ``zs`` when given.

    Raises
    ------
    SingularDenominator
        When ``A11 + A12 M`` has condition number above 1e12.
    """
    if callable(M):
        def f(z):
            return _lft_value(A, M(z), z)
        if zs is None:
            return f
        return [f(complex(z)) for z in zs]
    arr = np.asarray(M, dtype=complex)
    if arr.ndim == 3:
        return np.array([_lft_value(A, Mi) for Mi in arr])
    return _lft_value(A, M)


def rotate_value(m: complex, theta: float) -> complex:
    c, s = math.cos(theta), math.sin(theta)
    den = c + s * m
    scale = abs(c) + abs(s * m)
    if abs(den) <= 1e-14 * max(scale, 1e-300):
        raise SingularDenominator(None, math.inf if den == 0 else scale / abs(den))
    return (-s + c * m) / den


def extension_rotate(m: Callable[[complex], complex], angle: float) -> Callable[[complex], complex]:
    """Evaluator ``z -> (-sin t + cos t m(z)) / (cos t + sin t m(z))``."""
    theta = float(angle)
    if not math.isfinite(theta):
        raise ValueError("rotation angle must be finite")

    def rotated(z):
        return rotate_value(complex(m(z)), theta)

    return rotated


# ---------------------------------------------------------------------------
# Stieltjes inversion


def _evaluate_many(f: Callable, zs: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(zs), dtype=complex)
        if out.shape == zs.shape:
            return out
    except Exception:  # evaluator is scalar-only
        pass
    return np.array([complex(f(complex(z))) for z in zs])


def _richardson(vals: Sequence[float], eps: Sequence[float]) -> float:
    """Linear-in-epsilon extrapolation from the two smallest epsilons."""
    e1, e0 = eps[-1], eps[-2]
    v1, v0 = vals[-1], vals[-2]
    r = e0 / e1
    return (r * v1 - v0) / (r - 1.0)


@dataclass
class InversionResult:
    measure: Measure
    atom_drift: list = field(default_factory=list)


def stieltjes_invert(evaluator: Callable[[complex], complex], window: tuple[float, float],
                     eps_ladder: Sequence[float] = DEFAULT_EPS_LADDER, n_probe: int | None = None,
                     details: bool = False) -> Measure | InversionResult:
    """Recover a scalar measure on a window from values near the real axis.

    The density is ``Im M(lambda + i eps)/pi`` extrapolated to eps -> 0 over the
    ladder. An atom is accepted where ``eps Im M``, after removing the tails of
    the neighbouring atoms, exceeds 1e-6 at every rung and drifts by less than
    10 percent; its mass is the extrapolated limit.

    Parameters
    ----------
    evaluator : callable
        Scalar Herglotz function; may accept arrays.
    window : (a, b)
    eps_ladder : sequence of float
        Decreasing, all >= 1e-6.
    n_probe : int, optional
        Number of probe points (default: spacing of a quarter of the largest eps).
    """
    a, b = map(float, window)
    eps = sorted((float(e) for e in eps_ladder), reverse=True)
    if len(eps) < 2 or eps[-1] < 1e-6 or not b > a:
        raise ValueError("need a window a < b and at least two epsilons >= 1e-6")
    if n_probe is None:
        n_probe = int(math.ceil((b - a) / (0.25 * eps[0]))) + 1
    lam = np.linspace(a, b, n_probe)
    F = np.array([_evaluate_many(evaluator, lam + 1j * e).imag for e in eps])
    if np.min(F) < -1e-8:
        i = np.unravel_index(np.argmin(F), F.shape)
        raise NonHerglotzSample(f"Im M = {F[i]:.3e} < 0 at lambda={lam[i[1]]}, eps={eps[i[0]]}")

    # atom candidates: strict local maxima at the coarsest epsilon
    F0 = F[0]
    cand = np.nonzero((F0[1:-1] > F0[:-2]) & (F0[1:-1] >= F0[2:]))[0] + 1
    h = lam[1] - lam[0]

    def g(x, e):
        return e * complex(evaluator(complex(x, e))).imag

    xs_c: list[float] = []
    G_rows: list[list[float]] = []
    for i in cand:
        if eps[0] * F0[i] <= ATOM_THRESHOLD:
            continue
        lo, hi = max(a, lam[i] - 2 * h), min(b, lam[i] + 2 * h)
        res = optimize.minimize_scalar(lambda x: -g(x, eps[-1]), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-10})
        x0 = float(res.x)
        if xs_c and abs(xs_c[-1] - x0) < 1e-6:
            continue
        xs_c.append(x0)
        G_rows.append([g(x0, e) for e in eps])

    # Each candidate sees the Lorentzian tails of its neighbours. Remove that
    # cross-talk rung by rung, then apply the threshold and drift tests and drop
    # the worst offender until every remaining candidate passes.
    xs = np.array(xs_c)
    G = np.array(G_rows).reshape(len(xs_c), len(eps))
    while xs.size:
        W = np.empty_like(G)
        for k, e in enumerate(eps):
            A = e * e / ((xs[:, None] - xs[None, :]) ** 2 + e * e)
            W[:, k] = np.linalg.solve(A, G[:, k])
        wmin, wmax = W.min(axis=1), W.max(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            drift = np.where(wmax > 0, (wmax - wmin) / wmax, np.inf)
        bad = (wmin <= ATOM_THRESHOLD) | (drift >= ATOM_DRIFT)
        if not np.any(bad):
            break
        worst = int(np.argmax(np.where(bad, drift, -np.inf)))
        xs, G = np.delete(xs, worst), np.delete(G, worst, axis=0)
    if xs.size:
        # the density adds a term linear in eps, removed by extrapolation
        atoms = [(float(x), float(_richardson(W[j], eps))) for j, x in enumerate(xs)]
        drifts = [float(d) for d in drift]
    else:
        atoms, drifts = [], []

    # density from the remainder after removing the detected atoms
    dens = []
    for k, e in enumerate(eps):
        rest = F[k].copy()
        for x0, mass in atoms:
            rest -= mass * e / ((lam - x0) ** 2 + e * e)
        dens.append(rest / math.pi)
    rho = np.clip(_richardson(dens, eps), 0.0, None)
    m = Measure(atoms, density=(lam, rho))
    return InversionResult(m, drifts) if details else m


# ---------------------------------------------------------------------------
# analytic continuation


@dataclass(frozen=True)
class AnalyticInterval:
    """Interval (lo, hi) with an analytic extension of the density below it.

    ``density_extension`` must be analytic on the rectangle
    lo < Re z < hi, -depth < Im z <= 0.
    """

    lo: float
    hi: float
    density_extension: Callable[[complex], complex]
    depth: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")
        if not self.depth > 0:
            raise ValueError("depth must be positive")

    def contains(self, z: complex) -> bool:
        return self.lo < z.real < self.hi and -self.depth < z.imag <= 0

    def check_against(self, m: Measure, n: int = 25, tol: float = 1e-8) -> float:
        """Max deviation from the measure's density inside the interval."""
        if m.locations.size and np.any((m.locations > self.lo) & (m.locations < self.hi)):
            raise InvalidMeasure("atoms inside the continuation interval")
        xs = np.linspace(self.lo, self.hi, n + 2)[1:-1]
        ext = np.array([complex(self.density_extension(complex(x, 0.0))) for x in xs])
        err = float(np.max(np.abs(ext - m.density_at(xs))))
        if err > tol:
            raise InvalidMeasure(f"density extension deviates from the density by {err:.3e}")
        return err


def continue_below(rep: HerglotzRep, interval: AnalyticInterval, z: complex) -> complex:
    """Continue a scalar Herglotz function through an interval into C-.

    Returns ``conj(M(conj z)) + 2 pi i Omega'(z)``.
    """
    z = complex(z)
    if not rep.is_scalar:
        raise ValueError("continuation implemented for scalar representations")
    if not interval.contains(z) or z.imag == 0.0:
        raise OutsideValidityRectangle(
            f"z={z} is outside ({interval.lo}, {interval.hi}) x (-{interval.depth}, 0)")
    interval.check_against(rep.measure)
    return complex(evaluate(rep, z.conjugate())).conjugate() + 2j * math.pi * complex(
        interval.density_extension(z))


# ---------------------------------------------------------------------------
# N0 classes


class N0Class(enum.Enum):
    N0 = "N0"
    N0F = "N0F"
    N0K = "N0K"
    N0FK = "N0FK"
    NOT_N0 = "NotN0"


def n0_membership(m: Measure, tol: float = 1e-10) -> N0Class:
    """Membership in the normalised classes of infinite-mass measures."""
    if not m.total_mass_is_infinite():
        return N0Class.NOT_N0
    if abs(weighted_mass(m, -1.0) - 1.0) > tol:
        return N0Class.NOT_N0
    if m.support_lower_bound() < -1e-12:
        return N0Class.N0
    t = classify_extension_type(m)
    return {ExtensionType.FRIEDRICHS: N0Class.N0F, ExtensionType.KREIN: N0Class.N0K,
            ExtensionType.FRIEDRICHS_EQUALS_KREIN: N0Class.N0FK,
            ExtensionType.NEITHER: N0Class.N0}[t]


# ---------------------------------------------------------------------------
# CSV


EVAL_COLUMNS = ("re_z", "im_z", "re_M", "im_M")
INVERSION_COLUMNS = ("lambda", "density", "atom_mass")


def write_eval_csv(stream, zs: Iterable[complex], values: Iterable[complex],
                   columns: Sequence[str] = EVAL_COLUMNS) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for z, v in zip(zs, values):
        z, v = complex(z), complex(v)
        w.writerow([repr(z.real), repr(z.imag), repr(v.real), repr(v.imag)])


def read_eval_csv(stream) -> tuple[np.ndarray, np.ndarray]:
    rows = [r for r in csv.reader(stream) if r and not r[0].startswith("#")]
    data = np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
    return data[:, 0] + 1j * data[:, 1], data[:, 2] + 1j * data[:, 3]


def write_inversion_csv(stream, m: Measure) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(INVERSION_COLUMNS)
    rows = []
    if m.grid is not None:
        rows += [(x, v, 0.0) for x, v in zip(m.grid.tolist(), m.values.tolist())]
    rows += [(x, 0.0, mass) for x, mass in m.atoms]
    rows.sort(key=lambda r: (r[0], r[2]))
    for r in rows:
        w.writerow([repr(float(c)) for c in r])


def read_inversion_csv(stream) -> Measure:
    rows = [r for r in csv.reader(stream) if r and not r[0].startswith("#")]
    data = np.array(rows[1:], dtype=float).reshape(-1, 3)
    atom = data[:, 2] > 0
    atoms = list(zip(data[atom, 0], data[atom, 2]))
    dens = data[~atom]
    density = (dens[:, 0], dens[:, 1]) if len(dens) >= 2 else None
    return Measure(atoms, density)


def to_csv_string(writer, *args) -> str:
    buf = io.StringIO()
    writer(buf, *args)
    return buf.getvalue()
