"""Finite-dimensional perturbations H_L = H0 + K L K^*.

Covers the M-function ``K^*(H_L - z)^{-1} K`` and its spectral measure, the
linear fractional relation between two perturbations, the decomposition of a
bounded Hermitian perturbation, and the minimal Naimark dilation of an atomic
matrix measure together with the realization built on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import (EigensolverFailure, InvalidMeasure, NearSingularResolvent,
                     NotPSD, SingularDenominator)
from .herglotz_core import COND_MAX, JUnitary
from .measures import (MatrixMeasure, PSD_TOL, complex_matrix_from_json,
                       complex_matrix_to_json)

HERMITIAN_TOL = 1e-12
MERGE_TOL = 1e-10
RANK_TOL = 1e-10


def _hermitian(A, name: str) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.shape[0] != A.shape[1]:
        raise InvalidMeasure(f"{name} must be square")
    if np.linalg.norm(A - A.conj().T) > HERMITIAN_TOL * max(1.0, np.linalg.norm(A)):
        raise InvalidMeasure(f"{name} must be Hermitian")
    return 0.5 * (A + A.conj().T)


@dataclass(frozen=True)
class PerturbationTriple:
    """Hermitian H0 (n x n), coupling K (n x k) and Hermitian L (k x k)."""

    H0: np.ndarray
    K: np.ndarray
    L: np.ndarray

    def __post_init__(self):
        H0 = _hermitian(self.H0, "H0")
        K = np.asarray(self.K, dtype=complex)
        if K.ndim == 1:
            K = K.reshape(-1, 1)
        L = _hermitian(self.L, "L")
        n, k = K.shape
        if H0.shape[0] != n or L.shape[0] != k:
            raise InvalidMeasure(f"shape mismatch: H0 {H0.shape}, K {K.shape}, L {L.shape}")
        if k > n:
            raise InvalidMeasure("K must have at most as many columns as rows")
        for name, arr in (("H0", H0), ("K", K), ("L", L)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.H0.shape[0]

    @property
    def k(self) -> int:
        return self.K.shape[1]

    @property
    def HL(self) -> np.ndarray:
        H = self.H0 + self.K @ self.L @ self.K.conj().T
        return 0.5 * (H + H.conj().T)

    def with_L(self, L) -> "PerturbationTriple":
        return PerturbationTriple(self.H0, self.K, L)

    def to_dict(self) -> dict:
        return {"H0": complex_matrix_to_json(self.H0), "K": complex_matrix_to_json(self.K),
                "L": complex_matrix_to_json(self.L)}

    @classmethod
    def from_dict(cls, d: dict) -> "PerturbationTriple":
        extra = set(d) - {"H0", "K", "L"}
        if extra:
            raise InvalidMeasure(f"unknown field(s) in triple: {sorted(extra)}")
        try:
            return cls(*(complex_matrix_from_json(d[n]) for n in ("H0", "K", "L")))
        except KeyError as exc:
            raise InvalidMeasure(f"triple missing field {exc}") from None


def resolvent_apply(H: np.ndarray, K: np.ndarray, z: complex) -> np.ndarray:
    """K^* (H - z)^{-1} K by an LU solve; no explicit inverse."""
    z = complex(z)
    if abs(z.imag) < 1e-12:
        raise NearSingularResolvent(f"|Im z| = {abs(z.imag):.3e} < 1e-12")
    A = H - z * np.eye(H.shape[0])
    X = sla.solve(A, K, check_finite=False)
    return K.conj().T @ X


def perturbed_mfunc(t: PerturbationTriple, z: complex) -> np.ndarray:
    """M_L(z) = K^* (H0 + K L K^* - z)^{-1} K."""
    return resolvent_apply(t.HL, t.K, z)


def _eigh(H: np.ndarray):
    try:
        return np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc


def spectral_projections(H: np.ndarray, tol: float = MERGE_TOL):
    """Eigenvalue clusters (merged within ``tol``) and orthonormal bases."""
    w, V = _eigh(H)
    groups: list[list[int]] = []
    for i in range(len(w)):
        if groups and w[i] - w[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [(float(np.mean(w[g])), V[:, g]) for g in groups]


def spectral_measure(t: PerturbationTriple) -> MatrixMeasure:
    """Omega_L: atoms at the eigenvalues of H_L with weights K^* P_j K."""
    atoms = []
    for lam, Vj in spectral_projections(t.HL):
        B = Vj.conj().T @ t.K
        W = B.conj().T @ B
        atoms.append((lam, 0.5 * (W + W.conj().T)))
    return MatrixMeasure(atoms, dimension=t.k)


def plain_eval(om: MatrixMeasure, z: complex) -> np.ndarray:
    """Sum of W_j / (lambda_j - z)."""
    z = complex(z)
    return np.einsum("j,jab->ab", 1.0 / (om.locations - z), om.weights)


# ---------------------------------------------------------------------------
# linear fractional relation between two perturbations


@dataclass
class LFTReport:
    forward: float
    transposed: float
    inverse_left: float
    inverse_right: float
    junitary: float
    lft_apply: float

    @property
    def max_error(self) -> float:
        return max(self.forward, self.transposed, self.inverse_left,
                   self.inverse_right, self.junitary, self.lft_apply)

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_error < tol


def _solve_checked(A: np.ndarray, B: np.ndarray, z, right: bool = False) -> np.ndarray:
    cond = np.linalg.cond(A)
    if not cond < COND_MAX:
        raise SingularDenominator(z, cond)
    if right:  # B A^{-1}
        return np.linalg.solve(A.T, B.T).T
    return np.linalg.solve(A, B)


def lft_consistency(t1: PerturbationTriple, t2: PerturbationTriple,
                    zs: Sequence[complex]) -> LFTReport:
    """Residuals of the identities relating M_{L1} and M_{L2}.

    Forward and transposed forms
    ``M2 = M1 (I + dL M1)^{-1} = (I + M1 dL)^{-1} M1`` and the inverse forms
    ``dL M2 - I = -(dL M1 + I)^{-1}``, ``M2 dL - I = -(M1 dL + I)^{-1}``,
    with ``dL = L2 - L1``. Also reports the J-unitarity residual of
    ``[[I, dL], [0, I]]`` and the gap between ``lft_apply`` and M2.
    """
    from .herglotz_core import lft_apply

    if not (np.allclose(t1.H0, t2.H0, atol=1e-12) and np.allclose(t1.K, t2.K, atol=1e-12)):
        raise InvalidMeasure("triples must share H0 and K")
    dL = t2.L - t1.L
    k = t1.k
    I = np.eye(k)
    A = JUnitary.shift(dL)
    errs = np.zeros(5)
    for z in zs:
        M1 = perturbed_mfunc(t1, z)
        M2 = perturbed_mfunc(t2, z)
        fwd = _solve_checked(I + dL @ M1, M1, z, right=True)
        tr = _solve_checked(I + M1 @ dL, M1, z)
        inv_l = -_solve_checked(dL @ M1 + I, I, z)
        inv_r = -_solve_checked(M1 @ dL + I, I, z)
        via = lft_apply(A, M1)
        errs = np.maximum(errs, [np.linalg.norm(M2 - fwd, 2), np.linalg.norm(M2 - tr, 2),
                                 np.linalg.norm(dL @ M2 - I - inv_l, 2),
                                 np.linalg.norm(M2 @ dL - I - inv_r, 2),
                                 np.linalg.norm(M2 - via, 2)])
    return LFTReport(float(errs[0]), float(errs[1]), float(errs[2]), float(errs[3]),
                     A.residual(), float(errs[4]))


def product_identity_residual(t: PerturbationTriple, z: complex) -> float:
    """Norm of (I + L K^*(H0-z)^{-1}K)(I - L K^*(H_L-z)^{-1}K) - I."""
    I = np.eye(t.k)
    M0 = resolvent_apply(t.H0, t.K, z)
    ML = perturbed_mfunc(t, z)
    P = (I + t.L @ M0) @ (I - t.L @ ML)
    return float(np.linalg.norm(P - I, 2))


# ---------------------------------------------------------------------------
# bounded perturbations


@dataclass(frozen=True)
class Decomposition:
    """V = K0 L0 K0^* with K0 = |V0|^{1/2} on ran(V), L0 = sgn(V0).

    ``K0`` is n x r in the ambient coordinates; ``basis`` (n x r) spans ran(V),
    so ``basis^* K0`` is the restricted operator.
    """

    K0: np.ndarray
    L0: np.ndarray
    basis: np.ndarray
    rank: int
    kernel_dim: int

    def reconstruct(self) -> np.ndarray:
        return self.K0 @ self.L0 @ self.K0.conj().T

    @property
    def K0_restricted(self) -> np.ndarray:
        return self.basis.conj().T @ self.K0


def decompose_bounded(V, tol: float = RANK_TOL) -> Decomposition:
    """Split a Hermitian matrix into modulus and sign parts on its range."""
    V = _hermitian(V, "V")
    n = V.shape[0]
    w, U = _eigh(V)
    keep = np.abs(w) > tol * max(1.0, float(np.max(np.abs(w))) if n else 1.0)
    w, U = w[keep], U[:, keep]
    if w.size:
        # order range vectors by their dominant coordinate, then eigenvalue
        lead = np.argmax(np.abs(U), axis=0)
        order = np.lexsort((w, lead))
        w, U = w[order], U[:, order]
    K0 = U * np.sqrt(np.abs(w))
    L0 = np.diag(np.sign(w)).astype(complex)
    return Decomposition(K0, L0, U, int(w.size), int(n - w.size))


# ---------------------------------------------------------------------------
# Naimark dilation and realization


@dataclass(frozen=True)
class Dilation:
    """Diagonal H (N x N) and K (N x k) with K^* E({lambda_j}) K = W_j.

    ``atom_index[j]`` is the slice of rows belonging to atom j.
    """

    H: np.ndarray
    K: np.ndarray
    locations: np.ndarray
    atom_index: tuple

    @property
    def N(self) -> int:
        return self.H.shape[0]

    def block_weight(self, j: int) -> np.ndarray:
        Kj = self.K[self.atom_index[j]]
        return Kj.conj().T @ Kj

    def mfunc(self, z: complex) -> np.ndarray:
        d = 1.0 / (np.diag(self.H).real - complex(z))
        return (self.K.conj().T * d) @ self.K

    def triple(self, L=None) -> PerturbationTriple:
        """The dilation as a perturbation triple ``(H, K, L)``.

        When ``N < k`` (total rank below k) zero rows are appended at the last
        eigenvalue; they carry no weight, so the measure is unchanged.
        """
        k = self.K.shape[1]
        ev = np.diag(self.H).real
        K = self.K
        if self.N < k:
            pad = k - self.N
            last = ev[-1] if ev.size else 0.0
            ev = np.concatenate([ev, np.full(pad, last)])
            K = np.vstack([K, np.zeros((pad, k), complex)])
        L = np.zeros((k, k)) if L is None else L
        return PerturbationTriple(np.diag(ev).astype(complex), K, L)

    def to_dict(self) -> dict:
        return {"eigenvalues": np.diag(self.H).real.tolist(), "K": complex_matrix_to_json(self.K)}

    @classmethod
    def from_dict(cls, d: dict) -> "Dilation":
        extra = set(d) - {"eigenvalues", "K"}
        if extra:
            raise InvalidMeasure(f"unknown field(s) in dilation: {sorted(extra)}")
        ev = np.asarray(d["eigenvalues"], dtype=float)
        K = complex_matrix_from_json(d["K"])
        locs, idx = [], []
        start = 0
        for i in range(1, len(ev) + 1):
            if i == len(ev) or ev[i] != ev[start]:
                locs.append(ev[start])
                idx.append(slice(start, i))
                start = i
        return cls(np.diag(ev).astype(complex), K, np.array(locs), tuple(idx))


def psd_sqrt_rows(W: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Rows R (r x k) with R^* R = W and r = rank(W)."""
    w, V = _eigh(0.5 * (W + W.conj().T))
    nrm = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[0] < -PSD_TOL * nrm:
        raise NotPSD(f"weight has eigenvalue {w[0]:.3e}")
    keep = w > tol * nrm if nrm > 0 else np.zeros_like(w, dtype=bool)
    return (np.sqrt(w[keep])[:, None] * V[:, keep].conj().T)


def naimark_dilate(omega: MatrixMeasure) -> Dilation:
    """Minimal dilation: block j has dimension rank(W_j)."""
    rows, diag, idx, locs = [], [], [], []
    start = 0
    for lam, W in omega.atoms:
        R = psd_sqrt_rows(W)
        r = R.shape[0]
        locs.append(lam)
        idx.append(slice(start, start + r))
        rows.append(R)
        diag += [lam] * r
        start += r
    k = omega.dimension
    K = np.vstack(rows) if rows else np.zeros((0, k), complex)
    H = np.diag(np.array(diag, dtype=float)).astype(complex)
    return Dilation(H, K, np.array(locs, dtype=float), tuple(idx))


def verification_grid(omega: MatrixMeasure, n: int = 20) -> list[complex]:
    """Deterministic points in the upper half-plane around the support."""
    locs = omega.locations
    lo, hi = (float(locs.min()), float(locs.max())) if locs.size else (-1.0, 1.0)
    span = max(hi - lo, 1.0)
    xs = np.linspace(lo - 0.5 * span, hi + 0.5 * span, n)
    ys = np.geomspace(0.05, 5.0, n) * span
    return [complex(x, y) for x, y in zip(xs, ys)]


@dataclass
class RealizationReport:
    max_residual: float
    grid: list = field(default_factory=list)

    def passed(self, tol: float = 1e-10) -> bool:
        return self.max_residual <= tol


def realize(omega: MatrixMeasure, grid: Sequence[complex] | None = None):
    """Dilation whose M-function reproduces the plain transform of ``omega``."""
    D = naimark_dilate(omega)
    grid = list(grid) if grid is not None else verification_grid(omega)
    res = 0.0
    for z in grid:
        target = plain_eval(omega, z)
        scale = max(1.0, float(np.linalg.norm(target, 2)))
        res = max(res, float(np.linalg.norm(D.mfunc(z) - target, 2)) / scale)
    return D, RealizationReport(res, grid)


@dataclass
class PairRealization:
    H0: np.ndarray
    K: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    residual_1: float
    residual_2: float

    def triple(self, which: int = 1) -> PerturbationTriple:
        return PerturbationTriple(self.H0, self.K, self.L1 if which == 1 else self.L2)


def realize_pair(omega1: MatrixMeasure, omega2: MatrixMeasure, dL, L1=None,
                 grid: Sequence[complex] | None = None, tol: float = 1e-9) -> PairRealization:
    """Common (H0, K) for two measures related by a perturbation L2 - L1 = dL.

    Requires equal total masses and the forward relation between the two
    plain transforms; the gauge L1 defaults to 0.
    """
    dL = _hermitian(dL, "L2 - L1")
    k = omega1.dimension
    L1 = np.zeros((k, k), complex) if L1 is None else _hermitian(L1, "L1")
    if np.linalg.norm(omega1.total_mass() - omega2.total_mass()) > tol:
        raise InvalidMeasure("the two measures must have equal total mass")
    grid = list(grid) if grid is not None else verification_grid(omega1)
    I = np.eye(k)
    for z in grid:
        M1, M2 = plain_eval(omega1, z), plain_eval(omega2, z)
        rhs = _solve_checked(I + dL @ M1, M1, z, right=True)
        if np.linalg.norm(M2 - rhs) > tol * max(1.0, np.linalg.norm(M2)):
            raise InvalidMeasure("the measures are not related by the given perturbation")
    base = naimark_dilate(omega1).triple()
    K = base.K
    H0 = base.H0 - K @ L1 @ K.conj().T
    L2 = L1 + dL
    t1 = PerturbationTriple(H0, K, L1)
    t2 = t1.with_L(L2)
    r1 = max(float(np.linalg.norm(perturbed_mfunc(t1, z) - plain_eval(omega1, z), 2)) for z in grid)
    r2 = max(float(np.linalg.norm(perturbed_mfunc(t2, z) - plain_eval(omega2, z), 2)) for z in grid)
    return PairRealization(H0, K, L1, L2, r1, r2)


# ---------------------------------------------------------------------------
# generating subspace


def generating_rank(H0, K) -> int:
    """Dimension of span{E0(lambda_j) K e_i}."""
    H0 = _hermitian(H0, "H0")
    K = np.asarray(K, dtype=complex).reshape(H0.shape[0], -1)
    cols = [Vj @ (Vj.conj().T @ K) for _, Vj in spectral_projections(H0)]
    S = np.hstack(cols)
    return int(np.linalg.matrix_rank(S, tol=RANK_TOL * max(1.0, np.linalg.norm(S, 2))))


def measure_rank(omega: MatrixMeasure) -> int:
    """Sum of the ranks of the weights."""
    return sum(psd_sqrt_rows(W).shape[0] for W in omega.weights)


def reduce_to_generating(t: PerturbationTriple) -> PerturbationTriple:
    """Compress (H0, K, L) onto the subspace generated by K under H0."""
    cols = [Vj @ (Vj.conj().T @ t.K) for _, Vj in spectral_projections(t.H0)]
    S = np.hstack(cols)
    U, s, _ = np.linalg.svd(S, full_matrices=False)
    r = int(np.sum(s > RANK_TOL * max(1.0, s[0] if s.size else 1.0)))
    Q = U[:, :r]
    H0r = Q.conj().T @ t.H0 @ Q
    Kr = Q.conj().T @ t.K
    return PerturbationTriple(0.5 * (H0r + H0r.conj().T), Kr, t.L)


def random_triple(rng: np.random.Generator, n: int, k: int, complex_: bool = True) -> PerturbationTriple:
    """Random instance for tests and demos."""
    def rnd(*shape):
        a = rng.standard_normal(shape)
        return a + 1j * rng.standard_normal(shape) if complex_ else a
    H = rnd(n, n)
    L = rnd(k, k)
    return PerturbationTriple(0.5 * (H + H.conj().T), rnd(n, k), 0.5 * (L + L.conj().T))
