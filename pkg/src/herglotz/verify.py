"""Quick invariant suites used by ``herglotz verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import extensions as ext
from . import herglotz_core as hc
from . import livsic as lv
from . import measures as ms
from . import perturbation as pt
from . import schrodinger as sch
from .branches import sqrt_upper


@dataclass
class Check:
    suite: str
    name: str
    value: float
    tol: float
    passed: bool

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.suite:<14} {self.name:<44} value={self.value:.3e} tol={self.tol:.1e}"


def _chk(suite, name, value, tol, le=True) -> Check:
    ok = value <= tol if le else value >= tol
    return Check(suite, name, float(value), tol, bool(ok))


def _upper_samples(rng, n):
    r = 10 ** rng.uniform(-1, 1, n)
    th = rng.uniform(0.05, math.pi - 0.05, n)
    return r * np.exp(1j * th)


def suite_herglotz(rng, tol) -> list[Check]:
    out = []
    zs = _upper_samples(rng, 30)
    rep = hc.HerglotzRep(ms.Measure(zip(rng.uniform(-3, 3, 5), rng.uniform(0.1, 2, 5))))
    refl = max(abs(hc.evaluate(rep, z.conjugate()) - np.conj(hc.evaluate(rep, z))) for z in zs)
    out.append(_chk("herglotz", "reflection M(conj z) = conj M(z)", refl, 0.0))
    A = hc.JUnitary.rotation(0.7) @ hc.JUnitary.shift([[0.4]])
    rep_lft = hc.lft_apply(A, rep)
    rpt = hc.verify_herglotz(rep_lft, zs)
    out.append(_chk("herglotz", "J-unitary LFT keeps Im M >= 0", -rpt.min_eigenvalue, 1e-10))
    inv = hc.stieltjes_invert(lambda z: 1j + 0 * z, (-5, 5))
    out.append(_chk("herglotz", "inversion of i gives 1/pi", float(np.max(np.abs(inv.values - 1 / math.pi))), 1e-3))
    return out


def suite_perturbation(rng, tol) -> list[Check]:
    worst = 0.0
    worst_mass = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, min(3, n) + 1))
        t1 = pt.random_triple(rng, n, k)
        t2 = t1.with_L(pt.random_triple(rng, n, k).L)
        worst = max(worst, pt.lft_consistency(t1, t2, _upper_samples(rng, 5)).max_error)
        om = pt.spectral_measure(t1)
        worst_mass = max(worst_mass, float(np.linalg.norm(om.total_mass() - t1.K.conj().T @ t1.K)))
    return [_chk("perturbation", "perturbation LFT identities", worst, max(tol, 1e-10)),
            _chk("perturbation", "total mass = K*K", worst_mass, 1e-10)]


def suite_dilation(rng, tol) -> list[Check]:
    worst = 0.0
    for _ in range(20):
        t = pt.random_triple(rng, int(rng.integers(2, 7)), 1)
        om = pt.spectral_measure(t)
        D, rpt = pt.realize(om)
        back = pt.spectral_measure(D.triple())
        worst = max(worst, rpt.max_residual, float(np.max(np.abs(back.weights - om.weights))))
    return [_chk("dilation", "realize/spectral_measure round trip", worst, 1e-9)]


def suite_livsic(rng, tol) -> list[Check]:
    model = lv.LivsicInterval(1.0, math.pi / 4)
    f = lambda z: lv.livsic_rotated_m(model, z)  # noqa: E731
    res = max(abs(-lv.residue(f, p) - model.mass) for p in model.poles(range(-2, 3)))
    rot = hc.extension_rotate(lambda z: lv.periodic_donoghue_m(1.0, z), -math.pi / 4)
    zs = _upper_samples(rng, 20)
    rdiff = max(abs(rot(z) - f(z)) for z in zs)
    return [_chk("livsic", "residues match lattice masses", res, 1e-10),
            _chk("livsic", "closed form = rotated periodic model", rdiff, 1e-12),
            _chk("livsic", "m(i) = i", abs(f(1j) - 1j), 1e-12)]


def suite_weyl(rng, tol) -> list[Check]:
    q = sch.Potential.zero()
    zs = [0.5 + 1j, -2 + 0.5j, 10j]
    err = max(abs(sch.weyl_m(q, 0.0, z).value - 1j * sqrt_upper(z)) for z in zs)
    sb = sch.sharp_bounds(q, math.pi / 6, variational=False)
    return [_chk("weyl", "free m = i sqrt(z)", err, 1e-7),
            _chk("weyl", "sharp bound product = cos^2", abs(sb.product - 0.75), 1e-10)]


def suite_rotations(rng, tol) -> list[Check]:
    q = sch.Potential.zero()
    z = 0.3 + 0.7j
    angles = [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4]
    vals = {g: sch.weyl_m(q, g, z).value for g in angles}
    aron = max(abs(vals[d] - sch.aronszajn_rotate(vals[g], g, d)) for g in angles for d in angles)
    m = lambda w: lv.livsic_rotated_m(lv.LivsicInterval(2.0, 0.4), w)  # noqa: E731
    law = max(abs(hc.extension_rotate(hc.extension_rotate(m, a), b)(z)
                  - hc.extension_rotate(m, (a + b) % math.pi)(z))
              for a in (0.3, 1.2, 2.9) for b in (0.5, 2.2))
    return [_chk("rotations", "Aronszajn rotation consistency", aron, 1e-8),
            _chk("rotations", "rotation group law", law, 1e-9)]


def suite_classification(rng, tol) -> list[Check]:
    expect = {(2, "friedrichs"): "Both", (3, "friedrichs"): "Friedrichs", (3, "krein"): "Krein"}
    bad = 0
    for (n, w), label in expect.items():
        v = ext.identify_friedrichs_krein(lambda z, n=n, w=w: sch.point_interaction_m(n, w, z))
        bad += v.type.short != label
    return [_chk("classification", "point-interaction verdicts", bad, 0)]


SUITES: dict[str, Callable] = {
    "herglotz": suite_herglotz,
    "perturbation": suite_perturbation,
    "dilation": suite_dilation,
    "livsic": suite_livsic,
    "weyl": suite_weyl,
    "rotations": suite_rotations,
    "classification": suite_classification,
}


def run(suite: str = "all", seed: int = 0, tol: float = 1e-10) -> list[Check]:
    names = list(SUITES) if suite == "all" else [suite]
    rng = np.random.default_rng(seed)
    checks: list[Check] = []
    for name in names:
        checks += SUITES[name](rng, tol)
    return checks
