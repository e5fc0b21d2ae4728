"""Finite-rank perturbations and their realisation.

Two perturbations of the same matrix are related by a J-unitary linear
fractional map. Conversely, a finitely supported matrix measure is realised by
a diagonal operator and a coupling matrix.
"""

import numpy as np

from herglotz import measures as ms
from herglotz import perturbation as pt

rng = np.random.default_rng(1)
t1 = pt.random_triple(rng, 5, 2)
t2 = t1.with_L(t1.L + np.diag([0.5, -1.0]))
rep = pt.lft_consistency(t1, t2, [0.3 + 0.5j, -1 + 2j, 4 + 0.1j])
print(f"LFT between two perturbations: max residual {rep.max_error:.1e}, "
      f"J-unitarity {rep.junitary:.1e}")

om = pt.spectral_measure(t1)
print(f"spectral measure: {len(om)} atoms, |total mass - K*K| = "
      f"{np.linalg.norm(om.total_mass() - t1.K.conj().T @ t1.K):.1e}")

target = ms.MatrixMeasure([(0.0, np.eye(2)), (1.0, np.diag([1.0, 0.0])), (2.5, np.ones((2, 2)))])
D, rpt = pt.realize(target)
print(f"\nrealisation of a 3-atom measure: dimension N = {D.N} (sum of ranks), "
      f"residual {rpt.max_residual:.1e}")
back = pt.spectral_measure(D.triple())
print(f"round trip weights error {np.max(np.abs(back.weights - target.weights)):.1e}")

pair = pt.realize_pair(om, pt.spectral_measure(t2), t2.L - t1.L)
print(f"common (H0, K) for both measures: residuals {pair.residual_1:.1e}, {pair.residual_2:.1e}")
