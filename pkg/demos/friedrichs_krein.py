"""Which extension is Friedrichs, which is Krein?

The verdict comes from the m-function on the negative axis (divergence at
-inf or at 0-) and is checked against the integrability of the measure.
"""

import numpy as np

from herglotz import extensions as ext
from herglotz import measures as ms
from herglotz import schrodinger as sch

for n, which in ((2, "friedrichs"), (3, "friedrichs"), (3, "krein")):
    v = ext.identify_friedrichs_krein(lambda z, n=n, w=which: sch.point_interaction_m(n, w, z))
    print(f"point interaction n={n} {which:<10} -> {v.type.short:<10} "
          f"limits {v.to_dict()['limits']}, confidence {v.confidence:.4f}")

print()
for p in (-0.5, 0.0, 0.5):
    m = ms.donoghue_normalize(ms.Measure(tail=ms.Tail.power(p)))
    v = ext.identify_friedrichs_krein(m)
    print(f"density ~ lambda^{p:+.1f}: m-side {v.type.short:<10} measure-side {v.measure_side.short}")

g = np.logspace(-12, 2, 400)
m = ms.donoghue_normalize(ms.Measure(density=(g, g ** 0.5), tail=ms.Tail.power(-0.5)))
v = ext.identify_friedrichs_krein(m, far_start=4)
print(f"lambda^1/2 near 0, lambda^-1/2 at infinity: {v.type.short} (ladder starting at -1e4)")
