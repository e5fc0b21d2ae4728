"""The free half-line operator -d^2/dx^2 on [0, inf).

Computes the Weyl function numerically, compares with i sqrt(z), moves to the
Donoghue normalisation and prints the sharp boundary constants.
"""

import math

from herglotz import schrodinger as sch
from herglotz.branches import sqrt_upper

q = sch.Potential.zero()

print("Weyl function, Dirichlet boundary (gamma = 0)")
for z in (1j, 0.5 + 0.1j, -3 + 1j, 100j):
    r = sch.weyl_m(q, 0.0, z)
    print(f"  z = {z!s:>12}  m = {r.value:.10f}  |m - i sqrt(z)| = {abs(r.value - 1j * sqrt_upper(z)):.1e}"
          f"  (cutoff radius {r.truncation_radius:g})")

print("\nDonoghue functions take the value i at i for every extension angle")
for alpha in (0.0, math.pi / 4, math.pi / 2):
    print(f"  alpha = {alpha:.4f}: m(i) = {sch.weyl_to_donoghue(q, alpha, 1j):.10f}")

sb = sch.sharp_bounds(q, math.pi / 6)
print("\nSharp constants at alpha = pi/6")
print(f"  sup |f'(0)|^2 / (||f||^2 + ||Hf||^2) = {sb.sup_derivative:.10f}  (2^-1/2 = {2 ** -0.5:.10f})")
print(f"  variational lower estimate          = {sb.variational:.10f}")
print(f"  product with the value bound        = {sb.product:.10f}  (cos^2 = 0.75)")
