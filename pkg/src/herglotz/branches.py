"""Branch conventions shared by every closed form.

Square roots take the branch with nonnegative imaginary part, so z**(1/2)
maps the upper half-plane into the first quadrant.
"""

from __future__ import annotations

import numpy as np


def sqrt_upper(z):
    """Square root with Im >= 0 (real part >= 0 on the positive axis)."""
    s = np.sqrt(np.asarray(z, dtype=complex))
    s = np.where(s.imag < 0, -s, s)
    return s[()] if np.ndim(s) == 0 else s


def stable_cot(w):
    """cot(w) for complex w without overflow at large |Im w|.

    Written through q = exp(2iw) on the upper half-plane, where |q| <= 1; the
    lower half-plane follows from cot(conj w) = conj(cot w). For |Im w| > 20
    the value is +-i to double precision.
    """
    w = np.asarray(w, dtype=complex)
    flip = w.imag < 0
    wu = np.where(flip, np.conj(w), w)
    q = np.exp(2j * wu)
    c = -1j * (1.0 + q) / (1.0 - q)
    real_axis = wu.imag == 0
    if np.any(real_axis):
        c = np.where(real_axis, 1.0 / np.tan(wu.real) + 0j, c)
    c = np.where(flip, np.conj(c), c)
    return c[()] if np.ndim(c) == 0 else c
