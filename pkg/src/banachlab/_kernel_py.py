"""Pure-numpy twins of the compiled kernels in _kernel.pyx.

Selected at import time by banachlab.kernel when the extension is missing
or LAB_PURE_PYTHON is set.  Semantics must match the compiled versions
bit-for-bit up to the usual float reassociation differences.
"""

import numpy as np


def lp_norm(x, w, p):
    """Weighted l_p norm of a complex vector; p <= 0 encodes the sup norm."""
    a = np.abs(x)
    if a.size == 0:
        return 0.0
    if p <= 0.0:
        return float((a * w).max())
    if p == 2.0:
        return float(np.sqrt((a * a * w).sum()))
    if p == 1.0:
        return float((a * w).sum())
    acc = float(((a**p) * w).sum())
    if acc == 0.0:
        return 0.0
    return acc ** (1.0 / p)


def poly_sup(c, grid):
    """max over the `grid` roots of unity of |sum_j c[j] z^j|."""
    c = np.asarray(c)
    if c.size == 0:
        return 0.0
    z = np.exp(2j * np.pi * np.arange(grid) / grid)
    vals = np.polynomial.polynomial.polyval(z, c)
    return float(np.abs(vals).max())
