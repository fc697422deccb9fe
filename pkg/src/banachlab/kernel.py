"""Backend selection for the hot numeric kernels.

The compiled extension (_kernel, built from _kernel.pyx) is preferred; the
numpy fallback (_kernel_py) is used when the extension was not built or
when LAB_PURE_PYTHON is set in the environment.  benchmarks/bench_kernel.py
compares the two.
"""

import os

import numpy as np

if os.environ.get("LAB_PURE_PYTHON"):
    from . import _kernel_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernel as _impl

        BACKEND = "c"
    except ImportError:
        from . import _kernel_py as _impl

        BACKEND = "python"


def lp_norm(x, w, p):
    """Weighted l_p norm of a complex coefficient vector.

    p <= 0 is the internal encoding of the sup norm (max_i w_i |x_i|).
    """
    x = np.ascontiguousarray(x, dtype=np.complex128)
    w = np.ascontiguousarray(w, dtype=np.float64)
    return _impl.lp_norm(x, w, float(p))


def poly_sup(c, grid):
    """Sup of |p(z)| over the `grid` roots of unity, p given by coefficients c."""
    c = np.ascontiguousarray(c, dtype=np.complex128)
    return _impl.poly_sup(c, int(grid))
