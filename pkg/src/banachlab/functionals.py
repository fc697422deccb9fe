"""Support functionals, duality maps, Hahn-Banach extensions and the
norm-derivative adjoint T_*.

Conventions.  A functional is a flat complex vector f acting bilinearly,
f(x) = sum_i f_i x_i (no conjugation: the conjugation sits inside the
support-functional formula).  The support functional J(x) of x is the
unique (at smooth points) functional with

    J(x)(x) = ||x||^2   and   ||J(x)||_* = ||x||.

On weighted l_p with 1 < p < inf:

    J(x)_i = ||x||^(2-p) w_i |x_i|^(p-2) conj(x_i),

and on a 2-sum J acts blockwise.  J is a bijection onto the dual exactly
when the space is smooth, strictly convex and reflexive; the inverse is
the support functional of the dual space under the same pairing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import optim, spaces
from .errors import ArgumentError, NonSmoothError

__all__ = [
    "support_functional",
    "dual_norm",
    "apply_functional",
    "functional_attainment",
    "j_inverse",
    "HBExtension",
    "hahn_banach_extend",
    "LinearityReport",
    "hb_linearity_probe",
    "star_adjoint_eval",
    "star_linearity_probe",
]


def apply_functional(f, x):
    return complex(np.asarray(f) @ np.asarray(x))


def dual_norm(space, f):
    return spaces.norm(spaces.dual_space(space), f)


def support_functional(space, x, canonical=False):
    """J(x); raises NonSmoothError at non-smooth points unless canonical=True.

    The canonical selections are: p = 1, the sign vector on the support
    (zeros stay zero); p = inf, the first maximal weighted coordinate.
    """
    x = spaces.as_coeffs(space, x)
    return _support(space, x, canonical)


def _support(space, x, canonical):
    n = spaces._norm(space, x)
    if n == 0.0:
        return np.zeros_like(x)
    if isinstance(space, spaces.Lp):
        w = spaces._lp_weights(space)
        a = np.abs(x)
        p = space.p
        if math.isinf(p):
            wa = w * a
            top = wa.max()
            ties = np.flatnonzero(wa >= top * (1.0 - 1e-12))
            if len(ties) > 1 and not canonical:
                raise NonSmoothError(
                    "sup-norm support functional is not unique: %d maximal "
                    "coordinates; pass canonical=True for the first-max selection"
                    % len(ties)
                )
            i = int(ties[0])
            f = np.zeros_like(x)
            f[i] = n * w[i] * np.conj(x[i]) / a[i]
            return f
        if p == 1.0:
            if np.any(a == 0.0) and not canonical:
                raise NonSmoothError(
                    "l_1 support functional is not unique off the full support; "
                    "pass canonical=True for the sign-vector selection"
                )
            f = np.zeros_like(x)
            nz = a > 0
            f[nz] = n * w[nz] * np.conj(x[nz]) / a[nz]
            return f
        f = np.zeros_like(x)
        nz = a > 0
        f[nz] = n ** (2.0 - p) * w[nz] * a[nz] ** (p - 2.0) * np.conj(x[nz])
        return f
    if isinstance(space, (spaces.DirectSum2, spaces.BlockSeq, spaces.BiBlockSeq)):
        f = np.zeros_like(x)
        for off, sz, sub in spaces.block_layout(space):
            f[off : off + sz] = _support(sub, x[off : off + sz], canonical)
        return f
    raise NonSmoothError("no closed-form support functional on %r" % (space,))


def j_inverse(space, f):
    """Inverse duality map: the x with J(x) = f (smooth reflexive case)."""
    return support_functional(spaces.dual_space(space), f)


def functional_attainment(space, f):
    """Unit vector x0 with f(x0) = ||f||_* (real and positive).

    Round trip: support_functional(x0) is f / ||f||_*.
    """
    f = np.asarray(f, dtype=np.complex128)
    nf = dual_norm(space, f)
    if nf == 0.0:
        raise ArgumentError("cannot attain the zero functional")
    return j_inverse(space, f) / nf


# ---------------------------------------------------------------------------
# Hahn-Banach by minimal dual norm


@dataclass
class HBExtension:
    coeffs: np.ndarray
    value: float  # dual norm of the extension
    restriction_norm: float  # sup of |f| on the unit sphere of the subspace
    converged: bool
    iterations: int


def _feasible_projector(basis):
    b = np.asarray(basis, dtype=np.complex128)
    if b.ndim != 2:
        raise ArgumentError("basis must be a k x n array of row vectors")
    gram = b @ b.conj().T
    try:
        low = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise ArgumentError("basis rows are linearly dependent") from None

    def solve(rhs):
        y = np.linalg.solve(low, rhs)
        return np.linalg.solve(low.conj().T, y)

    return b, solve


def _restriction_norm(space, basis, values, seed):
    # sup |f(y)| over unit y in span(basis); low-dimensional smooth ascent
    b = np.asarray(basis, dtype=np.complex128)
    c = np.asarray(values, dtype=np.complex128)
    k = b.shape[0]
    rng = np.random.default_rng(seed)

    def val(t):
        y = t @ b
        ny = spaces._norm(space, y)
        if ny < 1e-14:
            return 0.0
        return abs((c * t).sum()) / ny  # f(y) = sum_j t_j f(b_j)

    best = 0.0
    for _ in range(16):
        t0 = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        f, v, _ = optim.compass_minimize(
            lambda s: -val(optim.unstack(s)), optim.stack(t0), step=0.5, budget=2500
        )
        best = max(best, -f)
    return best


def hahn_banach_extend(
    space, basis, values, seed=0, starts=8, maxiter=10000, rel_tol=1e-10
):
    """Minimal-dual-norm extension of the functional given on a subspace.

    basis: k x n rows spanning the subspace; values: the k prescribed
    f(basis[j]).  Projected gradient descent on the dual norm over the
    affine set {g : g(basis[j]) = values[j]}, multi-start.  Refused on
    non-smooth spaces (p in {1, inf}), where minimal extensions are not
    unique.
    """
    if not spaces.is_smooth(space):
        raise NonSmoothError(
            "hahn_banach_extend needs a smooth space; minimal extensions "
            "are non-unique on p in {1, inf}"
        )
    dual = spaces.dual_space(space)
    b, solve = _feasible_projector(basis)
    c = np.asarray(values, dtype=np.complex128)
    if c.shape != (b.shape[0],):
        raise ArgumentError("values length must match the number of basis rows")

    def project_feasible(g):
        return g - b.conj().T @ solve(b @ g - c)

    def tangent(g):
        return g - b.conj().T @ solve(b @ g)

    rng = np.random.default_rng(seed)
    g_min_euclid = b.conj().T @ solve(c)
    best = None
    total_iters = 0
    for s in range(starts):
        g = g_min_euclid.copy()
        if s > 0:
            g = project_feasible(
                g + 0.5 * (rng.standard_normal(g.size) + 1j * rng.standard_normal(g.size))
            )
        val = spaces._norm(dual, g)
        step = 0.5 * max(val, 1.0)
        it = 0
        while it < maxiter:
            it += 1
            d = tangent(optim.norm_grad(dual, g))
            dn = float(np.linalg.norm(d))
            if dn <= rel_tol * (1.0 + val):
                break
            # backtracking on the norm value
            moved = False
            t = step
            for _ in range(40):
                g_try = g - t * d
                v_try = spaces._norm(dual, g_try)
                if v_try < val - 1e-4 * t * dn * dn:
                    g, new_val = g_try, v_try
                    moved = True
                    break
                t *= 0.5
            if not moved:
                break
            if abs(val - new_val) <= rel_tol * max(val, 1e-30):
                val = new_val
                break
            val = new_val
            step = min(2.0 * t, 1e3)
        total_iters += it
        if best is None or val < best[0]:
            best = (val, g, it < maxiter)
    val, g, conv = best
    rnorm = _restriction_norm(space, b, c, seed + 1)
    return HBExtension(
        coeffs=g,
        value=float(val),
        restriction_norm=float(rnorm),
        converged=bool(conv),
        iterations=total_iters,
    )


@dataclass
class LinearityReport:
    verdict: str  # "linear" | "nonlinear" | "inconclusive"
    defect: float
    witness: tuple | None
    trials: int
    seed: int


_LINEAR_TOL = 1e-8
_NONLINEAR_TOL = 1e-5


def _verdict(defect):
    if defect < _LINEAR_TOL:
        return "linear"
    if defect > _NONLINEAR_TOL:
        return "nonlinear"
    return "inconclusive"


def hb_linearity_probe(space, basis, trials=200, seed=0, starts=2, maxiter=2000):
    """Is value-tuple -> minimal extension additive on this subspace?

    Samples pairs of value tuples, extends both and their sum, and
    measures the dual-norm defect of additivity.
    """
    rng = np.random.default_rng(seed)
    b = np.asarray(basis, dtype=np.complex128)
    k = b.shape[0]

    def ext(vals, s):
        return hahn_banach_extend(
            space, b, vals, seed=s, starts=starts, maxiter=maxiter
        ).coeffs

    worst, witness = 0.0, None
    for t in range(trials):
        c = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        d = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        g1 = ext(c, seed + 3 * t)
        g2 = ext(d, seed + 3 * t + 1)
        g12 = ext(c + d, seed + 3 * t + 2)
        defect = dual_norm(space, g12 - g1 - g2)
        if defect > worst:
            worst, witness = defect, (c, d)
        if worst > _NONLINEAR_TOL and t >= 10:
            break  # dichotomy already decided; keep a few samples for the record
    return LinearityReport(_verdict(worst), float(worst), witness, trials, seed)


# ---------------------------------------------------------------------------
# the adjoint T_* = J^{-1} T^x J


def star_adjoint_eval(T, x, canonical=False):
    """T_*(x) = J^{-1}(T^x J(x)) where T^x is the Banach adjoint.

    T must map a smooth space to itself.  T_* is positively homogeneous
    and degree-1 in phases but in general not additive; star_linearity_probe
    quantifies that.
    """
    dom = T.domain
    if spaces.dim(dom) != spaces.dim(T.codomain):
        raise ArgumentError("star adjoint needs an operator from a space to itself")
    x = spaces.as_coeffs(dom, x)
    if not np.any(x):
        return np.zeros_like(x)
    f = support_functional(dom, x, canonical=canonical)
    g = T.matrix.T @ f
    if not np.any(g):
        return np.zeros_like(x)
    return j_inverse(dom, g)


def star_linearity_probe(T, trials=200, seed=0):
    """Additivity defect of T_* over random unit pairs."""
    dom = T.domain
    rng = np.random.default_rng(seed)
    worst, witness = 0.0, None
    for _ in range(trials):
        d = spaces.dim(dom)
        x = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        y = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        x /= spaces._norm(dom, x)
        y /= spaces._norm(dom, y)
        lhs = star_adjoint_eval(T, x + y)
        rhs = star_adjoint_eval(T, x) + star_adjoint_eval(T, y)
        defect = spaces._norm(dom, lhs - rhs)
        if defect > worst:
            worst, witness = defect, (x, y)
    return LinearityReport(_verdict(worst), float(worst), witness, trials, seed)
