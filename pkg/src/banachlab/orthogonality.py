"""Birkhoff-James orthogonality: minimisation and functional oracles,
sampled subspace orthogonality, norm-one projection certificates, and the
convex-hull criterion for the polynomial sup norm.

x is BJ-orthogonal to y when ||x + t y|| >= ||x|| for every scalar t.
Two independent oracles are kept live:

  * minimisation: min over complex t of ||x + t y|| (polar grid plus
    coordinate descent; the value at t = 0 makes ||x|| an upper bound);
  * James: at smooth points x is orthogonal to y iff J(x)(y) = 0.

Near orthogonality the minimisation gap ||x|| - min_t ||x + t y|| scales
like |J(x)(y)|^2 / curvature, i.e. quadratically in the functional value,
so the two oracles have different resolutions.  Verdicts follow the
functional on smooth spaces; the minimisation is a guard, and a clear
contradiction raises InconsistentWitness instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import functionals, operators, optim, spaces
from .errors import ArgumentError, InconsistentWitness
from .subspace import Subspace

__all__ = [
    "BJMin",
    "bj_min",
    "BJCertificate",
    "bj_orthogonal",
    "SubspaceBJReport",
    "bj_subspace",
    "ProjectionReport",
    "norm_one_projection_check",
    "HullReport",
    "convex_hull_bj_poly",
]

_GRID_ANGLES = 16
_GRID_RADII = 24


@dataclass
class BJMin:
    value: float
    scalar: complex


def bj_min(space, x, y, rel_tol=1e-10, budget=2000):
    """min over complex t of ||x + t y|| with the minimiser.

    Always <= ||x|| (t = 0 is in the grid).
    """
    x = spaces.as_coeffs(space, x)
    y = spaces.as_coeffs(space, y)
    nx = spaces._norm(space, x)
    ny = spaces._norm(space, y)
    if ny == 0.0:
        return BJMin(nx, 0.0)

    def val(t):
        return spaces._norm(space, x + t * y)

    rmax = 4.0 * max(nx, 1e-30) / ny
    best_v, best_t = nx, 0.0 + 0.0j
    angles = np.exp(2j * np.pi * np.arange(_GRID_ANGLES) / _GRID_ANGLES)
    radii = np.linspace(0.0, rmax, _GRID_RADII)[1:]
    for r in radii:
        for a in angles:
            t = r * a
            v = val(t)
            if v < best_v:
                best_v, best_t = v, t
    step = rmax / (_GRID_RADII - 1)
    f, vt, _ = optim.compass_minimize(
        lambda s: val(complex(s[0], s[1])),
        np.array([best_t.real, best_t.imag]),
        step=step,
        budget=budget,
        rel_tol=rel_tol,
    )
    if f < best_v:
        best_v, best_t = f, complex(vt[0], vt[1])
    return BJMin(float(best_v), best_t)


@dataclass
class BJCertificate:
    orthogonal: bool
    min_value: float
    min_scalar: complex
    gap: float  # ||x|| - min_value (>= 0 up to solver noise)
    functional_value: float | None  # |J(x)(y)| on smooth spaces
    method: str  # "james" | "minimisation"


def bj_orthogonal(space, x, y, tol=1e-7):
    """BJ orthogonality certificate for x perpendicular-to y."""
    x = spaces.as_coeffs(space, x)
    y = spaces.as_coeffs(space, y)
    nx = spaces._norm(space, x)
    ny = spaces._norm(space, y)
    if nx == 0.0 or ny == 0.0:
        return BJCertificate(True, nx, 0.0, 0.0, 0.0 if nx else None, "trivial")
    m = bj_min(space, x, y)
    gap = nx - m.value
    scale = max(nx, 1.0)
    min_ortho = gap <= tol * scale
    if not spaces.is_smooth(space):
        return BJCertificate(min_ortho, m.value, m.scalar, gap, None, "minimisation")
    f = functionals.support_functional(space, x)
    jval = abs(functionals.apply_functional(f, y))
    j_ortho = jval <= tol * nx * ny
    if j_ortho and gap > 1e-4 * scale:
        raise InconsistentWitness(
            "James criterion says orthogonal but the minimisation dropped "
            "||x|| by %g" % gap
        )
    if (not j_ortho) and jval > 1e-2 * nx * ny and min_ortho:
        raise InconsistentWitness(
            "support functional value %g is far from zero but no descent "
            "drop was found" % jval
        )
    return BJCertificate(j_ortho, m.value, m.scalar, gap, jval, "james")


@dataclass
class SubspaceBJReport:
    orthogonal: bool
    worst_gap: float
    worst_pair: tuple | None
    samples: int


def bj_subspace(space, y_sub, z_sub, samples=48, seed=0, tol=1e-7, search_budget=400):
    """Sampled Y perpendicular-to Z: every y in Y BJ-orthogonal to every z in Z.

    Random unit pairs from the two parameter spheres plus a short
    worst-case search maximising the violation ||y|| - min_t ||y + t z||.
    """
    if y_sub.dim == 0 or z_sub.dim == 0:
        return SubspaceBJReport(True, 0.0, None, 0)
    rng = np.random.default_rng(seed)

    def make(sub, t):
        v = sub.q @ t
        n = spaces._norm(space, v)
        return v / n if n > 0 else v

    worst, worst_pair = 0.0, None
    for _ in range(samples):
        ty = rng.standard_normal(y_sub.dim) + 1j * rng.standard_normal(y_sub.dim)
        tz = rng.standard_normal(z_sub.dim) + 1j * rng.standard_normal(z_sub.dim)
        y = make(y_sub, ty)
        z = make(z_sub, tz)
        m = bj_min(space, y, z)
        g = spaces._norm(space, y) - m.value
        if g > worst:
            worst, worst_pair = g, (y, z)
    # worst-case polish from the worst sampled pair (or a fresh start)
    ky, kz = y_sub.dim, z_sub.dim
    t0 = rng.standard_normal(2 * (ky + kz))

    def neg_gap(v):
        ty = v[:ky] + 1j * v[ky : 2 * ky]
        tz = v[2 * ky : 2 * ky + kz] + 1j * v[2 * ky + kz :]
        if np.linalg.norm(ty) < 1e-9 or np.linalg.norm(tz) < 1e-9:
            return 0.0
        y = make(y_sub, ty)
        z = make(z_sub, tz)
        return -(spaces._norm(space, y) - bj_min(space, y, z, budget=200).value)

    f, _, _ = optim.compass_minimize(neg_gap, t0, step=0.5, budget=search_budget)
    worst = max(worst, -f)
    return SubspaceBJReport(worst <= tol, float(worst), worst_pair, samples)


@dataclass
class ProjectionReport:
    ok: bool
    idempotency_defect: float
    norm: operators.NormEstimate
    range_dim: int
    kernel_dim: int
    range_bj_kernel: SubspaceBJReport
    reasons: list


def norm_one_projection_check(
    p_op, tol_idem=1e-10, tol_norm=1e-6, seed=0, samples=48
):
    """Certify: P^2 = P entrywise, ||P|| = 1, and range(P) BJ-orthogonal to
    ker(P) (which is what being the range of a norm-one projection buys)."""
    if not p_op.square:
        raise ArgumentError("projection check needs a square operator")
    m = p_op.matrix
    reasons = []
    scale = max(1.0, float(np.abs(m).max()))
    idem = float(np.abs(m @ m - m).max())
    if idem > tol_idem * scale:
        reasons.append("idempotency defect %g" % idem)
    est = operators.operator_norm(p_op, seed=seed)
    if not (1.0 - tol_norm <= est.value <= 1.0 + tol_norm):
        if est.exact or est.value > 1.0 + tol_norm:
            reasons.append("operator norm %g not 1" % est.value)
        else:
            reasons.append("ascent stalled at %g < 1" % est.value)
    rng_sub = Subspace.column_space(m)
    ker_sub = Subspace.null_space(m)
    bj = bj_subspace(p_op.domain, rng_sub, ker_sub, samples=samples, seed=seed)
    if not bj.orthogonal:
        reasons.append("range not BJ-orthogonal to kernel (gap %g)" % bj.worst_gap)
    return ProjectionReport(
        not reasons, idem, est, rng_sub.dim, ker_sub.dim, bj, reasons
    )


# ---------------------------------------------------------------------------
# polynomial hull criterion


@dataclass
class HullReport:
    orthogonal: bool
    separation: float  # max over directions of min_s <d, s>; <= 0 means 0 in hull
    near_max_points: int
    bj_value: float
    bj_gap: float


def convex_hull_bj_poly(space, f, g, tol=1e-9):
    """0 in conv{ f(z) conj(g(z)) : |f(z)| >= ||f|| (1 - eps) } iff f BJ g.

    eps = 10 / gridsize approximates the peak set of |f| on the circle.
    Cross-checked against bj_min on the same grid; a clear contradiction
    raises InconsistentWitness.
    """
    if not isinstance(space, spaces.PolySup):
        raise ArgumentError("convex_hull_bj_poly needs a PolySup space")
    f = spaces.as_coeffs(space, f)
    g = spaces.as_coeffs(space, g)
    z = np.exp(2j * np.pi * np.arange(space.gridsize) / space.gridsize)
    fv = np.polynomial.polynomial.polyval(z, f)
    gv = np.polynomial.polynomial.polyval(z, g)
    nf = float(np.abs(fv).max())
    if nf == 0.0 or not np.any(np.abs(gv) > 0):
        return HullReport(True, 0.0, 0, spaces._norm(space, f), 0.0)
    eps = 10.0 / space.gridsize
    mask = np.abs(fv) >= nf * (1.0 - eps)
    if not np.any(mask):
        raise ArgumentError(
            "no grid point came within %g of the sup; refine the grid" % eps
        )
    s_pts = fv[mask] * np.conj(gv[mask])
    scale = max(float(np.abs(s_pts).max()), 1e-300)
    # separation oracle over directions on the circle, coarse then refined
    def min_dot(theta):
        d = np.exp(1j * theta)
        return float(np.real(np.conj(d) * s_pts).min())

    thetas = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
    vals = [min_dot(t) for t in thetas]
    k = int(np.argmax(vals))
    sep = vals[k]
    lo, hi = thetas[k] - 2 * np.pi / 720, thetas[k] + 2 * np.pi / 720
    for t in np.linspace(lo, hi, 64):
        sep = max(sep, min_dot(t))
    orthogonal = sep <= tol * scale
    m = bj_min(space, f, g)
    gap = nf - m.value
    if orthogonal and gap > 0.01 * nf:
        raise InconsistentWitness(
            "hull criterion says orthogonal, bj_min dropped by %g" % gap
        )
    if not orthogonal and gap <= 1e-6 * nf:
        raise InconsistentWitness(
            "hull criterion separated 0 (margin %g) but no bj_min drop" % sep
        )
    return HullReport(bool(orthogonal), float(sep), int(mask.sum()), m.value, gap)
