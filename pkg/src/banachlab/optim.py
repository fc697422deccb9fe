"""Shared numerical workhorses: norm gradients and small multi-start
searches.

Gradient convention: norm_grad returns the complex vector g with

    d ||x + t v|| / dt |_{t=0} = Re( sum_i conj(g_i) v_i ),

so the real-stacked gradient used by scipy is concat(Re g, Im g).  At
non-smooth points a subgradient selection is returned (sign vector for
p = 1, top coordinate for p = inf, argmax grid point for PolySup); the
smooth code paths never rely on those selections.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize

from . import spaces
from .errors import ArgumentError

__all__ = [
    "norm_grad",
    "stack",
    "unstack",
    "minimize_multistart",
    "compass_minimize",
]


def norm_grad(space, x):
    x = spaces.as_coeffs(space, x)
    return _grad(space, x)


def _grad(space, x):
    if isinstance(space, spaces.Lp):
        w = spaces._lp_weights(space)
        a = np.abs(x)
        if math.isinf(space.p):
            g = np.zeros_like(x)
            i = int(np.argmax(a * w))
            if a[i] > 0:
                g[i] = w[i] * x[i] / a[i]
            return g
        if space.p == 1.0:
            g = np.zeros_like(x)
            nz = a > 0
            g[nz] = w[nz] * x[nz] / a[nz]
            return g
        n = spaces._norm(space, x)
        if n == 0.0:
            return np.zeros_like(x)
        g = np.zeros_like(x)
        nz = a > 0
        g[nz] = n ** (1.0 - space.p) * w[nz] * a[nz] ** (space.p - 2.0) * x[nz]
        return g
    if isinstance(space, (spaces.DirectSum2, spaces.BlockSeq, spaces.BiBlockSeq)):
        n = spaces._norm(space, x)
        g = np.zeros_like(x)
        if n == 0.0:
            return g
        for off, sz, sub in spaces.block_layout(space):
            xb = x[off : off + sz]
            nb = spaces._norm(sub, xb)
            if nb > 0.0:
                g[off : off + sz] = (nb / n) * _grad(sub, xb)
        return g
    if isinstance(space, spaces.PolySup):
        z = np.exp(2j * np.pi * np.arange(space.gridsize) / space.gridsize)
        vals = np.polynomial.polynomial.polyval(z, x)
        k = int(np.argmax(np.abs(vals)))
        v = vals[k]
        if abs(v) == 0.0:
            return np.zeros_like(x)
        u = v / abs(v)
        return u * np.conj(z[k]) ** np.arange(space.degree + 1)
    if isinstance(space, spaces.Renormed):
        b = spaces._norm(space.base, x)
        tx = space.matrix @ x
        t = spaces._norm(space.base, tx)
        a = math.sqrt(max(b * b - t * t, 0.0))
        if a == 0.0:
            return np.zeros_like(x)
        gb = _grad(space.base, x)
        gt = _grad(space.base, tx)
        return (b * gb - t * (space.matrix.conj().T @ gt)) / a
    raise ArgumentError("norm_grad: unsupported descriptor %r" % (space,))


def stack(z):
    """Complex vector -> real-stacked vector."""
    return np.concatenate([z.real, z.imag])


def unstack(v):
    n = v.size // 2
    return v[:n] + 1j * v[n:]


def minimize_multistart(fun_and_grad, starts, maxiter=500, tol=1e-12):
    """L-BFGS from each real-stacked start; returns (best value, argmin).

    fun_and_grad(v) -> (value, real-stacked gradient).
    """
    best_v, best_x = np.inf, None
    for s in starts:
        res = optimize.minimize(
            fun_and_grad,
            s,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": maxiter, "ftol": tol, "gtol": 1e-12},
        )
        if res.fun < best_v:
            best_v, best_x = float(res.fun), res.x
    return best_v, best_x


def compass_minimize(fun, x0, step=0.25, budget=4000, rel_tol=1e-10):
    """Derivative-free pattern search on a real vector.

    Probes +-step along every coordinate, moves to the best improvement,
    halves the step on failure.  Good enough for the low-dimensional
    non-smooth searches (p = 1 / p = inf norms) where gradients lie.
    Returns (value, argmin, evals_used).
    """
    x = np.asarray(x0, dtype=float).copy()
    f = fun(x)
    evals = 1
    n = x.size
    while evals < budget and step > rel_tol * (1.0 + np.abs(x).max()):
        moved = False
        for i in range(n):
            for sgn in (1.0, -1.0):
                if evals >= budget:
                    break
                x[i] += sgn * step
                ft = fun(x)
                evals += 1
                if ft < f - 1e-15:
                    f = ft
                    moved = True
                else:
                    x[i] -= sgn * step
        if not moved:
            step *= 0.5
    return f, x, evals
