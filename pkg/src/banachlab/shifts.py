"""Truncated shifts, sigma-shifts, Moebius transforms, spectrum probes.

A sigma-shift is a surjective isometry between two norms carried by one
coefficient set of bi-sequences, with a generating subspace whose
iterates are two-sidedly BJ-orthogonal.  Two constructions live here:

  * make_sigma_shift: the bilateral block shift on BiBlockSeq(X, N),
    where both norms agree (the paper's basic example of a sigma-shift);
  * sigma_extension: extends a truncated unilateral shift V to
    bi-sequences over its generating subspace, with

        ||(l_n)||_Y^2  = ||sum_{n<0} V^|n| l_n||^2 + ||sum_{n>=0} V^n l_n||^2
        ||(l_n)||_sigma = ||(l_{n-1})||_Y

    so that Vtilde (l_n) = (l_{n-1}) is exactly isometric from the sigma
    norm to the Y norm.  Both norms factor through a fixed pullback
    matrix into a 2-sum of two copies of the domain, which keeps
    gradients available for descent.

All shift identities hold only on boundary-safe vectors; every probe
records its horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import operators, optim, spaces
from .errors import ArgumentError
from .subspace import Subspace

__all__ = [
    "make_unilateral_shift",
    "make_backward_shift",
    "make_flat_shift",
    "make_unitary_plus_shift",
    "block_subspace",
    "SigmaShiftBundle",
    "make_sigma_shift",
    "sigma_extension",
    "extension_embed",
    "phi_alpha",
    "spectrum_probe",
    "spectrum_scan",
    "BilateralPhiWitness",
    "bilateral_phi_witness",
]


def make_unilateral_shift(base, blocks):
    """Forward block shift M_z(x_0, ..., x_{b-1}) = (0, x_0, ..., x_{b-2})
    on BlockSeq(base, blocks); isometric when the last block is zero."""
    if blocks < 2:
        raise ArgumentError("need at least two blocks")
    n = spaces.dim(base)
    space = spaces.BlockSeq(base, blocks)
    kdim = blocks * n
    m = np.zeros((kdim, kdim), dtype=np.complex128)
    for j in range(blocks - 1):
        m[(j + 1) * n : (j + 2) * n, j * n : (j + 1) * n] = np.eye(n)
    ann = {"kind": "shift_block", "direction": "forward", "base_dim": n,
           "blocks": blocks}
    return operators.Operator(m, space, space, ann)


def make_backward_shift(base, blocks):
    """Backward block shift (x_0, x_1, ...) -> (x_1, ..., x_{b-1}, 0)."""
    if blocks < 2:
        raise ArgumentError("need at least two blocks")
    n = spaces.dim(base)
    space = spaces.BlockSeq(base, blocks)
    kdim = blocks * n
    m = np.zeros((kdim, kdim), dtype=np.complex128)
    for j in range(blocks - 1):
        m[j * n : (j + 1) * n, (j + 1) * n : (j + 2) * n] = np.eye(n)
    ann = {"kind": "shift_block", "direction": "backward", "base_dim": n,
           "blocks": blocks}
    return operators.Operator(m, space, space, ann)


def make_flat_shift(space, step):
    """Coordinate shift by `step` on a plain Lp space: e_i -> e_{i+step}.

    The same unilateral-shift algebra as the block version, but the
    iterated images of the generating coordinates are NOT norm-split
    blocks unless p = 2, which is what makes sigma_extension produce two
    genuinely different norms.
    """
    if not isinstance(space, spaces.Lp):
        raise ArgumentError("flat shifts live on plain Lp spaces")
    n = spaces.dim(space)
    if step < 1 or n % step != 0 or n // step < 2:
        raise ArgumentError("step must divide the dimension with quotient >= 2")
    if space.weights is not None:
        w = np.asarray(space.weights)
        if np.abs(w - w[0]).max() > 1e-15:
            raise ArgumentError("flat shifts need constant weights to be isometric")
    m = np.zeros((n, n), dtype=np.complex128)
    for i in range(n - step):
        m[i + step, i] = 1.0
    ann = {"kind": "coordinate_shift", "step": step, "blocks": n // step}
    return operators.Operator(m, space, space, ann)


def make_unitary_plus_shift(u_op, base, blocks):
    """Direct 2-sum of a surjective isometry with a forward block shift.

    The result carries the annotation the Wold splitter inverts, so it
    doubles as the ground-truth generator for those tests.
    """
    if blocks < 2:
        raise ArgumentError("need at least two blocks")
    u = spaces.dim(u_op.domain)
    d = spaces.dim(base)
    space = spaces.DirectSum2((u_op.domain, spaces.BlockSeq(base, blocks)))
    n = u + d * blocks
    m = np.zeros((n, n), dtype=np.complex128)
    m[:u, :u] = u_op.matrix
    for j in range(blocks - 1):
        r = u + (j + 1) * d
        c = u + j * d
        m[r : r + d, c : c + d] = np.eye(d)
    ann = {
        "kind": "unitary_plus_shift",
        "unitary_dim": u,
        "base_dim": d,
        "blocks": blocks,
        "unitary": [[[v.real, v.imag] for v in row] for row in u_op.matrix],
    }
    return operators.Operator(m, space, space, ann)


def block_subspace(space, index):
    """The coordinate subspace of one block of a BlockSeq/BiBlockSeq."""
    layout = spaces.block_layout(space)
    if isinstance(space, spaces.BiBlockSeq):
        index = index + space.halfwidth
    off, size, _sub = layout[index]
    n = spaces.dim(space)
    cols = np.zeros((n, size), dtype=np.complex128)
    for k in range(size):
        cols[off + k, k] = 1.0
    return Subspace(cols)


# ---------------------------------------------------------------------------
# sigma-shift bundles


@dataclass
class SigmaShiftBundle:
    space: spaces.BiBlockSeq  # coefficient layout of the bi-sequences
    norm_y: object  # callable on coefficient arrays
    norm_sigma: object  # callable; norm_sigma(l) = norm_y(Vtilde l)
    vtilde: operators.Operator
    generating: Subspace
    halfwidth: int
    kind: str  # "bilateral" | "extension"
    base: object  # descriptor of the generating subspace norm
    pull_matrix: np.ndarray | None = None
    pull_space: object | None = None
    source: operators.Operator | None = field(default=None, repr=False)

    def grad_y(self, l):
        """Gradient of norm_y in the Re(conj(g) . dl) convention."""
        if self.pull_matrix is None:
            return optim.norm_grad(self.space, l)
        g = optim.norm_grad(self.pull_space, self.pull_matrix @ l)
        return self.pull_matrix.conj().T @ g

    def safe_embed(self, profile):
        """Coefficient array from {slot index: base vector} dict."""
        x = spaces.zero(self.space)
        d = spaces.dim(self.base)
        for n, v in profile.items():
            if abs(n) > self.halfwidth:
                raise ArgumentError("slot %d outside the window" % n)
            off = (n + self.halfwidth) * d
            x[off : off + d] = np.asarray(v, dtype=np.complex128)
        return x


def make_sigma_shift(base, halfwidth):
    """Bilateral block shift on BiBlockSeq(base, halfwidth) as a
    sigma-shift whose two norms coincide (the 2-sum of block norms)."""
    if halfwidth < 2:
        raise ArgumentError("halfwidth must be at least 2")
    space = spaces.BiBlockSeq(base, halfwidth)
    n = spaces.dim(base)
    width = 2 * halfwidth + 1
    kdim = width * n
    m = np.zeros((kdim, kdim), dtype=np.complex128)
    for s in range(width - 1):
        m[(s + 1) * n : (s + 2) * n, s * n : (s + 1) * n] = np.eye(n)
    ann = {"kind": "bilateral_shift", "base_dim": n, "halfwidth": halfwidth}
    u = operators.Operator(m, space, space, ann)

    def norm_both(l):
        return spaces._norm(space, np.asarray(l, dtype=np.complex128))

    return SigmaShiftBundle(
        space, norm_both, norm_both, u, block_subspace(space, 0),
        halfwidth, "bilateral", base,
    )


def sigma_extension(v_op):
    """Extend a truncated unilateral shift to a sigma-shift bundle.

    Accepts the block shift from make_unilateral_shift or the flat
    coordinate shift from make_flat_shift; anything else is refused.
    The generating subspace is the first block of the domain.
    """
    ann = v_op.annotation or {}
    kind = ann.get("kind")
    if kind == "shift_block" and ann.get("direction") == "forward":
        d = ann["base_dim"]
        b = ann["blocks"]
        gen_space = v_op.domain.base
    elif kind == "coordinate_shift":
        d = ann["step"]
        b = ann["blocks"]
        dom = v_op.domain
        w = None if dom.weights is None else dom.weights[:d]
        gen_space = spaces.Lp(d, dom.p, w)
    else:
        raise ArgumentError(
            "sigma_extension needs a forward unilateral shift (block or flat)"
        )
    domain = v_op.domain
    ndom = spaces.dim(domain)
    halfwidth = b - 1
    if halfwidth < 1:
        raise ArgumentError("need at least two blocks to extend")
    layout = spaces.BiBlockSeq(gen_space, halfwidth)
    width = 2 * halfwidth + 1
    ydim = width * d
    # embedding of the generating subspace into the domain
    e = np.zeros((ndom, d), dtype=np.complex128)
    e[:d, :] = np.eye(d)
    # pullback: first copy collects sum_{n<0} V^|n| l_n, second the rest
    pull = np.zeros((2 * ndom, ydim), dtype=np.complex128)
    vpow = [np.eye(ndom, dtype=np.complex128)]
    for _ in range(halfwidth):
        vpow.append(v_op.matrix @ vpow[-1])
    for idx in range(width):
        n = idx - halfwidth
        col = vpow[abs(n)] @ e
        if n < 0:
            pull[:ndom, idx * d : (idx + 1) * d] = col
        else:
            pull[ndom:, idx * d : (idx + 1) * d] = col
    pull_space = spaces.DirectSum2((domain, domain))
    shift = np.zeros((ydim, ydim), dtype=np.complex128)
    for s in range(width - 1):
        shift[(s + 1) * d : (s + 2) * d, s * d : (s + 1) * d] = np.eye(d)
    vt = operators.Operator(
        shift, layout, layout,
        {"kind": "bilateral_shift", "base_dim": d, "halfwidth": halfwidth},
    )

    def norm_y(l):
        return spaces._norm(pull_space, pull @ np.asarray(l, dtype=np.complex128))

    def norm_sigma(l):
        return norm_y(shift @ np.asarray(l, dtype=np.complex128))

    return SigmaShiftBundle(
        layout, norm_y, norm_sigma, vt, block_subspace(layout, 0),
        halfwidth, "extension", gen_space, pull, pull_space, v_op,
    )


def extension_embed(bundle, x):
    """Nonnegative-slot embedding of a domain vector of the source shift.

    Block n of x goes to slot n; norm_y of the result equals ||x|| and
    Vtilde composed with the embedding equals the embedding of Vx
    (both sides truncate the same top block).
    """
    if bundle.kind != "extension" or bundle.source is None:
        raise ArgumentError("only extension bundles embed their source space")
    d = spaces.dim(bundle.base)
    x = np.asarray(x, dtype=np.complex128)
    out = spaces.zero(bundle.space)
    for k in range(bundle.halfwidth + 1):
        off = (k + bundle.halfwidth) * d
        out[off : off + d] = x[k * d : (k + 1) * d]
    return out


# ---------------------------------------------------------------------------
# Moebius transforms


def phi_alpha(t_op, alpha, cond_limit=1e8):
    """phi_alpha(T) = (T - alpha I)(I - conj(alpha) T)^{-1} by direct solve.

    The annotation records alpha, the condition number of the solve, and
    whether it crossed the flag limit.
    """
    if not t_op.square:
        raise ArgumentError("Moebius transforms need a square operator")
    alpha = complex(alpha)
    if abs(alpha) >= 1.0:
        raise ArgumentError("|alpha| must be < 1")
    n = t_op.matrix.shape[0]
    a = np.eye(n) - np.conj(alpha) * t_op.matrix
    b = t_op.matrix - alpha * np.eye(n)
    # right division: phi = b a^{-1}
    phi = np.linalg.solve(a.T, b.T).T
    cond = float(np.linalg.cond(a))
    ann = {
        "kind": "mobius",
        "alpha": [alpha.real, alpha.imag],
        "cond": cond,
        "flagged": cond > cond_limit,
    }
    return operators.Operator(phi, t_op.domain, t_op.codomain, ann)


# ---------------------------------------------------------------------------
# spectrum probes


def _geometric(lam, s):
    """lam^s with overflow protection; 0 when the power is huge."""
    if abs(lam) < 1e-12:
        return 1.0 if s == 0 else 0.0
    mag = abs(lam) ** s
    if not math.isfinite(mag) or mag > 1e9:
        return 0.0
    return lam ** s


def _probe_seeds(bundle, lam, horizon, seed, extra_random=2):
    d = spaces.dim(bundle.base)
    rng = np.random.default_rng(seed)
    dirs = [np.eye(d, dtype=np.complex128)[:, 0]]
    if d > 1:
        g = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        dirs.append(g / np.linalg.norm(g))
    slots = list(range(-horizon, horizon))
    nonneg = [s for s in slots if s >= 0]
    two_sided = abs(abs(lam) - 1.0) < 1e-9  # phases stay bounded both ways
    out = []
    for u in dirs:
        for taper in (False, True):
            for support in ((slots,) if two_sided else ()) + (nonneg,):
                prof = {}
                for pos, s in enumerate(support):
                    amp = 1.0
                    if taper:
                        amp = 0.5 - 0.5 * math.cos(
                            2.0 * math.pi * (pos + 0.5) / len(support)
                        )
                    prof[s] = amp * _geometric(lam, s) * u
                out.append(bundle.safe_embed(prof))
    for _ in range(extra_random):
        prof = {
            s: (rng.standard_normal(d) + 1j * rng.standard_normal(d))
            for s in slots
        }
        out.append(bundle.safe_embed(prof))
    return out


def spectrum_probe(bundle, lam, horizon=None, seed=0, maxiter=400):
    """Certified upper bound on min ||(Vtilde - lam) x||_Y / ||x||_Y over
    boundary-safe x supported in slots [-horizon, horizon).

    Seeds are truncated geometric profiles (flat and cosine-tapered) plus
    random ones; smooth bundles get an analytic-gradient descent.  The
    returned value is always a feasible residual.
    """
    lam = complex(lam)
    n_half = bundle.halfwidth
    if horizon is None:
        horizon = n_half - 1
    if not 1 <= horizon <= n_half - 1:
        raise ArgumentError("horizon must lie in [1, halfwidth - 1]")
    d = spaces.dim(bundle.base)
    ydim = spaces.dim(bundle.space)
    lo = (n_half - horizon) * d
    hi = (n_half + horizon) * d
    mask = np.zeros(ydim, dtype=bool)
    mask[lo:hi] = True
    bmat = bundle.vtilde.matrix - lam * np.eye(ydim)

    def resid(x):
        ny = bundle.norm_y(x)
        if ny < 1e-14:
            return np.inf
        return bundle.norm_y(bmat @ x) / ny

    best, best_x = np.inf, None
    for s in _probe_seeds(bundle, lam, horizon, seed):
        r = resid(s)
        if r < best:
            best, best_x = r, s
    smooth = spaces.is_smooth(
        bundle.pull_space if bundle.pull_space is not None else bundle.space
    )
    free = int(mask.sum())

    def unpack(v):
        x = np.zeros(ydim, dtype=np.complex128)
        x[mask] = v[:free] + 1j * v[free:]
        return x

    if smooth:
        def fun_and_grad(v):
            x = unpack(v)
            ny = bundle.norm_y(x)
            if ny < 1e-12:
                return 1e6, np.zeros_like(v)
            bx = bmat @ x
            nb = bundle.norm_y(bx)
            r = nb / ny
            gb = bundle.grad_y(bx) if nb > 1e-14 else np.zeros(ydim, np.complex128)
            gx = bundle.grad_y(x)
            g = (bmat.conj().T @ gb - r * gx) / ny
            gm = g[mask]
            return r, np.concatenate([gm.real, gm.imag])

        starts = []
        if best_x is not None:
            starts.append(np.concatenate(
                [best_x[mask].real, best_x[mask].imag]))
        rng = np.random.default_rng(seed + 1)
        starts.append(rng.standard_normal(2 * free))
        val, vbest = optim.minimize_multistart(fun_and_grad, starts, maxiter=maxiter)
        r = resid(unpack(vbest))
        if r < best:
            best = r
    else:
        f, vb, _ = optim.compass_minimize(
            lambda v: resid(unpack(v)),
            np.concatenate([best_x[mask].real, best_x[mask].imag]),
            step=0.2,
            budget=4000,
        )
        r = resid(unpack(vb))
        if r < best:
            best = r
    return float(best)


def spectrum_scan(bundle, lams, horizon=None, seed=0):
    """Rows (lam_re, lam_im, residual, horizon) for a list of lambdas."""
    if horizon is None:
        horizon = bundle.halfwidth - 1
    rows = []
    for lam in lams:
        lam = complex(lam)
        r = spectrum_probe(bundle, lam, horizon, seed=seed)
        rows.append((lam.real, lam.imag, r, horizon))
    return rows


# ---------------------------------------------------------------------------
# the bilateral Moebius witness


@dataclass
class BilateralPhiWitness:
    ratio: float  # ||phi_alpha(U) w||_Y / ||w||_Y at the witness
    alpha: complex
    x: np.ndarray
    y: np.ndarray
    lhs: float  # ||x - alpha y||
    rhs: float  # ||y - conj(alpha) x||
    exact_application: float  # ||phi_alpha(U) w - (U - alpha) xvec||


def bilateral_phi_witness(base, alpha=0.5, samples=200, seed=0, halfwidth=4):
    """Search for unit x, y in the base space making phi_alpha of the
    bilateral shift expand a vector.

    The probe vector is (..., 0, [x], y, 0, ...) with x in slot 0.  With
    w = (I - conj(alpha) U) xvec, the truncated U is nilpotent above the
    window so phi_alpha(U) w = (U - alpha) xvec exactly, and comparing
    the two 2-sums reduces (for unit x, y) to ||x - alpha y|| versus
    ||y - conj(alpha) x||.  On a Hilbert base the two sides are always
    equal; elsewhere a strict gap is searched for.
    """
    alpha = complex(alpha)
    bundle = make_sigma_shift(base, halfwidth)
    u = bundle.vtilde
    phi = phi_alpha(u, alpha)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(samples):
        x = spaces.random_unit(base, int(rng.integers(0, 2**31)))
        y = spaces.random_unit(base, int(rng.integers(0, 2**31)))
        lhs = spaces._norm(base, x - alpha * y)
        rhs = spaces._norm(base, y - np.conj(alpha) * x)
        if best is None or lhs - rhs > best[0]:
            best = (lhs - rhs, x, y, lhs, rhs)
    n = spaces.dim(base)

    def neg_gap(v):
        x, y = optim.unstack(v[: 2 * n]), optim.unstack(v[2 * n :])
        nx, ny = spaces._norm(base, x), spaces._norm(base, y)
        if nx < 1e-9 or ny < 1e-9:
            return 0.0
        x, y = x / nx, y / ny
        return -(
            spaces._norm(base, x - alpha * y)
            - spaces._norm(base, y - np.conj(alpha) * x)
        )

    v0 = np.concatenate([optim.stack(best[1]), optim.stack(best[2])])
    f, vb, _ = optim.compass_minimize(neg_gap, v0, step=0.25, budget=3000)
    if -f > best[0]:
        x = optim.unstack(vb[:2 * n])
        y = optim.unstack(vb[2 * n:])
        x = x / spaces._norm(base, x)
        y = y / spaces._norm(base, y)
        best = (
            -f, x, y,
            spaces._norm(base, x - alpha * y),
            spaces._norm(base, y - np.conj(alpha) * x),
        )
    _, x, y, lhs, rhs = best
    xvec = bundle.safe_embed({0: x, 1: y})
    w = xvec - np.conj(alpha) * (u.matrix @ xvec)
    target = u.matrix @ xvec - alpha * xvec
    applied = phi.matrix @ w
    exact = float(np.abs(applied - target).max())
    ratio = bundle.norm_y(applied) / bundle.norm_y(w)
    return BilateralPhiWitness(float(ratio), alpha, x, y, float(lhs),
                               float(rhs), exact)
