"""Operators between coefficient spaces: structure annotations, certified
norms, contraction functionals, attainment sets and Wold-type left
inverses.

An Operator is a dense matrix plus domain/codomain descriptors and an
optional structure annotation.  Annotations are plain JSON-able dicts and
are always validated against the stored matrix; they unlock exact norm
formulas and structural decompositions.  Supported kinds:

    diagonal            {"values": [...]}
    rank_one            {"x": [...], "y": [...], "scale": z}   T(v) = scale * f_x(v) y
    permutation_phase   {"perm": [...], "phases": [...]}       T e_j = phases[j] e_perm[j]
    scaled_permutation  {"targets": [...], "scales": [...]}    targets may be -1 (maps to 0)
    shift_block         {"direction": "forward"|"backward", "base_dim": d, "blocks": b}
    bilateral_shift     {"base_dim": d, "halfwidth": N}
    unitary_plus_shift  {"unitary_dim": u, "base_dim": d, "blocks": b}

plus free-form extra keys (e.g. "model_norm" for operators that truncate
an infinite model whose norm is not attained in the window).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import functionals, optim, spaces
from .errors import ArgumentError, ContractionError, InconsistentWitness
from .subspace import Subspace

__all__ = [
    "Operator",
    "identity",
    "compose",
    "diagonal_operator",
    "rank_one_operator",
    "permutation_phase_operator",
    "scaled_permutation_operator",
    "matrix_from_annotation",
    "validate_annotation",
    "operator_to_dict",
    "operator_from_dict",
    "NormEstimate",
    "operator_norm",
    "a_T",
    "a_hat_T",
    "clamp_events",
    "reset_clamp_events",
    "ContractionClass",
    "classify_contraction",
    "AttainmentReport",
    "norm_attainment_set",
    "banach_adjoint",
    "LeftInverse",
    "left_inverse",
    "phase_normalize",
]


@dataclass(eq=False)
class Operator:
    matrix: np.ndarray
    domain: object
    codomain: object
    annotation: dict | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        want = (spaces.dim(self.codomain), spaces.dim(self.domain))
        if m.shape != want:
            raise ArgumentError("operator matrix shape %r, expected %r" % (m.shape, want))
        self.matrix = m
        if self.annotation is not None:
            validate_annotation(self)

    def __call__(self, x):
        return self.matrix @ spaces.as_coeffs(self.domain, x)

    @property
    def square(self):
        return self.matrix.shape[0] == self.matrix.shape[1]

    def power(self, k):
        if not self.square:
            raise ArgumentError("powers need a square operator")
        return np.linalg.matrix_power(self.matrix, k)


def identity(space):
    return Operator(np.eye(spaces.dim(space)), space, space)


def compose(a, b):
    """a after b."""
    if spaces.dim(a.domain) != spaces.dim(b.codomain):
        raise ArgumentError("composition shape mismatch")
    return Operator(a.matrix @ b.matrix, b.domain, a.codomain)


# ---------------------------------------------------------------------------
# annotations


def _c(v):
    v = complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
    return v


def _clist(vs):
    return [_c(v) for v in vs]


def matrix_from_annotation(domain, codomain, ann):
    n, m = spaces.dim(domain), spaces.dim(codomain)
    kind = ann["kind"]
    if kind == "diagonal":
        vals = _clist(ann["values"])
        if len(vals) != n or n != m:
            raise ArgumentError("diagonal annotation dimension mismatch")
        return np.diag(np.asarray(vals, dtype=np.complex128))
    if kind == "rank_one":
        x = np.asarray(_clist(ann["x"]), dtype=np.complex128)
        y = np.asarray(_clist(ann["y"]), dtype=np.complex128)
        scale = _c(ann.get("scale", 1.0))
        f = functionals.support_functional(domain, x)
        return scale * np.outer(y, f)
    if kind == "permutation_phase":
        perm = list(ann["perm"])
        phases = _clist(ann["phases"])
        if sorted(perm) != list(range(n)) or n != m:
            raise ArgumentError("permutation_phase needs a full permutation")
        mat = np.zeros((m, n), dtype=np.complex128)
        for j, (t, ph) in enumerate(zip(perm, phases)):
            mat[t, j] = ph
        return mat
    if kind == "scaled_permutation":
        targets = list(ann["targets"])
        scales = _clist(ann["scales"])
        mat = np.zeros((m, n), dtype=np.complex128)
        hit = set()
        for j, (t, s) in enumerate(zip(targets, scales)):
            if t < 0:
                continue
            if t in hit:
                raise ArgumentError("scaled_permutation targets must be distinct")
            hit.add(t)
            mat[t, j] = s
        return mat
    if kind == "shift_block":
        d, b = int(ann["base_dim"]), int(ann["blocks"])
        if n != m or n != d * b:
            raise ArgumentError("shift_block dimension mismatch")
        mat = np.zeros((m, n), dtype=np.complex128)
        if ann["direction"] == "forward":
            for k in range(b - 1):
                mat[(k + 1) * d : (k + 2) * d, k * d : (k + 1) * d] = np.eye(d)
        elif ann["direction"] == "backward":
            for k in range(1, b):
                mat[(k - 1) * d : k * d, k * d : (k + 1) * d] = np.eye(d)
        else:
            raise ArgumentError("shift_block direction must be forward/backward")
        return mat
    if kind == "bilateral_shift":
        d, hw = int(ann["base_dim"]), int(ann["halfwidth"])
        b = 2 * hw + 1
        if n != m or n != d * b:
            raise ArgumentError("bilateral_shift dimension mismatch")
        mat = np.zeros((m, n), dtype=np.complex128)
        for k in range(b - 1):
            mat[(k + 1) * d : (k + 2) * d, k * d : (k + 1) * d] = np.eye(d)
        return mat
    if kind == "unitary_plus_shift":
        u = int(ann["unitary_dim"])
        d, b = int(ann["base_dim"]), int(ann["blocks"])
        if n != m or n != u + d * b:
            raise ArgumentError("unitary_plus_shift dimension mismatch")
        mat = np.zeros((m, n), dtype=np.complex128)
        mat[:u, :u] = np.asarray(
            [[_c(v) for v in row] for row in ann["unitary"]], dtype=np.complex128
        )
        for k in range(b - 1):
            r = u + (k + 1) * d
            c = u + k * d
            mat[r : r + d, c : c + d] = np.eye(d)
        return mat
    raise ArgumentError("unknown annotation kind %r" % kind)


_STRUCTURAL_KINDS = (
    "diagonal",
    "rank_one",
    "permutation_phase",
    "scaled_permutation",
    "shift_block",
    "bilateral_shift",
    "unitary_plus_shift",
)


def validate_annotation(op, tol=1e-14):
    """Entrywise audit of structural annotations.

    Kinds without a matrix recipe (purely advisory tags such as mobius
    metadata) pass through unchecked.
    """
    if op.annotation.get("kind") not in _STRUCTURAL_KINDS:
        return True
    rebuilt = matrix_from_annotation(op.domain, op.codomain, op.annotation)
    scale = max(1.0, float(np.abs(op.matrix).max()))
    err = float(np.abs(rebuilt - op.matrix).max())
    if err > tol * scale:
        raise ArgumentError(
            "annotation does not reproduce the matrix (entrywise error %g)" % err
        )
    return True


def diagonal_operator(space, values, **extra):
    ann = {"kind": "diagonal", "values": [[v.real, v.imag] for v in map(complex, values)]}
    ann.update(extra)
    return Operator(np.diag(np.asarray(values, dtype=np.complex128)), space, space, ann)


def rank_one_operator(space, x, y, scale=1.0):
    x = spaces.as_coeffs(space, x)
    y = spaces.as_coeffs(space, y)
    ann = {
        "kind": "rank_one",
        "x": [[v.real, v.imag] for v in x],
        "y": [[v.real, v.imag] for v in y],
        "scale": [complex(scale).real, complex(scale).imag],
    }
    f = functionals.support_functional(space, x)
    return Operator(complex(scale) * np.outer(y, f), space, space, ann)


def permutation_phase_operator(space, perm, phases=None, **extra):
    n = spaces.dim(space)
    phases = [1.0] * n if phases is None else list(phases)
    ann = {
        "kind": "permutation_phase",
        "perm": list(map(int, perm)),
        "phases": [[complex(p).real, complex(p).imag] for p in phases],
    }
    ann.update(extra)
    mat = matrix_from_annotation(space, space, ann)
    return Operator(mat, space, space, ann)


def scaled_permutation_operator(space, targets, scales, **extra):
    ann = {
        "kind": "scaled_permutation",
        "targets": list(map(int, targets)),
        "scales": [[complex(s).real, complex(s).imag] for s in scales],
    }
    ann.update(extra)
    mat = matrix_from_annotation(space, space, ann)
    return Operator(mat, space, space, ann)


def operator_to_dict(op):
    return {
        "matrix_re": op.matrix.real.tolist(),
        "matrix_im": op.matrix.imag.tolist(),
        "domain": spaces.space_to_dict(op.domain),
        "codomain": spaces.space_to_dict(op.codomain),
        "annotation": op.annotation,
    }


def operator_from_dict(d):
    m = np.asarray(d["matrix_re"], dtype=float) + 1j * np.asarray(
        d["matrix_im"], dtype=float
    )
    return Operator(
        m,
        spaces.space_from_dict(d["domain"]),
        spaces.space_from_dict(d["codomain"]),
        d.get("annotation"),
    )


# ---------------------------------------------------------------------------
# operator norm


@dataclass
class NormEstimate:
    value: float
    exact: bool
    witness: np.ndarray | None = None


def _diag_weight_vec(space):
    # weights as a vector when the space is a plain Lp
    if isinstance(space, spaces.Lp):
        return spaces._lp_weights(space), space.p
    return None, None


def _exact_norm(op):
    dom, cod = op.domain, op.codomain
    ann = op.annotation or {}
    kind = ann.get("kind")
    if kind in ("shift_block", "bilateral_shift"):
        # isometric on all but the dropped block, attained on block 0 / 1
        d = int(ann["base_dim"])
        j = 0 if ann.get("direction", "forward") == "forward" else d
        w = spaces.zero(dom)
        w[j] = 1.0
        w /= spaces._norm(dom, w)
        return NormEstimate(1.0, True, w)
    if kind == "diagonal" and dom == cod:
        vals = np.abs(np.diag(op.matrix))
        j = int(np.argmax(vals))
        w = spaces.zero(dom)
        w[j] = 1.0
        w /= spaces._norm(dom, w)
        return NormEstimate(float(vals[j]), True, w)
    if kind in ("permutation_phase", "scaled_permutation"):
        if isinstance(dom, spaces.Lp) and dom.weights is None and dom == cod:
            cols = np.abs(op.matrix).sum(axis=0)  # one entry per column here
            j = int(np.argmax(cols))
            w = spaces.zero(dom)
            w[j] = 1.0
            return NormEstimate(float(cols[j]), True, w)
    if kind == "rank_one":
        x = np.asarray(_clist(ann["x"]), dtype=np.complex128)
        y = np.asarray(_clist(ann["y"]), dtype=np.complex128)
        s = abs(_c(ann.get("scale", 1.0)))
        value = s * spaces._norm(dom, x) * spaces._norm(cod, y)
        w = x / spaces._norm(dom, x)
        return NormEstimate(float(value), True, w)
    sd = spaces.euclidean_scale(dom)
    sc = spaces.euclidean_scale(cod)
    if sd is not None and sc is not None:
        m = (sc[:, None] * op.matrix) / sd[None, :]
        u, s, vh = linalg.svd(m)
        w = vh[0].conj() / sd
        nw = spaces._norm(dom, w)
        return NormEstimate(float(s[0]), True, w / nw if nw > 0 else None)
    wd, pd = _diag_weight_vec(dom)
    wc, pc = _diag_weight_vec(cod)
    if wd is not None and wc is not None:
        if pd == pc == 1.0:
            col = (np.abs(op.matrix) * wc[:, None]).sum(axis=0) / wd
            j = int(np.argmax(col))
            w = spaces.zero(dom)
            w[j] = 1.0 / wd[j]
            return NormEstimate(float(col[j]), True, w)
        if math.isinf(pd) and math.isinf(pc):
            row = (np.abs(op.matrix) / wd[None, :]).sum(axis=1) * wc
            i = int(np.argmax(row))
            w = np.conj(op.matrix[i])
            nz = np.abs(w) > 0
            w[nz] = w[nz] / np.abs(w[nz])
            w = w / wd
            return NormEstimate(float(row[i]), True, w)
    return None


def _ratio_maximizers(op, restarts, seed, maxiter=300):
    """Multi-start ascent of ||Tx|| / ||x||; returns [(ratio, unit x)]."""
    dom, cod = op.domain, op.codomain
    n = spaces.dim(dom)
    rng = np.random.default_rng(seed)
    starts = []
    # euclidean top singular vector is a good warm start in any p
    try:
        _, _, vh = linalg.svd(op.matrix)
        starts.append(vh[0].conj())
    except linalg.LinAlgError:
        pass
    for j in range(min(n, 4)):
        starts.append(spaces.basis_vector(dom, j))
    while len(starts) < restarts:
        starts.append(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    smooth = spaces.is_smooth(dom) and spaces.is_smooth(cod)
    out = []
    if smooth:

        def fun(v):
            x = optim.unstack(v)
            tx = op.matrix @ x
            nx = spaces._norm(dom, x)
            ntx = spaces._norm(cod, tx)
            if nx < 1e-14 or ntx < 1e-300:
                return 1e6, np.zeros_like(v)
            g = (op.matrix.conj().T @ optim.norm_grad(cod, tx)) / ntx - optim.norm_grad(
                dom, x
            ) / nx
            return -(math.log(ntx) - math.log(nx)), -optim.stack(g)

        for x0 in starts:
            val, v = optim.minimize_multistart(fun, [optim.stack(x0)], maxiter=maxiter)
            if v is None:
                continue
            x = optim.unstack(v)
            nx = spaces._norm(dom, x)
            if nx < 1e-14:
                continue
            x = x / nx
            out.append((spaces._norm(cod, op.matrix @ x), x))
    else:

        def fun_ns(v):
            x = optim.unstack(v)
            nx = spaces._norm(dom, x)
            if nx < 1e-14:
                return 1e6
            return -spaces._norm(cod, op.matrix @ x) / nx

        for x0 in starts:
            f, v, _ = optim.compass_minimize(
                fun_ns, optim.stack(x0), step=0.5, budget=3000
            )
            x = optim.unstack(v)
            nx = spaces._norm(dom, x)
            if nx < 1e-14:
                continue
            out.append((-f, x / nx))
    return out


def operator_norm(op, restarts=32, seed=0):
    """Certified-exact norm when structure allows, else the best multi-start
    ascent value (a certified lower bound, exact=False)."""
    exact = _exact_norm(op)
    if exact is not None:
        return exact
    cands = _ratio_maximizers(op, restarts, seed)
    if not cands:
        return NormEstimate(0.0, False, None)
    val, x = max(cands, key=lambda t: t[0])
    return NormEstimate(float(val), False, x)


# ---------------------------------------------------------------------------
# contraction functional


_CLAMP_EVENTS = []


def clamp_events():
    return list(_CLAMP_EVENTS)


def reset_clamp_events():
    _CLAMP_EVENTS.clear()


def a_T(op, x):
    """A_T(x) = sqrt(||x||^2 - ||Tx||^2); requires a contraction.

    Radicands in [-1e-9 * scale, 0) are clamped to zero and logged; more
    negative radicands raise ContractionError.
    """
    x = spaces.as_coeffs(op.domain, x)
    nx = spaces._norm(op.domain, x)
    ntx = spaces._norm(op.codomain, op.matrix @ x)
    rad = nx * nx - ntx * ntx
    scale = max(nx * nx, 1.0)
    if rad < 0.0:
        if rad < -1e-9 * scale:
            raise ContractionError(
                "not a contraction: ||Tx|| exceeds ||x|| by radicand %g" % rad
            )
        _CLAMP_EVENTS.append({"radicand": rad, "scale": scale})
        rad = 0.0
    return math.sqrt(rad)


def a_hat_T(op, x, norm_value=None):
    """A-hat: sqrt(||T||^2 ||x||^2 - ||Tx||^2) = ||T|| A_{T/||T||}(x)."""
    if norm_value is None:
        norm_value = operator_norm(op).value
    x = spaces.as_coeffs(op.domain, x)
    nx = spaces._norm(op.domain, x)
    ntx = spaces._norm(op.codomain, op.matrix @ x)
    rad = norm_value * norm_value * nx * nx - ntx * ntx
    scale = max(norm_value * norm_value * nx * nx, 1.0)
    if rad < 0.0:
        if rad < -1e-9 * scale:
            raise ContractionError("||Tx|| exceeds ||T|| ||x||: radicand %g" % rad)
        _CLAMP_EVENTS.append({"radicand": rad, "scale": scale})
        rad = 0.0
    return math.sqrt(rad)


# ---------------------------------------------------------------------------
# classification and attainment


@dataclass
class ContractionClass:
    label: str  # "strict" | "G1" | "G2"
    norm: NormEstimate
    witness: np.ndarray | None = None


_STRICT_TOL = 1e-9
_G1_STALL = 1e-6


def classify_contraction(op, seed=0, restarts=32):
    """strict (||T|| < 1), G2 (norm 1, attained), or G1 (norm 1 declared by
    the annotated infinite model, never attained in the window).

    In finite dimension a norm is always attained, so G1 is only reachable
    for truncations that declare "model_norm" in their annotation: the
    window sup stalls strictly below the declared norm.
    """
    est = operator_norm(op, restarts=restarts, seed=seed)
    ann = op.annotation or {}
    model = ann.get("model_norm")
    if model is not None:
        model = float(model)
        if est.value <= model - _G1_STALL:
            return ContractionClass("G1", est, None)
        return ContractionClass("G2", est, est.witness)
    if est.value < 1.0 - _STRICT_TOL:
        return ContractionClass("strict", est, None)
    return ContractionClass("G2", est, est.witness)


def phase_normalize(x, tol=1e-12):
    """Rotate so the first significantly nonzero coordinate is positive real."""
    x = np.asarray(x, dtype=np.complex128)
    idx = np.flatnonzero(np.abs(x) > tol * max(np.abs(x).max(), 1e-300))
    if idx.size == 0:
        return x.copy()
    ph = x[idx[0]] / abs(x[idx[0]])
    return x / ph


@dataclass
class AttainmentReport:
    norm: float
    witnesses: list
    subspace: Subspace | None
    is_subspace: bool | None
    failing_pair: tuple | None
    kernel_dim: int | None = None


def norm_attainment_set(op, seed=0, restarts=32, bundle=None, rel_tol=1e-8):
    """Sampled norm-attainment set {x : ||Tx|| = ||T|| ||x||}.

    Ascent from `restarts` starts collects distinct attaining directions;
    when a dilation bundle for T / ||T|| is supplied, the exact kernel
    characterisation ker((I-P) V W) is computed and every sampled witness
    is cross-checked against it (disagreement raises InconsistentWitness).
    The closure of the candidate set under midpoints decides is_subspace.
    """
    est = operator_norm(op, restarts=restarts, seed=seed)
    cands = _ratio_maximizers(op, restarts, seed + 1)
    witnesses = []
    for val, x in cands:
        if val >= est.value * (1.0 - rel_tol) - rel_tol:
            witnesses.append(phase_normalize(x))
    # dedupe
    uniq = []
    for x in witnesses:
        if all(np.linalg.norm(x - u) > 1e-6 for u in uniq):
            uniq.append(x)
    kernel_space = None
    kdim = None
    if bundle is not None:
        m = (np.eye(bundle.P.shape[0]) - bundle.P) @ bundle.V @ bundle.W
        kernel_space = Subspace.null_space(m, rtol=1e-9)
        kdim = kernel_space.dim
        for x in uniq:
            if not kernel_space.contains(x, tol=rel_tol):
                raise InconsistentWitness(
                    "ascent found a norm-attaining direction outside "
                    "ker((I-P)VW); kernel dim %d" % kdim
                )
    # closure under midpoints, tested in the operator norm
    is_sub, failing = None, None
    if len(uniq) >= 2:
        is_sub = True
        for i in range(len(uniq)):
            for j in range(i + 1, len(uniq)):
                m = uniq[i] + uniq[j]
                nm = spaces._norm(op.domain, m)
                if nm < 1e-9:
                    continue
                ratio = spaces._norm(op.codomain, op.matrix @ m) / nm
                if ratio < est.value * (1.0 - 100 * rel_tol):
                    is_sub, failing = False, (uniq[i], uniq[j])
                    break
            if is_sub is False:
                break
    span = kernel_space
    if span is None and uniq and is_sub is not False:
        # ascent converges quadratically near a flat maximum, so witnesses
        # carry sqrt(tol)-scale junk in the dead coordinates; a witness
        # only extends the span when its residual direction itself attains
        basis = []
        for x in uniq:
            r = x
            if basis:
                q = np.stack(basis, axis=1)
                r = x - q @ (q.conj().T @ x)
            nr = np.linalg.norm(r)
            if nr <= 1e-8:
                continue
            rd = r / spaces._norm(op.domain, r)
            ratio = spaces._norm(op.codomain, op.matrix @ rd)
            if ratio >= est.value * (1.0 - 100.0 * rel_tol):
                basis.append(r / nr)
        if basis:
            span = Subspace.from_vectors(np.stack(basis, axis=0))
    return AttainmentReport(est.value, uniq, span, is_sub, failing, kdim)


# ---------------------------------------------------------------------------
# adjoint and left inverses


def banach_adjoint(op):
    """Transpose (no conjugation) acting between the dual descriptors."""
    ann = None
    if op.annotation and op.annotation.get("kind") == "diagonal":
        ann = dict(op.annotation)
    return Operator(
        op.matrix.T.copy(),
        spaces.dual_space(op.codomain),
        spaces.dual_space(op.domain),
        ann,
    )


@dataclass
class LeftInverse:
    operator: Operator
    projection: Operator  # P = V A, the norm-one projection onto range(V)
    safe_dim: int  # dimension of the boundary-safe subspace where A V = I


def left_inverse(op):
    """Left inverse of a Wold-structured isometry.

    For the forward shift this is the backward shift; for a unitary-plus-
    shift annotation it is U^{-1} on the unitary part and the backward
    shift on the shift part.  A V = I holds exactly on boundary-safe
    vectors (zero top block); V A is the norm-one projection onto the
    range."""
    ann = op.annotation or {}
    kind = ann.get("kind")
    if kind == "shift_block" and ann.get("direction") == "forward":
        d, b = int(ann["base_dim"]), int(ann["blocks"])
        back = {"kind": "shift_block", "direction": "backward", "base_dim": d, "blocks": b}
        a = Operator(
            matrix_from_annotation(op.domain, op.domain, back), op.domain, op.domain, back
        )
        safe = d * (b - 1)
    elif kind == "unitary_plus_shift":
        u = int(ann["unitary_dim"])
        d, b = int(ann["base_dim"]), int(ann["blocks"])
        umat = op.matrix[:u, :u]
        amat = np.zeros_like(op.matrix)
        amat[:u, :u] = np.linalg.inv(umat)
        for k in range(1, b):
            r = u + (k - 1) * d
            c = u + k * d
            amat[r : r + d, c : c + d] = np.eye(d)
        a = Operator(amat, op.domain, op.domain)
        safe = u + d * (b - 1)
    else:
        raise ArgumentError(
            "left_inverse needs a forward shift_block or unitary_plus_shift annotation"
        )
    av = a.matrix @ op.matrix
    n = av.shape[0]
    err = float(np.abs(av[:, :safe] - np.eye(n)[:, :safe]).max()) if safe else 0.0
    if err > 1e-10:
        raise InconsistentWitness("A V deviates from I on the safe window: %g" % err)
    p = Operator(op.matrix @ a.matrix, op.domain, op.domain)
    pp = float(np.abs(p.matrix @ p.matrix - p.matrix).max())
    if pp > 1e-10:
        raise InconsistentWitness("V A fails idempotency: %g" % pp)
    return LeftInverse(a, p, safe)
