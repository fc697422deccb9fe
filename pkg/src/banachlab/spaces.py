"""Finite coefficient models of the spaces the package works on.

A *space descriptor* is a small immutable object describing how to turn a
flat complex coefficient vector into a norm value.  Composite descriptors
fix the coefficient layout once and for all: parts and blocks are stored
consecutively, a BiBlockSeq stores block n at slot n + halfwidth.

Descriptors:

    Lp(n, p, weights)        weighted l_p on C^n, 1 <= p <= inf
    DirectSum2(parts)        2-sum of descriptors, ||(x_1,..,x_k)||^2 = sum ||x_i||^2
    BlockSeq(base, blocks)   truncation of l_2(X): `blocks` copies of base, 2-summed
    BiBlockSeq(base, hw)     two-sided truncation, blocks -hw..hw
    PolySup(degree, gridsize) sup norm of a polynomial on the unit circle grid
    Renormed(base, matrix, verdict) the contraction functional
                             x -> sqrt(||x||^2 - ||Tx||^2) used as a norm

Renormed is deliberately constructible only alongside a certificate that
the functional is a norm or semi-norm; use dilation.renormed_space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernel
from .errors import ArgumentError

__all__ = [
    "Lp",
    "DirectSum2",
    "BlockSeq",
    "BiBlockSeq",
    "PolySup",
    "Renormed",
    "dim",
    "norm",
    "as_coeffs",
    "zero",
    "basis_vector",
    "block_layout",
    "embed_block",
    "extract_block",
    "random_unit",
    "is_smooth",
    "euclidean_scale",
    "dual_space",
    "space_to_dict",
    "space_from_dict",
    "space_to_json",
    "space_from_json",
]

_INF = float("inf")


def _check_p(p):
    p = float(p)
    if not (p >= 1.0):
        raise ArgumentError("p must satisfy 1 <= p <= inf, got %r" % p)
    return p


@dataclass(frozen=True)
class Lp:
    """Weighted l_p on C^n.  weights is a tuple of positive reals or None."""

    n: int
    p: float
    weights: tuple | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ArgumentError("Lp needs n >= 1")
        object.__setattr__(self, "p", _check_p(self.p))
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if len(w) != self.n:
                raise ArgumentError("weights length %d != n = %d" % (len(w), self.n))
            if any(v <= 0 for v in w):
                raise ArgumentError("weights must be positive")
            object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class DirectSum2:
    """2-sum of descriptors."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ArgumentError("DirectSum2 needs at least one part")
        object.__setattr__(self, "parts", parts)


@dataclass(frozen=True)
class BlockSeq:
    """`blocks` copies of base, 2-summed; a truncation of l_2(X)."""

    base: object
    blocks: int

    def __post_init__(self):
        if self.blocks < 1:
            raise ArgumentError("BlockSeq needs blocks >= 1")


@dataclass(frozen=True)
class BiBlockSeq:
    """Blocks indexed -halfwidth..halfwidth, 2-summed.

    Block n lives at slot n + halfwidth.
    """

    base: object
    halfwidth: int

    def __post_init__(self):
        if self.halfwidth < 1:
            raise ArgumentError("BiBlockSeq needs halfwidth >= 1")


@dataclass(frozen=True)
class PolySup:
    """Polynomials of the given degree with the sup norm sampled on a
    uniform grid of gridsize points on the unit circle.  Coefficients are
    c_0..c_degree."""

    degree: int
    gridsize: int = 4096

    def __post_init__(self):
        if self.degree < 0:
            raise ArgumentError("PolySup needs degree >= 0")
        if self.gridsize < 4 * (self.degree + 1):
            raise ArgumentError("gridsize too small for the degree")


@dataclass(eq=False)
class Renormed:
    """Base coefficients with ||x|| = sqrt(||x||_base^2 - ||Mx||_base^2).

    verdict records what the certificate said: "norm" or "semi-norm".
    The evaluator clamps radicands in [-1e-9 * scale, 0) to zero and
    refuses anything more negative, which would mean M is not a
    contraction on the base space.
    """

    base: object
    matrix: np.ndarray
    verdict: str = "norm"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (dim(self.base), dim(self.base)):
            raise ArgumentError("Renormed matrix must be square of the base dimension")
        if self.verdict not in ("norm", "semi-norm"):
            raise ArgumentError("Renormed verdict must be 'norm' or 'semi-norm'")
        self.matrix = m


def dim(space):
    """Number of complex coefficients a vector of `space` carries."""
    if isinstance(space, Lp):
        return space.n
    if isinstance(space, DirectSum2):
        return sum(dim(p) for p in space.parts)
    if isinstance(space, BlockSeq):
        return space.blocks * dim(space.base)
    if isinstance(space, BiBlockSeq):
        return (2 * space.halfwidth + 1) * dim(space.base)
    if isinstance(space, PolySup):
        return space.degree + 1
    if isinstance(space, Renormed):
        return dim(space.base)
    raise ArgumentError("not a space descriptor: %r" % (space,))


@lru_cache(maxsize=256)
def _lp_weights(space):
    if space.weights is None:
        return np.ones(space.n)
    return np.asarray(space.weights, dtype=np.float64)


def as_coeffs(space, x):
    """Validate shape and return x as a flat complex128 array."""
    a = np.ascontiguousarray(x, dtype=np.complex128)
    if a.shape != (dim(space),):
        raise ArgumentError(
            "coefficient vector has shape %r, expected (%d,)" % (a.shape, dim(space))
        )
    return a


def zero(space):
    return np.zeros(dim(space), dtype=np.complex128)


def basis_vector(space, i):
    e = zero(space)
    e[i] = 1.0
    return e


def norm(space, x):
    """Evaluate the norm of `space` on the coefficient vector x."""
    x = as_coeffs(space, x)
    return _norm(space, x)


def _norm(space, x):
    # internal: assumes x already validated / correctly laid out
    if isinstance(space, Lp):
        p = 0.0 if math.isinf(space.p) else space.p
        return kernel.lp_norm(x, _lp_weights(space), p)
    if isinstance(space, (DirectSum2, BlockSeq, BiBlockSeq)):
        acc = 0.0
        for off, sz, sub in block_layout(space):
            v = _norm(sub, x[off : off + sz])
            acc += v * v
        return math.sqrt(acc)
    if isinstance(space, PolySup):
        return kernel.poly_sup(x, space.gridsize)
    if isinstance(space, Renormed):
        b = _norm(space.base, x)
        t = _norm(space.base, space.matrix @ x)
        rad = b * b - t * t
        scale = max(b * b, 1.0)
        if rad < -1e-9 * scale:
            raise ArgumentError(
                "Renormed radicand %g < 0: stored matrix is not a contraction" % rad
            )
        return math.sqrt(max(rad, 0.0))
    raise ArgumentError("not a space descriptor: %r" % (space,))


def block_layout(space):
    """[(offset, size, sub-descriptor)] for composite spaces."""
    if isinstance(space, DirectSum2):
        out, off = [], 0
        for p in space.parts:
            d = dim(p)
            out.append((off, d, p))
            off += d
        return out
    if isinstance(space, BlockSeq):
        d = dim(space.base)
        return [(k * d, d, space.base) for k in range(space.blocks)]
    if isinstance(space, BiBlockSeq):
        d = dim(space.base)
        return [(k * d, d, space.base) for k in range(2 * space.halfwidth + 1)]
    raise ArgumentError("block_layout: %r has no block structure" % (space,))


def _block_slot(space, index):
    if isinstance(space, BiBlockSeq):
        if not (-space.halfwidth <= index <= space.halfwidth):
            raise ArgumentError("block index %d out of range" % index)
        return index + space.halfwidth
    layout = block_layout(space)
    if not (0 <= index < len(layout)):
        raise ArgumentError("block index %d out of range" % index)
    return index


def embed_block(space, index, block):
    """Embed a base/part vector into block `index` of a composite space.

    BiBlockSeq accepts signed indices -halfwidth..halfwidth.
    """
    slot = _block_slot(space, index)
    off, sz, sub = block_layout(space)[slot]
    b = as_coeffs(sub, block)
    out = zero(space)
    out[off : off + sz] = b
    return out


def extract_block(space, index, x):
    slot = _block_slot(space, index)
    off, sz, _ = block_layout(space)[slot]
    return as_coeffs(space, x)[off : off + sz].copy()


def random_unit(space, seed):
    """Reproducible random unit vector: complex Gaussian, then normalised."""
    rng = np.random.default_rng(seed)
    d = dim(space)
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    n = _norm(space, z)
    if n < 1e-12:
        raise ArgumentError("degenerate sample: norm is numerically zero")
    z /= n
    # one more pass tightens the unit property when the first division
    # rounded; keeps |norm - 1| well below 1e-12
    n = _norm(space, z)
    if abs(n - 1.0) > 1e-14:
        z /= n
    return z


def is_smooth(space):
    """True when the norm is Gateaux differentiable away from 0 and the
    closed-form support functional applies everywhere on the sphere."""
    if isinstance(space, Lp):
        return 1.0 < space.p < _INF
    if isinstance(space, (DirectSum2, BlockSeq, BiBlockSeq)):
        return all(is_smooth(sub) for _, _, sub in block_layout(space))
    return False


def euclidean_scale(space):
    """Diagonal scale s with ||x||_space = ||s * x||_2, or None.

    Exists exactly when every leaf is a (weighted) l_2, i.e. the space is
    a Hilbert space in disguise.
    """
    if isinstance(space, Lp):
        if space.p != 2.0:
            return None
        return np.sqrt(_lp_weights(space))
    if isinstance(space, (DirectSum2, BlockSeq, BiBlockSeq)):
        pieces = []
        for _, _, sub in block_layout(space):
            s = euclidean_scale(sub)
            if s is None:
                return None
            pieces.append(s)
        return np.concatenate(pieces)
    return None


def _conjugate_exponent(p):
    if p == 1.0:
        return _INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def dual_space(space):
    """Descriptor of the dual under the bilinear pairing f(x) = sum f_i x_i.

    For weighted l_p (1 < p < inf) the dual is weighted l_q with weights
    w^(1-q); for p = 1 / p = inf the weights invert.
    """
    if isinstance(space, Lp):
        q = _conjugate_exponent(space.p)
        w = _lp_weights(space)
        if space.p == 1.0 or math.isinf(space.p):
            wd = 1.0 / w
        else:
            wd = w ** (1.0 - q)
        if np.allclose(wd, 1.0):
            return Lp(space.n, q)
        return Lp(space.n, q, tuple(wd))
    if isinstance(space, DirectSum2):
        return DirectSum2(tuple(dual_space(p) for p in space.parts))
    if isinstance(space, BlockSeq):
        return BlockSeq(dual_space(space.base), space.blocks)
    if isinstance(space, BiBlockSeq):
        return BiBlockSeq(dual_space(space.base), space.halfwidth)
    raise ArgumentError("dual_space: no dual descriptor for %r" % (space,))


# ---------------------------------------------------------------------------
# serialization


def space_to_dict(space):
    if isinstance(space, Lp):
        p = "inf" if math.isinf(space.p) else space.p
        return {
            "kind": "lp",
            "n": space.n,
            "p": p,
            "weights": list(space.weights) if space.weights else None,
        }
    if isinstance(space, DirectSum2):
        return {"kind": "direct_sum2", "parts": [space_to_dict(p) for p in space.parts]}
    if isinstance(space, BlockSeq):
        return {
            "kind": "block_seq",
            "base": space_to_dict(space.base),
            "blocks": space.blocks,
        }
    if isinstance(space, BiBlockSeq):
        return {
            "kind": "bi_block_seq",
            "base": space_to_dict(space.base),
            "halfwidth": space.halfwidth,
        }
    if isinstance(space, PolySup):
        return {"kind": "poly_sup", "degree": space.degree, "gridsize": space.gridsize}
    if isinstance(space, Renormed):
        return {
            "kind": "renormed",
            "base": space_to_dict(space.base),
            "matrix_re": space.matrix.real.tolist(),
            "matrix_im": space.matrix.imag.tolist(),
            "verdict": space.verdict,
        }
    raise ArgumentError("cannot serialize %r" % (space,))


def space_from_dict(d):
    kind = d.get("kind")
    if kind == "lp":
        p = _INF if d["p"] == "inf" else float(d["p"])
        w = d.get("weights")
        return Lp(int(d["n"]), p, tuple(w) if w else None)
    if kind == "direct_sum2":
        return DirectSum2(tuple(space_from_dict(p) for p in d["parts"]))
    if kind == "block_seq":
        return BlockSeq(space_from_dict(d["base"]), int(d["blocks"]))
    if kind == "bi_block_seq":
        return BiBlockSeq(space_from_dict(d["base"]), int(d["halfwidth"]))
    if kind == "poly_sup":
        return PolySup(int(d["degree"]), int(d.get("gridsize", 4096)))
    if kind == "renormed":
        m = np.asarray(d["matrix_re"], dtype=float) + 1j * np.asarray(
            d["matrix_im"], dtype=float
        )
        return Renormed(space_from_dict(d["base"]), m, d.get("verdict", "norm"))
    raise ArgumentError("unknown space kind %r" % kind)


def space_to_json(space):
    return json.dumps(space_to_dict(space))


def space_from_json(s):
    return space_from_dict(json.loads(s))
