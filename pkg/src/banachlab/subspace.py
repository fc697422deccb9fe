"""Euclidean-frame subspace arithmetic.

Subspaces of the coefficient space are carried as orthonormal frames (in
the plain Euclidean inner product, which is only a bookkeeping frame: all
norm statements are made by the calling modules in the right norm).
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .errors import ArgumentError

__all__ = ["Subspace", "intersection", "principal_angle", "subspace_distance"]

_RANK_RTOL = 1e-9


class Subspace:
    """Span of a list of coefficient vectors, held as an orthonormal frame."""

    def __init__(self, q):
        q = np.asarray(q, dtype=np.complex128)
        if q.ndim != 2:
            raise ArgumentError("Subspace frame must be 2-d (n x k)")
        self.q = q

    @classmethod
    def from_vectors(cls, vecs, rtol=_RANK_RTOL):
        """Rank-revealing span of the given vectors (rows or list)."""
        a = np.asarray(vecs, dtype=np.complex128)
        if a.ndim == 1:
            a = a[None, :]
        if a.size == 0 or not np.any(a):
            return cls(np.zeros((a.shape[-1], 0)))
        u, s, vh = linalg.svd(a.T, full_matrices=False)
        keep = s > rtol * s[0]
        return cls(u[:, keep])

    @classmethod
    def column_space(cls, m, rtol=_RANK_RTOL):
        m = np.asarray(m, dtype=np.complex128)
        u, s, vh = linalg.svd(m, full_matrices=False)
        if s.size == 0 or s[0] == 0.0:
            return cls(np.zeros((m.shape[0], 0)))
        keep = s > rtol * s[0]
        return cls(u[:, keep])

    @classmethod
    def null_space(cls, m, rtol=_RANK_RTOL):
        m = np.asarray(m, dtype=np.complex128)
        u, s, vh = linalg.svd(m)
        if s.size == 0:
            return cls(np.eye(m.shape[1]))
        rank = int((s > rtol * s[0]).sum())
        return cls(vh[rank:].conj().T)

    @property
    def ambient_dim(self):
        return self.q.shape[0]

    @property
    def dim(self):
        return self.q.shape[1]

    def project(self, x):
        """Euclidean orthogonal projection onto the subspace."""
        return self.q @ (self.q.conj().T @ np.asarray(x, dtype=np.complex128))

    def residual(self, x):
        """Euclidean distance from x to the subspace."""
        x = np.asarray(x, dtype=np.complex128)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol=1e-8):
        x = np.asarray(x, dtype=np.complex128)
        scale = max(float(np.linalg.norm(x)), 1.0)
        return self.residual(x) <= tol * scale

    def basis_vectors(self):
        return [self.q[:, j].copy() for j in range(self.dim)]

    def __repr__(self):
        return "Subspace(dim=%d, ambient=%d)" % (self.dim, self.ambient_dim)


def intersection(a, b, rtol=_RANK_RTOL):
    """Intersection of two subspaces via the stacked-projector null space."""
    if a.ambient_dim != b.ambient_dim:
        raise ArgumentError("ambient dimensions differ")
    n = a.ambient_dim
    eye = np.eye(n)
    stacked = np.vstack([eye - a.q @ a.q.conj().T, eye - b.q @ b.q.conj().T])
    return Subspace.null_space(stacked, rtol=rtol)


def principal_angle(a, b):
    """Largest principal angle between subspaces of equal dimension (radians).

    For unequal dimensions this is the largest angle a direction of the
    smaller space makes with the other space, i.e. the two spaces are equal
    iff dims match and the angle is 0.
    """
    if a.dim == 0 and b.dim == 0:
        return 0.0
    if a.dim == 0 or b.dim == 0:
        return np.pi / 2.0
    angles = linalg.subspace_angles(a.q, b.q)
    return float(angles.max()) if angles.size else 0.0


def subspace_distance(a, b):
    """max principal angle, plus pi/2 penalty when dimensions differ."""
    if a.dim != b.dim:
        return np.pi / 2.0
    return principal_angle(a, b)
