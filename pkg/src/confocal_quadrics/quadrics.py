"""Central quadrics in canonical position.

A quadric is stored by its *signed squared semi-axes*: the i-th entry is
``eps_i * a_i**2`` and the surface is ``sum(x_i**2 / entry_i) = 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotAnEllipsoid, OffSurface
from .numerics import elementary_symmetric

SURFACE_TOL = 1e-9


def _vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class CentralQuadric:
    signed_sq_axes: np.ndarray

    def __post_init__(self):
        axes = _vec(self.signed_sq_axes)
        if np.any(axes == 0.0):
            raise ValueError("signed squared semi-axes must be nonzero")
        object.__setattr__(self, "signed_sq_axes", axes)

    @property
    def dim(self) -> int:
        return self.signed_sq_axes.size

    @property
    def is_ellipsoid(self) -> bool:
        return bool(np.all(self.signed_sq_axes > 0))

    @property
    def signs(self) -> np.ndarray:
        return np.sign(self.signed_sq_axes)

    @classmethod
    def ellipsoid(cls, semi_axes) -> "CentralQuadric":
        return cls(_vec(semi_axes) ** 2)


@dataclass(frozen=True)
class Hyperplane:
    """The hyperplane ``<h, x> = 1``; it never passes through the origin."""

    h: np.ndarray

    def __post_init__(self):
        h = _vec(self.h)
        if not np.any(h):
            raise ValueError("hyperplane covector must be nonzero")
        object.__setattr__(self, "h", h)

    def evaluate(self, x) -> float:
        return float(self.h @ _vec(x)) - 1.0

    def sample_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Random points on the hyperplane (rows)."""
        h = self.h
        base = h / (h @ h)
        pts = rng.normal(size=(count, h.size))
        pts -= np.outer(pts @ h, h) / (h @ h)
        return pts + base


@dataclass(frozen=True)
class ConjugateSystem:
    """Columns are the semi-diameters x^1..x^n."""

    vectors: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if X.shape[0] != X.shape[1]:
            raise DimensionMismatch("a complete conjugate system needs n vectors in R^n")
        object.__setattr__(self, "vectors", X)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def gram(self) -> np.ndarray:
        return self.vectors.T @ self.vectors


def _check_dim(Q: CentralQuadric, x: np.ndarray) -> None:
    if x.size != Q.dim:
        raise DimensionMismatch(f"point of dimension {x.size} for a quadric of dimension {Q.dim}")


def _require_ellipsoid(Q: CentralQuadric) -> None:
    if not Q.is_ellipsoid:
        raise NotAnEllipsoid(f"signed squared axes {Q.signed_sq_axes} are not all positive")


def evaluate(Q: CentralQuadric, x) -> float:
    x = _vec(x)
    _check_dim(Q, x)
    return float(np.sum(x * x / Q.signed_sq_axes)) - 1.0


def _on_surface(Q: CentralQuadric, x: np.ndarray, tol: float) -> None:
    r = evaluate(Q, x)
    if abs(r) > tol:
        raise OffSurface(f"point is off the quadric (residual {r:.3e})")


def normal_at(Q: CentralQuadric, x, tol: float = SURFACE_TOL) -> np.ndarray:
    """Unnormalized normal ``x_i / (eps_i a_i^2)`` at a point of Q."""
    x = _vec(x)
    _check_dim(Q, x)
    _on_surface(Q, x, tol)
    return x / Q.signed_sq_axes


def tangent_hyperplane_at(Q: CentralQuadric, x, tol: float = SURFACE_TOL) -> Hyperplane:
    return Hyperplane(normal_at(Q, x, tol))


def is_conjugate_pair(Q: CentralQuadric, e, f, tol: float = 1e-10) -> bool:
    """Conjugacy of two directions with respect to an ellipsoid.

    The test is homogeneous: the bilinear form is compared against
    ``tol * |e| |f| / min(a_i^2)``.
    """
    _require_ellipsoid(Q)
    e, f = _vec(e), _vec(f)
    _check_dim(Q, e)
    _check_dim(Q, f)
    ne, nf = np.linalg.norm(e), np.linalg.norm(f)
    if ne == 0.0 or nf == 0.0:
        raise ValueError("directions must be nonzero")
    form = float(np.sum(e * f / Q.signed_sq_axes))
    return abs(form) <= tol * ne * nf / float(np.min(Q.signed_sq_axes))


def random_frame(rng: np.random.Generator, n: int) -> np.ndarray:
    """Orthonormal frame from Gram-Schmidt on seeded Gaussian vectors."""
    G = rng.normal(size=(n, n))
    F = np.zeros((n, n))
    for j in range(n):
        v = G[:, j].copy()
        for _ in range(2):
            v -= F[:, :j] @ (F[:, :j].T @ v)
        F[:, j] = v / np.linalg.norm(v)
    return F


def conjugate_system(Q: CentralQuadric, frame) -> ConjugateSystem:
    """Image ``X = A @ frame`` of an orthonormal frame, ``A = diag(a_i)``."""
    _require_ellipsoid(Q)
    F = np.asarray(frame, dtype=float)
    if F.shape != (Q.dim, Q.dim):
        raise DimensionMismatch("frame must be n x n")
    return ConjugateSystem(np.sqrt(Q.signed_sq_axes)[:, None] * F)


def random_conjugate_system(Q: CentralQuadric, rng: np.random.Generator | int) -> ConjugateSystem:
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    _require_ellipsoid(Q)
    return conjugate_system(Q, random_frame(rng, Q.dim))


def apollonius_invariant(S: ConjugateSystem, k: int) -> float:
    """Sum of the k x k principal Gram minors of the semi-diameters."""
    n = S.dim
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    G = S.gram()
    return float(sum(np.linalg.det(G[np.ix_(idx, idx)])
                     for idx in itertools.combinations(range(n), k)))


def apollonius_expected(Q: CentralQuadric, k: int) -> float:
    return elementary_symmetric(Q.signed_sq_axes, k)


def pole_of_hyperplane(Q: CentralQuadric, H: Hyperplane) -> np.ndarray:
    _require_ellipsoid(Q)
    if H.h.size != Q.dim:
        raise DimensionMismatch("hyperplane and quadric dimensions differ")
    return H.h * Q.signed_sq_axes


def conjugate_form(Q: CentralQuadric, x, y) -> float:
    """``x^T A^-2 y``; two points are conjugate when this equals 1."""
    return float(np.sum(_vec(x) * _vec(y) / Q.signed_sq_axes))


def sample_quadric_points(Q: CentralQuadric, rng: np.random.Generator, count: int,
                          spread: float = 1.0) -> np.ndarray:
    """Random real points of Q (rows).

    Coordinates on negative axes are drawn freely (Gaussian with scale
    ``spread * |a_i|``); the positive block is then a point of the
    ellipsoid scaled to absorb them.
    """
    axes = Q.signed_sq_axes
    pos = axes > 0
    if not np.any(pos):
        raise ValueError("quadric has no real points")
    pts = np.zeros((count, Q.dim))
    neg_idx = np.flatnonzero(~pos)
    pos_idx = np.flatnonzero(pos)
    for r in range(count):
        y = np.zeros(Q.dim)
        y[neg_idx] = rng.normal(size=neg_idx.size) * spread * np.sqrt(-axes[neg_idx])
        rhs = 1.0 + float(np.sum(y[neg_idx] ** 2 / -axes[neg_idx]))
        d = rng.normal(size=pos_idx.size)
        d /= np.linalg.norm(d)
        y[pos_idx] = d * np.sqrt(axes[pos_idx] * rhs)
        pts[r] = y
    return pts


@dataclass(frozen=True)
class FramedQuadric:
    """Quadric ``sum(xi_j^2 / axes_j) = 1`` in the frame ``(center, frame)``,
    where ``xi = frame.T @ (x - center)``."""

    center: np.ndarray
    frame: np.ndarray
    signed_sq_axes: np.ndarray

    def local(self, x) -> np.ndarray:
        return self.frame.T @ (_vec(x) - self.center)

    def evaluate(self, x) -> float:
        xi = self.local(x)
        return float(np.sum(xi * xi / self.signed_sq_axes)) - 1.0
