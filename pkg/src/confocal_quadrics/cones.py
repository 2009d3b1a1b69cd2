"""Second-order cones: tangent cones, focal cones and their common edges.

A cone is ``sum(xi_i^2 / alpha_i) = 0`` where ``xi = frame.T @ (x - apex)``
and ``alpha_i`` are the signed squared semi-axes. Common edges of ``n-1``
confocal cones come from a closed form for their squared direction cosines;
:func:`sq_cosines_from_null_space` is the independent linear-algebra route
used to check it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .confocal import (ConfocalSystem, FrameAtPoint, elliptic_coordinates, focal_quadric,
                       frame_at_point)
from .errors import (CoincidentParameters, DimensionMismatch, IndexOutOfRange, NoRealEdge,
                     NotConfocal, NotExterior, ParallelEdge)
from .numerics import null_space_1d
from .quadrics import CentralQuadric, _vec, evaluate

COINCIDENCE_RTOL = 1e-7
CLAMP_TOL = 1e-12
EDGE_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class Cone:
    apex: np.ndarray
    frame: np.ndarray
    signed_sq_axes: np.ndarray

    def __post_init__(self):
        apex = _vec(self.apex)
        frame = np.asarray(self.frame, dtype=float)
        axes = _vec(self.signed_sq_axes)
        n = apex.size
        if frame.shape != (n, n) or axes.size != n:
            raise DimensionMismatch("apex, frame and axes dimensions differ")
        if np.any(axes == 0.0):
            raise ValueError("signed squared semi-axes must be nonzero")
        if not np.allclose(frame.T @ frame, np.eye(n), atol=1e-10):
            raise ValueError("cone frame is not orthonormal")
        object.__setattr__(self, "apex", apex)
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "signed_sq_axes", axes)

    @property
    def dim(self) -> int:
        return self.apex.size

    @property
    def is_point_cone(self) -> bool:
        """All signs equal: the apex is the only real point."""
        return bool(np.all(self.signed_sq_axes > 0) or np.all(self.signed_sq_axes < 0))

    @classmethod
    def canonical(cls, signed_sq_axes, apex=None) -> "Cone":
        axes = _vec(signed_sq_axes)
        apex = np.zeros(axes.size) if apex is None else apex
        return cls(apex, np.eye(axes.size), axes)

    def local(self, x) -> np.ndarray:
        return self.frame.T @ (_vec(x) - self.apex)


def cone_eval(C: Cone, x) -> float:
    x = _vec(x)
    if x.size != C.dim:
        raise DimensionMismatch(f"point of dimension {x.size} for a cone of dimension {C.dim}")
    xi = C.local(x)
    return float(np.sum(xi * xi / C.signed_sq_axes))


def cone_residual(C: Cone, x) -> float:
    """``cone_eval`` divided by ``sum(xi^2 / |alpha|)``: zero on the cone,
    at most 1 in magnitude, invariant under scaling of ``x - apex``."""
    xi = C.local(x)
    w = xi * xi
    den = float(np.sum(w / np.abs(C.signed_sq_axes)))
    return 0.0 if den == 0.0 else float(np.sum(w / C.signed_sq_axes)) / den


def direction_residual(alpha, d) -> float:
    """Scale-free residual of a direction (frame coordinates) on a cone."""
    alpha, d = _vec(alpha), _vec(d)
    w = d * d
    return float(np.sum(w / alpha) / np.sum(w / np.abs(alpha)))


@dataclass(frozen=True)
class QuadraticSurface:
    """``x^T M x + 2 b^T x + c = 0``."""

    quadratic: np.ndarray
    linear: np.ndarray
    constant: float

    def evaluate(self, x) -> float:
        x = _vec(x)
        return float(x @ self.quadratic @ x + 2.0 * self.linear @ x + self.constant)


def tangent_cone_form(E: CentralQuadric, x) -> QuadraticSurface:
    """Expanded ``(x'Dx'-1)(xDx-1) - (x'Dx-1)^2`` with ``D = A^-2``."""
    x = _vec(x)
    if not E.is_ellipsoid:
        raise ValueError("tangent cones are built for ellipsoids")
    if evaluate(E, x) <= 0.0:
        raise NotExterior("apex must lie outside the ellipsoid")
    dinv = 1.0 / E.signed_sq_axes
    w = dinv * x
    s = float(x @ w)
    M = (s - 1.0) * np.diag(dinv) - np.outer(w, w)
    return QuadraticSurface(quadratic=M, linear=w, constant=-s)


def tangent_cone_canonical(sys: ConfocalSystem, x, **kw) -> Cone:
    """Tangent cone from ``x`` to the base ellipsoid, with the confocal normals
    at ``x`` as axes and signed squared semi-axes ``-lam^i``."""
    x = _vec(x)
    if evaluate(CentralQuadric(sys.base_sq_axes), x) <= 0.0:
        raise NotExterior("apex must lie outside the base ellipsoid")
    F = frame_at_point(sys, x, **kw)
    return Cone(F.origin, F.normals, -F.table.lambdas)


def focal_cone(sys: ConfocalSystem, x, k: int, frame: FrameAtPoint | None = None, **kw) -> Cone:
    """Cone with apex ``x`` over the k-th focal quadric (k = 2..n): same axes
    as the tangent cone, signed squared semi-axes ``a_k^2 - lam^i``."""
    focal_quadric(sys, k)  # index validation
    F = frame_at_point(sys, x, **kw) if frame is None else frame
    return Cone(F.origin, F.normals, F.table.entries[k - 1].copy())


@dataclass(frozen=True)
class Transversal:
    """A common edge through the shared apex.

    ``local`` is the unit direction in the cones' frame, ``direction`` the
    same line in world coordinates; ``sq_cosines = local**2``.
    """

    sign_profile: tuple[int, ...]
    local: np.ndarray
    direction: np.ndarray
    sq_cosines: np.ndarray


def _check_confocal(alpha: np.ndarray) -> None:
    scale = float(np.max(np.abs(alpha)))
    shifts = alpha - alpha[0]
    spread = np.max(np.abs(shifts - shifts.mean(axis=1, keepdims=True)))
    if spread > 1e-9 * scale:
        raise NotConfocal(f"cone axes are not a confocal family (spread {spread:.3e})")


def _check_distinct(a1: np.ndarray) -> None:
    scale = float(np.max(np.abs(a1)))
    for i, j in itertools.combinations(range(a1.size), 2):
        if abs(a1[i] - a1[j]) < COINCIDENCE_RTOL * scale:
            raise CoincidentParameters(f"squared axes {i} and {j} coincide ({a1[i]!r})")


def common_edge_sq_cosines(alpha) -> np.ndarray:
    """Closed-form squared direction cosines of the common edges.

    ``alpha`` is an ``(n-1) x n`` array of signed squared semi-axes, one row
    per cone; entry k is ``prod_j alpha[j,k] / prod_{i!=k}(alpha[0,k] - alpha[0,i])``.
    """
    alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
    m, n = alpha.shape
    if m != n - 1:
        raise DimensionMismatch(f"need n-1 = {n - 1} cones, got {m}")
    _check_confocal(alpha)
    a1 = alpha[0]
    _check_distinct(a1)
    out = np.empty(n)
    for k in range(n):
        num = float(np.prod(alpha[:, k]))
        den = float(np.prod([a1[k] - a1[i] for i in range(n) if i != k]))
        out[k] = num / den
    return out


def edge_matrix(alpha) -> np.ndarray:
    """``B[i, k] = 1 / alpha[k, i]``: the squared coordinates of a common edge
    are orthogonal to every column."""
    alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
    return (1.0 / alpha).T


def sq_cosines_from_null_space(alpha) -> np.ndarray:
    N = null_space_1d(edge_matrix(alpha))
    return N / N.sum()


def identity_sum(alpha1, lambdas) -> float:
    """Left side of the edge-length identity for the family
    ``alpha^k = alpha^1 + lambda(k)`` (``lambda(1) = 0``); it equals 1."""
    a1 = _vec(alpha1)
    lam = np.concatenate([[0.0], _vec(lambdas)]) if np.size(lambdas) else np.zeros(1)
    n = a1.size
    if lam.size != n - 1:
        raise DimensionMismatch(f"need {n - 2} shifts for {n} axes")
    _check_distinct(a1)
    terms = []
    for k in range(n):
        num = math.prod(float(a1[k] + s) for s in lam)
        den = math.prod(float(a1[k] - a1[i]) for i in range(n) if i != k)
        terms.append(num / den)
    return math.fsum(terms)


def common_edges(cones: list[Cone], residual_tol: float = EDGE_RESIDUAL_TOL) -> list[Transversal]:
    """All real common edges of ``n-1`` confocal cones with a shared apex and
    frame, one per sign pattern modulo global negation."""
    if not cones:
        raise ValueError("no cones given")
    n = cones[0].dim
    if len(cones) != n - 1:
        raise DimensionMismatch(f"need {n - 1} cones in dimension {n}, got {len(cones)}")
    apex, frame = cones[0].apex, cones[0].frame
    for C in cones[1:]:
        if not (np.allclose(C.apex, apex, atol=1e-12) and np.allclose(C.frame, frame, atol=1e-12)):
            raise NotConfocal("cones do not share apex and frame")
    alpha = np.array([C.signed_sq_axes for C in cones])
    sq = common_edge_sq_cosines(alpha)
    if np.any(sq < -CLAMP_TOL):
        raise NoRealEdge(f"negative squared cosines {sq}")
    sq = np.clip(sq, 0.0, None)
    mag = np.sqrt(sq)
    free = [i for i in range(n) if mag[i] > 0.0]
    if not free:
        raise NoRealEdge("all squared cosines vanish")
    rest = free[1:]  # the first free sign is the gauge
    edges = []
    for signs in itertools.product((1, -1), repeat=len(rest)):
        profile = np.ones(n, dtype=int)
        profile[rest] = signs
        local = profile * mag
        for row in alpha:
            r = direction_residual(row, local)
            if abs(r) > residual_tol:
                raise NoRealEdge(f"edge residual {r:.3e} exceeds {residual_tol:.1e}")
        edges.append(Transversal(sign_profile=tuple(int(s) for s in profile), local=local,
                                 direction=frame @ local, sq_cosines=sq.copy()))
    return edges


def focal_edges(sys: ConfocalSystem, x, **kw) -> tuple[FrameAtPoint, list[Transversal]]:
    """Frame at ``x`` and the common edges of the focal cones ``k = 2..n``."""
    F = frame_at_point(sys, x, **kw)
    cones = [focal_cone(sys, x, k, frame=F) for k in range(2, sys.dim + 1)]
    return F, common_edges(cones)


def intercept_length(sys: ConfocalSystem, x, edge: Transversal,
                     frame: FrameAtPoint | None = None, tol: float = 1e-12,
                     which: int = 1, **kw) -> float:
    """Distance from ``x`` along the edge to the hyperplane through the centre
    parallel to the tangent hyperplane at ``x`` of confocal ``which``
    (1-based; 1 is the ellipsoid). It equals ``sqrt(a_1^2 - lambda^which)``."""
    F = frame_at_point(sys, x, **kw) if frame is None else frame
    if not 1 <= which <= sys.dim:
        raise IndexOutOfRange(f"confocal index {which} outside 1..{sys.dim}")
    nj = F.normals[:, which - 1]
    along = float(nj @ edge.direction)
    if abs(along) <= tol:
        raise ParallelEdge("edge is parallel to the intercepting hyperplane")
    return abs(float(nj @ F.origin) / along)


def focal_cone_axis_gap(sys: ConfocalSystem, x, k: int = 3, **kw) -> float:
    """Smallest distance between two signed squared semi-axes of the focal
    cone over C_k at ``x``, relative to ``a_1^2``."""
    ec = elliptic_coordinates(sys, x, **kw)
    axes = sys.base_sq_axes[k - 1] - ec.lambdas
    gaps = [abs(axes[i] - axes[j]) for i, j in itertools.combinations(range(axes.size), 2)]
    return min(gaps) / float(sys.base_sq_axes[0])


def right_cone_locus_check(sys: ConfocalSystem, x, k: int = 3, tol: float = 1e-7, **kw) -> bool:
    """True when the focal cone over C_k with apex ``x`` has two equal axes."""
    if sys.dim != 3:
        raise DimensionMismatch("the right-cone locus is a three-dimensional statement")
    return focal_cone_axis_gap(sys, x, k, **kw) <= tol
