"""The confocal family ``sum x_i^2 / (a_i^2 - lam) = 1`` of an ellipsoid.

Conventions used throughout:

* ``lambdas`` are the elliptic coordinates of a point in ascending order,
  ``lam^1 < a_n^2 < lam^2 < ... < lam^n < a_1^2``.
* The axes table ``T[i, j] = a_i^2 - lam^j`` holds the signed squared
  semi-axis i of the confocal through the point with parameter ``lam^j``.
  Column 0 is the ellipsoid through the point.
* Indices of focal quadrics are 1-based (``k = 2..n``) as in the classical
  notation; arrays are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegeneratePoint, IndexOutOfRange, NegativeSquare, NoRealTangency,
                     OnFocalMembrane, PoleParameter)
from .numerics import Bracket, bracketed_root
from .quadrics import CentralQuadric, FramedQuadric, Hyperplane, _vec

AXIS_GUARD = 1e-8
MEMBRANE_TOL = 1e-12
NEAR_AXIS = 1e-6


@dataclass(frozen=True)
class ConfocalSystem:
    base_sq_axes: np.ndarray

    def __post_init__(self):
        a2 = _vec(self.base_sq_axes)
        if a2.size < 2:
            raise ValueError("a confocal system needs n >= 2")
        if np.any(a2 <= 0) or np.any(np.diff(a2) >= 0):
            raise ValueError(f"squared axes must be positive and strictly decreasing, got {a2}")
        object.__setattr__(self, "base_sq_axes", a2)

    @property
    def dim(self) -> int:
        return self.base_sq_axes.size

    @property
    def major(self) -> float:
        return math.sqrt(self.base_sq_axes[0])

    @classmethod
    def from_lengths(cls, lengths) -> "ConfocalSystem":
        return cls(_vec(lengths) ** 2)


@dataclass(frozen=True)
class EllipticCoordinates:
    system: ConfocalSystem
    point: np.ndarray
    lambdas: np.ndarray
    nudged: np.ndarray = field(default=None)


@dataclass(frozen=True)
class AxesTable:
    entries: np.ndarray
    base_sq_axes: np.ndarray
    lambdas: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class FrameAtPoint:
    """Unit normals (columns) of the n confocals through ``origin`` and the
    support distances ``p^j`` from the centre to their tangent hyperplanes."""

    origin: np.ndarray
    normals: np.ndarray
    support: np.ndarray
    table: AxesTable


@dataclass(frozen=True)
class FocalQuadric:
    """The k-th focal quadric, living in the hyperplane ``x_k = 0``."""

    k: int
    quadric: CentralQuadric
    n: int

    @property
    def free_indices(self) -> list[int]:
        return [i for i in range(self.n) if i != self.k - 1]

    def embed(self, y) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        out = np.zeros((y.shape[0], self.n))
        out[:, self.free_indices] = y
        return out

    def evaluate(self, x) -> float:
        x = _vec(x)
        y = x[self.free_indices]
        return float(np.sum(y * y / self.quadric.signed_sq_axes)) - 1.0


def confocal_quadric(sys: ConfocalSystem, lam: float) -> CentralQuadric:
    a2 = sys.base_sq_axes
    if np.any(np.abs(a2 - lam) <= MEMBRANE_TOL * a2[0]):
        raise OnFocalMembrane(f"lambda={lam} coincides with a squared axis; use focal_quadric")
    return CentralQuadric(a2 - lam)


def focal_quadric(sys: ConfocalSystem, k: int) -> FocalQuadric:
    n = sys.dim
    if not 2 <= k <= n:
        raise IndexOutOfRange(f"focal quadric index k={k} outside 2..{n}")
    a2 = sys.base_sq_axes
    rest = np.delete(a2, k - 1) - a2[k - 1]
    return FocalQuadric(k=k, quadric=CentralQuadric(rest), n=n)


def root_polynomial(sys: ConfocalSystem, x, lam: float) -> float:
    """``f(lam) = sum x_i^2 prod_{j!=i}(a_j^2 - lam) - prod(a_i^2 - lam)``."""
    xs = [float(v) * float(v) for v in _vec(x)]
    return _root_poly(xs, [float(a) for a in sys.base_sq_axes], lam)


def _root_poly(x2: list[float], a2: list[float], lam: float) -> float:
    d = [a - lam for a in a2]
    n = len(d)
    prefix = [1.0] * (n + 1)
    for i in range(n):
        prefix[i + 1] = prefix[i] * d[i]
    total = -prefix[n]
    suffix = 1.0
    for i in range(n - 1, -1, -1):
        total += x2[i] * prefix[i] * suffix
        suffix *= d[i]
    return total


def _guard(sys: ConfocalSystem, eps_axis: float | None) -> float:
    return (AXIS_GUARD if eps_axis is None else eps_axis) * sys.major


def nudge_point(sys: ConfocalSystem, x, eps_axis: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Push coordinates closer than the guard to zero out to ``+-guard``."""
    x = _vec(x).copy()
    g = _guard(sys, eps_axis)
    delta = np.zeros_like(x)
    for i, xi in enumerate(x):
        if abs(xi) < g:
            target = math.copysign(g, xi) if xi != 0 else g
            delta[i] = target - xi
            x[i] = target
    return x, delta


def elliptic_coordinates(sys: ConfocalSystem, x, *, eps_axis: float | None = None,
                         nudge: bool = False) -> EllipticCoordinates:
    """The n confocal parameters through ``x``, one per interlacing interval."""
    x = _vec(x)
    if x.size != sys.dim:
        raise ValueError(f"point dimension {x.size} != system dimension {sys.dim}")
    delta = np.zeros_like(x)
    if nudge:
        x, delta = nudge_point(sys, x, eps_axis)
    g = _guard(sys, eps_axis)
    small = np.flatnonzero(np.abs(x) < g)
    if small.size:
        raise DegeneratePoint(f"coordinates {small.tolist()} are within {g:.3e} of zero")

    a2 = sys.base_sq_axes
    n = sys.dim
    x2 = [float(v) * float(v) for v in x]
    a2l = [float(v) for v in a2]
    f = lambda lam: _root_poly(x2, a2l, lam)  # noqa: E731
    r2 = float(x @ x)
    # every a_i^2 - lo exceeds |x|^2, so the rational form is negative there
    lo = a2[-1] - 2.0 * r2 - a2[0]
    edges = [lo] + [float(v) for v in a2[::-1]]
    lambdas = np.array([bracketed_root(f, Bracket(edges[j], edges[j + 1])) for j in range(n)])
    return EllipticCoordinates(system=sys, point=x, lambdas=lambdas, nudged=delta)


def axes_table(sys: ConfocalSystem, ec: EllipticCoordinates) -> AxesTable:
    a2 = sys.base_sq_axes
    lam = np.asarray(ec.lambdas, dtype=float)
    E = a2[:, None] - lam[None, :]
    x2 = np.asarray(ec.point, dtype=float) ** 2
    # entries near zero lose all digits to cancellation; recompute them from
    # x_i^2 / d = 1 - sum_{k != i} x_k^2 / (a_k^2 - a_i^2 + d)
    for i, j in zip(*np.nonzero(np.abs(E) < NEAR_AXIS * a2[0])):
        others = np.arange(a2.size) != i
        d = E[i, j]
        for _ in range(8):
            denom = 1.0 - float(np.sum(x2[others] / (a2[others] - a2[i] + d)))
            d = x2[i] / denom if denom != 0.0 else d
        E[i, j] = d
    return AxesTable(entries=E, base_sq_axes=a2, lambdas=lam)


def point_from_axes_table(T: AxesTable, signs=None, tol: float = 1e-12) -> np.ndarray:
    """Point with squared coordinates ``prod_j T[i,j] / prod_{k!=i}(a_i^2 - a_k^2)``."""
    E = T.entries
    n = E.shape[0]
    # axis differences from the table itself (the same in every column)
    a2 = E[:, 0]
    scale = float(np.max(np.abs(E)))
    x = np.zeros(n)
    for i in range(n):
        num = float(np.prod(E[i, :]))
        den = float(np.prod([a2[i] - a2[k] for k in range(n) if k != i]))
        sq = num / den
        if sq < 0:
            if sq < -tol * scale:
                raise NegativeSquare(f"x_{i}^2 = {sq:.3e} is negative")
            sq = 0.0
        x[i] = math.sqrt(sq)
    if signs is not None:
        x = x * np.where(np.asarray(signs) < 0, -1.0, 1.0)
    return x


def norm_identity_check(ec: EllipticCoordinates) -> tuple[float, float]:
    """``(|x|^2, sum_j T[j, j])``; the two agree."""
    T = axes_table(ec.system, ec)
    return float(ec.point @ ec.point), float(np.trace(T.entries))


def frame_at_point(sys: ConfocalSystem, x, **kw) -> FrameAtPoint:
    ec = elliptic_coordinates(sys, x, **kw)
    T = axes_table(sys, ec)
    x = ec.point
    grads = x[:, None] / T.entries
    norms = np.linalg.norm(grads, axis=0)
    return FrameAtPoint(origin=x, normals=grads / norms, support=1.0 / norms, table=T)


def support_sq_closed_form(T: AxesTable) -> np.ndarray:
    """``(p^j)^2 = prod_i T[i,j] / prod_{k!=j}(lam^k - lam^j)``."""
    lam = T.lambdas
    n = lam.size
    out = np.zeros(n)
    for j in range(n):
        den = float(np.prod([lam[k] - lam[j] for k in range(n) if k != j]))
        out[j] = float(np.prod(T.entries[:, j])) / den
    return out


def central_section_sq_axes(sys: ConfocalSystem, x, **kw) -> np.ndarray:
    """Squared semi-axes ``lam^j - lam^1`` (j = 2..n) of the central section of
    the ellipsoid through ``x`` parallel to its tangent hyperplane at ``x``."""
    ec = elliptic_coordinates(sys, x, **kw)
    lam = ec.lambdas
    return lam[1:] - lam[0]


def radius_sq_along(sq_axes, direction) -> float:
    d = _vec(direction)
    d = d / np.linalg.norm(d)
    return 1.0 / float(np.sum(d * d / _vec(sq_axes)))


def dual_system(F: FrameAtPoint, T: AxesTable | None = None) -> list[FramedQuadric]:
    """The n quadrics centred at the point, with the tangent hyperplanes as
    principal hyperplanes and squared semi-axes ``T[i, :]``."""
    T = F.table if T is None else T
    return [FramedQuadric(center=F.origin, frame=F.normals, signed_sq_axes=T.entries[i].copy())
            for i in range(T.dim)]


def pole_line(sys: ConfocalSystem, H: Hyperplane) -> tuple[np.ndarray, np.ndarray]:
    """Locus ``xi(lam) = h_i (a_i^2 - lam)`` of the poles of H: base point
    ``xi(0)`` and direction ``h`` (the line is traversed as ``base - lam*h``)."""
    return H.h * sys.base_sq_axes, H.h.copy()


def tangent_confocal_parameter(sys: ConfocalSystem, H: Hyperplane) -> float:
    h2 = H.h * H.h
    lam = (float(h2 @ sys.base_sq_axes) - 1.0) / float(h2.sum())
    a2 = sys.base_sq_axes
    if np.any(np.abs(a2 - lam) <= MEMBRANE_TOL * a2[0]):
        raise OnFocalMembrane(f"touching parameter {lam} is a focal value")
    return lam


def tangency_point(sys: ConfocalSystem, H: Hyperplane) -> np.ndarray:
    """Where the touching confocal meets H: the pole line hits H there."""
    lam = tangent_confocal_parameter(sys, H)
    return H.h * (sys.base_sq_axes - lam)


def tangency_locus_product(sys: ConfocalSystem, h, lam: float) -> tuple[np.ndarray, float]:
    """Touch point on C(lam) of the tangent hyperplane with normal ``h`` and the
    product of its distances to the hyperplane ``<h, x> = 0`` and to the line
    spanned by ``h``."""
    h = _vec(h)
    w = sys.base_sq_axes - lam
    s2 = float(np.sum(h * h * w))
    if s2 <= 0:
        raise NoRealTangency(f"no real tangent hyperplane with normal {h} on C({lam})")
    x = w * h / math.sqrt(s2)
    hn = h / np.linalg.norm(h)
    along = float(x @ hn)
    d_line = math.sqrt(max(float(x @ x) - along * along, 0.0))
    return x, abs(along) * d_line


def tangency_product_invariant(sys: ConfocalSystem, h) -> float:
    """``sqrt(sum h^2 sum h^2 a^4 - (sum h^2 a^2)^2) / sum h^2``."""
    h2 = _vec(h) ** 2
    a2 = sys.base_sq_axes
    s0, s1, s2 = h2.sum(), h2 @ a2, h2 @ (a2 * a2)
    return math.sqrt(max(s0 * s2 - s1 * s1, 0.0)) / s0


def _apollonian_shift(a2: np.ndarray, u: np.ndarray) -> np.ndarray:
    shift = np.zeros_like(a2)
    shift[1:] = a2[1:] * u[1:] / (a2[0] - a2[1:])
    return shift


def apollonian_curve_point(sq_axes, u, tau: float, pole_tol: float = 1e-12) -> np.ndarray:
    """Point of the Apollonian curve of the homothetic ellipsoids with squared
    axes ``sq_axes`` and fixed point ``u``, in original coordinates.

    ``tau = 0`` gives the centre and ``tau = 1/a_1^2`` gives ``u``.
    """
    a2, u = _vec(sq_axes), _vec(u)
    d = a2[0] - a2[1:]
    if np.any(d == 0):
        raise ValueError("a_1^2 must differ from every other squared axis")
    den = d * tau - 1.0
    if np.any(np.abs(den) <= pole_tol * max(1.0, abs(tau) * float(np.max(np.abs(d))))):
        raise PoleParameter(f"tau={tau} is a pole of the curve")
    y = np.empty_like(a2)
    y[0] = a2[0] * u[0] * tau
    y[1:] = -a2[1:] * u[1:] / (d * den)
    return y - _apollonian_shift(a2, u)


def apollonian_poles(sq_axes) -> np.ndarray:
    a2 = _vec(sq_axes)
    return 1.0 / (a2[0] - a2[1:])


def apollonian_residual(sq_axes, u, x) -> float:
    """Largest residual of ``(a_1^2-a_i^2) x_1 x_i + a_i^2 u_i x_1 - a_1^2 u_1 x_i``,
    scaled by ``a_1^2 (|x| + |u|)^2``."""
    a2, u, x = _vec(sq_axes), _vec(u), _vec(x)
    r = (a2[0] - a2[1:]) * x[0] * x[1:] + a2[1:] * u[1:] * x[0] - a2[0] * u[0] * x[1:]
    scale = a2[0] * (np.linalg.norm(x) + np.linalg.norm(u)) ** 2
    return float(np.max(np.abs(r)) / scale) if scale > 0 else 0.0


def apollonian_asymptote_anchor(sq_axes, u, i: int) -> np.ndarray:
    """Point on the i-th asymptote (parallel to axis i, 1-based) of the curve,
    in original coordinates."""
    a2, u = _vec(sq_axes), _vec(u)
    n = a2.size
    if not 1 <= i <= n:
        raise IndexOutOfRange(f"asymptote index {i} outside 1..{n}")
    y = np.zeros(n)
    if i > 1:
        ai = a2[i - 1]
        y[0] = a2[0] * u[0] / (a2[0] - ai)
        for k in range(1, n):
            if k == i - 1:
                continue
            y[k] = -a2[k] * u[k] * (a2[0] - ai) / ((a2[0] - a2[k]) * (ai - a2[k]))
    return y - _apollonian_shift(a2, u)
