"""Three-dimensional applications: the string (wire) model of the ellipsoid
over its focal conics, and the axis constructions from conjugate diameters.

Conventions: the ellipsoid has semi-axes ``a > b > c``. The focal ellipse
lies in ``z = 0`` and the focal hyperbola in ``y = 0``. The string is
fastened at ``G2 = (sqrt(a^2-b^2), 0, 0)``, a focus of the focal ellipse,
and at ``F1 = (-sqrt(a^2-c^2), 0, 0)``, a vertex of the focal ellipse and a
focus of the focal hyperbola.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cones import Transversal, focal_edges
from .confocal import ConfocalSystem, elliptic_coordinates
from .errors import (DegeneratePair, DegenerateTriple, DimensionMismatch, NoIntersection,
                     NoSignChange, OffSurface, UnconstructibleConfiguration)
from .numerics import Bracket, bracketed_root, minimize_1d
from .quadrics import _vec

V_MAX = 5.0
SURFACE_TOL = 1e-10
PLANE_TOL = 1e-12
TIE_RTOL = 1e-12
# below this |det| the literal parallel-line intersection of the 2-D
# construction is ill-conditioned and the |OL| +- |OM| identity is used
PARALLEL_DET = 1e-6
ORTHO_TOL = 1e-6

# (eps(eta), eps(zeta)) for r1..r4; eps(xi) is -1 for all four
RADIUS_LABELS = {(1, 1): "r1", (1, -1): "r2", (-1, -1): "r3", (-1, 1): "r4"}


@dataclass(frozen=True)
class FocalConics:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not self.a > self.b > self.c > 0:
            raise ValueError(f"need a > b > c > 0, got ({self.a}, {self.b}, {self.c})")

    @property
    def e_ab(self) -> float:
        return math.sqrt(self.a ** 2 - self.b ** 2)

    @property
    def e_ac(self) -> float:
        return math.sqrt(self.a ** 2 - self.c ** 2)

    @property
    def e_bc(self) -> float:
        return math.sqrt(self.b ** 2 - self.c ** 2)

    @property
    def G2(self) -> np.ndarray:
        return np.array([self.e_ab, 0.0, 0.0])

    @property
    def F1(self) -> np.ndarray:
        return np.array([-self.e_ac, 0.0, 0.0])

    def system(self) -> ConfocalSystem:
        return ConfocalSystem([self.a ** 2, self.b ** 2, self.c ** 2])

    def closed_form_length(self) -> float:
        return 2.0 * self.a + self.e_ac - self.e_ab

    def ellipsoid_residual(self, x) -> float:
        x = _vec(x)
        return float(x[0] ** 2 / self.a ** 2 + x[1] ** 2 / self.b ** 2 + x[2] ** 2 / self.c ** 2) - 1.0


def focal_ellipse_point(fc: FocalConics, u: float) -> np.ndarray:
    return np.array([fc.e_ac * math.cos(u), fc.e_bc * math.sin(u), 0.0])


def focal_ellipse_tangent(fc: FocalConics, u: float) -> np.ndarray:
    return np.array([-fc.e_ac * math.sin(u), fc.e_bc * math.cos(u), 0.0])


def focal_hyperbola_point(fc: FocalConics, v: float, branch: int = 1) -> np.ndarray:
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    return np.array([branch * fc.e_ab * math.cosh(v), 0.0, -fc.e_bc * math.sinh(v)])


def focal_hyperbola_tangent(fc: FocalConics, v: float, branch: int = 1) -> np.ndarray:
    return np.array([branch * fc.e_ab * math.sinh(v), 0.0, -fc.e_bc * math.cosh(v)])


def focal_ellipse_residual(fc: FocalConics, x) -> float:
    x = _vec(x)
    return max(abs(x[0] ** 2 / fc.e_ac ** 2 + x[1] ** 2 / fc.e_bc ** 2 - 1.0), abs(x[2]))


def focal_hyperbola_residual(fc: FocalConics, x) -> float:
    x = _vec(x)
    return max(abs(x[0] ** 2 / fc.e_ab ** 2 - x[2] ** 2 / fc.e_bc ** 2 - 1.0), abs(x[1]))


@dataclass(frozen=True)
class BrokenLine:
    vertices: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if V.shape[0] < 2:
            raise ValueError("a broken line needs at least two vertices")
        object.__setattr__(self, "vertices", V)

    @property
    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)))


def _angle(x: np.ndarray, y: np.ndarray) -> float:
    return math.atan2(float(np.linalg.norm(np.cross(x, y))), float(x @ y))


def reflection_mismatch(Q, tangent, F, P) -> float:
    """``angle(QF, T) - angle(QP, -T)``; zero when QF and QP make equal
    angles with the curve, i.e. the broken line FQP reflects at Q."""
    Q, T = _vec(Q), _vec(tangent)
    return _angle(_vec(F) - Q, T) - _angle(_vec(P) - Q, -T)


@dataclass(frozen=True)
class ConicMinimum:
    conic: str
    point: np.ndarray
    parameter: float
    branch: int | None
    length: float
    mismatch: float
    line: BrokenLine


def _polish(g, s: float, h: float, lo: float | None, hi: float | None) -> float | None:
    a, b = s - h, s + h
    if lo is not None:
        a, b = max(a, lo), min(b, hi)
    try:
        return bracketed_root(g, Bracket(a, b))
    except (NoSignChange, ValueError):
        return None


def minimize_broken_line(fc: FocalConics, F, P, conic: str = "ellipse", *,
                         branch: int | None = None, v_max: float = V_MAX,
                         samples: int = 1024) -> ConicMinimum:
    """Point Q of a focal conic minimizing ``|FQ| + |QP|``.

    For the hyperbola the search runs over ``|v| <= v_max``; with
    ``branch=None`` both branches are searched and the shorter one wins.
    The grid/golden-section optimum is polished by a bracketed root of the
    derivative, which is the reflection condition.
    """
    F, P = _vec(F), _vec(P)
    if conic == "hyperbola" and branch is None:
        best = [minimize_broken_line(fc, F, P, "hyperbola", branch=s, v_max=v_max, samples=samples)
                for s in (1, -1)]
        return min(best, key=lambda m: m.length)

    if conic == "ellipse":
        point, tangent = (lambda s: focal_ellipse_point(fc, s)), (lambda s: focal_ellipse_tangent(fc, s))
        lo, hi, periodic = 0.0, 2.0 * math.pi, True
        br = None
    elif conic == "hyperbola":
        br = branch
        point = lambda s: focal_hyperbola_point(fc, s, br)  # noqa: E731
        tangent = lambda s: focal_hyperbola_tangent(fc, s, br)  # noqa: E731
        lo, hi, periodic = -v_max, v_max, False
    else:
        raise ValueError(f"unknown conic {conic!r}")

    def length(s: float) -> float:
        Q = point(s)
        return float(np.linalg.norm(Q - F) + np.linalg.norm(P - Q))

    def slope(s: float) -> float:
        Q = point(s)
        g = 0.0
        for X in (F, P):
            r = Q - X
            nr = float(np.linalg.norm(r))
            if nr > 0.0:
                g += float(tangent(s) @ r) / nr
        return g

    s, val = minimize_1d(length, lo, hi, periodic=periodic, samples=samples)
    h = (hi - lo) / samples
    root = _polish(slope, s, h, None if periodic else lo, None if periodic else hi)
    if root is not None and length(root) <= val + 1e-12 * max(1.0, val):
        s, val = root, length(root)
    if periodic:
        s = s % (2.0 * math.pi)
    Q = point(s)
    return ConicMinimum(conic=conic, point=Q, parameter=float(s), branch=br, length=float(val),
                        mismatch=reflection_mismatch(Q, tangent(s), F, P),
                        line=BrokenLine(np.vstack([F, Q, P])))


def hh_difference(fc: FocalConics, H1, H2, E) -> float:
    """``|H1 E| - |E H2|`` for hyperbola points on one branch; independent of
    the ellipse point E."""
    H1, H2, E = _vec(H1), _vec(H2), _vec(E)
    return float(np.linalg.norm(H1 - E) - np.linalg.norm(E - H2))


def hh_sum(fc: FocalConics, H1, H2, E) -> float:
    """``|H1 E| + |E H2|`` for hyperbola points on opposite branches; also
    independent of E."""
    H1, H2, E = _vec(H1), _vec(H2), _vec(E)
    return float(np.linalg.norm(H1 - E) + np.linalg.norm(E - H2))


@dataclass(frozen=True)
class FocalRadius:
    label: str
    sign_profile: tuple[int, int, int]
    direction: np.ndarray
    t: float
    tau: float
    E: np.ndarray
    H: np.ndarray


def _plane_hit(P: np.ndarray, d: np.ndarray, axis: int) -> float:
    if abs(d[axis]) <= PLANE_TOL:
        raise NoIntersection(f"focal radius is parallel to the plane x_{axis + 1} = 0")
    return -float(P[axis]) / float(d[axis])


def _orient(edge: Transversal, P: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    d, loc = edge.direction, edge.local
    t = _plane_hit(P, d, 2)
    if t < 0:
        d, loc, t = -d, -loc, -t
    return d, loc, t


def focal_radii(fc: FocalConics, P, **kw) -> list[FocalRadius]:
    """The four common edges at P of the focal cones, as lines from P.

    Each is oriented towards its focal-ellipse hit (``t > 0``); ``tau`` is
    the signed parameter of the focal-hyperbola hit. The sign profile is
    taken in the frame of confocal normals at P.
    """
    P = _vec(P)
    _, edges = focal_edges(fc.system(), P, **kw)
    out = []
    for edge in edges:
        d, loc, t = _orient(edge, P)
        tau = _plane_hit(P, d, 1)
        prof = tuple(int(s) for s in np.sign(loc))
        label = RADIUS_LABELS.get(prof[1:], "?") if prof[0] == -1 else "?"
        out.append(FocalRadius(label=label, sign_profile=prof, direction=d, t=t, tau=tau,
                               E=P + t * d, H=P + tau * d))
    return sorted(out, key=lambda r: r.label)


@dataclass(frozen=True)
class StaudeResult:
    closed_form: float
    assembled: float
    legs: dict
    ellipse: ConicMinimum
    hyperbola_same: ConicMinimum
    hyperbola_opposite: ConicMinimum

    @property
    def hyperbola(self) -> ConicMinimum:
        return min((self.hyperbola_same, self.hyperbola_opposite), key=lambda m: m.length)


def staude_length(fc: FocalConics, P, *, samples: int = 1024, v_max: float = V_MAX,
                  tol: float = SURFACE_TOL) -> StaudeResult:
    """String length over the focal conics for a point P of the ellipsoid.

    ``assembled`` is the shortest ``|PE| + |E G2|`` over the focal ellipse
    plus the shortest ``|PH| + |H F1|`` over the focal hyperbola; the
    hyperbola branch through F1's side and the opposite branch are kept
    separately.
    """
    P = _vec(P)
    res = fc.ellipsoid_residual(P)
    if abs(res) > tol:
        raise OffSurface(f"point is off the ellipsoid (residual {res:.3e})")
    elliptic_coordinates(fc.system(), P)  # rejects coordinate-plane points
    ell = minimize_broken_line(fc, fc.G2, P, "ellipse", samples=samples)
    hyp = {s: minimize_broken_line(fc, fc.F1, P, "hyperbola", branch=s, v_max=v_max, samples=samples)
           for s in (1, -1)}
    same, opposite = hyp[-1], hyp[1]  # F1 lies on the x < 0 side
    best = min(same, opposite, key=lambda m: m.length)
    legs = {
        "PE": float(np.linalg.norm(P - ell.point)),
        "EG2": float(np.linalg.norm(ell.point - fc.G2)),
        "PH": float(np.linalg.norm(P - best.point)),
        "HF1": float(np.linalg.norm(best.point - fc.F1)),
    }
    return StaudeResult(closed_form=fc.closed_form_length(), assembled=ell.length + best.length,
                        legs=legs, ellipse=ell, hyperbola_same=same, hyperbola_opposite=opposite)


def leg_closed_forms(fc: FocalConics, P) -> tuple[float, float]:
    """Shortest ellipse leg and same-branch hyperbola leg in terms of the
    two hyperboloid parameters through a point P of the ellipsoid."""
    P = _vec(P)
    lam = elliptic_coordinates(fc.system(), P).lambdas
    a2 = fc.a ** 2
    mu, nu = lam[1], lam[2]
    eps = 1.0 if P[0] > 0 else -1.0
    r_mu, r_nu = math.sqrt(a2 - mu), math.sqrt(a2 - nu)
    return fc.a - r_mu - eps * r_nu + fc.e_ac, fc.a + r_mu + eps * r_nu - fc.e_ab


# ---- axes from conjugate diameters ---------------------------------------

@dataclass(frozen=True)
class PrincipalAxes:
    """Unit axis directions (columns) with semi-axis lengths, longest first."""

    directions: np.ndarray
    lengths: np.ndarray
    note: str | None = None
    details: dict = field(default_factory=dict, compare=False)


def _rot90(v: np.ndarray) -> np.ndarray:
    return np.array([-v[1], v[0]])


def _meet(P: np.ndarray, u: np.ndarray, m: np.ndarray) -> float | None:
    """Signed position along the unit ray ``m`` of the meet with the line
    ``P + s u``; None when the lines are (nearly) parallel."""
    A = np.column_stack([u, -m])
    if abs(np.linalg.det(A)) < PARALLEL_DET:
        return None
    return float(np.linalg.solve(A, -P)[1])


def rytz_chasles_2d(O, P, Q) -> PrincipalAxes:
    """Principal axes of the ellipse with conjugate semi-diameters OP, OQ.

    Rotating OQ by a right angle about P gives M and L on the normal to OQ
    through P with ``|PM| = |PL| = |OQ|``. The internal bisector of angle
    LOM is the major axis. The parallel through P to the major axis meets
    line OM at T, the parallel to the minor axis meets it at P', and
    ``|OP'|``, ``|OT|`` are the semi-axes.
    """
    O, P, Q = _vec(O), _vec(P), _vec(Q)
    if not O.size == P.size == Q.size == 2:
        raise DimensionMismatch("the planar construction takes 2-D points")
    p, q = P - O, Q - O
    scale = float(np.linalg.norm(p) * np.linalg.norm(q))
    if scale == 0.0 or abs(p[0] * q[1] - p[1] * q[0]) <= 1e-12 * scale:
        raise DegeneratePair("conjugate semi-diameters are linearly dependent")

    m = p + _rot90(q)
    l_ = p - _rot90(q)
    om, ol = float(np.linalg.norm(m)), float(np.linalg.norm(l_))
    size = float(np.linalg.norm(p) + np.linalg.norm(q))
    if min(om, ol) <= TIE_RTOL * size:
        r = max(om, ol) / 2.0
        e1 = p / np.linalg.norm(p)
        return PrincipalAxes(np.column_stack([e1, _rot90(e1)]), np.array([r, r]), note="tie",
                             details={"M": O + m, "L": O + l_})

    mh, lh = m / om, l_ / ol
    bis = mh + lh
    major = bis / np.linalg.norm(bis) if np.linalg.norm(bis) > 1e-8 else _rot90(mh)
    minor = _rot90(major)
    s_T = _meet(p, major, mh)
    s_P = _meet(p, minor, mh)
    len_minor = abs(s_T) if s_T is not None else abs(ol - om) / 2.0
    len_major = abs(s_P) if s_P is not None else (ol + om) / 2.0
    details = {"M": O + m, "L": O + l_}
    if s_T is not None:
        details["T"] = O + s_T * mh
    if s_P is not None:
        details["P'"] = O + s_P * mh
    return PrincipalAxes(np.column_stack([major, minor]), np.array([len_major, len_minor]),
                         details=details)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _pairing_axes(dirs: list[np.ndarray]) -> list[np.ndarray]:
    """Intersections of the planes spanned by complementary pairs of the
    four edges, one per way of splitting them into two pairs."""
    axes = []
    for (i, j), (k, m) in [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]:
        n1 = np.cross(dirs[i], dirs[j])
        n2 = np.cross(dirs[k], dirs[m])
        ax = np.cross(n1, n2)
        nrm = float(np.linalg.norm(ax))
        if nrm <= 1e-12:
            raise UnconstructibleConfiguration("edge planes do not meet in a line")
        axes.append(ax / nrm)
    return axes


def _genericity(local: np.ndarray) -> float:
    return float(np.min(np.abs(local)) / np.linalg.norm(local))


def chasles_3d(O, P, Q, R, *, guard: float = 1e-6) -> PrincipalAxes:
    """Principal axes of the ellipsoid with conjugate semi-diameters OP, OQ, OR.

    The frame at P consists of the normal to the plane OQR and the planar
    axes of the section OQR. In that frame the confocal parameters of the
    quadrics through P are ``0`` and the two squared section semi-axes.
    The confocal family with centre P built on those parameters passes
    through O, where its two focal cones meet in four edges. The three ways
    of pairing the edges give the principal axes; the planes through P
    parallel to the principal planes cut the edges at the semi-axis lengths.
    """
    O = _vec(O)
    vecs = [_vec(X) - O for X in (P, Q, R)]
    if any(v.size != 3 for v in vecs):
        raise DimensionMismatch("the spatial construction takes 3-D points")
    X = np.column_stack(vecs)
    scale = float(np.prod(np.linalg.norm(X, axis=0)))
    if scale == 0.0 or abs(np.linalg.det(X)) <= 1e-9 * scale:
        raise DegenerateTriple("conjugate semi-diameters are (nearly) dependent")

    G = X.T @ X
    off = np.abs(G - np.diag(np.diag(G)))
    if np.all(off <= 1e-14 * np.max(np.diag(G))):
        order = np.argsort(-np.diag(G), kind="stable")
        dirs = X[:, order] / np.linalg.norm(X[:, order], axis=0)
        return PrincipalAxes(dirs, np.sqrt(np.diag(G)[order]), note="already principal")

    # any vertex can play P; take the one whose centre is most generic in the dual frame
    best = None
    for idx in range(3):
        p, q, r = vecs[idx], vecs[(idx + 1) % 3], vecs[(idx + 2) % 3]
        frame, lam = _frame_at_vertex(p, q, r)
        o = frame.T @ (-p)
        g = _genericity(o)
        if best is None or g > best[0]:
            best = (g, p, frame, lam, o)
    g, p, frame, lam, o = best
    nudge = g < guard

    shift = lam[2] + float(p @ p)
    dual = ConfocalSystem(shift - lam)
    Fd, edges = focal_edges(dual, o, nudge=nudge)
    dirs = [frame @ e.direction for e in edges]
    if len(dirs) != 4:
        raise UnconstructibleConfiguration(f"expected four common edges, got {len(dirs)}")
    axes = _pairing_axes(dirs)
    A = np.column_stack(axes)
    if np.max(np.abs(A.T @ A - np.eye(3))) > ORTHO_TOL:
        raise UnconstructibleConfiguration("recovered axes are not mutually perpendicular")

    lengths = []
    for ax in axes:
        hits = [abs(float(ax @ p) / float(ax @ d)) for d in dirs]
        lengths.append(float(np.mean(hits)))
    lengths = np.array(lengths)
    order = np.argsort(-lengths, kind="stable")
    return PrincipalAxes(A[:, order], lengths[order], note="nudged" if nudge else None,
                         details={"edges": np.column_stack(dirs), "frame": frame,
                                  "lambdas": lam})


def _frame_at_vertex(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n1 = _unit(np.cross(q, r))
    if n1 @ p < 0:
        n1 = -n1
    eu = _unit(q)
    ew = np.cross(n1, eu)
    sec = rytz_chasles_2d(np.zeros(2), np.array([q @ eu, q @ ew]), np.array([r @ eu, r @ ew]))
    big = sec.directions[0, 0] * eu + sec.directions[1, 0] * ew
    small = sec.directions[0, 1] * eu + sec.directions[1, 1] * ew
    frame = np.column_stack([n1, _unit(small), _unit(big)])
    lam = np.array([0.0, sec.lengths[1] ** 2, sec.lengths[0] ** 2])
    if not lam[0] < lam[1] < lam[2]:
        raise UnconstructibleConfiguration("section through the centre is circular")
    return frame, lam
