"""Sampling of confocal surfaces and curves, and plain OBJ / CSV writers."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .cones import focal_edges
from .confocal import (ConfocalSystem, apollonian_curve_point, apollonian_poles,
                       apollonian_residual, confocal_quadric)
from .errors import DimensionMismatch, NegativeSquare
from .quadrics import sample_quadric_points

OBJ_DIGITS = 9
HYPERBOLIC_EXTENT = 1.5
POLE_GAP = 1e-3


@dataclass
class MeshObject:
    name: str
    vertices: np.ndarray
    faces: list[tuple[int, ...]] = field(default_factory=list)   # 0-based, local
    lines: list[tuple[int, ...]] = field(default_factory=list)


def _fmt(x: float) -> str:
    s = f"{x:.{OBJ_DIGITS}g}"
    return "0" if s == "-0" else s


def write_obj(objects: list[MeshObject]) -> str:
    out = io.StringIO()
    base = 1
    for ob in objects:
        out.write(f"o {ob.name}\n")
        for v in ob.vertices:
            out.write("v " + " ".join(_fmt(c) for c in v) + "\n")
        for f in ob.faces:
            out.write("f " + " ".join(str(base + i) for i in f) + "\n")
        for ln in ob.lines:
            out.write("l " + " ".join(str(base + i) for i in ln) + "\n")
        base += len(ob.vertices)
    return out.getvalue()


def write_csv(header: list[str], rows: list[list]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(c)) if isinstance(c, (float, np.floating)) else c for c in r])
    return out.getvalue()


def _grid_faces(rows: int, cols: int, wrap: bool) -> list[tuple[int, int, int, int]]:
    faces = []
    for i in range(rows - 1):
        for j in range(cols if wrap else cols - 1):
            j2 = (j + 1) % cols
            faces.append((i * cols + j, (i + 1) * cols + j, (i + 1) * cols + j2, i * cols + j2))
    return faces


def surface_grid(sys: ConfocalSystem, lam: float, resolution: int = 24,
                 name: str | None = None) -> list[MeshObject]:
    """Quad grid of the confocal member ``lam`` of a 3-D family, as one object."""
    if sys.dim != 3:
        raise DimensionMismatch("surface grids exist for three-dimensional families only")
    Q = confocal_quadric(sys, lam)
    ax = np.sqrt(np.abs(Q.signed_sq_axes))
    signs = tuple(int(s) for s in Q.signs)
    if signs[0] < 0:
        raise NegativeSquare(f"lambda={lam} exceeds every squared axis; the member has no real points")
    m = max(resolution, 4)
    theta = 2.0 * math.pi * np.arange(m) / m
    name = name or f"confocal_{lam:g}"
    if signs == (1, 1, 1):
        phi = np.linspace(0.0, math.pi, m)
        P, T = np.meshgrid(phi, theta, indexing="ij")
        V = np.stack([ax[0] * np.sin(P) * np.cos(T), ax[1] * np.sin(P) * np.sin(T),
                      ax[2] * np.cos(P)], axis=-1)
        return [MeshObject(name, V.reshape(-1, 3), faces=_grid_faces(m, m, True))]
    if signs == (1, 1, -1):
        s = np.linspace(-HYPERBOLIC_EXTENT, HYPERBOLIC_EXTENT, m)
        S, T = np.meshgrid(s, theta, indexing="ij")
        V = np.stack([ax[0] * np.cosh(S) * np.cos(T), ax[1] * np.cosh(S) * np.sin(T),
                      ax[2] * np.sinh(S)], axis=-1)
        return [MeshObject(name, V.reshape(-1, 3), faces=_grid_faces(m, m, True))]
    s = np.linspace(0.0, HYPERBOLIC_EXTENT, m)
    S, T = np.meshgrid(s, theta, indexing="ij")
    verts, faces = [], []
    for sg in (1.0, -1.0):
        V = np.stack([sg * ax[0] * np.cosh(S), ax[1] * np.sinh(S) * np.cos(T),
                      ax[2] * np.sinh(S) * np.sin(T)], axis=-1).reshape(-1, 3)
        off = sum(len(v) for v in verts)
        faces += [tuple(off + i for i in f) for f in _grid_faces(m, m, True)]
        verts.append(V)
    # both sheets of a two-sheeted hyperboloid go into one object
    return [MeshObject(name, np.vstack(verts), faces=faces)]


def surface_cloud(sys: ConfocalSystem, lam: float, count: int, rng: np.random.Generator) -> np.ndarray:
    return sample_quadric_points(confocal_quadric(sys, lam), rng, count)


def focal_curves(sys: ConfocalSystem, samples: int = 200) -> list[tuple[str, np.ndarray, np.ndarray]]:
    """(name, parameters, points) for the focal ellipse and both branches of
    the focal hyperbola of a 3-D family."""
    if sys.dim != 3:
        raise DimensionMismatch("focal conics are drawn for three-dimensional families only")
    a2, b2, c2 = sys.base_sq_axes
    e_ac, e_bc, e_ab = math.sqrt(a2 - c2), math.sqrt(b2 - c2), math.sqrt(a2 - b2)
    u = 2.0 * math.pi * np.arange(samples) / samples
    ell = np.stack([e_ac * np.cos(u), e_bc * np.sin(u), np.zeros_like(u)], axis=-1)
    v = np.linspace(-HYPERBOLIC_EXTENT, HYPERBOLIC_EXTENT, samples)
    curves = [("focal_ellipse", u, ell)]
    for label, sg in (("pos", 1.0), ("neg", -1.0)):
        hyp = np.stack([sg * e_ab * np.cosh(v), np.zeros_like(v), -e_bc * np.sinh(v)], axis=-1)
        curves.append((f"focal_hyperbola_{label}", v, hyp))
    return curves


def apollonian_parameters(sq_axes, count: int) -> np.ndarray:
    """``count`` curve parameters spread over an interval containing every
    pole, each kept at least a small gap away from the poles."""
    poles = apollonian_poles(sq_axes)
    span = 2.0 * float(np.max(np.abs(poles)))
    taus = np.linspace(-span, span, count)
    gap = POLE_GAP * span
    for p in poles:
        close = np.abs(taus - p) < gap
        taus[close] = p + np.where(taus[close] >= p, gap, -gap)
    return taus


def apollonian_samples(sq_axes, u, count: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    taus = apollonian_parameters(sq_axes, count)
    pts = np.array([apollonian_curve_point(sq_axes, u, t) for t in taus])
    res = np.array([apollonian_residual(sq_axes, u, x) for x in pts])
    return taus, pts, res


def edge_segments(sys: ConfocalSystem, x, **kw) -> list[tuple[tuple[int, ...], np.ndarray]]:
    """Common edges at ``x`` as segments ``x +- a_1 d``."""
    F, edges = focal_edges(sys, x, **kw)
    reach = sys.major
    return [(e.sign_profile, np.vstack([F.origin - reach * e.direction, F.origin + reach * e.direction]))
            for e in edges]


def polyline_runs(taus: np.ndarray, poles: np.ndarray) -> list[list[int]]:
    """Split consecutive sample indices wherever a pole lies between them."""
    runs, cur = [], [0]
    for i in range(1, taus.size):
        if np.any((poles > taus[i - 1]) & (poles < taus[i])):
            runs.append(cur)
            cur = []
        cur.append(i)
    runs.append(cur)
    return [r for r in runs if len(r) >= 2]
