"""Seeded invariant suites run by ``confocal verify``.

Each case gets its own generator derived from ``(seed, suite id, case
index)`` so results do not depend on execution order or worker count. A
case returns ``(residual, tolerance)`` and fails when the residual exceeds
the tolerance.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import cones, confocal, quadrics, staude
from .confocal import ConfocalSystem

WORKERS_ENV = "CONFOCAL_WORKERS"
INJECTED_ERROR = 1e-6


def random_sq_axes(rng: np.random.Generator, n: int, lo: float = 0.5, hi: float = 10.0,
                   min_gap: float = 0.05) -> np.ndarray:
    """Strictly decreasing squared axes with relative gaps of at least ``min_gap``."""
    while True:
        a2 = np.sort(rng.uniform(lo, hi, size=n))[::-1]
        if n == 1 or np.min(-np.diff(a2)) >= min_gap * a2[0]:
            return a2


def random_point(rng: np.random.Generator, n: int, scale: float) -> np.ndarray:
    x = rng.normal(size=n) * scale
    return x + np.sign(x) * 0.05 * scale


def random_ellipsoid_point(rng: np.random.Generator, axes) -> np.ndarray:
    axes = np.asarray(axes, dtype=float)
    while True:
        d = rng.normal(size=axes.size)
        x = axes * d / np.linalg.norm(d)
        if np.min(np.abs(x) / axes) > 0.02:
            return x


def _apollonius(rng, n, inject):
    Q = quadrics.CentralQuadric(random_sq_axes(rng, n))
    S = quadrics.random_conjugate_system(Q, rng)
    worst = 0.0
    for k in range(1, n + 1):
        expected = quadrics.apollonius_expected(Q, k) * (1.0 + (INJECTED_ERROR if inject else 0.0))
        worst = max(worst, abs(quadrics.apollonius_invariant(S, k) - expected) / expected)
    return worst, 1e-9


def _elliptic_roundtrip(rng, n, inject):
    sys = ConfocalSystem(random_sq_axes(rng, n))
    x = random_point(rng, n, sys.major)
    ec = confocal.elliptic_coordinates(sys, x)
    if not np.all(np.diff(ec.lambdas) > 0):
        return math.inf, 1e-9
    back = confocal.point_from_axes_table(confocal.axes_table(sys, ec))
    return float(np.max(np.abs(back - np.abs(x)) / np.abs(x))), 1e-9


def _orthogonality(rng, n, inject):
    sys = ConfocalSystem(random_sq_axes(rng, n))
    F = confocal.frame_at_point(sys, random_point(rng, n, sys.major))
    G = F.normals.T @ F.normals
    return float(np.max(np.abs(G - np.eye(n)))), 1e-10


def _norm_identity(rng, n, inject):
    sys = ConfocalSystem(random_sq_axes(rng, n))
    ec = confocal.elliptic_coordinates(sys, random_point(rng, n, sys.major))
    lhs, rhs = confocal.norm_identity_check(ec)
    return abs(lhs - rhs) / max(1.0, lhs), 1e-9


def _dual_membership(rng, n, inject):
    sys = ConfocalSystem(random_sq_axes(rng, n))
    F = confocal.frame_at_point(sys, random_point(rng, n, sys.major))
    p2 = F.support ** 2
    sums = (p2[None, :] / F.table.entries).sum(axis=1)
    return float(np.max(np.abs(sums - 1.0))), 1e-9


def _identity(rng, n, inject):
    m = int(rng.integers(2, 9)) if n is None else n
    a1 = random_sq_axes(rng, m, lo=-10.0, hi=10.0)
    shifts = rng.uniform(-10.0, 10.0, size=m - 2)
    return abs(cones.identity_sum(a1, shifts) - 1.0), 1e-9


def _common_edges(rng, n, inject):
    sys = ConfocalSystem(random_sq_axes(rng, n))
    x = random_point(rng, n, sys.major)
    F, edges = cones.focal_edges(sys, x)
    alpha = F.table.entries[1:]
    closed = cones.common_edge_sq_cosines(alpha)
    oracle = cones.sq_cosines_from_null_space(alpha)
    worst = float(np.max(np.abs(closed - oracle)))
    worst = max(worst, abs(float(closed.sum()) - 1.0))
    for e in edges:
        for row in alpha:
            worst = max(worst, abs(cones.direction_residual(row, e.local)))
    return worst, 1e-8


def _intercept(rng, n, inject):
    sys = ConfocalSystem(random_sq_axes(rng, 3))
    x = random_point(rng, 3, sys.major)
    F, edges = cones.focal_edges(sys, x)
    want = math.sqrt(sys.base_sq_axes[0] - F.table.lambdas[0])
    got = [cones.intercept_length(sys, x, e, frame=F) for e in edges]
    return max(abs(g - want) / want for g in got), 1e-8


def _tangent_cone(rng, n, inject):
    sys = ConfocalSystem(random_sq_axes(rng, n))
    E = quadrics.CentralQuadric(sys.base_sq_axes)
    while True:
        x = random_point(rng, n, 2.0 * sys.major)
        if quadrics.evaluate(E, x) > 0.1:
            break
    form = cones.tangent_cone_form(E, x)
    C = cones.tangent_cone_canonical(sys, x)
    H = C.frame.T @ form.quadratic @ C.frame
    scale = float(np.linalg.norm(H))
    off = float(np.max(np.abs(H - np.diag(np.diag(H))))) / scale
    # diagonal entries are proportional to 1/(-lambda^i)
    ratios = np.diag(H) * (-C.signed_sq_axes)
    spread = float(np.max(np.abs(ratios / ratios[0] - 1.0)))
    return max(off / 1e-8, spread / 1e-7), 1.0


def _right_cone(rng, n, inject):
    sys = ConfocalSystem([9.0, 4.0, 1.0])
    v = rng.uniform(-1.5, 1.5)
    th = rng.uniform(0.0, 2.0 * math.pi)
    # a point of the focal hyperbola, nudged off the membrane x_2 = 0
    x = np.array([math.sqrt(5.0) * math.cosh(v) * math.copysign(1.0, math.cos(th)), 0.0,
                  math.sqrt(3.0) * math.sinh(v)])
    if abs(x[2]) < 1e-3:
        x[2] = 1e-3
    gap = cones.focal_cone_axis_gap(sys, x, k=3, nudge=True)
    return gap, 1e-7


def _staude(rng, n, inject):
    lengths = [(3.0, 2.0, 1.0), (2.0, math.sqrt(2.0), 1.0), (5.0, 3.0, 2.0)][int(rng.integers(3))]
    fc = staude.FocalConics(*lengths)
    P = random_ellipsoid_point(rng, lengths)
    res = staude.staude_length(fc, P)
    return abs(res.assembled - res.closed_form), 1e-6


def _reflection(rng, n, inject):
    fc = staude.FocalConics(3.0, 2.0, 1.0)
    P = random_ellipsoid_point(rng, (3.0, 2.0, 1.0))
    e = staude.minimize_broken_line(fc, fc.G2, P, "ellipse")
    h = staude.minimize_broken_line(fc, fc.F1, P, "hyperbola")
    return max(abs(e.mismatch), abs(h.mismatch)), 1e-6


def _hh(rng, n, inject):
    fc = staude.FocalConics(3.0, 2.0, 1.0)
    v1, v2 = rng.uniform(-2.0, 2.0, size=2)
    same = [staude.focal_hyperbola_point(fc, v1, 1), staude.focal_hyperbola_point(fc, v2, 1)]
    opp = [staude.focal_hyperbola_point(fc, v1, 1), staude.focal_hyperbola_point(fc, v2, -1)]
    us = rng.uniform(0.0, 2.0 * math.pi, size=32)
    d = [staude.hh_difference(fc, *same, staude.focal_ellipse_point(fc, u)) for u in us]
    s = [staude.hh_sum(fc, *opp, staude.focal_ellipse_point(fc, u)) for u in us]
    return max(max(d) - min(d), max(s) - min(s)), 1e-9


def _transversal(rng, n, inject):
    """Along a focal radius whose two hits lie on the same side of P, the
    straight path P -> middle hit -> far hit beats every detour through
    another point of the middle hit's conic."""
    fc = staude.FocalConics(3.0, 2.0, 1.0)
    P = random_ellipsoid_point(rng, (3.0, 2.0, 1.0))
    us = rng.uniform(0.0, 2.0 * math.pi, size=64)
    vs = rng.uniform(-2.0, 2.0, size=64)
    worst = -math.inf
    for r in staude.focal_radii(fc, P):
        if r.tau <= 0.0:
            continue  # P lies between the two hits
        if r.t < r.tau:
            mid, far = r.E, r.H
            detours = [staude.focal_ellipse_point(fc, u) for u in us]
        else:
            mid, far = r.H, r.E
            detours = [staude.focal_hyperbola_point(fc, v, b) for v in vs for b in (1, -1)]
        straight = float(np.linalg.norm(P - mid) + np.linalg.norm(mid - far))
        for Z in detours:
            worst = max(worst, straight - float(np.linalg.norm(P - Z) + np.linalg.norm(Z - far)))
    return max(worst, 0.0), 1e-12


def _apollonian(rng, n, inject):
    a2 = random_sq_axes(rng, n)
    u = random_point(rng, n, 1.0)
    poles = confocal.apollonian_poles(a2)
    while True:
        tau = rng.uniform(-2.0, 2.0) * float(np.max(poles))
        if np.min(np.abs(tau - poles)) > 1e-3 * float(np.max(poles)):
            break
    x = confocal.apollonian_curve_point(a2, u, tau)
    ends = max(float(np.max(np.abs(confocal.apollonian_curve_point(a2, u, 0.0)))),
               float(np.max(np.abs(confocal.apollonian_curve_point(a2, u, 1.0 / a2[0]) - u))))
    return max(confocal.apollonian_residual(a2, u, x) / 1e-9, ends / 1e-12), 1.0


def _chasles(rng, n, inject):
    dim = 2 if n == 2 else 3
    a2 = random_sq_axes(rng, dim, lo=1.0, hi=10.0, min_gap=0.1)
    S = quadrics.random_conjugate_system(quadrics.CentralQuadric(a2), rng).vectors
    O = np.zeros(dim)
    if dim == 2:
        res = staude.rytz_chasles_2d(O, S[:, 0], S[:, 1])
        tol = 1e-9
    else:
        res = staude.chasles_3d(O, S[:, 0], S[:, 1], S[:, 2])
        tol = 1e-7
    w, V = np.linalg.eigh(S @ S.T)
    w, V = w[::-1], V[:, ::-1]
    worst = float(np.max(np.abs(res.lengths - np.sqrt(w)) / np.sqrt(w)))
    worst = max(worst, max(1.0 - abs(float(res.directions[:, k] @ V[:, k])) for k in range(dim)))
    return worst, tol


@dataclass(frozen=True)
class Suite:
    name: str
    module: str
    cases: int
    dims: tuple[int, ...] | None
    run: Callable


# order fixes the suite ids used in seeding; append only
SUITES: list[Suite] = [
    Suite("apollonius", "quadrics", 100, (2, 3, 4, 5, 6), _apollonius),
    Suite("elliptic_roundtrip", "confocal", 200, (2, 3, 4, 5, 6), _elliptic_roundtrip),
    Suite("orthogonality", "confocal", 200, (2, 3, 4, 5, 6), _orthogonality),
    Suite("norm_identity", "confocal", 200, (2, 3, 4, 5, 6), _norm_identity),
    Suite("dual_membership", "confocal", 200, (2, 3, 4, 5, 6), _dual_membership),
    Suite("identity", "cones", 500, None, _identity),
    Suite("common_edges", "cones", 50, (3, 4, 5), _common_edges),
    Suite("intercept", "cones", 50, (3,), _intercept),
    Suite("tangent_cone", "cones", 50, (3,), _tangent_cone),
    Suite("right_cone", "cones", 20, (3,), _right_cone),
    Suite("staude", "staude", 20, (3,), _staude),
    Suite("reflection", "staude", 20, (3,), _reflection),
    Suite("hh", "staude", 20, (3,), _hh),
    Suite("transversal", "staude", 20, (3,), _transversal),
    Suite("apollonian", "confocal", 100, (2, 3, 4, 5, 6), _apollonian),
    Suite("chasles", "staude", 50, (2, 3), _chasles),
]
SUITE_IDS = {s.name: i for i, s in enumerate(SUITES)}


def case_rng(seed: int, suite: str, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, SUITE_IDS[suite], index])


def _case_dims(suite: Suite, n: int | None) -> list[int | None]:
    """Dimension used by each case: cycles through the suite's dimensions,
    or is pinned to ``n`` when that is one of them."""
    if suite.dims is None:
        return [n] * suite.cases
    if n is not None:
        if n not in suite.dims:
            return []
        return [n] * suite.cases
    return [suite.dims[i % len(suite.dims)] for i in range(suite.cases)]


def _run_case(args) -> tuple[float, float, str | None]:
    name, seed, index, n, inject = args
    suite = SUITES[SUITE_IDS[name]]
    try:
        r, tol = suite.run(case_rng(seed, name, index), n, inject)
        return float(r), float(tol), None
    except Exception as exc:  # a raising case is a failing case
        return math.inf, 0.0, f"{type(exc).__name__}: {exc}"


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_suites(seed: int = 0, only: list[str] | None = None, n: int | None = None,
               inject_failure: bool = False, workers: int | None = None) -> dict:
    names = [s.name for s in SUITES] if not only else list(only)
    unknown = [x for x in names if x not in SUITE_IDS]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    jobs, owners = [], []
    for name in names:
        suite = SUITES[SUITE_IDS[name]]
        for i, d in enumerate(_case_dims(suite, n)):
            jobs.append((name, seed, i, d, inject_failure and name == "apollonius"))
            owners.append(name)
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_case, jobs, chunksize=16))
    else:
        results = [_run_case(j) for j in jobs]

    per = []
    for name in names:
        rs = [res for own, res in zip(owners, results) if own == name]
        fails = [i for i, (r, tol, _) in enumerate(rs) if not r <= tol]
        errors = sorted({e for _, _, e in rs if e})
        entry = {
            "suite": name,
            "module": SUITES[SUITE_IDS[name]].module,
            "cases": len(rs),
            "failures": len(fails),
            "worst_residual": max((r for r, _, _ in rs), default=0.0),
        }
        if errors:
            entry["errors"] = errors
        per.append(entry)
    return {
        "suite": names[0] if len(names) == 1 else "all",
        "seed": seed,
        "cases": sum(p["cases"] for p in per),
        "failures": sum(p["failures"] for p in per),
        "worst_residual": max((p["worst_residual"] for p in per), default=0.0),
        "suites": per,
    }
