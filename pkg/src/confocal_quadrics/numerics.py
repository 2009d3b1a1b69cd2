"""Small numerical kernel shared by the geometry modules.

Everything here works on plain floats and small dense numpy arrays:
bracketed scalar root finding, cyclic Jacobi eigendecomposition, one
dimensional null spaces, elementary symmetric polynomials and a grid plus
golden-section minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NoSignChange, NonConvergence, RankDeficient

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

JACOBI_MAX_SWEEPS = 64
NULL_SPACE_RTOL = 1e-9


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    tol: float = 0.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty bracket [{self.lo}, {self.hi}]")
        if self.tol < 0:
            raise ValueError("bracket tolerance must be non-negative")


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def bracketed_root(f: Callable[[float], float], bracket: Bracket,
                   max_iter: int = 2400) -> float:
    """Root of ``f`` inside ``bracket``.

    Alternates a false-position step with a bisection step, so the bracket
    at least halves every second iteration. Iteration stops when the
    bracket is narrower than ``bracket.tol`` or cannot be split any more in
    floating point; with ``tol=0`` the result is accurate to the last ulp.
    Of the two final bracket ends, the one with the smaller residual is
    returned.
    """
    lo, hi = float(bracket.lo), float(bracket.hi)
    flo, fhi = f(lo), f(hi)
    if flo == 0.0 or fhi == 0.0 or _sign(flo) == _sign(fhi):
        raise NoSignChange(f"f({lo})={flo!r} and f({hi})={fhi!r} do not bracket a root")
    use_secant = True
    for _ in range(max_iter):
        if hi - lo <= bracket.tol:
            break
        mid = lo + 0.5 * (hi - lo)
        x = mid
        if use_secant:
            cand = hi - fhi * (hi - lo) / (fhi - flo)
            if lo < cand < hi:
                x = cand
        use_secant = not use_secant
        if not lo < x < hi:
            break
        fx = f(x)
        if fx == 0.0:
            return x
        if _sign(fx) == _sign(flo):
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
    return lo if abs(flo) <= abs(fhi) else hi


def jacobi_eigen(S: np.ndarray, tol: float = 1e-15,
                 max_sweeps: int = JACOBI_MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvector columns of a
    symmetric matrix, by cyclic Jacobi rotations."""
    A = np.array(S, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * scale):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    fro = float(np.linalg.norm(A))
    if n < 2 or fro == 0.0:
        return _sorted_eigen(np.diag(A).copy(), V)

    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(A, 1) ** 2)))
        if off <= tol * fro:
            return _sorted_eigen(np.diag(A).copy(), V)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with the rotation acting on rows/cols p, q
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    off = math.sqrt(float(np.sum(np.triu(A, 1) ** 2)))
    if off <= 1e-13 * fro:
        return _sorted_eigen(np.diag(A).copy(), V)
    raise NonConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def _sorted_eigen(w: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def null_space_1d(M: np.ndarray, rtol: float = NULL_SPACE_RTOL) -> np.ndarray:
    """Unit vector orthogonal to every column of the ``n x (n-1)`` matrix M.

    Columns are normalized before the SVD so that wildly different column
    scales (the ``1/alpha^2`` entries of the cone system) do not swamp the
    rank test. The sign is fixed so that the first non-negligible component
    is positive.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    n, m = M.shape
    if m != n - 1:
        raise ValueError(f"expected an n x (n-1) matrix, got {M.shape}")
    norms = np.linalg.norm(M, axis=0)
    if np.any(norms == 0.0):
        raise RankDeficient("zero column")
    Mn = M / norms
    U, s, _ = np.linalg.svd(Mn, full_matrices=True)
    if s[-1] < rtol * max(1.0, s[0]):
        raise RankDeficient(f"smallest singular value {s[-1]:.3e} below threshold")
    v = U[:, -1]
    v = v / np.linalg.norm(v)
    for comp in v:
        if abs(comp) > 1e-14:
            if comp < 0:
                v = -v
            break
    return v


def elementary_symmetric_all(values: Sequence[float]) -> np.ndarray:
    """All of e_0..e_n via e_k(m) = e_k(m-1) + x_m e_{k-1}(m-1)."""
    xs = [float(x) for x in values]
    e = np.zeros(len(xs) + 1)
    e[0] = 1.0
    for m, x in enumerate(xs, start=1):
        e[1:m + 1] = e[1:m + 1] + x * e[0:m]
    return e


def elementary_symmetric(values: Sequence[float], k: int) -> float:
    n = len(values)
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    return float(elementary_symmetric_all(values)[k])


def golden_section(f: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def minimize_1d(f: Callable[[float], float], lo: float, hi: float, *,
                periodic: bool = False, samples: int = 1024,
                tol: float = 1e-12) -> tuple[float, float]:
    """Global-ish minimum of a continuous scalar function on [lo, hi].

    A uniform grid of ``samples`` points locates the best cell, then golden
    section refines inside the two cells adjacent to the best grid point.
    For ``periodic`` the domain is [lo, hi) and the refinement may wrap.
    """
    if not lo < hi:
        raise ValueError("empty domain")
    if periodic:
        grid = lo + (hi - lo) * np.arange(samples) / samples
    else:
        grid = np.linspace(lo, hi, samples)
    h = (hi - lo) / (samples if periodic else samples - 1)
    vals = np.array([f(float(x)) for x in grid])
    i = int(np.argmin(vals))
    x0 = float(grid[i])
    a, b = x0 - h, x0 + h
    if not periodic:
        a, b = max(a, lo), min(b, hi)
    x, fx = golden_section(f, a, b, tol=tol)
    if vals[i] < fx:
        x, fx = x0, float(vals[i])
    if periodic:
        period = hi - lo
        x = lo + (x - lo) % period
        if hi - x < tol:
            x = lo
    return float(x), float(fx)
