import math

import numpy as np
import pytest

from confocal_quadrics.confocal import (AxesTable, ConfocalSystem, apollonian_asymptote_anchor,
                                        apollonian_curve_point, apollonian_poles,
                                        apollonian_residual, axes_table,
                                        central_section_sq_axes, confocal_quadric, dual_system,
                                        elliptic_coordinates, focal_quadric, frame_at_point,
                                        nudge_point, norm_identity_check, point_from_axes_table,
                                        pole_line, radius_sq_along, root_polynomial,
                                        support_sq_closed_form, tangency_locus_product,
                                        tangency_point, tangency_product_invariant,
                                        tangent_confocal_parameter)
from confocal_quadrics.errors import (DegeneratePoint, IndexOutOfRange, NegativeSquare,
                                      NoRealTangency, OnFocalMembrane, PoleParameter)
from confocal_quadrics.quadrics import CentralQuadric, Hyperplane, evaluate, pole_of_hyperplane

R2 = math.sqrt(2.0)
PLANAR = ConfocalSystem([4.0, 1.0])
X_PLANAR = np.array([R2, R2 / 2])
SPACE = ConfocalSystem([9.0, 4.0, 1.0])
X_SPACE = np.array([1.0, 1.0, 0.5])


def poly_roots_oracle(a2, x):
    """Roots of the expanded polynomial via numpy's companion matrix."""
    n = len(a2)
    total = np.poly1d([0.0])
    for i in range(n):
        total = total + x[i] ** 2 * np.poly1d(np.poly([a2[j] for j in range(n) if j != i])) * (-1) ** (n - 1)
    total = total - np.poly1d(np.poly(a2)) * (-1) ** n
    return np.sort(np.real(total.roots))


class TestSystem:
    @pytest.mark.parametrize("axes", [[1.0], [4.0, 4.0], [1.0, 4.0], [4.0, -1.0]])
    def test_invalid(self, axes):
        with pytest.raises(ValueError):
            ConfocalSystem(axes)

    def test_from_lengths(self):
        assert np.allclose(ConfocalSystem.from_lengths([3, 2, 1]).base_sq_axes, [9, 4, 1])

    @pytest.mark.parametrize("sys,lam,want", [(PLANAR, 0.0, [4, 1]), (PLANAR, 2.5, [1.5, -1.5]),
                                              (SPACE, -1.0, [10, 5, 2])])
    def test_confocal_quadric(self, sys, lam, want):
        assert np.allclose(confocal_quadric(sys, lam).signed_sq_axes, want)

    def test_membrane(self):
        with pytest.raises(OnFocalMembrane):
            confocal_quadric(SPACE, 4.0)


class TestFocalQuadric:
    def test_focal_ellipse(self):
        F = focal_quadric(SPACE, 3)
        assert np.allclose(F.quadric.signed_sq_axes, [8, 3])  # a^2 - c^2, b^2 - c^2
        assert F.free_indices == [0, 1]

    def test_focal_hyperbola(self):
        F = focal_quadric(SPACE, 2)
        assert np.allclose(F.quadric.signed_sq_axes, [5, -3])
        pt = F.embed([math.sqrt(5) * math.cosh(0.7), math.sqrt(3) * math.sinh(0.7)])[0]
        assert pt[1] == 0.0
        assert F.evaluate(pt) == pytest.approx(0.0, abs=1e-12)

    def test_planar_foci(self):
        assert np.allclose(focal_quadric(PLANAR, 2).quadric.signed_sq_axes, [3])

    @pytest.mark.parametrize("k", [0, 1, 4])
    def test_index(self, k):
        with pytest.raises(IndexOutOfRange):
            focal_quadric(SPACE, k)


class TestEllipticCoordinates:
    def test_planar(self):
        ec = elliptic_coordinates(PLANAR, X_PLANAR)
        assert np.allclose(ec.lambdas, [0.0, 2.5], atol=1e-14)

    def test_on_base_ellipse(self):
        for t in np.linspace(0.1, 1.4, 5):
            ec = elliptic_coordinates(PLANAR, [2 * math.cos(t), math.sin(t)])
            assert ec.lambdas[0] == pytest.approx(0.0, abs=1e-14)

    def test_space_matches_companion_oracle(self):
        ec = elliptic_coordinates(SPACE, X_SPACE)
        assert np.allclose(ec.lambdas, poly_roots_oracle([9, 4, 1], X_SPACE), atol=1e-12)
        assert ec.lambdas[0] < 1 < ec.lambdas[1] < 4 < ec.lambdas[2] < 9
        for lam in ec.lambdas:
            assert abs(root_polynomial(SPACE, X_SPACE, lam)) < 1e-10
        # frozen values
        assert np.allclose(ec.lambdas, [0.5757, 2.9604, 8.2138], atol=1e-4)

    def test_degenerate(self):
        with pytest.raises(DegeneratePoint):
            elliptic_coordinates(SPACE, [1.0, 0.0, 0.5])

    def test_nudge(self):
        ec = elliptic_coordinates(SPACE, [1.0, 0.0, 0.5], nudge=True)
        assert ec.nudged[1] != 0.0 and ec.nudged[0] == 0.0
        x, delta = nudge_point(SPACE, [1.0, -1e-12, 0.5])
        assert x[1] < 0 and abs(x[1]) == pytest.approx(3e-8)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_interlacing_and_round_trip(self, n):
        rng = np.random.default_rng(n)
        for _ in range(200):
            a2 = np.sort(rng.uniform(0.5, 10, size=n))[::-1]
            if np.min(-np.diff(a2)) < 0.05:
                continue
            sys = ConfocalSystem(a2)
            x = rng.normal(size=n) * 3
            ec = elliptic_coordinates(sys, x)
            lam = ec.lambdas
            assert lam[0] < a2[-1]
            for j in range(1, n):
                assert a2[n - j] < lam[j] < a2[n - j - 1]
            back = point_from_axes_table(axes_table(sys, ec), signs=np.sign(x))
            assert np.max(np.abs(back - x) / np.abs(x)) <= 1e-9


class TestAxesTable:
    def test_planar(self):
        T = axes_table(PLANAR, elliptic_coordinates(PLANAR, X_PLANAR))
        assert np.allclose(T.entries, [[4, 1.5], [1, -1.5]])

    def test_confocality(self):
        T = axes_table(SPACE, elliptic_coordinates(SPACE, X_SPACE))
        for j in range(3):
            assert T.entries[0, j] - T.entries[2, j] == pytest.approx(8.0)

    def test_point_from_table(self):
        T = AxesTable(np.array([[4, 1.5], [1, -1.5]]), np.array([4.0, 1.0]), np.array([0.0, 2.5]))
        assert np.allclose(point_from_axes_table(T), X_PLANAR)
        assert np.allclose(point_from_axes_table(T, signs=[1, -1]), [R2, -R2 / 2])

    def test_negative_square(self):
        T = AxesTable(np.array([[4, -1.5], [1, -4.5]]), np.array([4.0, 1.0]), np.array([0.0, 5.5]))
        with pytest.raises(NegativeSquare):
            point_from_axes_table(T)

    def test_space_round_trip(self):
        T = axes_table(SPACE, elliptic_coordinates(SPACE, X_SPACE))
        assert np.allclose(point_from_axes_table(T), X_SPACE, atol=1e-12)


class TestNormIdentity:
    def test_planar(self):
        assert norm_identity_check(elliptic_coordinates(PLANAR, X_PLANAR)) == pytest.approx((2.5, 2.5))

    def test_space(self):
        assert norm_identity_check(elliptic_coordinates(SPACE, X_SPACE)) == pytest.approx((2.25, 2.25))


class TestFrame:
    def test_planar_supports(self):
        F = frame_at_point(PLANAR, X_PLANAR)
        assert np.allclose(F.support ** 2, [1.6, 0.9])
        n1 = np.array([R2 / 4, R2 / 2])
        n2 = np.array([R2 / 1.5, -R2 / 3])
        assert abs(F.normals[:, 0] @ n1 / np.linalg.norm(n1)) == pytest.approx(1.0)
        assert abs(F.normals[:, 1] @ n2 / np.linalg.norm(n2)) == pytest.approx(1.0)
        assert F.normals[:, 0] @ F.normals[:, 1] == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("seed", range(20))
    def test_random_frames(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        sys = ConfocalSystem(np.sort(rng.uniform(0.5, 10, size=n))[::-1] + np.arange(n)[::-1])
        x = rng.normal(size=n) * 2
        F = frame_at_point(sys, x)
        assert np.max(np.abs(F.normals.T @ F.normals - np.eye(n))) <= 1e-10
        assert np.allclose(F.support ** 2, support_sq_closed_form(F.table), rtol=1e-9)
        sums = (F.support[None, :] ** 2 / F.table.entries).sum(axis=1)
        assert np.allclose(sums, 1.0, atol=1e-9)
        for j in range(n):
            # geometric distance from the centre to the tangent hyperplane at x
            Q = confocal_quadric(sys, F.table.lambdas[j])
            g = x / Q.signed_sq_axes
            assert abs(g @ x) / np.linalg.norm(g) == pytest.approx(F.support[j], rel=1e-9)


class TestCentralSection:
    def test_planar(self):
        sq = central_section_sq_axes(PLANAR, X_PLANAR)
        assert np.allclose(sq, [2.5])
        assert radius_sq_along([4, 1], [-2, 1]) == pytest.approx(2.5)

    def test_space_direct_radii(self):
        x = np.array([2.0, 1.0, math.sqrt(1 - 4 / 9 - 1 / 4)])
        sq = central_section_sq_axes(SPACE, x)
        F = frame_at_point(SPACE, x)
        for j in (1, 2):
            assert radius_sq_along([9, 4, 1], F.normals[:, j]) == pytest.approx(sq[j - 1], rel=1e-9)


class TestDualSystem:
    def test_planar(self):
        F = frame_at_point(PLANAR, X_PLANAR)
        duals = dual_system(F)
        assert np.allclose(duals[0].signed_sq_axes, [4, 1.5])
        assert 1.6 / 4 + 0.9 / 1.5 == pytest.approx(1.0)
        assert 1.6 / 1 + 0.9 / -1.5 == pytest.approx(1.0)
        for D in duals:
            assert D.evaluate(np.zeros(2)) == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(duals[0].local(np.zeros(2)), -F.support)

    def test_rows_confocal(self):
        duals = dual_system(frame_at_point(SPACE, X_SPACE))
        diff = duals[0].signed_sq_axes - duals[2].signed_sq_axes
        assert np.allclose(diff, 8.0)


class TestPolesAndTangency:
    def test_pole_line(self):
        H = Hyperplane([0.5, 0.5])
        base, d = pole_line(PLANAR, H)
        assert np.allclose(base, [2, 0.5]) and np.allclose(d, [0.5, 0.5])
        for lam in (-1.0, 0.3, 2.0, 5.0):
            xi = pole_of_hyperplane(CentralQuadric([4 - lam, 1 - lam]), H) if lam < 1 else H.h * ([4, 1] - np.array(lam))
            assert np.allclose(xi, base - lam * d, atol=1e-10)

    def test_touching_parameter(self):
        H = Hyperplane([0.5, 0.5])
        lam = tangent_confocal_parameter(PLANAR, H)
        assert lam == pytest.approx(0.5)
        assert 0.25 * 3.5 + 0.25 * 0.5 == pytest.approx(1.0)
        x = tangency_point(PLANAR, H)
        assert H.evaluate(x) == pytest.approx(0.0, abs=1e-12)
        assert evaluate(CentralQuadric([3.5, 0.5]), x) == pytest.approx(0.0, abs=1e-12)

    def test_tangent_covector(self):
        x = np.array([2.0, 1.0, math.sqrt(1 - 4 / 9 - 1 / 4)])
        H = Hyperplane(x / np.array([9.0, 4.0, 1.0]))
        assert tangent_confocal_parameter(SPACE, H) == pytest.approx(0.0, abs=1e-14)

    def test_scaling(self):
        h = np.array([0.3, 0.7])
        t = 1.7
        got = tangent_confocal_parameter(PLANAR, Hyperplane(t * h))
        want = (t * t * (h * h) @ [4, 1] - 1) / (t * t * (h @ h))
        assert got == pytest.approx(want)

    def test_product_axis_case(self):
        x, prod = tangency_locus_product(PLANAR, [0.0, 1.0], 0.0)
        assert x[0] == 0.0 and prod == 0.0

    def test_product_constant(self):
        h = [0.5, 0.5]
        p = [tangency_locus_product(PLANAR, h, lam)[1] for lam in (0.0, 0.25)]
        assert p[0] == pytest.approx(p[1], rel=1e-10)
        assert p[0] == pytest.approx(tangency_product_invariant(PLANAR, h), rel=1e-10)

    def test_product_constant_space(self):
        rng = np.random.default_rng(3)
        h = rng.normal(size=3)
        want = tangency_product_invariant(SPACE, h)
        for lam in rng.uniform(-5, 0.9, size=5):
            assert tangency_locus_product(SPACE, h, lam)[1] == pytest.approx(want, rel=1e-9)

    def test_no_real_tangency(self):
        with pytest.raises(NoRealTangency):
            tangency_locus_product(PLANAR, [0.0, 1.0], 2.0)


class TestApollonian:
    def test_centre_and_point(self):
        u = np.array([1.0, 1.0])
        assert np.allclose(apollonian_curve_point([4, 1], u, 0.0), 0.0, atol=1e-12)
        assert np.allclose(apollonian_curve_point([4, 1], u, 0.25), u, atol=1e-12)

    def test_tau_one(self):
        u = np.array([1.0, 1.0])
        x = apollonian_curve_point([4, 1], u, 1.0)
        assert x[0] == pytest.approx(4.0)
        assert x[1] == pytest.approx(-1 / (3 * (3 - 1)) - 1 / 3)
        assert apollonian_residual([4, 1], u, x) < 1e-12

    def test_pole(self):
        with pytest.raises(PoleParameter):
            apollonian_curve_point([4, 1], [1, 1], 1 / 3)
        assert np.allclose(apollonian_poles([9, 4, 1]), [0.2, 0.125])

    def test_anchors(self):
        u = np.array([1.0, 1.0])
        assert np.allclose(apollonian_asymptote_anchor([4, 1], u, 1), [0.0, -1 / 3])
        # y-coordinates (4/3, 0), shifted back by y_2 = 1/3
        assert np.allclose(apollonian_asymptote_anchor([4, 1], u, 2), [4 / 3, -1 / 3])

    def test_approach_asymptote(self):
        a2, u = np.array([9.0, 4.0, 1.0]), np.array([1.0, -0.5, 2.0])
        for i, pole in zip((2, 3), apollonian_poles(a2)):
            anchor = apollonian_asymptote_anchor(a2, u, i)
            x = apollonian_curve_point(a2, u, pole + 1e-9)
            off = np.delete(x - anchor, i - 1)
            assert np.max(np.abs(off)) < 1e-6
            assert abs(x[i - 1]) > 1e5

    @pytest.mark.parametrize("n", [2, 3, 4, 6])
    def test_residual_sweep(self, n):
        rng = np.random.default_rng(n)
        a2 = np.sort(rng.uniform(1, 10, size=n))[::-1] + np.arange(n)[::-1]
        u = rng.normal(size=n)
        for tau in rng.uniform(-1, 1, size=50):
            try:
                x = apollonian_curve_point(a2, u, tau)
            except PoleParameter:
                continue
            assert apollonian_residual(a2, u, x) <= 1e-9

    @pytest.mark.parametrize("s", [0.3, 0.8, 1.7, 3.0])
    def test_brute_force_nearest_point(self, s):
        a2, u = np.array([4.0, 1.0]), np.array([1.3, 0.4])
        ax = np.sqrt(s * a2)
        t = np.linspace(0, 2 * math.pi, 200001)
        pts = np.stack([ax[0] * np.cos(t), ax[1] * np.sin(t)], axis=1)
        i = int(np.argmin(np.linalg.norm(pts - u, axis=1)))
        # local zoom around the best sample
        t2 = np.linspace(t[i] - 1e-4, t[i] + 1e-4, 20001)
        pts2 = np.stack([ax[0] * np.cos(t2), ax[1] * np.sin(t2)], axis=1)
        best = pts2[int(np.argmin(np.linalg.norm(pts2 - u, axis=1)))]
        assert apollonian_residual(a2, u, best) <= 1e-6
