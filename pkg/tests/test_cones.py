import itertools
import math

import numpy as np
import pytest

from confocal_quadrics.cones import (Cone, Transversal, common_edge_sq_cosines, common_edges,
                                     cone_eval, cone_residual, direction_residual, edge_matrix,
                                     focal_cone, focal_cone_axis_gap, focal_edges, identity_sum,
                                     intercept_length, right_cone_locus_check,
                                     sq_cosines_from_null_space, tangent_cone_canonical,
                                     tangent_cone_form)
from confocal_quadrics.confocal import ConfocalSystem, elliptic_coordinates, focal_quadric
from confocal_quadrics.errors import (CoincidentParameters, DimensionMismatch, NotConfocal,
                                      NotExterior, ParallelEdge)
from confocal_quadrics.numerics import jacobi_eigen
from confocal_quadrics.quadrics import CentralQuadric, sample_quadric_points

SPACE = ConfocalSystem([9.0, 4.0, 1.0])
X_SPACE = np.array([1.0, 1.0, 0.5])


class TestConeEval:
    def test_planar_right_cone(self):
        assert cone_eval(Cone.canonical([1, -1]), [1, 1]) == 0.0

    def test_spatial(self):
        assert cone_eval(Cone.canonical([1, 1, -1]), [0, 1, 1]) == 0.0

    def test_translated(self):
        assert cone_eval(Cone.canonical([1, -1], apex=[1, 0]), [2, 1]) == 0.0

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            cone_eval(Cone.canonical([1, -1]), [1, 1, 1])

    def test_point_cone_flag(self):
        assert Cone.canonical([1, 2]).is_point_cone
        assert not Cone.canonical([1, -2]).is_point_cone


class TestTangentConeForm:
    def test_unit_circle(self):
        S = tangent_cone_form(CentralQuadric([1.0, 1.0]), [2.0, 0.0])
        for y in (math.sqrt(3) / 2, -math.sqrt(3) / 2):
            assert S.evaluate([0.5, y]) == pytest.approx(0.0, abs=1e-14)

    def test_vanishes_at_apex(self):
        S = tangent_cone_form(CentralQuadric([9.0, 4.0, 1.0]), [5.0, 5.0, 5.0])
        assert S.evaluate([5.0, 5.0, 5.0]) == pytest.approx(0.0, abs=1e-12)

    def test_polar_chord(self):
        # polar line of (4, 0) w.r.t. x^2/4 + y^2 = 1 is x = 1
        S = tangent_cone_form(CentralQuadric([4.0, 1.0]), [4.0, 0.0])
        for y in (math.sqrt(3) / 2, -math.sqrt(3) / 2):
            assert abs(S.evaluate([1.0, y])) < 1e-12

    def test_interior_rejected(self):
        with pytest.raises(NotExterior):
            tangent_cone_form(CentralQuadric([9.0, 4.0, 1.0]), [0.1, 0.1, 0.1])


def _hessian_in_frame(sys, x, **kw):
    form = tangent_cone_form(CentralQuadric(sys.base_sq_axes), x)
    C = tangent_cone_canonical(sys, x, **kw)
    return form, C, C.frame.T @ form.quadratic @ C.frame


class TestTangentConeCanonical:
    def test_point_555(self):
        form, C, H = _hessian_in_frame(SPACE, [5.0, 5.0, 5.0])
        lam = elliptic_coordinates(SPACE, [5.0, 5.0, 5.0]).lambdas
        assert np.allclose(C.signed_sq_axes, -lam)
        assert np.max(np.abs(H - np.diag(np.diag(H)))) <= 1e-8 * np.linalg.norm(form.quadratic)
        r = np.diag(H) * -lam
        assert np.allclose(r / r[0], 1.0, atol=1e-7)
        # Jacobi oracle: eigenvectors of M coincide with the confocal normals
        w, V = jacobi_eigen(form.quadratic)
        overlap = np.abs(V.T @ C.frame)
        assert np.allclose(np.sort(overlap.max(axis=0)), 1.0, atol=1e-8)

    def test_on_major_axis_nudged(self):
        sys = ConfocalSystem([4.0, 1.0])
        _, C, H = _hessian_in_frame(sys, [4.0, 0.0], nudge=True)
        assert np.allclose(np.abs(C.frame), np.eye(2), atol=1e-6)
        assert abs(H[0, 1]) <= 1e-8 * np.linalg.norm(H)

    def test_sign_pattern_exterior(self):
        # lambda^1 < 0 < lambda^2 < lambda^3 outside the ellipsoid, so -lambda is (+, -, -)
        C = tangent_cone_canonical(SPACE, [20.0, 0.3, 0.2])
        assert tuple(np.sign(C.signed_sq_axes)) == (1, -1, -1)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_exterior(self, seed):
        rng = np.random.default_rng(seed)
        while True:
            x = rng.normal(size=3) * 6
            if np.sum(x * x / SPACE.base_sq_axes) > 1.1:
                break
        form, C, H = _hessian_in_frame(SPACE, x)
        assert np.max(np.abs(H - np.diag(np.diag(H)))) <= 1e-8 * np.linalg.norm(H)
        r = np.diag(H) * -C.signed_sq_axes
        assert np.allclose(r / r[0], 1.0, atol=1e-7)


class TestFocalCones:
    def test_rows_of_table(self):
        C = focal_cone(SPACE, X_SPACE, 3)
        lam = elliptic_coordinates(SPACE, X_SPACE).lambdas
        assert np.allclose(C.signed_sq_axes, 1.0 - lam)

    @pytest.mark.parametrize("k", [2, 3])
    def test_membership(self, k):
        C = focal_cone(SPACE, X_SPACE, k)
        Fq = focal_quadric(SPACE, k)
        pts = sample_quadric_points(Fq.quadric, np.random.default_rng(k), 16)
        for y in pts:
            assert abs(cone_residual(C, Fq.embed(y)[0])) < 1e-8

    def test_right_cone_on_hyperbola(self):
        x = [math.sqrt(5) * math.cosh(0.3), 0.0, -math.sqrt(3) * math.sinh(0.3)]
        assert right_cone_locus_check(SPACE, x, nudge=True)

    def test_generic_not_right(self):
        assert not right_cone_locus_check(SPACE, X_SPACE)
        assert focal_cone_axis_gap(SPACE, X_SPACE) > 1e-3

    def test_right_cone_symmetric_case(self):
        x = [math.sqrt(8) * math.cos(0.7), math.sqrt(3) * math.sin(0.7), 0.0]
        assert right_cone_locus_check(SPACE, x, k=2, nudge=True)
        # the axes over different C_k differ by a common shift, so the gap is k-independent
        assert right_cone_locus_check(SPACE, x, k=3, nudge=True)

    def test_right_cone_needs_3d(self):
        with pytest.raises(DimensionMismatch):
            right_cone_locus_check(ConfocalSystem([4.0, 1.0]), [1.0, 1.0])


class TestCommonEdges:
    def test_single_planar_cone(self):
        sq = common_edge_sq_cosines([[1.0, -1.0]])
        assert np.allclose(sq, [0.5, 0.5])
        edges = common_edges([Cone.canonical([1.0, -1.0])])
        assert len(edges) == 2
        for e in edges:
            assert abs(abs(e.direction[0]) - abs(e.direction[1])) < 1e-15

    def test_focal_edges_space(self):
        F, edges = focal_edges(SPACE, X_SPACE)
        assert len(edges) == 4
        alpha = F.table.entries[1:]
        assert np.allclose(edges[0].sq_cosines, sq_cosines_from_null_space(alpha), atol=1e-8)
        for e in edges:
            assert e.sq_cosines.sum() == pytest.approx(1.0, abs=1e-10)
            assert np.allclose(e.local ** 2, e.sq_cosines)
            for row in alpha:
                assert abs(direction_residual(row, e.local)) < 1e-8
        profiles = {e.sign_profile for e in edges}
        assert len(profiles) == 4

    def test_coincident(self):
        with pytest.raises(CoincidentParameters):
            common_edge_sq_cosines([[2.0, 2.0, -1.0], [1.0, 1.0, -2.0]])

    def test_not_confocal(self):
        with pytest.raises(NotConfocal):
            common_edge_sq_cosines([[3.0, 1.0, -1.0], [2.0, 1.0, -2.0]])

    def test_edge_matrix(self):
        B = edge_matrix([[2.0, -1.0, 4.0], [1.0, -2.0, 3.0]])
        assert B.shape == (3, 2) and B[2, 1] == pytest.approx(1 / 3)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_oracle_agreement(self, n):
        rng = np.random.default_rng(n)
        for _ in range(30):
            a2 = np.sort(rng.uniform(0.5, 10, size=n))[::-1] + 0.3 * np.arange(n)[::-1]
            sys = ConfocalSystem(a2)
            F, edges = focal_edges(sys, rng.normal(size=n) * 3)
            alpha = F.table.entries[1:]
            assert np.allclose(common_edge_sq_cosines(alpha), sq_cosines_from_null_space(alpha), atol=1e-8)
            assert len(edges) == 2 ** (n - 1)


class TestIdentity:
    def test_hand(self):
        assert identity_sum([2.0, -1.0], []) == pytest.approx(1.0)

    @pytest.mark.parametrize("n", [3, 6])
    def test_random(self, n):
        rng = np.random.default_rng(n)
        for _ in range(50):
            a1 = rng.uniform(-10, 10, size=n)
            lam = rng.uniform(-5, 5, size=n - 2)
            assert identity_sum(a1, lam) == pytest.approx(1.0, abs=1e-9)

    def test_coincident(self):
        with pytest.raises(CoincidentParameters):
            identity_sum([1.0, 1.0, 3.0], [0.5])


class TestIntercept:
    def test_space(self):
        F, edges = focal_edges(SPACE, X_SPACE)
        want = math.sqrt(9.0 - F.table.lambdas[0])
        for e in edges:
            assert intercept_length(SPACE, X_SPACE, e, frame=F) == pytest.approx(want, rel=1e-8)
            # the same edge against every other confocal gives that confocal's major semi-axis
            for j in (2, 3):
                got = intercept_length(SPACE, X_SPACE, e, frame=F, which=j)
                assert got == pytest.approx(math.sqrt(9.0 - F.table.lambdas[j - 1]), rel=1e-8)

    def test_planar_focal_radii(self):
        # the parallel through the centre to the tangent cuts the focal radii at length a
        sys = ConfocalSystem([4.0, 1.0])
        x = np.array([2 * math.cos(0.8), math.sin(0.8)])
        F, edges = focal_edges(sys, x)
        foci = [np.array([math.sqrt(3), 0.0]), np.array([-math.sqrt(3), 0.0])]
        for e in edges:
            assert any(abs((f - x)[0] * e.direction[1] - (f - x)[1] * e.direction[0]) < 1e-10 for f in foci)
            assert intercept_length(sys, x, e, frame=F) == pytest.approx(2.0, rel=1e-10)

    def test_parallel_edge(self):
        F, edges = focal_edges(SPACE, X_SPACE)
        e = edges[0]
        flat = Transversal(e.sign_profile, e.local, F.normals[:, 1], e.sq_cosines)
        with pytest.raises(ParallelEdge):
            intercept_length(SPACE, X_SPACE, flat, frame=F)


def test_focal_intersection_cone():
    """Points of C_k and C_l lie on the cone with squared axes (a_i^2-a_k^2)(a_i^2-a_l^2)."""
    a2 = np.array([16.0, 9.0, 4.0, 1.0])
    for k, l in itertools.combinations(range(1, 4), 2):
        free = [i for i in range(4) if i not in (k, l)]
        A = np.array([[1 / (a2[i] - a2[k]) for i in free], [1 / (a2[i] - a2[l]) for i in free]])
        sq = np.linalg.solve(A, [1.0, 1.0])
        if np.any(sq < 0):
            continue
        axes = np.array([(a2[i] - a2[k]) * (a2[i] - a2[l]) for i in free])
        assert abs(np.sum(sq / axes)) < 1e-12
