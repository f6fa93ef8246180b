"""Weak Euler-Lagrange residuals: test fields, quadratures, controls."""

import numpy as np
import pytest

from cracktip.analytic import CracktipFunction, LineJumpFunction
from cracktip.geometry import CrackGeometry
from cracktip.quadrature import richardson_limit
from cracktip.stationarity import (
    TestVectorField,
    boundary_term_decomposition,
    bulk_integral,
    el_residual,
    excised_ball_integral,
    scaled_control,
    surface_divergence_integral,
    udelta_cross_terms,
)

RESIDUAL_TOL = 1e-3


class TestTestVectorField:
    def test_center_value_and_compact_support(self):
        eta = TestVectorField([0.7, -0.3], [[0.2, -0.1], [0.05, 0.3]],
                              center=[0.1, -0.05], support_radius=0.6)
        assert eta(np.array([0.1, -0.05])) == pytest.approx([0.7, -0.3])
        assert eta.is_compactly_supported()
        # exactly zero on and outside the support cube
        assert np.all(eta(np.array([[0.71, 0.0], [0.1, 0.56], [2.0, 2.0]])) == 0.0)

    def test_jacobian_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        eta = TestVectorField([0.9, -0.4, 0.3], rng.uniform(-0.5, 0.5, (3, 3)),
                              center=[0.02, -0.01, 0.03])
        pts = rng.uniform(-0.5, 0.5, size=(20, 3))
        J = eta.jacobian(pts)
        h = 1e-6
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            fd = (eta(pts + e) - eta(pts - e)) / (2 * h)
            assert np.allclose(J[:, :, j], fd, rtol=2e-6, atol=1e-9)

    def test_divergence_is_jacobian_trace(self):
        eta = TestVectorField([1.0, 0.5], [[0.3, 0.0], [0.1, -0.2]])
        pts = np.array([[0.2, 0.1], [-0.3, 0.4], [0.0, 0.0]])
        J = eta.jacobian(pts)
        assert np.allclose(eta.divergence(pts), np.trace(J, axis1=1, axis2=2))

    def test_unit_at_origin(self):
        eta = TestVectorField.unit_at_origin(3, direction=2)
        assert eta.value_at_origin() == pytest.approx([0.0, 0.0, 1.0])

    def test_random_family_deterministic(self):
        fam1 = TestVectorField.random_family(4, 2, seed=11)
        fam2 = TestVectorField.random_family(4, 2, seed=11)
        for a, b in zip(fam1, fam2):
            assert np.array_equal(a.amplitudes, b.amplitudes)
            assert np.array_equal(a.gammas, b.gammas)
            assert np.array_equal(a.center, b.center)

    def test_shifted_moves_support(self):
        eta = TestVectorField.unit_at_origin(2)
        moved = eta.shifted([0.3, -0.2])
        assert moved(np.array([0.3, -0.2])) == pytest.approx([1.0, 0.0])
        lo, hi = moved.support_box()
        assert lo == pytest.approx([0.3 - 0.85, -0.2 - 0.85])
        assert hi == pytest.approx([0.3 + 0.85, -0.2 + 0.85])


class TestSurfaceDivergence:
    def test_halfline_reduces_to_tip_value(self):
        eta = TestVectorField([0.8, -0.5], [[0.2, 0.1], [-0.3, 0.4]],
                              center=[0.05, -0.02])
        closed, quad = surface_divergence_integral(
            CrackGeometry.halfline(), eta, return_both=True)
        assert closed == pytest.approx(eta.value_at_origin()[0], rel=1e-12)
        assert quad == pytest.approx(closed, abs=1e-9)

    def test_full_line_integral_vanishes(self):
        eta = TestVectorField([0.8, -0.5], [[0.2, 0.1], [-0.3, 0.4]])
        closed = surface_divergence_integral(CrackGeometry.line(), eta)
        assert closed == 0.0

    def test_halfplane_reduces_to_front_integral(self):
        eta = TestVectorField([0.9, -0.4, 0.3], np.full((3, 3), 0.12),
                              center=[0.05, 0.0, -0.1])
        closed, quad = surface_divergence_integral(
            CrackGeometry.halfplane(), eta, return_both=True)
        assert quad == pytest.approx(closed, abs=1e-8)
        # z-translating the field slides it along the front: same integral
        shifted = surface_divergence_integral(
            CrackGeometry.halfplane(), eta.shifted([0.0, 0.0, 0.27]))
        assert shifted == pytest.approx(closed, abs=1e-12)

    def test_rejects_mesh_cracks(self):
        from cracktip.geometry import halfplane_mesh
        eta = TestVectorField.unit_at_origin(3)
        with pytest.raises(ValueError, match="exact crack sets"):
            surface_divergence_integral(halfplane_mesh(), eta)


class TestBulkIntegral:
    def test_linear_in_test_field(self):
        # same gammas/center: the field depends linearly on the amplitudes
        u = CracktipFunction()
        gam = [[0.1, 0.3], [-0.2, 0.05]]
        a = TestVectorField([0.6, -0.2], gam)
        b = TestVectorField([-0.3, 0.8], gam)
        combo = TestVectorField([2.0 * 0.6 - 0.5 * 0.3, 2.0 * -0.2 + 0.5 * 0.8], gam)
        va = bulk_integral(u, a, 0.05)
        vb = bulk_integral(u, b, 0.05)
        vc = bulk_integral(u, combo, 0.05)
        assert vc == pytest.approx(2.0 * va + 0.5 * vb, rel=1e-11)

    def test_error_estimate_triggers(self):
        u = CracktipFunction()
        eta = TestVectorField.unit_at_origin(2)
        with pytest.raises(RuntimeError, match="increase n_panels"):
            bulk_integral(u, eta, 0.05, n_panels=2, n_gauss=4, tol=1e-16)

    def test_excised_ball_decays_quadratically(self):
        u = CracktipFunction()
        eta = TestVectorField.unit_at_origin(2)
        eps = np.array([0.08, 0.04, 0.02])
        vals = np.array([abs(excised_ball_integral(u, eta, e)) for e in eps])
        slopes = np.log2(vals[:-1] / vals[1:])
        assert np.all(np.abs(slopes - 2.0) < 0.05)


class TestBoundaryTerms:
    def test_limits_on_the_excision_circle(self):
        # A(eps) -> 0 and B(eps) -> -eta_1(0), even expansion in eps
        eta = TestVectorField.unit_at_origin(2)
        eps = np.array([0.08, 0.04, 0.02, 0.01, 0.005])
        A, B = zip(*(boundary_term_decomposition(e, eta) for e in eps))
        limA, _ = richardson_limit(eps, A, (2.0, 4.0))
        limB, _ = richardson_limit(eps, B, (2.0, 4.0, 6.0))
        assert abs(limA) < 1e-10
        assert abs(limB - (-eta.value_at_origin()[0])) < 1e-10


class TestELResidual:
    def test_cracktip_couple_is_stationary(self):
        rep = el_residual(CracktipFunction(), CrackGeometry.halfline(),
                          TestVectorField.unit_at_origin(2))
        assert rep.normalized < RESIDUAL_TOL
        assert rep.total == rep.bulk_term + rep.surface_term

    def test_random_family_2d(self):
        u = CracktipFunction()
        K = CrackGeometry.halfline()
        for eta in TestVectorField.random_family(5, 2, seed=3):
            rep = el_residual(u, K, eta)
            assert rep.normalized < RESIDUAL_TOL

    @pytest.mark.parametrize("delta", [0.0, 0.5, 1.0])
    def test_crack_front_couple_is_stationary(self, delta):
        rep = el_residual(CracktipFunction(delta=delta), CrackGeometry.halfplane(),
                          TestVectorField.unit_at_origin(3))
        assert rep.normalized < RESIDUAL_TOL

    def test_pure_jump_couple(self):
        # gradient-free competitor: bulk term is identically zero and the
        # full-line surface term vanishes
        rep = el_residual(LineJumpFunction(), CrackGeometry.line(),
                          TestVectorField.unit_at_origin(2))
        assert rep.bulk_term == 0.0
        assert rep.total == 0.0

    def test_scaled_control_fails_loudly(self):
        eta = TestVectorField.unit_at_origin(2)
        good = el_residual(CracktipFunction(), CrackGeometry.halfline(), eta)
        bad = el_residual(scaled_control(2.0), CrackGeometry.halfline(), eta)
        assert bad.normalized > 10 * RESIDUAL_TOL
        assert bad.normalized > 1e3 * good.normalized

    def test_translation_covariance_along_the_front(self):
        # the 3D couple is z-invariant, so sliding the test field along z
        # must not change the residual
        u = CracktipFunction(delta=0.5)
        K = CrackGeometry.halfplane()
        eta = TestVectorField([0.9, -0.4, 0.3], np.full((3, 3), 0.12),
                              center=[0.05, 0.0, -0.1])
        r0 = el_residual(u, K, eta)
        r1 = el_residual(u, K, eta.shifted([0.0, 0.0, 0.27]))
        assert r1.total == pytest.approx(r0.total, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="test field"):
            el_residual(CracktipFunction(), CrackGeometry.halfline(),
                        TestVectorField.unit_at_origin(3))


class TestCrossTerms:
    def test_all_three_vanish(self):
        eta = TestVectorField([0.9, -0.4, 0.3], np.full((3, 3), 0.12),
                              center=[0.05, 0.0, -0.1])
        T1, T2, T3 = udelta_cross_terms(0.7, eta)
        scale = eta.c1_norm()
        assert abs(T1) / scale < 1e-6
        assert abs(T2) / scale < 1e-6
        assert abs(T3) / scale < 1e-6

    def test_needs_3d_field(self):
        with pytest.raises(ValueError, match="3D"):
            udelta_cross_terms(0.5, TestVectorField.unit_at_origin(2))
