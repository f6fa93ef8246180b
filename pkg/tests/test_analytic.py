"""Closed-form solutions and their energies."""

import numpy as np
import pytest

from cracktip.analytic import (
    C0_DEFAULT,
    CracktipFunction,
    EnergyBreakdown,
    LineJumpFunction,
    closed_form_energy,
)
from cracktip.geometry import CrackGeometry, Domain, PolarPoint


class TestCracktipFunction:
    def test_normalization_constant(self):
        assert C0_DEFAULT == pytest.approx(np.sqrt(2 / np.pi), rel=1e-15)

    def test_jump_size_on_cut(self):
        u = CracktipFunction()
        r = 0.3
        above = u.eval(PolarPoint(r, np.pi, side="above"))
        below = u.eval(PolarPoint(r, -np.pi, side="below"))
        assert above - below == pytest.approx(2 * C0_DEFAULT * np.sqrt(r), rel=1e-14)

    def test_gradient_finite_difference(self):
        # oracle: central differences at generic points, both with and
        # without the axial slope
        for delta in (0.0, 0.7):
            u = CracktipFunction(delta=delta)
            rng = np.random.default_rng(5)
            for _ in range(20):
                p = rng.uniform(-1, 1, size=3 if delta else 2)
                if np.hypot(p[0], p[1]) < 0.2 or abs(p[1]) < 0.05:
                    continue
                g = u.grad(p)
                step = 1e-6
                for k in range(p.size):
                    e = np.zeros(p.size)
                    e[k] = step
                    fd = (u.eval(p + e) - u.eval(p - e)) / (2 * step)
                    assert g[k] == pytest.approx(fd, rel=2e-6, abs=2e-8)

    def test_gradient_singularity_raises(self):
        with pytest.raises(ValueError, match="r = 0"):
            CracktipFunction().grad(np.array([0.0, 0.0]))

    def test_grad_sq_profile(self):
        u = CracktipFunction(delta=0.5)
        r = np.array([0.1, 0.7, 2.3])
        np.testing.assert_allclose(
            u.grad_sq(r), C0_DEFAULT**2 / (4 * r) + 0.25, rtol=1e-14
        )


class TestClosedFormEnergies:
    def test_disk_energy_exact(self):
        u = CracktipFunction()
        eb = closed_form_energy(u, Domain("disk", 1.0))
        assert eb.dirichlet == pytest.approx(1.0, rel=1e-14)
        assert eb.surface == 1.0
        assert eb.total == pytest.approx(2.0, rel=1e-14)

    def test_disk_energy_scales_linearly(self):
        u = CracktipFunction()
        eb = closed_form_energy(u, Domain("disk", 4.0))
        assert eb.total == pytest.approx(8.0, rel=1e-14)

    def test_cylinder_energy(self):
        for delta in (0.0, 0.25, 0.5, 1.0):
            u = CracktipFunction(delta=delta)
            D = Domain("cylinder", 1.0, half_height=1.0)
            eb = closed_form_energy(u, D)
            assert eb.total == pytest.approx(4.0 + 2 * np.pi * delta**2, rel=1e-14)

    def test_ball_dirichlet_quadrature_oracle(self):
        # oracle: cylindrical-shell quadrature of (c0^2/(4 rho) + delta^2)
        # over the ball, rho = distance to the z-axis
        delta, R = 0.6, 1.3
        u = CracktipFunction(delta=delta)
        eb = closed_form_energy(u, Domain("ball", R))
        rho = np.linspace(0, R, 20001)[1:]  # midpoint-free; integrand*rho smooth
        height = 2 * np.sqrt(np.maximum(R**2 - rho**2, 0))
        integrand = (C0_DEFAULT**2 / (4 * rho) + delta**2) * 2 * np.pi * rho * height
        oracle = np.trapezoid(integrand, rho)
        assert eb.dirichlet == pytest.approx(oracle, rel=1e-4)

    def test_ball_closed_value(self):
        delta, R = 0.5, 2.0
        u = CracktipFunction(delta=delta)
        eb = closed_form_energy(u, Domain("ball", R))
        expect = (2 / np.pi / 4) * np.pi**2 * R**2 + delta**2 * (4 / 3) * np.pi * R**3
        assert eb.dirichlet == pytest.approx(expect, rel=1e-14)
        assert eb.surface == pytest.approx(0.5 * np.pi * R**2, rel=1e-14)

    def test_provenance_tagged(self):
        u = CracktipFunction()
        eb = closed_form_energy(u, Domain("disk", 1.0))
        assert eb.provenance == "closed-form"


class TestLineJump:
    def test_constant_branches(self):
        u = LineJumpFunction(2.0, -1.0)
        assert u.eval(np.array([0.3, 0.4])) == 2.0
        assert u.eval(np.array([0.3, -0.4])) == -1.0
        np.testing.assert_array_equal(u.grad(np.array([0.3, 0.4])), [0.0, 0.0])


class TestEnergyBreakdown:
    def test_total_is_sum(self):
        eb = EnergyBreakdown(1.25, 0.75, "closed-form")
        assert eb.total == 2.0
