"""Phase-field solver: grids, configs, descent, symmetry, discrete stats."""

import numpy as np
import pytest

from cracktip.atsolver import (
    ATConfig,
    ATState,
    ScalarField,
    at_energy,
    dz_cell_stats,
    insert_state,
    make_grid,
    sdelta_trend,
    solve,
)


class TestGrids:
    def test_no_node_on_the_crack_plane(self):
        for domain in ("disk", "cylinder"):
            g = make_grid(domain, 8)
            ys = g.axes()[1]
            assert np.abs(ys).min() == pytest.approx(g.h / 2)

    def test_staggered_axis_is_symmetric(self):
        g = make_grid("disk", 12)
        ys = g.axes()[1]
        assert np.allclose(ys, -ys[::-1])

    def test_shapes_and_spacing(self):
        g = make_grid("cylinder", 8)
        assert g.shape == (9, 10, 9)
        assert g.h == pytest.approx(0.25)
        g1 = make_grid("interval", 9)   # odd is allowed in 1D
        assert g1.shape == (10,)

    def test_resolution_validation(self):
        with pytest.raises(ValueError, match="even"):
            make_grid("disk", 9)
        with pytest.raises(ValueError, match="even"):
            make_grid("cylinder", 2)
        with pytest.raises(ValueError, match="unknown domain"):
            make_grid("torus", 8)

    def test_active_volume_first_order_in_h(self):
        errs = {}
        for n in (8, 16, 32, 64):
            g = make_grid("cylinder", n)
            errs[n] = abs(g.active_volume() - 2.0 * np.pi)
            assert errs[n] < 10.0 * g.h
        assert errs[64] < errs[32] < errs[16] < errs[8]

    def test_node_masks_partition(self):
        g = make_grid("disk", 8)
        part, interior, dirichlet = g.node_masks()
        assert not np.any(interior & dirichlet)
        assert np.array_equal(part, interior | dirichlet)
        # interior nodes are a strict subset surrounded by active cells
        assert interior.sum() < part.sum()


class TestScalarField:
    def test_shape_check(self):
        g = make_grid("disk", 8)
        with pytest.raises(ValueError, match="grid shape"):
            ScalarField(g, np.zeros((3, 3)))

    def test_copy_is_deep(self):
        g = make_grid("interval", 8)
        f = ScalarField(g, np.arange(9, dtype=float))
        c = f.copy()
        c.values[0] = 99.0
        assert f.values[0] == 0.0


class TestATConfig:
    def test_defaults_are_valid(self):
        cfg = ATConfig()
        assert cfg.h == pytest.approx(2.0 / 32)

    def test_eps_resolution_guard(self):
        with pytest.raises(ValueError, match="under-resolved"):
            ATConfig(n=8, eps=0.1)

    def test_field_validation(self):
        with pytest.raises(ValueError, match="unknown domain"):
            ATConfig(domain="plane")
        with pytest.raises(ValueError, match="phi_init"):
            ATConfig(phi_init="random")
        with pytest.raises(ValueError, match="nonnegative"):
            ATConfig(delta=-0.5)
        with pytest.raises(ValueError, match="alt_tol"):
            ATConfig(alt_tol=0.0)

    def test_file_round_trip(self, tmp_path):
        cfg = ATConfig(domain="disk", n=20, eps=0.2, delta=0.25,
                       seed=7, noise_amp=0.05, phi_init="profile")
        p = tmp_path / "run.cfg"
        cfg.to_file(str(p))
        back = ATConfig.from_file(str(p))
        assert back == cfg

    def test_file_accepts_h_and_comments(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# cylinder run\ndomain = cylinder\nh = 0.125  # -> n = 16\neps = 0.25\n")
        cfg = ATConfig.from_file(str(p))
        assert cfg.n == 16 and cfg.eps == 0.25

    def test_file_rejects_n_and_h_together(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("n = 16\nh = 0.125\n")
        with pytest.raises(ValueError, match="not both"):
            ATConfig.from_file(str(p))

    def test_file_rejects_unknown_keys(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("nn = 16\n")
        with pytest.raises(ValueError, match="unknown config key"):
            ATConfig.from_file(str(p))


class TestSolve1D:
    def test_crack_beats_the_ramp(self):
        # odd n puts the jump between nodes; at eps = 8h the surrogate
        # surface cost sits within 5% of the sharp value 1
        n = 201
        cfg = ATConfig(domain="interval", n=n, eps=8 * 2.0 / n, phi_init="profile")
        state = solve(cfg)
        eb = at_energy(state)
        assert state.converged
        assert eb.surface == pytest.approx(1.0, rel=0.05)
        assert eb.dirichlet < 0.02
        # phi dips toward 0 at the crack and recovers to ~1 at the ends
        phi = state.phi.values
        assert phi.min() < 0.05
        assert phi[0] > 0.9 and phi[-1] > 0.9

    def test_uniform_init_stays_in_the_ramp_basin(self):
        n = 201
        cfg = ATConfig(domain="interval", n=n, eps=8 * 2.0 / n)
        ramp = solve(cfg)
        # the elastic ramp costs ~ 2 Dirichlet units, far above the crack
        assert at_energy(ramp).total > 1.5


@pytest.fixture(scope="module")
def disk_state():
    return solve(ATConfig(domain="disk", n=16, eps=0.25, phi_init="profile"))


@pytest.fixture(scope="module")
def small_state():
    return solve(ATConfig(domain="cylinder", n=8, eps=0.5, delta=0.3,
                          phi_init="profile", max_sweeps=100))


class TestSolve2D:

    def test_energy_descends(self, disk_state):
        tr = np.array(disk_state.energy_trace)
        rises = tr[1:] - tr[:-1]
        assert rises.max() <= 1e-10 * max(1.0, abs(tr[0]))

    def test_phi_stays_in_the_unit_interval(self, disk_state):
        phi = disk_state.phi.values
        assert phi.min() >= -1e-8
        assert phi.max() <= 1.0 + 1e-8

    def test_solution_symmetry(self, disk_state):
        # delta = 0: u odd and phi even across the crack plane
        u = disk_state.u.values
        phi = disk_state.phi.values
        assert np.abs(u + u[:, ::-1]).max() < 1e-8
        assert np.abs(phi - phi[:, ::-1]).max() < 1e-8

    def test_deterministic_reruns(self):
        cfg = ATConfig(domain="disk", n=16, eps=0.25, phi_init="profile",
                       seed=3, noise_amp=0.1)
        a = solve(cfg)
        b = solve(cfg)
        assert np.array_equal(a.u.values, b.u.values)
        assert np.array_equal(a.phi.values, b.phi.values)
        assert a.energy_trace == b.energy_trace

    def test_phi0_override_and_shape_check(self):
        cfg = ATConfig(domain="disk", n=16, eps=0.25)
        state = solve(cfg, phi0=np.ones(cfg_shape(cfg)))
        assert state.sweeps >= 1
        with pytest.raises(ValueError, match="phi0 shape"):
            solve(cfg, phi0=np.ones((3, 3)))


def cfg_shape(cfg):
    return make_grid(cfg.domain, cfg.n).shape


class TestSolve3D:
    def test_converges_and_descends(self, small_state):
        assert small_state.converged
        tr = np.array(small_state.energy_trace)
        assert (tr[1:] - tr[:-1]).max() <= 1e-10 * max(1.0, abs(tr[0]))
        assert small_state.cg_iterations > 0

    def test_energy_property_matches_breakdown(self, small_state):
        eb = at_energy(small_state)
        assert small_state.energy == pytest.approx(eb.total, rel=1e-12)
        assert eb.provenance == "discrete"

    def test_solved_energy_below_inserted(self, small_state):
        ins = insert_state(small_state.config)
        assert small_state.energy < ins.energy


class TestInsertState:
    def test_needs_a_crack_geometry(self):
        with pytest.raises(ValueError, match="disk or cylinder"):
            insert_state(ATConfig(domain="interval", n=32))

    def test_trace_jump_across_the_plane(self):
        cfg = ATConfig(domain="cylinder", n=8, eps=0.5, delta=0.0)
        st = insert_state(cfg)
        g = st.u.grid
        ys = g.axes()[1]
        j = np.searchsorted(ys, 0.0)
        # behind the tip (x < 0) the trace jumps sign across y = 0
        u = st.u.values
        assert np.all(u[0, j, :] * u[0, j - 1, :] <= 0.0)
        assert np.abs(u[0, j, :] + u[0, j - 1, :]).max() < 1e-12

    def test_profile_phi_vanishes_on_crack_flanking_nodes(self):
        cfg = ATConfig(domain="cylinder", n=8, eps=0.5)
        st = insert_state(cfg)
        g = st.phi.grid
        part = g.node_masks()[0]
        ys = g.axes()[1]
        j = np.searchsorted(ys, 0.0)
        behind = g.axes()[0] <= 0.0
        for row in (j, j - 1):
            vals = st.phi.values[behind, row, :][part[behind, row, :]]
            assert np.abs(vals).max() == 0.0


class TestDzCellStats:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(9)
        g = make_grid("cylinder", 8)
        f = ScalarField(g, rng.standard_normal(g.shape))
        vol, s1, s2 = dz_cell_stats(f)
        h = g.h
        cm = g.cell_mask()
        b_vol = b1 = b2 = 0.0
        for i, j, k in np.argwhere(cm):
            dz = (f.values[i:i + 2, j:j + 2, k + 1] - f.values[i:i + 2, j:j + 2, k]) / h
            b_vol += h**3
            b1 += h**3 * dz.mean()
            b2 += h**3 * (dz**2).mean()
        assert vol == pytest.approx(b_vol, rel=1e-13)
        assert s1 == pytest.approx(b1, rel=1e-12)
        assert s2 == pytest.approx(b2, rel=1e-12)

    def test_inserted_tilt_has_exact_axial_rate(self):
        delta = 0.45
        st = insert_state(ATConfig(domain="cylinder", n=8, eps=0.5, delta=delta))
        vol, s1, s2 = dz_cell_stats(st.u)
        assert s1 == pytest.approx(delta * vol, rel=1e-12)
        assert s2 == pytest.approx(delta**2 * vol, rel=1e-12)

    def test_rejects_2d_fields(self):
        g = make_grid("disk", 8)
        with pytest.raises(ValueError, match="3D"):
            dz_cell_stats(ScalarField(g, np.zeros(g.shape)))


class TestSdeltaTrend:
    def test_row_contents(self):
        base = ATConfig(domain="cylinder", n=8, eps=0.5, phi_init="profile",
                        max_sweeps=60)
        rows = sdelta_trend([0.4], base)
        (row,) = rows
        assert row["delta"] == 0.4
        assert row["shat"] == pytest.approx(
            row["inserted_total"] - row["solved_total"], rel=1e-12)
        g = make_grid("cylinder", 8)
        assert row["scale"] == pytest.approx(2 * 0.4**2 * g.active_volume(), rel=1e-12)
        assert row["ratio"] == pytest.approx(row["shat"] / row["scale"], rel=1e-12)

    def test_delta_zero_reports_infinite_ratio(self):
        base = ATConfig(domain="cylinder", n=8, eps=0.5, phi_init="profile",
                        max_sweeps=40)
        (row,) = sdelta_trend([0.0], base)
        assert row["scale"] == 0.0
        assert np.isinf(row["ratio"])
