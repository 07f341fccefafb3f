"""Strang splitting, absorber construction and calibration."""
import math

import numpy as np
import pytest

from qreflect.analysis import expectation_values
from qreflect.field import WaveField, gaussian_packet, make_grid
from qreflect.potential import PotentialParams
from qreflect.propagator import (
    BlowupError,
    PropagationConfig,
    build_absorber,
    calibrate_absorber_strength,
    propagate,
    split_step,
)

HE3_C3N = 0.018013085249073846


def free_steps(field, dt, n, absorber=None):
    v0 = np.zeros_like(field.psi, dtype=float)
    for _ in range(n):
        field = split_step(field, v0, absorber, dt)
    return field


class TestPropagationConfig:
    def test_step_rounding(self):
        c = PropagationConfig(dt=0.005, t_final=0.21)
        assert c.n_steps == 42
        assert c.t_final_adjusted == pytest.approx(0.21)
        c2 = PropagationConfig(dt=0.004, t_final=0.21)
        assert c2.n_steps == 52  # 0.21/0.004 = 52.5 banker-rounds to 52
        assert c2.t_final_adjusted == pytest.approx(0.208)

    @pytest.mark.parametrize(
        "kw",
        [
            {"dt": 0.0},
            {"dt": -0.1},
            {"t_final": 0.001},  # below one step
            {"absorber_width": 0.0},
            {"absorber_width": 0.5},
            {"absorber_strength": -1.0},
            {"snapshot_times": (0.5,)},  # past t_final
            {"snapshot_times": (-0.1,)},
        ],
    )
    def test_validation(self, kw):
        base = dict(dt=0.005, t_final=0.21)
        base.update(kw)
        with pytest.raises(ValueError):
            PropagationConfig(**base)


class TestAbsorber:
    def test_profile_shape(self):
        g = make_grid(20.0, 128, 128)
        w = build_absorber(g, width=0.10, strength=7.0)
        assert w.shape == (128, 128)
        # interior dead flat at zero
        inner = (np.abs(g.rho)[:, None] < 7.0) & (np.abs(g.z)[None, :] < 7.0)
        assert np.all(w[inner] == 0.0)
        # saturates at the boundary (nodes sit half a cell inside it),
        # corners included via the max combination
        assert w[0, 64] == pytest.approx(7.0, rel=5e-3)
        assert w[0, 0] == w[0, 64]
        assert np.all(w >= 0) and np.all(w <= 7.0 + 1e-12)

    def test_validation(self):
        g = make_grid(20.0, 64, 64)
        with pytest.raises(ValueError):
            build_absorber(g, width=0.6, strength=1.0)
        with pytest.raises(ValueError):
            build_absorber(g, width=0.1, strength=-1.0)

    def test_calibration_returns_ladder_value(self):
        p0 = 20.0
        e0 = p0 * p0 / 2
        s = calibrate_absorber_strength(p0)
        assert s in {e0 / 4, e0 / 2, e0, 2 * e0, 4 * e0}
        assert calibrate_absorber_strength(p0) == s  # cached


class TestFreeEvolution:
    def test_matches_analytic_spreading(self):
        g = make_grid(25.0, 64, 512)
        sigma, p0, t = 1.0, 5.0, 0.5
        f = gaussian_packet(g, r=4.0, theta=0.0, sigma=sigma, p0=p0)
        out = free_steps(f, dt=0.005, n=100)
        ev = expectation_values(out)
        assert out.time == pytest.approx(t)
        assert ev.z == pytest.approx(4.0 - p0 * t, abs=1e-8)
        assert ev.kz == pytest.approx(-p0, abs=1e-8)
        # sigma(t) = sigma sqrt(1 + (t / (2 sigma^2))^2)
        want = sigma * math.sqrt(1 + (t / (2 * sigma**2)) ** 2)
        assert ev.sigma_z == pytest.approx(want, rel=1e-6)
        assert ev.sigma_rho == pytest.approx(want, rel=1e-6)
        assert out.norm() == pytest.approx(1.0, abs=1e-12)

    def test_free_evolution_is_exact_per_momentum_mode(self):
        # with V = 0 the splitting is exact: one step of dt equals two of dt/2
        g = make_grid(20.0, 64, 64)
        f = gaussian_packet(g, r=3.0, theta=0.2, sigma=1.0, p0=4.0)
        one = free_steps(f.copy(), dt=0.01, n=1)
        two = free_steps(f.copy(), dt=0.005, n=2)
        np.testing.assert_allclose(one.psi, two.psi, atol=1e-13)


class TestSplitStep:
    @pytest.fixture()
    def setup(self):
        g = make_grid(25.0, 64, 512)
        f = gaussian_packet(g, r=4.0, theta=0.0, sigma=1.0, p0=10.0)
        params = PotentialParams(C3=HE3_C3N, theta=0.0, d=0.0, epsilon=0.01)
        rho_c, z_r = g.mesh()
        from qreflect.potential import extended_potential

        return f, extended_potential(rho_c, z_r, params)

    def test_unitary_without_absorber(self, setup):
        f, v = setup
        for _ in range(50):
            f = split_step(f, v, None, 0.005)
        assert f.norm() == pytest.approx(1.0, abs=1e-12)

    def test_global_phase_invariance(self, setup):
        f, v = setup
        alpha = 0.7321
        g = WaveField(f.grid, f.psi * np.exp(1j * alpha), f.time)
        out_f = split_step(f, v, None, 0.005)
        out_g = split_step(g, v, None, 0.005)
        np.testing.assert_allclose(
            out_g.psi, out_f.psi * np.exp(1j * alpha), atol=1e-14
        )

    def test_second_order_in_dt(self):
        # halving dt cuts the Strang error by ~4 on a potential whose phase
        # per step stays well below a radian everywhere
        g = make_grid(25.0, 64, 256)
        rho_c, z_r = g.mesh()
        v = np.broadcast_to(
            -30.0 * np.exp(-(z_r**2 + rho_c**2) / 4.0), (64, 256)
        ).copy()
        f0 = gaussian_packet(g, r=4.0, theta=0.0, sigma=1.0, p0=6.0)
        t = 0.3

        def run(dt):
            f = f0.copy()
            for _ in range(int(round(t / dt))):
                f = split_step(f, v, None, dt)
            return f.psi

        ref = run(0.0025)
        e1 = np.linalg.norm(run(0.02) - ref)
        e2 = np.linalg.norm(run(0.01) - ref)
        assert 3.3 < e1 / e2 < 4.8

    def test_shape_mismatch_rejected(self, setup):
        f, _ = setup
        with pytest.raises(ValueError):
            split_step(f, np.zeros((4, 4)), None, 0.005)

    def test_blowup_detected(self, setup):
        f, v = setup
        bad = v.copy()
        bad[0, 0] = np.nan
        with pytest.raises(BlowupError) as exc:
            split_step(f, bad, None, 0.005)
        assert exc.value.step == 1

    def test_workers_do_not_change_result(self, setup):
        f, v = setup
        a = split_step(f, v, None, 0.005, workers=1)
        b = split_step(f, v, None, 0.005, workers=2)
        np.testing.assert_allclose(a.psi, b.psi, atol=1e-13)


class TestPropagate:
    def params(self, **kw):
        base = dict(C3=HE3_C3N, theta=0.0, d=0.0, epsilon=0.01)
        base.update(kw)
        return PotentialParams(**base)

    def test_norm_history_and_result_fields(self):
        g = make_grid(25.0, 64, 256)
        f = gaussian_packet(g, r=4.0, theta=0.0, sigma=1.0, p0=10.0)
        cfg = PropagationConfig(dt=0.005, t_final=0.1, absorber_strength=0.0)
        res = propagate(f, self.params(), cfg)
        assert res.n_steps == 20
        assert res.norm_history.shape == (20,)
        np.testing.assert_allclose(res.norm_history, 1.0, atol=1e-12)
        assert res.final.time == pytest.approx(0.1)
        assert res.absorber_strength == 0.0
        assert res.t_final == pytest.approx(cfg.t_final_adjusted)

    def test_snapshots_are_copies(self):
        g = make_grid(25.0, 64, 256)
        f = gaussian_packet(g, r=4.0, theta=0.0, sigma=1.0, p0=10.0)
        cfg = PropagationConfig(
            dt=0.005, t_final=0.1, absorber_strength=0.0, snapshot_times=(0.0, 0.05)
        )
        res = propagate(f, self.params(), cfg)
        assert set(res.snapshots) == {0.0, 0.05}
        assert res.snapshots[0.05].time == pytest.approx(0.05)
        res.final.psi[:] = 0
        assert res.snapshots[0.05].norm() == pytest.approx(1.0, abs=1e-12)
        assert res.snapshots[0.0].norm() == pytest.approx(1.0, abs=1e-12)

    def test_absorber_removes_outgoing_packet(self):
        # aimed at the far edge: nearly all probability should be eaten
        g = make_grid(25.0, 64, 256)
        f = gaussian_packet(g, r=4.0, theta=0.0, sigma=1.0, p0=20.0)
        cfg = PropagationConfig(dt=0.005, t_final=1.2)  # auto calibration
        res = propagate(f, self.params(C3=1e-12), cfg)
        assert res.absorber_strength > 0
        assert res.final.norm() < 1e-3
        diffs = np.diff(np.concatenate(([1.0], res.norm_history)))
        assert np.all(diffs < 1e-10)  # norm never grows

    def test_auto_calibration_matches_manual(self):
        g = make_grid(25.0, 64, 256)
        f = gaussian_packet(g, r=4.0, theta=0.0, sigma=1.0, p0=20.0)
        cfg = PropagationConfig(dt=0.005, t_final=0.05)
        res = propagate(f, self.params(), cfg)
        assert res.absorber_strength == calibrate_absorber_strength(20.0)
