"""Reflectivity functionals and sweep normalization."""
import math

import numpy as np
import pytest

from qreflect.analysis import (
    expectation_values,
    normalize_sweep,
    reflectivity_momentum,
    reflectivity_position,
)
from qreflect.field import WaveField, gaussian_packet, make_grid


class TestReflectivityPosition:
    def test_packet_above_plate_counts_fully(self):
        g = make_grid(25.0, 64, 256)
        f = gaussian_packet(g, r=6.0, theta=0.0, sigma=1.0, p0=10.0)
        assert reflectivity_position(f) == pytest.approx(1.0, abs=1e-9)

    def test_packet_below_plate_counts_zero(self):
        g = make_grid(25.0, 64, 256)
        f = gaussian_packet(g, r=6.0, theta=0.0, sigma=1.0, p0=10.0)
        f = WaveField(g, f.psi[:, ::-1].copy(), 0.0)  # mirror through z = 0
        assert reflectivity_position(f) == pytest.approx(0.0, abs=1e-9)

    def test_straddling_packet_splits(self):
        g = make_grid(25.0, 64, 256)
        rho_c, z_r = g.mesh()
        psi = np.exp(-(z_r**2 + rho_c**2) / 4.0).astype(np.complex128)
        psi = np.broadcast_to(psi, (64, 256)).copy()
        psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * g.cell_area)
        f = WaveField(g, psi, 0.0)
        assert reflectivity_position(f) == pytest.approx(0.5, abs=1e-12)

    def test_scales_with_norm(self):
        g = make_grid(25.0, 64, 256)
        f = gaussian_packet(g, r=6.0, theta=0.0, sigma=1.0, p0=10.0)
        f.psi *= 0.5  # norm 0.25
        assert reflectivity_position(f) == pytest.approx(0.25, abs=1e-9)


class TestReflectivityMomentum:
    def test_upward_packet_counts_fully(self):
        g = make_grid(25.0, 64, 512)
        down = gaussian_packet(g, r=6.0, theta=0.0, sigma=1.0, p0=10.0)
        up = WaveField(g, np.conj(down.psi), 0.0)  # conjugation flips momentum
        assert reflectivity_momentum(up) == pytest.approx(1.0, abs=1e-9)
        assert reflectivity_momentum(down) == pytest.approx(0.0, abs=1e-9)

    def test_equal_superposition(self):
        g = make_grid(25.0, 64, 512)
        down = gaussian_packet(g, r=6.0, theta=0.0, sigma=1.0, p0=10.0)
        both = WaveField(g, (down.psi + np.conj(down.psi)) / math.sqrt(2.0), 0.0)
        # the two momentum lobes are disjoint; each carries half the norm
        assert reflectivity_momentum(both) == pytest.approx(
            both.norm() / 2, abs=1e-9
        )

    def test_zero_field(self):
        g = make_grid(10.0, 64, 64)
        f = WaveField(g, np.zeros((64, 64), dtype=np.complex128), 0.0)
        assert reflectivity_momentum(f) == 0.0

    def test_agrees_with_position_when_separated(self):
        # a packet fully above the plate moving up: both functionals see 1
        g = make_grid(25.0, 64, 512)
        down = gaussian_packet(g, r=6.0, theta=0.0, sigma=1.0, p0=10.0)
        up = WaveField(g, np.conj(down.psi), 0.0)
        assert abs(
            reflectivity_momentum(up) - reflectivity_position(up)
        ) < 1e-9


class TestExpectationValues:
    def test_moments_of_known_packet(self):
        g = make_grid(25.0, 256, 256)
        f = gaussian_packet(g, r=5.0, theta=0.25 * math.pi, sigma=1.2, p0=8.0)
        ev = expectation_values(f)
        s, c = math.sin(0.25 * math.pi), math.cos(0.25 * math.pi)
        assert ev.rho == pytest.approx(5.0 * s, abs=1e-8)
        assert ev.z == pytest.approx(5.0 * c, abs=1e-8)
        assert ev.krho == pytest.approx(-8.0 * s, abs=1e-6)
        assert ev.kz == pytest.approx(-8.0 * c, abs=1e-6)
        assert ev.sigma_rho == pytest.approx(1.2, rel=1e-6)
        assert ev.sigma_z == pytest.approx(1.2, rel=1e-6)

    def test_self_normalizing(self):
        g = make_grid(25.0, 64, 64)
        f = gaussian_packet(g, r=4.0, theta=0.1, sigma=1.0, p0=5.0)
        a = expectation_values(WaveField(g, 3.7 * f.psi, 0.0))
        b = expectation_values(f)
        for name in ("rho", "z", "krho", "kz", "sigma_rho", "sigma_z"):
            assert getattr(a, name) == pytest.approx(getattr(b, name), abs=1e-12)


class TestNormalizeSweep:
    def rows(self):
        return [
            {"d": 0.0, "theta": 0.0, "R_pos": 0.20},
            {"d": 2.0, "theta": 0.0, "R_pos": 0.10},
            {"d": 4.0, "theta": 0.0, "R_pos": 0.05},
            {"d": 0.0, "theta": 0.3, "R_pos": 0.40},
            {"d": 2.0, "theta": 0.3, "R_pos": 0.30},
        ]

    def test_ratios(self):
        out = normalize_sweep(self.rows())
        by_key = {(r["d"], r["theta"]): r["R_norm"] for r in out}
        assert by_key[(0.0, 0.0)] == 1.0
        assert by_key[(2.0, 0.0)] == pytest.approx(0.5)
        assert by_key[(4.0, 0.0)] == pytest.approx(0.25)
        assert by_key[(2.0, 0.3)] == pytest.approx(0.75)

    def test_input_not_mutated(self):
        rows = self.rows()
        normalize_sweep(rows)
        assert all("R_norm" not in r for r in rows)

    def test_missing_baseline_raises(self):
        rows = [r for r in self.rows() if not (r["d"] == 0.0 and r["theta"] == 0.3)]
        with pytest.raises(ValueError, match="baseline"):
            normalize_sweep(rows)
