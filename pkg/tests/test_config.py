"""Run configuration defaults, INI parsing, content hashing."""
import math
from dataclasses import replace

import pytest

from qreflect.config import (
    DEFAULT_D_UM,
    DEFAULT_THETA_OVER_PI,
    RunConfig,
    default_config,
    load_config,
)
from qreflect.units import CATALOG


class TestDefaults:
    def test_he3(self):
        cfg = default_config("He3")
        assert cfg.atom.name == "He3"
        assert cfg.velocity == 2.0
        assert cfg.epsilon == 0.01
        assert cfg.N_rho == cfg.N_z == 4096
        assert cfg.d_list == DEFAULT_D_UM
        assert len(cfg.theta_list) == len(DEFAULT_THETA_OVER_PI)
        assert cfg.theta_list[0] == 0.0
        assert cfg.theta_list[-1] == pytest.approx(0.45 * math.pi)

    def test_na(self):
        cfg = default_config("Na")
        assert cfg.velocity == 0.1
        assert cfg.atom.C3 is None  # must be supplied per run

    def test_overrides(self):
        cfg = default_config("He3", velocity=5.0, N_z=1024)
        assert cfg.velocity == 5.0 and cfg.N_z == 1024
        assert cfg.dt == 0.005  # untouched

    def test_kinetics(self):
        E0, p0 = default_config("He3").kinetics()
        assert E0 == pytest.approx(4510.6439, rel=1e-6)
        assert p0 == pytest.approx(94.98, rel=1e-3)
        na = default_config("Na")
        E0, p0 = na.kinetics()
        assert p0 == pytest.approx(36.200278184690006, rel=1e-12)
        assert E0 == pytest.approx(p0 * p0 / 2, rel=1e-12)


class TestContentHash:
    def test_stable_and_short(self):
        a = default_config("He3")
        b = default_config("He3")
        assert a.content_hash == b.content_hash
        assert len(a.content_hash) == 12
        int(a.content_hash, 16)  # valid hex

    @pytest.mark.parametrize(
        "change",
        [
            {"velocity": 2.1},
            {"epsilon": 0.02},
            {"N_z": 2048},
            {"dt": 0.004},
            {"d_list": (0.0, 1.0)},
            {"invert_hole_continuation": True},
        ],
    )
    def test_sensitive_to_physics_inputs(self, change):
        base = default_config("He3")
        assert replace(base, **change).content_hash != base.content_hash

    def test_insensitive_to_workers(self):
        base = default_config("He3")
        assert replace(base, fft_workers=4).content_hash == base.content_hash

    def test_describe_is_flat_strings(self):
        desc = default_config("He3").describe()
        assert desc["atom.name"] == "He3"
        assert all(isinstance(k, str) for k in desc)


class TestLoadConfig:
    def write(self, tmp_path, body):
        p = tmp_path / "run.ini"
        p.write_text(body)
        return p

    def test_full_file(self, tmp_path):
        p = self.write(
            tmp_path,
            """
[atom]
name = Na
C3_natural = 0.04583

[kinematics]
velocity_m_per_s = 0.1

[potential]
epsilon_um = 0.009
invert_hole_continuation = false

[packet]
r_um = 4.0
sigma_um = 2.0

[grid]
extent_um = 25.0
N_rho = 4096
N_z = 4096

[propagation]
dt = 0.005
t_final = 0.21
absorber_width = 0.10
absorber_strength = off

[sweep]
theta_over_pi = 0.2, 0.3
d_um = 0, 2, 4
""",
        )
        cfg = load_config(p)
        assert cfg.atom.name == "Na"
        u = cfg.units
        assert u.C3_from_si(cfg.atom.C3) == pytest.approx(0.04583, rel=1e-12)
        assert cfg.packet_sigma == 2.0
        assert cfg.epsilon == 0.009
        assert cfg.absorber_strength == 0.0
        assert cfg.theta_list == pytest.approx((0.2 * math.pi, 0.3 * math.pi))
        assert cfg.d_list == (0.0, 2.0, 4.0)

    def test_minimal_file_uses_defaults(self, tmp_path):
        cfg = load_config(self.write(tmp_path, "[atom]\nname = He3\n"))
        assert cfg.velocity == 2.0
        assert cfg.N_rho == 4096
        assert cfg.absorber_strength is None  # auto

    def test_c3_in_si(self, tmp_path):
        cfg = load_config(
            self.write(tmp_path, "[atom]\nname = He3\nC3_J_m3 = 4.0e-50\n")
        )
        assert cfg.atom.C3 == 4.0e-50

    def test_both_c3_keys_rejected(self, tmp_path):
        p = self.write(
            tmp_path, "[atom]\nname = Na\nC3_natural = 1\nC3_J_m3 = 1e-49\n"
        )
        with pytest.raises(ValueError, match="not both"):
            load_config(p)

    def test_absorber_strength_spellings(self, tmp_path):
        for text, want in [("auto", None), ("off", 0.0), ("0", 0.0), ("163.8", 163.8)]:
            p = self.write(
                tmp_path,
                f"[atom]\nname = He3\n[propagation]\nabsorber_strength = {text}\n",
            )
            assert load_config(p).absorber_strength == want

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "nope.ini")

    def test_missing_atom_section(self, tmp_path):
        with pytest.raises(ValueError, match="atom"):
            load_config(self.write(tmp_path, "[grid]\nN_z = 128\n"))

    def test_unknown_atom(self, tmp_path):
        with pytest.raises(KeyError):
            load_config(self.write(tmp_path, "[atom]\nname = Xe\n"))

    @pytest.mark.parametrize(
        "body,match",
        [
            ("[atom]\nname = He3\n[kinematics]\nvelocity_m_per_s = 0\n", "velocity"),
            ("[atom]\nname = He3\n[potential]\nepsilon_um = -1\n", "epsilon"),
            ("[atom]\nname = He3\n[sweep]\nd_um = ,\n", "empty"),
            ("[atom]\nname = He3\n[sweep]\ntheta_over_pi = 0.5\n", "theta"),
            ("[atom]\nname = He3\n[sweep]\nd_um = -2\n", "negative"),
        ],
    )
    def test_validation(self, tmp_path, body, match):
        with pytest.raises(ValueError, match=match):
            load_config(self.write(tmp_path, body))
