"""INI-backed run configuration with CLI overrides and a content hash."""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .units import AtomSpec, UnitSystem, get_atom, kinetic_params, natural_units

# Sweep axes default to the figure ranges; exact tick lists are a choice and
# are recorded in the output metadata.
DEFAULT_THETA_OVER_PI = tuple(round(0.05 * i, 2) for i in range(10))
DEFAULT_D_UM = tuple(float(i) for i in range(13))


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved inputs for one propagation or sweep."""

    atom: AtomSpec
    velocity: float  # m/s
    epsilon: float  # um
    invert_hole_continuation: bool
    packet_r: float  # um, launch distance from the origin
    packet_sigma: float  # um
    extent: float  # um, square domain side
    N_rho: int
    N_z: int
    dt: float
    t_final: float
    absorber_width: float
    absorber_strength: float | None  # None = auto-calibrate, 0 = disabled
    theta_list: tuple[float, ...]  # radians
    d_list: tuple[float, ...]  # um
    fft_workers: int = 1

    @property
    def units(self) -> UnitSystem:
        return natural_units(self.atom)

    def kinetics(self) -> tuple[float, float]:
        """(E0, p0) in natural units."""
        return kinetic_params(self.atom, self.velocity, self.units)

    @property
    def content_hash(self) -> str:
        """Short digest of every physics-relevant input."""
        lines = []
        for key, value in sorted(self.describe().items()):
            lines.append(f"{key}={value}")
        digest = hashlib.sha256("\n".join(lines).encode()).hexdigest()
        return digest[:12]

    def describe(self) -> dict:
        """Flat, stable key/value view used for hashing and metadata."""
        atom = self.atom
        return {
            "atom.name": atom.name,
            "atom.mass_amu": repr(atom.mass_amu),
            "atom.C3": repr(atom.C3),
            "kinematics.velocity": repr(self.velocity),
            "potential.epsilon_um": repr(self.epsilon),
            "potential.invert_hole_continuation": self.invert_hole_continuation,
            "packet.r_um": repr(self.packet_r),
            "packet.sigma_um": repr(self.packet_sigma),
            "grid.extent_um": repr(self.extent),
            "grid.N_rho": self.N_rho,
            "grid.N_z": self.N_z,
            "propagation.dt": repr(self.dt),
            "propagation.t_final": repr(self.t_final),
            "propagation.absorber_width": repr(self.absorber_width),
            "propagation.absorber_strength": repr(self.absorber_strength),
            "sweep.theta_over_pi": ",".join(
                repr(t / math.pi) for t in self.theta_list
            ),
            "sweep.d_um": ",".join(repr(d) for d in self.d_list),
        }


def default_config(atom_name: str = "He3", **overrides) -> RunConfig:
    cfg = RunConfig(
        atom=get_atom(atom_name),
        velocity=2.0 if atom_name == "He3" else 0.1,
        epsilon=0.01,
        invert_hole_continuation=False,
        packet_r=4.0,
        packet_sigma=1.0,
        extent=25.0,
        N_rho=2**12,
        N_z=2**12,
        dt=0.005,
        t_final=0.21,
        absorber_width=0.10,
        absorber_strength=None,
        theta_list=tuple(f * math.pi for f in DEFAULT_THETA_OVER_PI),
        d_list=DEFAULT_D_UM,
    )
    return replace(cfg, **overrides) if overrides else cfg


def _parse_float_list(text: str) -> tuple[float, ...]:
    items = [piece.strip() for piece in text.split(",") if piece.strip()]
    return tuple(float(piece) for piece in items)


def _parse_strength(text: str) -> float | None:
    lowered = text.strip().lower()
    if lowered == "auto":
        return None
    if lowered in ("off", "none", "0"):
        return 0.0
    value = float(lowered)
    if value < 0:
        raise ValueError(f"absorber_strength must be >= 0, got {value}")
    return value


def load_config(path: str | Path) -> RunConfig:
    """Read an INI file into a RunConfig.

    Sections and keys (all optional except [atom] name):
      [atom]         name, C3_natural | C3_J_m3
      [kinematics]   velocity_m_per_s
      [potential]    epsilon_um, invert_hole_continuation
      [packet]       r_um, sigma_um
      [grid]         extent_um, N_rho, N_z
      [propagation]  dt, t_final, absorber_width, absorber_strength (auto|off|float)
      [sweep]        theta_over_pi, d_um  (comma lists)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path)

    if not parser.has_section("atom") or not parser.has_option("atom", "name"):
        raise ValueError(f"{path}: missing [atom] name")
    atom = get_atom(parser.get("atom", "name"))
    if parser.has_option("atom", "C3_natural") and parser.has_option(
        "atom", "C3_J_m3"
    ):
        raise ValueError(f"{path}: give C3_natural or C3_J_m3, not both")
    if parser.has_option("atom", "C3_natural"):
        # catalog stores C3 in SI (J m^3); convert the natural-units value
        units = natural_units(atom)
        value = parser.getfloat("atom", "C3_natural")
        atom = atom.with_C3(value * units.energy_unit * units.L**3)
    elif parser.has_option("atom", "C3_J_m3"):
        atom = atom.with_C3(parser.getfloat("atom", "C3_J_m3"))

    cfg = default_config(atom.name)
    cfg = replace(cfg, atom=atom)

    def get(section, option, cast, current):
        if parser.has_option(section, option):
            return cast(parser.get(section, option))
        return current

    cfg = replace(
        cfg,
        velocity=get("kinematics", "velocity_m_per_s", float, cfg.velocity),
        epsilon=get("potential", "epsilon_um", float, cfg.epsilon),
        invert_hole_continuation=get(
            "potential",
            "invert_hole_continuation",
            lambda s: parser.getboolean("potential", "invert_hole_continuation"),
            cfg.invert_hole_continuation,
        ),
        packet_r=get("packet", "r_um", float, cfg.packet_r),
        packet_sigma=get("packet", "sigma_um", float, cfg.packet_sigma),
        extent=get("grid", "extent_um", float, cfg.extent),
        N_rho=get("grid", "N_rho", int, cfg.N_rho),
        N_z=get("grid", "N_z", int, cfg.N_z),
        dt=get("propagation", "dt", float, cfg.dt),
        t_final=get("propagation", "t_final", float, cfg.t_final),
        absorber_width=get(
            "propagation", "absorber_width", float, cfg.absorber_width
        ),
        absorber_strength=get(
            "propagation",
            "absorber_strength",
            _parse_strength,
            cfg.absorber_strength,
        ),
        theta_list=get(
            "sweep",
            "theta_over_pi",
            lambda s: tuple(f * math.pi for f in _parse_float_list(s)),
            cfg.theta_list,
        ),
        d_list=get("sweep", "d_um", _parse_float_list, cfg.d_list),
    )
    _validate(cfg, path)
    return cfg


def _validate(cfg: RunConfig, origin) -> None:
    if cfg.velocity <= 0:
        raise ValueError(f"{origin}: velocity must be positive")
    if cfg.epsilon <= 0:
        raise ValueError(f"{origin}: epsilon_um must be positive")
    if not cfg.d_list:
        raise ValueError(f"{origin}: d_um list is empty")
    if not cfg.theta_list:
        raise ValueError(f"{origin}: theta_over_pi list is empty")
    for theta in cfg.theta_list:
        if not 0.0 <= theta < math.pi / 2:
            raise ValueError(
                f"{origin}: theta = {theta / math.pi}pi outside [0, 0.5pi)"
            )
    for d in cfg.d_list:
        if d < 0:
            raise ValueError(f"{origin}: negative hole diameter {d}")
