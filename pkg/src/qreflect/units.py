"""Atoms, natural units and kinematics.

The whole simulation runs in natural units with hbar = m = 1 and a fixed
length scale L (1 um unless overridden).  Everything that touches SI
quantities funnels through this module, so unit conversions cannot leak
into the numerics.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .constants import AMU, HBAR

DEFAULT_LENGTH_SCALE = 1e-6  # m


@dataclass(frozen=True)
class AtomSpec:
    """An atomic species: mass plus the atom-surface dispersion strength.

    C3 is the coefficient of the non-retarded image-potential shift in
    J m^3; it may be None for catalog entries whose value must come from
    user configuration.
    """

    name: str
    mass_amu: float
    C3: float | None = None           # J m^3
    lambda_transition: float | None = None  # m

    def __post_init__(self):
        if self.mass_amu <= 0:
            raise ValueError(f"atom mass must be positive, got {self.mass_amu} amu")
        if self.C3 is not None and self.C3 <= 0:
            raise ValueError(f"C3 must be positive when set, got {self.C3}")

    @property
    def mass(self) -> float:
        """Mass in kg."""
        return self.mass_amu * AMU

    def require_C3(self) -> float:
        if self.C3 is None:
            raise ValueError(
                f"atom {self.name!r} has no C3 coefficient; supply C3_J in the "
                "config file or extend the catalog"
            )
        return self.C3

    def with_C3(self, C3: float) -> "AtomSpec":
        return replace(self, C3=C3)


# Catalog ships only the two species the simulation is parameterized for out
# of the box.  Na's C3 must be supplied by the user (literature values for
# alkali atoms on an ideal conductor are around 1.9 atomic units).
CATALOG = {
    "He3": AtomSpec("He3", mass_amu=3.016, C3=4.0e-50, lambda_transition=9.3e-9),
    "Na": AtomSpec("Na", mass_amu=22.99, C3=None, lambda_transition=590e-9),
}


def get_atom(name: str) -> AtomSpec:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(
            f"unknown atom {name!r}; catalog has {sorted(CATALOG)} "
            "(extend via config [atom:NAME] sections)"
        ) from None


@dataclass(frozen=True)
class UnitSystem:
    """Conversion factors between SI and the natural units of one atom.

    energy_unit * time_unit == hbar and velocity_unit == L / time_unit by
    construction.
    """

    L: float             # m
    mass: float          # kg
    energy_unit: float   # J,   hbar^2 / (m L^2)
    time_unit: float     # s,   m L^2 / hbar
    velocity_unit: float  # m/s, hbar / (m L)

    def energy_to_si(self, e: float) -> float:
        return e * self.energy_unit

    def energy_from_si(self, e_si: float) -> float:
        return e_si / self.energy_unit

    def time_to_si(self, t: float) -> float:
        return t * self.time_unit

    def length_to_si(self, x: float) -> float:
        return x * self.L

    def length_from_si(self, x_si: float) -> float:
        return x_si / self.L

    def velocity_from_si(self, v_si: float) -> float:
        return v_si / self.velocity_unit

    def C3_from_si(self, c3_si: float) -> float:
        """Dispersion coefficient J m^3 -> natural energy * length^3."""
        return c3_si / (self.energy_unit * self.L**3)


def natural_units(atom: AtomSpec, L: float = DEFAULT_LENGTH_SCALE) -> UnitSystem:
    """Build the natural-unit system for an atom at length scale L (meters)."""
    if L <= 0:
        raise ValueError(f"length scale must be positive, got {L}")
    m = atom.mass
    return UnitSystem(
        L=L,
        mass=m,
        energy_unit=HBAR**2 / (m * L**2),
        time_unit=m * L**2 / HBAR,
        velocity_unit=HBAR / (m * L),
    )


def kinetic_params(atom: AtomSpec, v: float, units: UnitSystem) -> tuple[float, float]:
    """Initial kinetic energy and momentum, natural units, from speed v (m/s).

    With m = 1 the momentum is numerically the speed in natural units and
    E0 = p0^2 / 2.
    """
    if v <= 0:
        raise ValueError(f"speed must be positive, got {v}")
    p0 = units.velocity_from_si(v)
    return p0**2 / 2.0, p0
