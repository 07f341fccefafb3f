"""Quantum reflection of matter waves from a plate pierced by a micropore.

The package propagates a 2D atomic wavepacket toward a perfectly
conducting plate with a circular hole, using the exact electrostatic
image potential of the plate-with-aperture geometry, and measures how
much of the packet reflects quantum mechanically from the attractive
potential tail.
"""

from ._version import __version__
from .constants import HBAR, AMU, EV, NEV, UEV, HARTREE, BOHR, C3_AU, EPSILON_0
from .units import (
    AtomSpec,
    UnitSystem,
    CATALOG,
    get_atom,
    natural_units,
    kinetic_params,
    DEFAULT_LENGTH_SCALE,
)
from .potential import (
    xi_coefficients,
    bare_potential,
    extended_potential,
    potential_slice_1d,
    badlands,
    reflection_distance,
    PotentialParams,
)
from .field import Grid2D, WaveField, make_grid, gaussian_packet
from .propagator import (
    PropagationConfig,
    PropagationResult,
    build_absorber,
    calibrate_absorber_strength,
    split_step,
    propagate,
)
from .analysis import (
    reflectivity_position,
    reflectivity_momentum,
    normalize_sweep,
    expectation_values,
)
from .oracle1d import numerov_reflectivity, badlands_peak_check
from .config import RunConfig, load_config, default_config

__all__ = [
    "__version__",
    "RunConfig", "load_config", "default_config",
    "HBAR", "AMU", "EV", "NEV", "UEV", "HARTREE", "BOHR", "C3_AU", "EPSILON_0",
    "AtomSpec", "UnitSystem", "CATALOG", "get_atom", "natural_units",
    "kinetic_params", "DEFAULT_LENGTH_SCALE",
    "xi_coefficients", "bare_potential", "extended_potential",
    "potential_slice_1d", "badlands", "reflection_distance", "PotentialParams",
    "Grid2D", "WaveField", "make_grid", "gaussian_packet",
    "PropagationConfig", "PropagationResult", "build_absorber",
    "calibrate_absorber_strength", "split_step", "propagate",
    "reflectivity_position", "reflectivity_momentum", "normalize_sweep",
    "expectation_values",
    "numerov_reflectivity", "badlands_peak_check",
]
