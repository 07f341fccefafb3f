"""Independent 1D reflectivity oracle (Numerov) for validating the 2D solver.

At normal incidence with no hole the 2D problem separates, so the
time-independent 1D scattering problem over the same on-axis potential
slice gives a reference reflectivity.  The march starts just inside the
cut-off region with a pure incoming (toward -z) wave, which is exact when
the potential is locally constant there (the extended-potential slice is),
and decomposes the solution into counter-propagating plane waves far from
the plate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .potential import PotentialParams, extended_potential, reflection_distance
from .units import AtomSpec, UnitSystem, natural_units, kinetic_params


class NonConvergedError(RuntimeError):
    """Reflectivity still drifting under step refinement."""

    def __init__(self, r_coarse: float, r_fine: float, tol: float):
        super().__init__(
            f"Numerov reflectivity not converged: {r_coarse:.6f} -> "
            f"{r_fine:.6f} under step halving (tolerance {tol})"
        )
        self.r_coarse = r_coarse
        self.r_fine = r_fine


def _march(v1d: Callable, E: float, z_match: float, z_far: float, h: float):
    """Numerov march of psi'' = 2(V - E) psi from z_match - h to z_far.

    Initial values are the incoming WKB wave (exact for locally constant
    potential); returns the z nodes and complex psi along the march.
    """
    n = int(math.ceil((z_far - z_match) / h))
    h = (z_far - z_match) / n
    z = z_match + np.arange(-1, n + 1) * h
    f = 2.0 * (np.asarray(v1d(z), dtype=float) - E)
    if np.any(f >= 0.0):
        raise ValueError("march crosses a classically forbidden point (E <= V)")
    k = np.sqrt(-f)
    # psi = k^{-1/2} exp(-i int k dz), normalized to 1 at z_match
    psi = np.empty(n + 2, dtype=np.complex128)
    psi[0] = math.sqrt(k[1] / k[0]) * np.exp(1j * h * (k[0] + k[1]) / 2.0)
    psi[1] = 1.0
    w = h * h / 12.0
    c = 1.0 - w * f
    for i in range(1, n + 1):
        psi[i + 1] = ((12.0 - 10.0 * c[i]) * psi[i] - c[i - 1] * psi[i - 1]) / c[i + 1]
    return z, psi, h


def _decompose(z, psi, k: float, i: int):
    """Counter-propagating amplitudes (A e^{-ikz} + B e^{ikz}) from the
    solution values at nodes i and i+1."""
    m = np.array(
        [
            [np.exp(-1j * k * z[i]), np.exp(1j * k * z[i])],
            [np.exp(-1j * k * z[i + 1]), np.exp(1j * k * z[i + 1])],
        ]
    )
    a, b = np.linalg.solve(m, np.array([psi[i], psi[i + 1]]))
    return a, b


def _reflectivity_once(v1d, E, z_match, z_far, h):
    z, psi, h = _march(v1d, E, z_match, z_far, h)
    k_far = math.sqrt(2.0 * E)
    a, b = _decompose(z, psi, k_far, len(z) - 2)
    return abs(b) ** 2 / abs(a) ** 2, (z, psi, a, b)


def numerov_reflectivity(
    v1d: Callable,
    E: float,
    z_match: float,
    z_far: float,
    points_per_wavelength: int = 40,
    refine_tol: float = 1e-3,
) -> float:
    """1D reflectivity of the incoming wave against the potential tail.

    Parameters
    ----------
    v1d : callable
        Potential on [z_match - h, z_far]; must be (locally) constant just
        below z_match so the incoming-wave start is exact, and negligible
        (|V| < 1e-6 E) at z_far.
    E : float
        Kinetic energy at infinity, natural units.
    z_match, z_far : float
        March interval; z_match sits at the cut-off, z_far in free space.

    Raises
    ------
    NonConvergedError
        If halving the step changes R by more than refine_tol.
    """
    if E <= 0:
        raise ValueError(f"energy must be positive, got {E}")
    if z_far <= z_match:
        raise ValueError("z_far must exceed z_match")
    if abs(float(v1d(z_far))) > 1e-6 * E:
        raise ValueError(
            f"potential not negligible at z_far: |V| = {abs(float(v1d(z_far))):.3e}"
            f" > 1e-6 E"
        )
    v_min = float(np.min(v1d(np.linspace(z_match, z_far, 4096))))
    k_max = math.sqrt(2.0 * (E - v_min))
    h = 2.0 * math.pi / k_max / points_per_wavelength
    r_coarse, _ = _reflectivity_once(v1d, E, z_match, z_far, h)
    r_fine, _ = _reflectivity_once(v1d, E, z_match, z_far, h / 2.0)
    if abs(r_fine - r_coarse) > refine_tol:
        raise NonConvergedError(r_coarse, r_fine, refine_tol)
    return float(r_fine)


def extended_slice_1d(params: PotentialParams) -> Callable:
    """On-axis slice of the extended potential (constant V0 below epsilon
    when d = 0), suitable as the oracle's v1d."""

    def v(z):
        return extended_potential(np.zeros_like(np.asarray(z, dtype=float)), z, params)

    return v


@dataclass(frozen=True)
class BadlandsReport:
    """Where WKB predicts reflection vs where the 1D solution reflects."""

    z_reflection: float      # badlands peak (WKB prediction)
    z_max_deviation: float   # where the reflected amplitude grows fastest
    overlap: bool            # within a factor 3 of each other
    r_1d: float              # Numerov reflectivity of the same slice


def badlands_peak_check(
    atom: AtomSpec,
    v: float,
    units: UnitSystem | None = None,
    epsilon: float = 0.01,
) -> BadlandsReport:
    """Diagnostic comparison of the badlands-peak location against the
    Numerov solution's reflection zone for the plain-plate slice."""
    if units is None:
        units = natural_units(atom)
    E, _ = kinetic_params(atom, v, units)
    c3 = units.C3_from_si(atom.require_C3())
    z_r = reflection_distance(atom, v, units)

    params = PotentialParams(C3=c3, theta=0.0, d=0.0, epsilon=epsilon)
    slice_v = extended_slice_1d(params)
    z_far = max(2.0, 20.0 * z_r)
    r_1d, (z, psi, _, _) = _reflectivity_once(
        slice_v, E, epsilon, z_far,
        2.0 * math.pi / math.sqrt(2.0 * (E - params.V0)) / 40.0,
    )

    # local decomposition: reflected amplitude B(z) grows across the
    # reflection zone and saturates beyond it
    k_loc = np.sqrt(2.0 * (E - np.asarray(slice_v(z), dtype=float)))
    b2 = np.empty(len(z) - 1)
    for i in range(len(z) - 1):
        _, b = _decompose(z, psi, float(k_loc[i]), i)
        b2[i] = abs(b) ** 2
    growth = np.gradient(b2, z[:-1])
    z_dev = float(z[int(np.argmax(growth))])
    overlap = z_r / 3.0 <= z_dev <= 3.0 * z_r
    return BadlandsReport(
        z_reflection=z_r, z_max_deviation=z_dev, overlap=overlap, r_1d=float(r_1d)
    )
