"""Image potential of a conducting plate pierced by a circular hole.

Everything here works in natural units (hbar = m = 1, lengths in units of
L).  The exact electrostatic energy shift of a dipole near the plate is

    V(rho, z; theta, d) = -(C3/pi) * (Xi_rho sin^2(theta) + Xi_z cos^2(theta))

with the Xi coefficients given in closed form below; theta is the angle of
incidence, which also fixes the dipole orientation (dipole along the
direction of motion), and d is the hole diameter.  For d -> 0 the plain
plate limit V = -C3 (sin^2/4 + cos^2/2) / z^3 is used directly.

The simulation domain extends through the plate, so the singular bare
potential is replaced below a cut-off z = epsilon by a smooth piecewise
continuation (extended_potential).  badlands() and reflection_distance()
implement the WKB-breakdown diagnostic that locates where quantum
reflection happens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .units import AtomSpec, UnitSystem, natural_units, kinetic_params

# Below this diameter the closed d = 0 forms replace Eqs. with arctan(P/(d z)),
# whose argument degenerates to 0/0 at d = 0.
D_ZERO_SWITCH = 1e-12


class SingularPointError(ValueError):
    """Evaluation on the rim circle (or the plate plane) where the image
    potential has no pointwise value."""


@dataclass(frozen=True)
class ShorthandValues:
    """The five recurring combinations of (rho, z, d).

    P = rho^2 + z^2 - d^2/4, Qpm = rho^2 +- z^2 +- d^2/4 and
    Rpm = sqrt((rho +- d/2)^2 + z^2).  Combination identities:
    Qplus + Qminus = 2 rho^2 and Qplus - Qminus = 2 z^2 + d^2/2.
    """

    P: np.ndarray | float
    Qplus: np.ndarray | float
    Qminus: np.ndarray | float
    Rplus: np.ndarray | float
    Rminus: np.ndarray | float


def shorthands(rho, z, d: float) -> ShorthandValues:
    """Evaluate the shorthand combinations; total on all real inputs."""
    if d < 0:
        raise ValueError(f"hole diameter must be non-negative, got {d}")
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    quarter = d * d / 4.0
    rho2 = rho * rho
    z2 = z * z
    return ShorthandValues(
        P=rho2 + z2 - quarter,
        Qplus=rho2 + z2 + quarter,
        Qminus=rho2 - z2 - quarter,
        Rplus=np.sqrt((rho + d / 2.0) ** 2 + z2),
        Rminus=np.sqrt((rho - d / 2.0) ** 2 + z2),
    )


def xi_coefficients(rho, z, d: float):
    """Geometry coefficients (Xi_rho, Xi_phi, Xi_z) of the image potential.

    Parameters
    ----------
    rho, z : float or array
        Evaluation points, natural length.  The physical half-space is
        z > 0; off the plate plane the expressions continue analytically
        (principal-value arctan).
    d : float
        Hole diameter.  Below D_ZERO_SWITCH the closed plain-plate forms
        Xi_rho = Xi_phi = pi/(4 z^3), Xi_z = pi/(2 z^3) are returned.

    Returns
    -------
    (Xi_rho, Xi_phi, Xi_z), units 1/length^3, shaped by broadcasting.

    Raises
    ------
    SingularPointError
        If any point lies on the rim circle (R+ = 0 or R- = 0) or on the
        plate plane z = 0, where 1/z^3 has no pointwise limit expression.
    """
    if d < 0:
        raise ValueError(f"hole diameter must be non-negative, got {d}")
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    scalar = rho.ndim == 0 and z.ndim == 0

    if d < D_ZERO_SWITCH:
        if np.any(z <= 0):
            raise SingularPointError(
                "plain-plate (d = 0) coefficients require z > 0"
            )
        inv_z3 = 1.0 / (z * z * z)
        xi_rho = (math.pi / 4.0) * inv_z3
        xi_phi = xi_rho
        xi_z = (math.pi / 2.0) * inv_z3
        if scalar:
            return float(xi_rho), float(xi_phi), float(xi_z)
        return xi_rho, xi_phi, xi_z

    if np.any(z == 0):
        raise SingularPointError(
            "evaluation on the plate plane z = 0 is not defined pointwise; "
            "grids must be offset off z = 0"
        )
    quarter = d * d / 4.0
    rho2 = rho * rho
    z2 = z * z
    P = rho2 + z2 - quarter
    Qplus = rho2 + z2 + quarter
    Qminus = rho2 - z2 - quarter
    r2 = ((rho + d / 2.0) ** 2 + z2) * ((rho - d / 2.0) ** 2 + z2)  # R+^2 R-^2
    if np.any(r2 == 0):
        raise SingularPointError(
            f"evaluation on the rim circle rho = +-{d / 2}, z = 0"
        )
    r3 = r2 * np.sqrt(r2)  # R+^3 R-^3
    r4 = r2 * r2
    r5 = r4 * np.sqrt(r2)
    ring = d**3 / (6.0 * r3)
    arc = math.pi / 2.0 + np.arctan(P / (d * z))
    inv_4z3 = 1.0 / (4.0 * z * z2)

    xi_rho = (
        d * rho2 / r5 * (P**2 - d * d * z2)
        + ring
        + inv_4z3 * (arc + d * z / r4 * Qminus**2 * P)
    )
    xi_phi = ring + inv_4z3 * (arc + d * z / r2 * P)
    xi_z = (
        d / r5 * (z2 * Qplus**2 - quarter * Qminus**2)
        + ring
        + 2.0 * inv_4z3 * (arc + d * z / r2 * Qminus + 2.0 * d * rho2 * z * z2 / r4 * P)
    )
    if scalar:
        return float(xi_rho), float(xi_phi), float(xi_z)
    return xi_rho, xi_phi, xi_z


@dataclass(frozen=True)
class PotentialParams:
    """Frozen parameter set of one potential landscape.

    C3 is in natural energy * length^3; theta in radians; d and epsilon in
    natural length.  V0 = V(0, epsilon; theta, 0) and V_less =
    V(0, epsilon; theta, d) are derived on construction and define the
    constant continuation levels of the extended potential.
    invert_hole_continuation flips which side of |rho| = d/2 receives the
    quadratic continuation (sensitivity study switch).
    """

    C3: float
    theta: float
    d: float
    epsilon: float
    invert_hole_continuation: bool = False
    V0: float = field(init=False)
    V_less: float = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi / 2.0:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")
        if self.d < 0:
            raise ValueError(f"hole diameter must be non-negative, got {self.d}")
        if self.epsilon <= 0:
            raise ValueError(f"cut-off epsilon must be positive, got {self.epsilon}")
        if self.C3 <= 0:
            raise ValueError(f"C3 must be positive, got {self.C3}")
        object.__setattr__(self, "V0", _bare_on_axis(self.epsilon, self.theta, 0.0, self.C3))
        object.__setattr__(self, "V_less", _bare_on_axis(self.epsilon, self.theta, self.d, self.C3))
        if not (self.V0 < 0 and self.V_less < 0):
            raise ValueError("continuation levels must be attractive (negative)")


def _bare_on_axis(z: float, theta: float, d: float, C3: float) -> float:
    xi_rho, _, xi_z = xi_coefficients(0.0, z, d)
    return -(C3 / math.pi) * (xi_rho * math.sin(theta) ** 2 + xi_z * math.cos(theta) ** 2)


def bare_potential(rho, z, params: PotentialParams):
    """Exact image potential V(rho, z; theta, d); attractive (<= 0) for z > 0."""
    xi_rho, _, xi_z = xi_coefficients(rho, z, params.d)
    s2 = math.sin(params.theta) ** 2
    c2 = math.cos(params.theta) ** 2
    return -(params.C3 / math.pi) * (xi_rho * s2 + xi_z * c2)


def extended_potential(rho, z, params: PotentialParams):
    """Piecewise continuation of the bare potential through the plate.

    Branches, in natural length with eps = params.epsilon:
      z > eps                        -> bare potential
      0 <= z <= eps and |rho| < d/2  -> -3 V0 z^2 / (2 eps^2) + 5 V0 / 2
      z < 0 and |rho| < d/2          -> 5 V0 / 2
      otherwise                      -> V_less
    Total on the whole plane (never raises).
    """
    shape = np.broadcast_shapes(np.shape(rho), np.shape(z))
    rho_b, z_b = np.broadcast_arrays(
        np.asarray(rho, dtype=float), np.asarray(z, dtype=float)
    )
    scalar = shape == ()
    rho_b = np.atleast_1d(rho_b)
    z_b = np.atleast_1d(z_b)

    eps = params.epsilon
    in_hole = np.abs(rho_b) < params.d / 2.0
    if params.invert_hole_continuation:
        in_hole = ~in_hole
    above = z_b > eps
    ramp = (~above) & (z_b >= 0.0) & in_hole
    behind = (z_b < 0.0) & in_hole

    out = np.full(z_b.shape, params.V_less, dtype=float)
    out[behind] = 2.5 * params.V0
    out[ramp] = -1.5 * params.V0 * (z_b[ramp] / eps) ** 2 + 2.5 * params.V0
    if np.any(above):
        out[above] = bare_potential(rho_b[above], z_b[above], params)
    return float(out[0]) if scalar else out.reshape(shape)


def potential_slice_1d(z, theta: float, d: float, C3: float):
    """On-axis (rho = 0) bare potential; the 1D reduction used for WKB checks.

    For d = 0 this is -C3 (sin^2(theta)/4 + cos^2(theta)/2) / z^3.
    """
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr <= 0):
        raise ValueError("the 1D slice is defined for z > 0 only")
    xi_rho, _, xi_z = xi_coefficients(np.zeros_like(z_arr), z_arr, d)
    s2 = math.sin(theta) ** 2
    c2 = math.cos(theta) ** 2
    out = -(C3 / math.pi) * (xi_rho * s2 + xi_z * c2)
    return float(out) if np.ndim(z) == 0 else out


class PowerLawSlice:
    """Plain-plate 1D slice V(z) = -K / z^3 with analytic derivatives."""

    def __init__(self, K: float):
        if K <= 0:
            raise ValueError(f"strength K must be positive, got {K}")
        self.K = K

    def __call__(self, z):
        return -self.K / np.asarray(z, dtype=float) ** 3

    def deriv(self, z):
        return 3.0 * self.K / np.asarray(z, dtype=float) ** 4

    def deriv2(self, z):
        return -12.0 * self.K / np.asarray(z, dtype=float) ** 5


def badlands(z, E: float, v1d: Callable):
    """WKB-breakdown measure Q(z) = [4(V-E)V'' - 5 V'^2] / [32 (E-V)^3].

    Peaks of Q mark where the local wave vector changes on the scale of the
    de Broglie wavelength, i.e. where quantum reflection occurs.  Uses
    analytic derivatives when v1d provides deriv/deriv2 (the plain-plate
    power law), otherwise 5-point central differences with step z/1000.

    Raises
    ------
    ValueError
        If any point is classically forbidden (E <= V(z)).
    """
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr <= 0):
        raise ValueError("badlands is evaluated for z > 0 only")
    v = np.asarray(v1d(z_arr), dtype=float)
    if np.any(E <= v):
        raise ValueError("classically forbidden point: E <= V(z)")
    if hasattr(v1d, "deriv") and hasattr(v1d, "deriv2"):
        d1 = np.asarray(v1d.deriv(z_arr), dtype=float)
        d2 = np.asarray(v1d.deriv2(z_arr), dtype=float)
    else:
        h = z_arr / 1000.0
        vp2, vp1 = v1d(z_arr + 2 * h), v1d(z_arr + h)
        vm1, vm2 = v1d(z_arr - h), v1d(z_arr - 2 * h)
        d1 = (-vp2 + 8 * vp1 - 8 * vm1 + vm2) / (12.0 * h)
        d2 = (-vp2 + 16 * vp1 - 30 * v + 16 * vm1 - vm2) / (12.0 * h * h)
    q = (4.0 * (v - E) * d2 - 5.0 * d1 * d1) / (32.0 * (E - v) ** 3)
    return float(q) if np.ndim(z) == 0 else q


class NoInteriorMaximumError(RuntimeError):
    """Badlands scan found no interior peak; carries the scan for diagnosis."""

    def __init__(self, message: str, z_scan: np.ndarray, q_scan: np.ndarray):
        super().__init__(message)
        self.z_scan = z_scan
        self.q_scan = q_scan


def reflection_distance(
    atom: AtomSpec,
    v: float,
    units: UnitSystem | None = None,
    z_bounds: tuple[float, float] = (1e-6, 10.0),
    n_scan: int = 2000,
) -> float:
    """Distance (natural length) where quantum reflection happens.

    Locates the maximum of the badlands measure for the plain-plate slice
    V(z) = -C3/(2 z^3) at incident speed v (m/s): a logarithmic scan over
    z_bounds followed by a bounded golden-section refinement to 0.1%
    relative.
    """
    if units is None:
        units = natural_units(atom)
    E, _ = kinetic_params(atom, v, units)
    c3 = units.C3_from_si(atom.require_C3())
    slice_1d = PowerLawSlice(c3 / 2.0)

    z_scan = np.geomspace(z_bounds[0], z_bounds[1], n_scan)
    q_scan = badlands(z_scan, E, slice_1d)
    i = int(np.argmax(q_scan))
    if i == 0 or i == n_scan - 1:
        raise NoInteriorMaximumError(
            f"no interior badlands maximum in [{z_bounds[0]}, {z_bounds[1]}] "
            f"(argmax at scan edge, Q = {q_scan[i]:.3e})",
            z_scan,
            q_scan,
        )
    res = minimize_scalar(
        lambda zz: -badlands(zz, E, slice_1d),
        bounds=(z_scan[i - 1], z_scan[i + 1]),
        method="bounded",
        options={"xatol": 1e-3 * z_scan[i]},
    )
    return float(res.x)
