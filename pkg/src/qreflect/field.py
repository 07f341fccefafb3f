"""2D grid, spectral wavenumbers and Gaussian wavepacket initialization.

Coordinates are (rho, z) treated as Cartesian; the plate sits at z = 0.
Arrays are row-major with shape (N_rho, N_z), z on the fast axis.  Grid
nodes are offset half a cell so no node lies on the plate plane z = 0,
keeping every sample off the rim circle of the hole.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import fft2, fftfreq

MIN_POINTS = 64  # smallest sensible transform size (2^6)


def _check_power_of_two(n: int, name: str) -> None:
    if n < MIN_POINTS or (n & (n - 1)) != 0:
        raise ValueError(
            f"{name} must be a power of two >= {MIN_POINTS}, got {n}"
        )


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Uniform centered grid over rho, z in [-extent/2, extent/2]."""

    extent_rho: float
    extent_z: float
    N_rho: int
    N_z: int
    spacing_rho: float = field(init=False)
    spacing_z: float = field(init=False)
    rho: np.ndarray = field(init=False, repr=False)
    z: np.ndarray = field(init=False, repr=False)
    k_rho: np.ndarray = field(init=False, repr=False)
    k_z: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.extent_rho <= 0 or self.extent_z <= 0:
            raise ValueError("grid extents must be positive")
        _check_power_of_two(self.N_rho, "N_rho")
        _check_power_of_two(self.N_z, "N_z")
        d_rho = self.extent_rho / self.N_rho
        d_z = self.extent_z / self.N_z
        object.__setattr__(self, "spacing_rho", d_rho)
        object.__setattr__(self, "spacing_z", d_z)
        # half-cell offset keeps every node off the plate plane z = 0
        object.__setattr__(
            self, "rho", (np.arange(self.N_rho) + 0.5) * d_rho - self.extent_rho / 2.0
        )
        object.__setattr__(
            self, "z", (np.arange(self.N_z) + 0.5) * d_z - self.extent_z / 2.0
        )
        object.__setattr__(self, "k_rho", 2.0 * np.pi * fftfreq(self.N_rho, d=d_rho))
        object.__setattr__(self, "k_z", 2.0 * np.pi * fftfreq(self.N_z, d=d_z))

    @property
    def cell_area(self) -> float:
        return self.spacing_rho * self.spacing_z

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Broadcastable (rho column, z row) views of the node coordinates."""
        return self.rho[:, np.newaxis], self.z[np.newaxis, :]


def make_grid(extent, N_rho: int, N_z: int, d: float = 0.0) -> Grid2D:
    """Build the centered grid; extent is a scalar (square domain) or a
    (extent_rho, extent_z) pair.  The half-cell offset guarantees no node
    coincides with the rim (rho = +-d/2, z = 0) for any d."""
    if np.ndim(extent) == 0:
        extent_rho = extent_z = float(extent)
    else:
        extent_rho, extent_z = (float(e) for e in extent)
    if d < 0:
        raise ValueError(f"hole diameter must be non-negative, got {d}")
    grid = Grid2D(extent_rho, extent_z, N_rho, N_z)
    assert not np.any(grid.z == 0.0)
    return grid


@dataclass(eq=False)
class WaveField:
    """Complex wavefunction samples on a grid at one instant."""

    grid: Grid2D
    psi: np.ndarray
    time: float = 0.0

    def norm(self) -> float:
        """Total probability, midpoint quadrature."""
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.cell_area)

    def copy(self) -> "WaveField":
        return WaveField(self.grid, self.psi.copy(), self.time)

    def spectrum(self) -> np.ndarray:
        """Unnormalized FFT of psi (same shape, standard wavenumber order)."""
        return fft2(self.psi)


def gaussian_packet(
    grid: Grid2D, r: float, theta: float, sigma: float, p0: float
) -> WaveField:
    """Normalized Gaussian aimed at the origin.

    Center (z0, rho0) = (r cos(theta), r sin(theta)); momentum
    -p0 (cos(theta), sin(theta)).  sigma is the standard deviation of the
    probability density |psi|^2 in each axis, so the amplitude carries
    exp(-[...]/(4 sigma^2)).

    Raises
    ------
    ValueError
        If the center is closer than 3 sigma to any domain edge.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if p0 <= 0:
        raise ValueError(f"p0 must be positive, got {p0}")
    z0 = r * np.cos(theta)
    rho0 = r * np.sin(theta)
    margin = 3.0 * sigma
    if (
        abs(rho0) + margin > grid.extent_rho / 2.0
        or abs(z0) + margin > grid.extent_z / 2.0
    ):
        raise ValueError(
            f"packet center (rho={rho0:.3g}, z={z0:.3g}) is within 3 sigma "
            f"of the domain edge ({grid.extent_rho} x {grid.extent_z})"
        )
    k_z0 = -p0 * np.cos(theta)
    k_rho0 = -p0 * np.sin(theta)
    rho_c, z_r = grid.mesh()
    envelope = np.exp(
        -((z_r - z0) ** 2 + (rho_c - rho0) ** 2) / (4.0 * sigma**2)
    )
    phase = np.exp(1j * (k_rho0 * rho_c + k_z0 * z_r))
    psi = (envelope * phase).astype(np.complex128)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.cell_area)
    return WaveField(grid, psi, 0.0)
