"""Reflectivity functionals, expectation values and sweep normalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import WaveField


def reflectivity_position(field: WaveField) -> float:
    """Probability weight in the half-space z > 0, midpoint quadrature."""
    mask = field.grid.z > 0.0
    dens = np.abs(field.psi[:, mask]) ** 2
    return float(np.sum(dens) * field.grid.cell_area)


def reflectivity_momentum(field: WaveField) -> float:
    """Probability weight with positive z-momentum.

    The spectrum is normalized so total momentum-space probability equals
    the position-space norm; modes with k_z exactly 0 count as neither
    reflected nor transmitted.
    """
    spec = np.abs(field.spectrum()) ** 2
    total = float(np.sum(spec))
    if total == 0.0:
        return 0.0
    positive = float(np.sum(spec[:, field.grid.k_z > 0.0]))
    return positive / total * field.norm()


@dataclass(frozen=True)
class ExpectationValues:
    """First/second position moments and first momentum moments."""

    rho: float
    z: float
    krho: float
    kz: float
    sigma_rho: float
    sigma_z: float


def expectation_values(field: WaveField) -> ExpectationValues:
    """Moments of |psi|^2 and of the spectrum; field need not be normalized
    (moments are self-normalized)."""
    grid = field.grid
    dens = np.abs(field.psi) ** 2
    total = dens.sum()
    dens_rho = dens.sum(axis=1) / total
    dens_z = dens.sum(axis=0) / total
    mean_rho = float(dens_rho @ grid.rho)
    mean_z = float(dens_z @ grid.z)
    var_rho = float(dens_rho @ (grid.rho - mean_rho) ** 2)
    var_z = float(dens_z @ (grid.z - mean_z) ** 2)

    spec = np.abs(field.spectrum()) ** 2
    spec_total = spec.sum()
    mean_krho = float((spec.sum(axis=1) / spec_total) @ grid.k_rho)
    mean_kz = float((spec.sum(axis=0) / spec_total) @ grid.k_z)

    return ExpectationValues(
        rho=mean_rho,
        z=mean_z,
        krho=mean_krho,
        kz=mean_kz,
        sigma_rho=float(np.sqrt(var_rho)),
        sigma_z=float(np.sqrt(var_z)),
    )


def normalize_sweep(rows: list[dict]) -> list[dict]:
    """Add R_norm = R_pos(d, theta) / R_pos(0, theta) to sweep rows.

    Rows are dicts carrying at least d, theta and R_pos.  Every theta group
    must contain its d = 0 baseline.  Returns new dicts; R_norm(0, theta)
    is exactly 1.
    """
    baselines: dict[float, float] = {}
    for row in rows:
        if row["d"] == 0.0:
            baselines[row["theta"]] = row["R_pos"]
    missing = sorted({row["theta"] for row in rows} - set(baselines))
    if missing:
        raise ValueError(
            f"no d = 0 baseline for theta = {missing}; cannot normalize"
        )
    out = []
    for row in rows:
        new = dict(row)
        if row["d"] == 0.0:
            new["R_norm"] = 1.0
        else:
            new["R_norm"] = row["R_pos"] / baselines[row["theta"]]
        out.append(new)
    return out
