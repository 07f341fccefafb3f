"""Binary field dumps and sweep CSV persistence.

Binary layout (little endian, documented in docs/FORMATS.md):
  header: int64 N_rho, int64 N_z, float64 extent_rho, float64 extent_z,
          float64 time  (40 bytes)
  field dump: real plane then imaginary plane, each N_rho x N_z float64,
          row-major with z fastest
  potential dump: a single real plane
"""

from __future__ import annotations

import csv
import io as _io
import struct
from pathlib import Path

import numpy as np

from .field import Grid2D, WaveField, make_grid

_HEADER = struct.Struct("<qqddd")

SWEEP_COLUMNS = [
    "atom",
    "v_m_per_s",
    "d_um",
    "theta_over_pi",
    "N_rho",
    "N_z",
    "epsilon_um",
    "dt",
    "t_final",
    "R_pos",
    "R_mom",
    "R_norm",
    "norm_final",
    "runtime_s",
    "status",
    "error",
]
_FLOAT_COLUMNS = {
    "v_m_per_s",
    "d_um",
    "theta_over_pi",
    "epsilon_um",
    "dt",
    "t_final",
    "R_pos",
    "R_mom",
    "R_norm",
    "norm_final",
    "runtime_s",
}
_INT_COLUMNS = {"N_rho", "N_z"}


def _write_header(handle, grid: Grid2D, time: float) -> None:
    handle.write(
        _HEADER.pack(grid.N_rho, grid.N_z, grid.extent_rho, grid.extent_z, time)
    )


def _read_header(handle) -> tuple[Grid2D, float]:
    raw = handle.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        raise ValueError("truncated dump: incomplete header")
    n_rho, n_z, ext_rho, ext_z, time = _HEADER.unpack(raw)
    grid = make_grid((ext_rho, ext_z), n_rho, n_z)
    return grid, time


def _read_plane(handle, grid: Grid2D) -> np.ndarray:
    count = grid.N_rho * grid.N_z
    plane = np.fromfile(handle, dtype="<f8", count=count)
    if plane.size != count:
        raise ValueError("truncated dump: incomplete data plane")
    return plane.reshape(grid.N_rho, grid.N_z)


def write_field(path: str | Path, field: WaveField) -> Path:
    path = Path(path)
    with open(path, "wb") as handle:
        _write_header(handle, field.grid, field.time)
        np.ascontiguousarray(field.psi.real, dtype="<f8").tofile(handle)
        np.ascontiguousarray(field.psi.imag, dtype="<f8").tofile(handle)
    return path


def read_field(path: str | Path) -> WaveField:
    with open(path, "rb") as handle:
        grid, time = _read_header(handle)
        real = _read_plane(handle, grid)
        imag = _read_plane(handle, grid)
    return WaveField(grid, real + 1j * imag, time)


def write_potential(path: str | Path, grid: Grid2D, table: np.ndarray) -> Path:
    if table.shape != (grid.N_rho, grid.N_z):
        raise ValueError(
            f"table shape {table.shape} does not match grid "
            f"({grid.N_rho}, {grid.N_z})"
        )
    path = Path(path)
    with open(path, "wb") as handle:
        _write_header(handle, grid, 0.0)
        np.ascontiguousarray(table, dtype="<f8").tofile(handle)
    return path


def read_potential(path: str | Path) -> tuple[Grid2D, np.ndarray]:
    with open(path, "rb") as handle:
        grid, _ = _read_header(handle)
        table = _read_plane(handle, grid)
    return grid, table


def init_sweep_csv(path: str | Path, metadata: dict) -> Path:
    """Create the CSV with `# key=value` metadata comments and the header."""
    path = Path(path)
    with open(path, "w", newline="") as handle:
        for key in sorted(metadata):
            handle.write(f"# {key}={metadata[key]}\n")
        writer = csv.writer(handle)
        writer.writerow(SWEEP_COLUMNS)
    return path


def append_sweep_row(path: str | Path, row: dict) -> None:
    with open(path, "a", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(_format_row(row))


def _format_row(row: dict) -> list[str]:
    out = []
    for column in SWEEP_COLUMNS:
        value = row.get(column, "")
        if value is None or value == "":
            out.append("")
        elif column in _FLOAT_COLUMNS:
            out.append(repr(float(value)))
        else:
            out.append(str(value))
    return out


def read_sweep_csv(path: str | Path) -> tuple[dict, list[dict]]:
    """Parse metadata comments and typed rows back out of a sweep CSV."""
    path = Path(path)
    metadata: dict = {}
    body = _io.StringIO()
    with open(path, newline="") as handle:
        for line in handle:
            if line.startswith("#"):
                stripped = line[1:].strip()
                if "=" in stripped:
                    key, _, value = stripped.partition("=")
                    metadata[key.strip()] = value.strip()
                continue
            body.write(line)
    body.seek(0)
    rows = []
    for raw in csv.DictReader(body):
        row: dict = {}
        for key, value in raw.items():
            if value == "" or value is None:
                row[key] = None
            elif key in _FLOAT_COLUMNS:
                row[key] = float(value)
            elif key in _INT_COLUMNS:
                row[key] = int(value)
            else:
                row[key] = value
        rows.append(row)
    return metadata, rows


def read_done_index(path: str | Path) -> set[str]:
    path = Path(path)
    if not path.exists():
        return set()
    return {line.strip() for line in path.read_text().splitlines() if line.strip()}


def append_done_key(path: str | Path, key: str) -> None:
    with open(path, "a") as handle:
        handle.write(key + "\n")
