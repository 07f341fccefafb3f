"""Sweep orchestration: checkpointed parameter sweeps, convergence studies
and figure export."""

from __future__ import annotations

import math
import platform
import time
import warnings
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._version import __version__
from .analysis import reflectivity_momentum, reflectivity_position
from .config import RunConfig
from .field import make_grid, gaussian_packet
from .figures import (
    render_heatmap,
    render_hole_trend,
    render_potential_slice,
)
from .io import (
    SWEEP_COLUMNS,
    append_done_key,
    append_sweep_row,
    init_sweep_csv,
    read_done_index,
    read_sweep_csv,
)
from .potential import PotentialParams, extended_potential
from .propagator import PropagationConfig, propagate

FIGURE_IDS = ("hole-trend", "heatmap", "potential-slice")


@dataclass
class SweepResult:
    """Rows (as read back from the CSV) plus file-level metadata."""

    rows: list[dict]
    metadata: dict
    path: Path | None = None
    failures: list[str] = field(default_factory=list)

    @property
    def n_failed(self) -> int:
        return sum(1 for row in self.rows if row.get("status") == "failed")


def row_key(d: float, theta: float) -> str:
    """Canonical identity of a sweep row, stable across resumes."""
    return f"d={float(d)!r};theta_over_pi={round(theta / math.pi, 10)!r}"


def plan_rows(config: RunConfig) -> list[tuple[float, float]]:
    """(d, theta) tasks in canonical order; d = 0 leads every theta group.

    The d = 0 baseline is required by the normalization step and is added
    (with a warning) when missing from the configured diameters.
    """
    d_list = list(dict.fromkeys(float(d) for d in config.d_list))
    if 0.0 not in d_list:
        warnings.warn(
            "d = 0 baseline missing from sweep; adding it for normalization",
            stacklevel=2,
        )
        d_list = [0.0] + d_list
    else:
        d_list.remove(0.0)
        d_list = [0.0] + d_list
    tasks = []
    for theta in dict.fromkeys(config.theta_list):
        for d in d_list:
            tasks.append((d, float(theta)))
    return tasks


def natural_C3(config: RunConfig) -> float:
    """The configured atom's C3 in natural units (catalog stores SI)."""
    units = config.units
    return units.C3_from_si(config.atom.require_C3())


def run_single(
    config: RunConfig,
    d: float,
    theta: float,
    n_rho: int | None = None,
    n_z: int | None = None,
) -> dict:
    """One propagation; returns a sweep row (without R_norm)."""
    n_rho = config.N_rho if n_rho is None else n_rho
    n_z = config.N_z if n_z is None else n_z
    _, p0 = config.kinetics()
    started = time.perf_counter()
    grid = make_grid(config.extent, n_rho, n_z, d)
    params = PotentialParams(
        C3=natural_C3(config),
        theta=theta,
        d=d,
        epsilon=config.epsilon,
        invert_hole_continuation=config.invert_hole_continuation,
    )
    packet = gaussian_packet(
        grid, r=config.packet_r, theta=theta, sigma=config.packet_sigma, p0=p0
    )
    prop = PropagationConfig(
        dt=config.dt,
        t_final=config.t_final,
        absorber_width=config.absorber_width,
        absorber_strength=config.absorber_strength,
    )
    result = propagate(packet, params, prop, workers=config.fft_workers)
    runtime = time.perf_counter() - started
    return {
        "atom": config.atom.name,
        "v_m_per_s": config.velocity,
        "d_um": d,
        "theta_over_pi": round(theta / math.pi, 10),
        "N_rho": n_rho,
        "N_z": n_z,
        "epsilon_um": config.epsilon,
        "dt": config.dt,
        "t_final": result.t_final,
        "R_pos": reflectivity_position(result.final),
        "R_mom": reflectivity_momentum(result.final),
        "R_norm": None,
        "norm_final": result.final.norm(),
        "runtime_s": runtime,
        "status": "ok",
        "error": "",
    }


def _failed_row(config: RunConfig, d: float, theta: float, exc: Exception) -> dict:
    message = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    return {
        "atom": config.atom.name,
        "v_m_per_s": config.velocity,
        "d_um": d,
        "theta_over_pi": round(theta / math.pi, 10),
        "N_rho": config.N_rho,
        "N_z": config.N_z,
        "epsilon_um": config.epsilon,
        "dt": config.dt,
        "t_final": config.t_final,
        "R_pos": None,
        "R_mom": None,
        "R_norm": None,
        "norm_final": None,
        "runtime_s": None,
        "status": "failed",
        "error": message,
    }


def _pool_entry(task: tuple[RunConfig, float, float]) -> dict:
    config, d, theta = task
    try:
        return run_single(config, d, theta)
    except Exception as exc:  # per-row failures are recorded, not raised
        return _failed_row(config, d, theta, exc)


def sweep_metadata(config: RunConfig) -> dict:
    meta = {f"config.{k}": v for k, v in config.describe().items()}
    meta["config_hash"] = config.content_hash
    meta["software_version"] = __version__
    meta["platform"] = platform.platform()
    return meta


def run_sweep(
    config: RunConfig,
    output: str | Path,
    workers: int = 1,
    progress=None,
) -> SweepResult:
    """Run (or resume) the full (d, theta) sweep, checkpointing every row.

    Rows are appended in canonical order regardless of worker count, so an
    interrupted-and-resumed sweep and a parallel sweep produce byte-identical
    CSVs apart from wall-time values.  Per-row failures are recorded and
    skipped; the sweep raises only if every row failed.
    """
    output = Path(output)
    done_path = output.with_suffix(output.suffix + ".done")
    tasks = plan_rows(config)

    if output.exists():
        metadata, existing_rows = read_sweep_csv(output)
        if metadata.get("config_hash") != config.content_hash:
            raise ValueError(
                f"{output} was produced by config {metadata.get('config_hash')}, "
                f"not {config.content_hash}; refusing to mix sweeps"
            )
        done = read_done_index(done_path)
    else:
        metadata = sweep_metadata(config)
        init_sweep_csv(output, metadata)
        done_path.unlink(missing_ok=True)
        existing_rows = []
        done = set()

    baselines: dict[float, float] = {}
    for row in existing_rows:
        if row["d_um"] == 0.0 and row["status"] == "ok":
            baselines[row["theta_over_pi"]] = row["R_pos"]

    pending = [(d, theta) for d, theta in tasks if row_key(d, theta) not in done]

    def finish_row(d: float, theta: float, row: dict) -> None:
        frac = round(theta / math.pi, 10)
        if row["status"] == "ok":
            if d == 0.0:
                baselines[frac] = row["R_pos"]
                row["R_norm"] = 1.0
            elif frac in baselines and baselines[frac] != 0.0:
                row["R_norm"] = row["R_pos"] / baselines[frac]
        append_sweep_row(output, row)
        append_done_key(done_path, row_key(d, theta))
        if progress is not None:
            progress(row)

    if workers <= 1:
        for d, theta in pending:
            finish_row(d, theta, _pool_entry((config, d, theta)))
    else:
        # Row workers own whole propagations; FFT parallelism stays off so the
        # numbers match the serial path bit for bit.
        serial_config = config
        if config.fft_workers != 1:
            from dataclasses import replace

            serial_config = replace(config, fft_workers=1)
        order = {row_key(d, theta): i for i, (d, theta) in enumerate(pending)}
        buffered: dict[int, tuple[float, float, dict]] = {}
        next_index = 0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_pool_entry, (serial_config, d, theta)): (d, theta)
                for d, theta in pending
            }
            remaining = set(futures)
            while remaining:
                finished, remaining = wait(remaining, return_when=FIRST_COMPLETED)
                for future in finished:
                    d, theta = futures[future]
                    buffered[order[row_key(d, theta)]] = (d, theta, future.result())
                while next_index in buffered:
                    d, theta, row = buffered.pop(next_index)
                    finish_row(d, theta, row)
                    next_index += 1

    metadata, rows = read_sweep_csv(output)
    result = SweepResult(
        rows=rows,
        metadata=metadata,
        path=output,
        failures=[row["error"] for row in rows if row["status"] == "failed"],
    )
    if rows and all(row["status"] == "failed" for row in rows):
        raise RuntimeError(
            f"every sweep row failed; first error: {result.failures[0]}"
        )
    return result


def convergence_study(
    config: RunConfig,
    d_list: list[float],
    epsilon_list: list[float],
    nz_list: list[int],
    n_rho: int,
) -> tuple[list[dict], list[dict]]:
    """Grid-resolution study at theta = 0.

    Returns per-run rows (with the running mean over N_z) and a summary per
    (epsilon, d) with the fluctuation amplitude (max - min) over the three
    largest and three smallest N_z.
    """
    if list(nz_list) != sorted(nz_list):
        raise ValueError("Nz_list must be ascending")
    from dataclasses import replace

    rows: list[dict] = []
    summary: list[dict] = []
    for epsilon in epsilon_list:
        for d in d_list:
            cfg = replace(config, epsilon=float(epsilon))
            values = []
            for n_z in nz_list:
                row = run_single(cfg, float(d), 0.0, n_rho=n_rho, n_z=int(n_z))
                values.append(row["R_pos"])
                rows.append(
                    {
                        "atom": cfg.atom.name,
                        "epsilon_um": float(epsilon),
                        "d_um": float(d),
                        "N_rho": n_rho,
                        "N_z": int(n_z),
                        "R_pos": row["R_pos"],
                        "running_mean": float(np.mean(values)),
                    }
                )
            arr = np.asarray(values)
            summary.append(
                {
                    "atom": cfg.atom.name,
                    "epsilon_um": float(epsilon),
                    "d_um": float(d),
                    "amplitude_largest3": float(arr[-3:].max() - arr[-3:].min()),
                    "amplitude_smallest3": float(arr[:3].max() - arr[:3].min()),
                }
            )
    return rows, summary


def _require_coverage(rows, theta_fracs, d_values):
    have = {(row["theta_over_pi"], row["d_um"]) for row in rows}
    missing = [
        (frac, d)
        for frac in theta_fracs
        for d in d_values
        if (frac, d) not in have
    ]
    if missing:
        pts = ", ".join(f"(theta={f}pi, d={d})" for f, d in missing[:12])
        raise ValueError(f"sweep does not cover requested points: {pts}")


def figure_export(
    result: SweepResult | list[dict],
    figure_id: str,
    outdir: str | Path,
    config: RunConfig | None = None,
    theta_fracs: list[float] | None = None,
    d_values: list[float] | None = None,
) -> list[Path]:
    """Write the data files and the rendered PNG for one figure.

    hole-trend: tidy CSV + one line file per theta + PNG.
    heatmap: tidy CSV + gnuplot matrix + PNG.
    potential-slice: on-axis V_C(z) CSV for three diameters + PNG (needs
    `config` for the potential parameters).
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = result.rows if isinstance(result, SweepResult) else result
    written: list[Path] = []

    if figure_id == "potential-slice":
        if config is None:
            raise ValueError("potential-slice export needs the run config")
        if d_values is None:
            available = sorted({row["d_um"] for row in rows}) if rows else [0.0]
            d_values = sorted({available[0], available[len(available) // 2],
                               available[-1]})
        z = np.linspace(-0.5, 3.0, 1401)
        c3 = natural_C3(config)
        slices = {}
        for d in d_values:
            params = PotentialParams(
                C3=c3,
                theta=0.0,
                d=float(d),
                epsilon=config.epsilon,
                invert_hole_continuation=config.invert_hole_continuation,
            )
            slices[float(d)] = (z, extended_potential(0.0, z, params))
        csv_path = outdir / "potential_slice.csv"
        with open(csv_path, "w") as handle:
            handle.write("z_um," + ",".join(f"V_d{d:g}" for d in d_values) + "\n")
            for i, zi in enumerate(z):
                vals = ",".join(repr(float(slices[d][1][i])) for d in d_values)
                handle.write(f"{zi!r},{vals}\n")
        written.append(csv_path)
        written.append(render_potential_slice(slices, outdir / "potential_slice.png"))
        return written

    ok_rows = [row for row in rows if row.get("status", "ok") == "ok"]
    if not ok_rows:
        raise ValueError("no successful rows to export")
    if theta_fracs is None:
        theta_fracs = sorted({row["theta_over_pi"] for row in ok_rows})
    if d_values is None:
        d_values = sorted({row["d_um"] for row in ok_rows})
    _require_coverage(ok_rows, theta_fracs, d_values)
    selected = [
        row
        for row in ok_rows
        if row["theta_over_pi"] in theta_fracs and row["d_um"] in d_values
    ]

    if figure_id == "hole-trend":
        csv_path = outdir / "hole_trend.csv"
        with open(csv_path, "w") as handle:
            handle.write("theta_over_pi,d_um,R_pos,R_norm\n")
            for row in sorted(
                selected, key=lambda r: (r["theta_over_pi"], r["d_um"])
            ):
                handle.write(
                    f"{row['theta_over_pi']!r},{row['d_um']!r},"
                    f"{row['R_pos']!r},{row['R_norm']!r}\n"
                )
        written.append(csv_path)
        for frac in theta_fracs:
            line_path = outdir / f"hole_trend_theta_{frac:g}pi.dat"
            with open(line_path, "w") as handle:
                handle.write("# d_um R_norm R_pos\n")
                for row in sorted(
                    (r for r in selected if r["theta_over_pi"] == frac),
                    key=lambda r: r["d_um"],
                ):
                    handle.write(
                        f"{row['d_um']!r} {row['R_norm']!r} {row['R_pos']!r}\n"
                    )
            written.append(line_path)
        written.append(render_hole_trend(selected, outdir / "hole_trend.png"))
        return written

    if figure_id == "heatmap":
        matrix = np.full((len(theta_fracs), len(d_values)), np.nan)
        lookup = {
            (row["theta_over_pi"], row["d_um"]): row["R_norm"]
            for row in selected
            if row["R_norm"] is not None
        }
        for i, frac in enumerate(theta_fracs):
            for j, d in enumerate(d_values):
                matrix[i, j] = lookup.get((frac, d), np.nan)
        csv_path = outdir / "heatmap.csv"
        with open(csv_path, "w") as handle:
            handle.write("theta_over_pi,d_um,R_norm\n")
            for i, frac in enumerate(theta_fracs):
                for j, d in enumerate(d_values):
                    handle.write(f"{frac!r},{d!r},{matrix[i, j]!r}\n")
        written.append(csv_path)
        matrix_path = outdir / "heatmap.dat"
        with open(matrix_path, "w") as handle:
            handle.write("# gnuplot matrix: rows theta_over_pi, cols d_um\n")
            handle.write("# d_um: " + " ".join(f"{d:g}" for d in d_values) + "\n")
            handle.write(
                "# theta_over_pi: "
                + " ".join(f"{f:g}" for f in theta_fracs)
                + "\n"
            )
            for i in range(len(theta_fracs)):
                handle.write(
                    " ".join(repr(float(v)) for v in matrix[i]) + "\n"
                )
        written.append(matrix_path)
        written.append(
            render_heatmap(d_values, theta_fracs, matrix, outdir / "heatmap.png")
        )
        return written

    raise ValueError(f"unknown figure id {figure_id!r}; choose from {FIGURE_IDS}")
