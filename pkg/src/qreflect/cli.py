"""Command line interface.

Exit codes: 0 success, 1 invalid arguments or configuration, 2 numerical
failure, 3 sweep finished with some failed rows.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from ._version import __version__
from .config import default_config, load_config
from .field import make_grid
from .harness import (
    FIGURE_IDS,
    convergence_study,
    figure_export,
    natural_C3,
    run_single,
    run_sweep,
)
from .io import read_sweep_csv, write_field, write_potential
from .oracle1d import (
    NonConvergedError,
    badlands_peak_check,
    extended_slice_1d,
    numerov_reflectivity,
)
from .potential import (
    PotentialParams,
    PowerLawSlice,
    badlands,
    extended_potential,
    reflection_distance,
)
from .propagator import BlowupError
from .units import get_atom, kinetic_params, natural_units


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of sys.exit(2), so main() owns codes."""

    def error(self, message):
        raise _UsageError(message)


def parse_theta(text: str) -> float:
    """Angle argument: either radians ('0.628') or multiples of pi ('0.2pi')."""
    text = text.strip().lower()
    if text.endswith("pi"):
        return float(text[:-2] or "1") * math.pi
    return float(text)


def _float_list(text: str) -> list[float]:
    return [float(piece) for piece in text.split(",") if piece.strip()]


def _int_list(text: str) -> list[int]:
    return [int(piece) for piece in text.split(",") if piece.strip()]


def _resolve_atom(args):
    atom = get_atom(args.atom)
    if getattr(args, "c3_natural", None) is not None:
        units = natural_units(atom)
        atom = atom.with_C3(args.c3_natural * units.energy_unit * units.L**3)
    elif getattr(args, "c3_j_m3", None) is not None:
        atom = atom.with_C3(args.c3_j_m3)
    return atom


def _add_atom_args(sub):
    sub.add_argument("--atom", required=True, help="catalog atom name")
    sub.add_argument("--velocity", type=float, required=True, help="m/s")
    sub.add_argument("--c3-natural", type=float, default=None)
    sub.add_argument("--c3-J-m3", dest="c3_j_m3", type=float, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="qreflect", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("potential-dump", help="dump the extended potential")
    p.add_argument("--config", required=True)
    p.add_argument("--d", type=float, default=0.0, help="hole diameter, um")
    p.add_argument("--theta", type=parse_theta, default=0.0)
    p.add_argument("--output", required=True)
    p.add_argument("--n-rho", type=int, default=None)
    p.add_argument("--n-z", type=int, default=None)

    p = subs.add_parser("badlands", help="WKB-breakdown diagnostic")
    _add_atom_args(p)
    p.add_argument("--output", default=None, help="optional Q(z) scan CSV")

    p = subs.add_parser("oracle1d", help="1D Numerov reflectivity cross-check")
    _add_atom_args(p)
    p.add_argument("--epsilon-um", type=float, required=True)

    p = subs.add_parser("propagate", help="single 2D propagation")
    p.add_argument("--config", required=True)
    p.add_argument("--theta", type=parse_theta, default=0.0)
    p.add_argument("--d", type=float, default=0.0)
    p.add_argument("--output", default=None, help="final field dump path")

    p = subs.add_parser("sweep", help="checkpointed (d, theta) sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--output", required=True)
    p.add_argument(
        "--workers",
        type=int,
        default=int(os.environ.get("QREFLECT_WORKERS", "1")),
    )

    p = subs.add_parser("converge", help="grid convergence study at theta = 0")
    p.add_argument("--config", required=True)
    p.add_argument("--nz", type=_int_list, required=True)
    p.add_argument("--epsilon-um", type=_float_list, required=True)
    p.add_argument("--d", type=_float_list, default=[0.0])
    p.add_argument("--n-rho", type=int, default=2**7)
    p.add_argument("--output", required=True)

    p = subs.add_parser("export", help="figure data + PNG from a sweep CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--figure", required=True, choices=FIGURE_IDS)
    p.add_argument("--outdir", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--theta", type=_float_list, default=None,
                   help="theta/pi values to include")
    p.add_argument("--d", type=_float_list, default=None)
    return parser


def _cmd_potential_dump(args) -> int:
    cfg = load_config(args.config)
    n_rho = args.n_rho or cfg.N_rho
    n_z = args.n_z or cfg.N_z
    grid = make_grid(cfg.extent, n_rho, n_z, args.d)
    params = PotentialParams(
        C3=natural_C3(cfg),
        theta=args.theta,
        d=args.d,
        epsilon=cfg.epsilon,
        invert_hole_continuation=cfg.invert_hole_continuation,
    )
    rho, z = grid.mesh()
    table = extended_potential(rho, z, params)
    path = write_potential(args.output, grid, table)
    print(f"wrote {path} ({n_rho} x {n_z}); V in [{table.min():.6g}, {table.max():.6g}]")
    return 0


def _cmd_badlands(args) -> int:
    atom = _resolve_atom(args)
    units = natural_units(atom)
    z_r = reflection_distance(atom, args.velocity, units)
    print("quantity,value")
    print(f"z_R_um,{z_r!r}")
    print(f"z_R_nm,{z_r * 1e3!r}")
    if args.output:
        import numpy as np

        E0, _ = kinetic_params(atom, args.velocity, units)
        c3n = units.C3_from_si(atom.require_C3())
        v1d = PowerLawSlice(c3n / 2.0)
        z = np.geomspace(z_r / 30, z_r * 30, 400)
        q = badlands(z, E0, v1d)
        with open(args.output, "w") as handle:
            handle.write("z_um,Q\n")
            for zi, qi in zip(z, q):
                handle.write(f"{zi!r},{qi!r}\n")
        print(f"scan,{args.output}")
    return 0


def _cmd_oracle1d(args) -> int:
    atom = _resolve_atom(args)
    units = natural_units(atom)
    E0, _ = kinetic_params(atom, args.velocity, units)
    params = PotentialParams(
        C3=units.C3_from_si(atom.require_C3()),
        theta=0.0,
        d=0.0,
        epsilon=args.epsilon_um,
    )
    r_1d = numerov_reflectivity(
        extended_slice_1d(params), E0,
        z_match=args.epsilon_um * 0.999, z_far=8.0,
    )
    report = badlands_peak_check(atom, args.velocity, units,
                                 epsilon=args.epsilon_um)
    print("quantity,value")
    print(f"R_1D,{r_1d!r}")
    print(f"z_reflection_um,{report.z_reflection!r}")
    print(f"z_max_deviation_um,{report.z_max_deviation!r}")
    print(f"overlap,{report.overlap}")
    return 0


def _cmd_propagate(args) -> int:
    cfg = load_config(args.config)
    row = run_single(cfg, args.d, args.theta)
    print("quantity,value")
    for key in ("R_pos", "R_mom", "norm_final", "runtime_s"):
        print(f"{key},{row[key]!r}")
    if args.output:
        # rerun is avoided: run_single does not retain the field, so dump via
        # a direct propagation only when asked
        from .field import gaussian_packet
        from .propagator import PropagationConfig, propagate

        _, p0 = cfg.kinetics()
        grid = make_grid(cfg.extent, cfg.N_rho, cfg.N_z, args.d)
        params = PotentialParams(
            C3=natural_C3(cfg), theta=args.theta, d=args.d,
            epsilon=cfg.epsilon,
            invert_hole_continuation=cfg.invert_hole_continuation,
        )
        packet = gaussian_packet(grid, r=cfg.packet_r, theta=args.theta,
                                 sigma=cfg.packet_sigma, p0=p0)
        prop = PropagationConfig(
            dt=cfg.dt, t_final=cfg.t_final,
            absorber_width=cfg.absorber_width,
            absorber_strength=cfg.absorber_strength,
        )
        result = propagate(packet, params, prop, workers=cfg.fft_workers)
        print(f"field,{write_field(args.output, result.final)}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)

    def progress(row):
        print(
            f"done d={row['d_um']:g} theta={row['theta_over_pi']:g}pi "
            f"status={row['status']}",
            file=sys.stderr,
        )

    result = run_sweep(cfg, args.output, workers=args.workers,
                       progress=progress)
    print(f"wrote {result.path} ({len(result.rows)} rows, "
          f"{result.n_failed} failed)")
    return 3 if result.n_failed else 0


def _cmd_converge(args) -> int:
    cfg = load_config(args.config)
    rows, summary = convergence_study(
        cfg, args.d, args.epsilon_um, args.nz, args.n_rho
    )
    out = Path(args.output)
    with open(out, "w") as handle:
        handle.write("atom,epsilon_um,d_um,N_rho,N_z,R_pos,running_mean\n")
        for row in rows:
            handle.write(
                f"{row['atom']},{row['epsilon_um']!r},{row['d_um']!r},"
                f"{row['N_rho']},{row['N_z']},{row['R_pos']!r},"
                f"{row['running_mean']!r}\n"
            )
    from .figures import render_convergence

    png = render_convergence(rows, out.with_suffix(".png"))
    print(f"wrote {out} and {png}")
    print("atom,epsilon_um,d_um,amplitude_largest3,amplitude_smallest3")
    for entry in summary:
        print(
            f"{entry['atom']},{entry['epsilon_um']!r},{entry['d_um']!r},"
            f"{entry['amplitude_largest3']!r},{entry['amplitude_smallest3']!r}"
        )
    return 0


def _cmd_export(args) -> int:
    _, rows = read_sweep_csv(args.input)
    cfg = load_config(args.config) if args.config else None
    written = figure_export(
        rows, args.figure, args.outdir, config=cfg,
        theta_fracs=args.theta, d_values=args.d,
    )
    for path in written:
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "potential-dump": _cmd_potential_dump,
    "badlands": _cmd_badlands,
    "oracle1d": _cmd_oracle1d,
    "propagate": _cmd_propagate,
    "sweep": _cmd_sweep,
    "converge": _cmd_converge,
    "export": _cmd_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"qreflect: error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, KeyError, FileNotFoundError, _UsageError) as exc:
        print(f"qreflect: error: {exc}", file=sys.stderr)
        return 1
    except (BlowupError, NonConvergedError, RuntimeError) as exc:
        print(f"qreflect: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
