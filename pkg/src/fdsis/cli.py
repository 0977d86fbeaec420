"""
Command-line front end.

    fdsis gen-channel --out si.sich
    fdsis inspect-channel si.sich
    fdsis solve --theta-d 90 --psi-d 30 --theta-u 90 --psi-u 120 --synthetic
    fdsis sweep --grid azimuth --subarray 2x2 --synthetic --out sweep.csv

Every long flag may also be given in an INI config file (``--config``):
keys in ``[fdsis]`` apply to every subcommand that has that flag, keys in a section named after
the subcommand override them, and flags on the command line win over both.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .channel import (
    generate_los_channel,
    load_channel,
    save_channel,
    slice_band,
    synthetic_channel,
)
from .geometry import ArrayLayout, SteeringAngles
from .objective import ConstraintConfig
from .pso import PsoConfig
from .sweep import (
    ANGLE_NAMES,
    SchemeContext,
    SchemeKind,
    SweepGrid,
    parse_range,
    run_sweep,
    solve_all,
)

log = logging.getLogger("fdsis")


def _pair(text):
    vals = [float(v) for v in str(text).split(",")]
    return vals[0] if len(vals) == 1 else tuple(vals)


def _add_channel_source(p):
    g = p.add_argument_group("channel")
    src = g.add_mutually_exclusive_group()
    src.add_argument("--channel", type=Path, help="SI channel file (.sich or .csv)")
    src.add_argument("--synthetic", action="store_true", help="use the built-in LoS channel (default)")
    g.add_argument("--channel-format", choices=["binary", "csv"], help="override suffix-based detection")
    g.add_argument("--full-array", default="8x8", help="full Tx/Rx array of the channel file")
    g.add_argument("--subarray", default="2x2", help="sub-array shape, e.g. 2x2, 4x4, 1x4")
    g.add_argument("--tx-block", type=int, default=0, help="flat index of the Tx tile")
    g.add_argument("--rx-block", type=int, default=0, help="flat index of the Rx tile")
    g.add_argument("--band-center-hz", type=float, default=3.5e9)
    g.add_argument("--band-width-hz", type=float, default=20e6)


def _add_solver(p):
    g = p.add_argument_group("solver")
    g.add_argument("--schemes", default="MD,CM,NCM", help="comma-separated subset of MD,CM,NCM")
    g.add_argument("--epsilon", type=float, default=None, help="directivity slack (default 0.05*m)")
    g.add_argument("--penalty", type=float, default=1e3, help="constraint penalty weight")
    g.add_argument("--particles", type=int, default=20)
    g.add_argument("--iterations", type=int, default=150)
    g.add_argument("--omega1", type=float, default=None, help="upper end of the Omega1 range")
    g.add_argument("--omega2", type=float, default=None, help="upper end of the Omega2 range")
    g.add_argument("--omega3", type=float, default=None, help="constant inertia weight")
    g.add_argument("--inertia", choices=["constant", "schedule"], default="constant")
    g.add_argument(
        "--classic-coefficients",
        action="store_true",
        help="Omega ranges [0, 2] and inertia 1.1 instead of constriction defaults",
    )
    g.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdsis", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--config", type=Path, help="INI file with defaults for any flag")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-channel", help="write a synthetic LoS SI channel")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--format", choices=["binary", "csv"], default=None)
    p.add_argument("--tx", default="8x8")
    p.add_argument("--rx", default="8x8")
    p.add_argument("--spacing", type=float, default=0.5, help="element spacing in wavelengths")
    p.add_argument("--separation", type=float, default=0.5, help="plane separation in wavelengths")
    p.add_argument("--lateral", type=_pair, default=(4.5, 0.3), help="in-plane Rx offset 'dx,dy' in wavelengths")
    p.add_argument("--alpha", type=float, default=None, help="LoS amplitude (default: -30 dB nearest coupling)")
    p.add_argument("--f-start-hz", type=float, default=3e9)
    p.add_argument("--f-stop-hz", type=float, default=4e9)
    p.add_argument("--n-freqs", type=int, default=1601)

    p = sub.add_parser("inspect-channel", help="print a summary of a channel file")
    p.add_argument("path", type=Path)
    p.add_argument("--channel-format", choices=["binary", "csv"], default=None)
    p.add_argument("--band-center-hz", type=float, default=None)
    p.add_argument("--band-width-hz", type=float, default=None)

    p = sub.add_parser("solve", help="solve the schemes for one angle pair")
    _add_channel_source(p)
    _add_solver(p)
    for name in ANGLE_NAMES:
        p.add_argument("--" + name.replace("_", "-"), type=float, default=90.0, help="degrees")
    p.add_argument("--out", type=Path, help="write the result rows as CSV")

    p = sub.add_parser("sweep", help="angle-pair sweep with best/worst/avg aggregates")
    _add_channel_source(p)
    _add_solver(p)
    p.add_argument("--grid", choices=["azimuth", "elevation", "downlink"], help="preset grid")
    for name in ANGLE_NAMES:
        p.add_argument("--" + name.replace("_", "-"), default=None, help="degrees: value or start:step:stop")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")
    p.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
    return parser


def _config_sections(path: Path, command: str) -> tuple[dict, dict]:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise SystemExit(f"fdsis: cannot read config file {path}")

    def section(name):
        return {k.replace("-", "_"): v for k, v in cp.items(name)} if cp.has_section(name) else {}

    return section("fdsis"), section(command)


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    shared, own = _config_sections(args.config, args.command)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in subparser._actions}
    unknown = sorted(set(own) - set(actions))
    if unknown:
        raise SystemExit(f"fdsis: unknown config key(s) {', '.join(unknown)} in [{args.command}]")
    # shared keys only apply where the subcommand has a matching flag
    merged = {k: v for k, v in shared.items() if k in actions}
    merged.update(own)
    typed = {}
    for key, raw in merged.items():
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            typed[key] = raw.strip().lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            typed[key] = action.type(raw)
        else:
            typed[key] = raw
    subparser.set_defaults(**typed)
    return parser.parse_args(argv)


def _load_context(args) -> SchemeContext:
    sub = ArrayLayout.parse(args.subarray)
    if args.channel is not None:
        full = ArrayLayout.parse(args.full_array)
        ch = load_channel(args.channel, args.channel_format, tx_layout=full, rx_layout=full)
    else:
        ch = synthetic_channel()
    cfg = PsoConfig.classic() if args.classic_coefficients else PsoConfig()
    overrides = {
        "omega1_max": args.omega1,
        "omega2_max": args.omega2,
        "omega3": args.omega3,
    }
    cfg = PsoConfig(
        particles=args.particles,
        iterations=args.iterations,
        inertia=args.inertia,
        rng_seed=args.seed,
        **{k: (getattr(cfg, k) if v is None else v) for k, v in overrides.items()},
    )
    return SchemeContext.from_channel(
        ch,
        sub,
        sub,
        tx_block=args.tx_block,
        rx_block=args.rx_block,
        center_hz=args.band_center_hz,
        bandwidth_hz=args.band_width_hz,
        constraints=ConstraintConfig(args.epsilon, args.penalty),
        pso=cfg,
    )


def _schemes(text: str):
    return [SchemeKind.parse(s) for s in text.split(",") if s.strip()]


def cmd_gen_channel(args) -> int:
    freqs = np.linspace(args.f_start_hz, args.f_stop_hz, args.n_freqs)
    ch = generate_los_channel(
        ArrayLayout.parse(args.tx, args.spacing),
        ArrayLayout.parse(args.rx, args.spacing),
        args.separation,
        freqs,
        amplitude_alpha=args.alpha,
        lateral_offset_wavelengths=args.lateral,
    )
    save_channel(ch, args.out, args.format)
    print(f"wrote {args.out} ({'x'.join(map(str, ch.shape))})")
    return 0


def cmd_inspect_channel(args) -> int:
    ch = load_channel(args.path, args.channel_format)
    info = ch.summary()
    if args.band_center_hz is not None and args.band_width_hz is not None:
        band = slice_band(ch, args.band_center_hz, args.band_width_hz)
        info["band"] = {
            "center_hz": band.center_hz,
            "bandwidth_hz": band.bandwidth_hz,
            "points": band.n,
            "first_index": band.start,
            "f_low_hz": float(ch.freqs_hz[band.start]),
            "f_high_hz": float(ch.freqs_hz[band.stop - 1]),
        }
    print(json.dumps(info, indent=2))
    return 0


def cmd_solve(args) -> int:
    ctx = _load_context(args)
    cell = {name: getattr(args, name) for name in ANGLE_NAMES}
    grid = SweepGrid("psi_d", [cell["psi_d"]], "psi_u", [cell["psi_u"]],
                     {"theta_d": cell["theta_d"], "theta_u": cell["theta_u"]})
    report = run_sweep(grid, _schemes(args.schemes), ctx, seed=args.seed, workers=1)
    for c in report.cells:
        print(
            f"{c.scheme.value:>4}  si_level {c.si_level_db:8.2f} dB  "
            f"tx_deg {c.tx_degradation:.4f}  rx_deg {c.rx_degradation:.4f}"
        )
    if args.out:
        report.to_csv(args.out)
    return 0


def _sweep_grid(args) -> SweepGrid:
    given = {n: getattr(args, n) for n in ANGLE_NAMES if getattr(args, n) is not None}
    if args.grid:
        base = SweepGrid.figure(args.grid)
        if not given:
            return base
        values = {base.axis1: base.values1, base.axis2: base.values2, **{k: (v,) for k, v in base.fixed.items()}}
    else:
        values = {n: (90.0,) for n in ANGLE_NAMES}
    values.update({n: tuple(parse_range(v)) for n, v in given.items()})
    varying = [n for n in ANGLE_NAMES if len(values[n]) > 1]
    if len(varying) > 2:
        raise SystemExit("fdsis: at most two angles may vary in a sweep")
    axes = (varying + [n for n in ANGLE_NAMES if n not in varying])[:2]
    fixed = {n: values[n][0] for n in ANGLE_NAMES if n not in axes}
    return SweepGrid(axes[0], values[axes[0]], axes[1], values[axes[1]], fixed)


def cmd_sweep(args) -> int:
    ctx = _load_context(args)
    grid = _sweep_grid(args)
    report = run_sweep(grid, _schemes(args.schemes), ctx, seed=args.seed, workers=args.workers)
    text = report.to_csv(args.out)
    if args.out is None:
        sys.stdout.write(text)
    else:
        print(report.table())
    return 0


COMMANDS = {
    "gen-channel": cmd_gen_channel,
    "inspect-channel": cmd_inspect_channel,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
