"""Command-line interface: experiment subcommands with CSV/SVG output.

Exit codes: 0 success, 2 usage/validation error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiments
from .config import ConfigError, ExperimentConfig, default_config, load_config, save_config
from .couplings import TransitionId
from .experiments import (
    CalibrationError,
    ScanResult,
    bell_fidelity,
    calibrate_defaults,
    cnot_truth_table,
    cz_fringe,
    error_budget,
    rabi_scan,
    sample_shots,
)
from .oracles import run_all_oracles
from .sequence import bell_sequence, sequence_duration

_TRANSITIONS = {
    "carrier": (TransitionId.QUADRUPOLE_G_UP, 0),
    "bsb": (TransitionId.QUADRUPOLE_G_UP, +1),
    "raman": (TransitionId.RAMAN_UP_DOWN, 0),
}


def _fmt_float(v: float) -> str:
    return repr(float(v))


def _write_rows(path: str, header: list[str], rows: list[list], digest: str) -> None:
    lines = [",".join(header), f"# config_digest={digest}"]
    for row in rows:
        lines.append(",".join(_fmt_float(v) if isinstance(v, float) else str(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_scan_csv(path: str, scan: ScanResult) -> None:
    rows = [[x, pg, pu, pd] for x, pg, pu, pd in scan.points]
    _write_rows(path, ["x", "p_g", "p_up", "p_down"], rows, scan.config_digest)


def write_scan_svg(path: str, scan: ScanResult, title: str) -> None:
    """Minimal line chart: one polyline per population channel."""
    width, height, pad = 640, 400, 50
    x = scan.x
    x_span = (x[-1] - x[0]) or 1.0

    def to_px(xv: float, yv: float) -> tuple[float, float]:
        px = pad + (xv - x[0]) / x_span * (width - 2 * pad)
        py = height - pad - yv * (height - 2 * pad)
        return px, py

    series = [("p_g", scan.p_g, "#888888"), ("p_up", scan.p_up, "#c0392b"), ("p_down", scan.p_down, "#2980b9")]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="12">{scan.variable_name}</text>',
        f'<text x="16" y="{height / 2}" font-size="12" transform="rotate(-90 16 {height / 2})" '
        f'text-anchor="middle">population</text>',
    ]
    for k, (name, ys, color) in enumerate(series):
        pts = " ".join("%.2f,%.2f" % to_px(xv, yv) for xv, yv in zip(x, ys))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        lx, ly = width - pad - 60, pad + 16 * (k + 1)
        parts.append(f'<line x1="{lx - 22}" y1="{ly - 4}" x2="{lx - 6}" y2="{ly - 4}" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{lx}" y="{ly}" font-size="12">{name}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


def _load(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        return load_config(args.config)
    return default_config()


def _emit_scan(args: argparse.Namespace, scan: ScanResult, title: str) -> None:
    if getattr(args, "shots", None):
        scan = sample_shots(scan, args.shots, args.seed)
    if args.out:
        write_scan_csv(args.out, scan)
    if getattr(args, "plot", None):
        write_scan_svg(args.plot, scan, title)


def _cmd_rabi(args: argparse.Namespace) -> int:
    cfg = _load(args)
    transition, sideband = _TRANSITIONS[args.transition]
    t_grid = np.linspace(0.0, args.tmax, args.points)
    scan = rabi_scan(transition, sideband, t_grid, cfg)
    _emit_scan(args, scan, f"Rabi scan ({args.transition})")
    print(f"rabi scan: {args.points} points, transition={args.transition}")
    return 0


def _cmd_cz_fringe(args: argparse.Namespace) -> int:
    cfg = _load(args)
    grid = np.linspace(0.0, 4.0 * np.pi, args.points)
    scan = cz_fringe(args.prep, grid, cfg)
    _emit_scan(args, scan, f"Conditional-gate fringe (prep n={args.prep})")
    fit = experiments.fit_fringe(scan)
    print(
        f"cz-fringe prep={args.prep}: contrast={fit.contrast:.3f} "
        f"mean={fit.mean:.3f} phase0={fit.phase0:.3f}"
    )
    return 0


def _cmd_bell(args: argparse.Namespace) -> int:
    cfg = _load(args)
    f = bell_fidelity(cfg)
    print(f"F = {f:.2f}")
    bound = "exceeds" if f > 0.5 else "does NOT exceed"
    print(f"(fidelity {bound} the 0.5 product-state bound)")
    if args.out:
        _write_rows(args.out, ["key", "value"], [["bell_fidelity", float(f)]], cfg.digest())
    return 0


def _cmd_budget(args: argparse.Namespace) -> int:
    cfg = _load(args)
    budget = error_budget(cfg)
    for channel, value in budget.contributions.items():
        print(f"{channel}: {value:.4f}")
    if args.out:
        rows = [[ch, float(v)] for ch, v in budget.contributions.items()]
        _write_rows(args.out, ["channel", "contribution"], rows, cfg.digest())
    return 0


def _cmd_truth_table(args: argparse.Namespace) -> int:
    cfg = _load(args)
    rows = cnot_truth_table(cfg)
    for row in rows:
        print(
            f"{row.input_label} -> {row.expected_label}: population={row.population:.6f} "
            f"control_population={row.control_population:.6f}"
        )
    if args.out:
        table = [
            [r.input_label, r.expected_label, float(r.population), float(r.control_population)]
            for r in rows
        ]
        _write_rows(args.out, ["input", "expected", "population", "control_population"], table, cfg.digest())
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    calibrated = calibrate_defaults(cfg)
    f = calibrated.metadata.calibrated_bell_fidelity
    duration = sequence_duration(bell_sequence(), calibrated.laser_params())
    print(f"rabi_quad_hz = {calibrated.lasers.rabi_quad_hz}")
    print(f"rabi_raman_hz = {calibrated.lasers.rabi_raman_hz}")
    print(f"achieved_bell_fidelity = {f:.4f}")
    print(f"sequence_duration_s = {duration:.6e}")
    if args.out:
        rows = [
            ["rabi_quad_hz", float(calibrated.lasers.rabi_quad_hz)],
            ["rabi_raman_hz", float(calibrated.lasers.rabi_raman_hz)],
            ["achieved_bell_fidelity", float(f)],
            ["sequence_duration_s", float(duration)],
        ]
        _write_rows(args.out, ["key", "value"], rows, calibrated.digest())
    if args.save_config:
        save_config(calibrated, args.save_config)
    return 0


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    cfg = _load(args)
    reports = run_all_oracles(cfg)
    for report in reports:
        print(str(report))
    if args.out:
        rows = [
            [r.name, float(r.max_abs_error), float(r.tolerance), str(r.passed).lower()]
            for r in reports
        ]
        _write_rows(args.out, ["name", "max_abs_error", "tolerance", "pass"], rows, cfg.digest())
    return 0 if all(r.passed for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ion-gate-sim",
        description="Density-matrix simulator of a trapped-ion conditional gate "
        "on a terahertz-split metastable qubit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, plot: bool = False, shots: bool = False) -> None:
        p.add_argument("--config", help="configuration file (section.key = value)")
        p.add_argument("--out", help="CSV output path")
        if plot:
            p.add_argument("--plot", help="SVG line-plot output path")
        if shots:
            p.add_argument("--shots", type=int, help="simulate finite shots per point")
            p.add_argument("--seed", type=int, default=0, help="shot-sampling seed")

    p = sub.add_parser("rabi", help="single-pulse Rabi oscillation scan")
    p.add_argument("--transition", choices=sorted(_TRANSITIONS), required=True)
    p.add_argument("--tmax", type=float, required=True, help="longest pulse duration (s)")
    p.add_argument("--points", type=int, default=100)
    common(p, plot=True, shots=True)
    p.set_defaults(func=_cmd_rabi)

    p = sub.add_parser("cz-fringe", help="conditional-gate Ramsey fringe scan")
    p.add_argument("--prep", type=int, choices=(0, 1), required=True)
    p.add_argument("--points", type=int, default=64)
    common(p, plot=True, shots=True)
    p.set_defaults(func=_cmd_cz_fringe)

    p = sub.add_parser("bell", help="entangled-state generation fidelity")
    common(p)
    p.set_defaults(func=_cmd_bell)

    p = sub.add_parser("budget", help="per-channel fidelity-loss budget")
    common(p)
    p.set_defaults(func=_cmd_budget)

    p = sub.add_parser("truth-table", help="gate action on the four basis states")
    common(p)
    p.set_defaults(func=_cmd_truth_table)

    p = sub.add_parser("calibrate", help="grid-search Rabi frequencies for the fidelity target")
    common(p)
    p.add_argument("--save-config", help="write the calibrated configuration file here")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("oracle-check", help="run all closed-form/reference cross-checks")
    common(p)
    p.set_defaults(func=_cmd_oracle_check)

    return parser


def run_command(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
