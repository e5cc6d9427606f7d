"""Command-line interface: simulate, verify, dump-config.

`simulate` runs one closed-loop scenario and writes run.csv, summary.txt and
plot.gp into the output directory.  `verify` runs the numerical property
suites.  `dump-config` prints a scenario as a reloadable config file.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 strict-mode envelope violation, 4 near-singular abort.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

import numpy as np

from .config import SCENARIOS, configs_equal, dump_config, load_config_file
from .errors import ConfigError
from .recon import MeasurementNoise
from .sim import RunRecord, ScenarioConfig, run_scenario
from .verify import SUITES, run_suites

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "t",
    "roll_true",
    "pitch_true",
    "yaw_true",
    "roll_est",
    "pitch_est",
    "yaw_est",
    "px_true",
    "py_true",
    "pz_true",
    "px_est",
    "py_est",
    "pz_est",
    "e1",
    "e2",
    "e3",
    "e4",
    "xi1",
    "xi2",
    "xi3",
    "xi4",
    "te_r",
    "te_p1",
    "te_p2",
    "te_p3",
    "bhat_w1",
    "bhat_w2",
    "bhat_w3",
    "bhat_v1",
    "bhat_v2",
    "bhat_v3",
    "lyapunov",
    "env1",
    "env2",
    "env3",
    "env4",
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_ENVELOPE = 3
EXIT_NEAR_SINGULAR = 4


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(rec: RunRecord, path: Path) -> None:
    """Write the run record with the fixed, versioned column order."""
    cols = np.column_stack(
        [
            rec.t,
            rec.euler_true,
            rec.euler_est,
            rec.p_true,
            rec.p_est,
            rec.e,
            rec.xi,
            rec.te,
            rec.b_hat,
            rec.lyapunov,
        ]
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for k in range(rec.rows):
            numeric = ",".join(_fmt(v) for v in cols[k])
            flags = ",".join(str(int(v)) for v in rec.env_ok[k])
            fh.write(numeric + "," + flags + "\n")


def write_summary(rec: RunRecord, cfg: ScenarioConfig, wall_s: float, path: Path) -> None:
    lines = [
        f"schema_version: {CSV_SCHEMA_VERSION}",
        f"seed: {cfg.seed}",
        f"duration_s: {_fmt(cfg.duration)}",
        f"dt_s: {_fmt(cfg.dt)}",
        f"rows: {rec.rows}",
        f"aborted_at: {'-' if rec.aborted_at is None else rec.aborted_at}",
        f"abort_reason: {'-' if rec.abort_reason is None else rec.abort_reason}",
    ]
    if rec.rows:
        ratio = np.abs(rec.e) / rec.xi
        lines += [
            "final_e: " + " ".join(_fmt(v) for v in rec.e[-1]),
            "final_position_error_norm: " + _fmt(float(np.linalg.norm(rec.e[-1, 1:]))),
            "max_envelope_occupancy: " + " ".join(_fmt(v) for v in ratio.max(axis=0)),
        ]
    lines += [
        f"envelope_violations: {rec.envelope_violations}",
        f"clamp_events: {rec.clamp_events}",
        f"post_clamp_violations: {rec.post_clamp_violations}",
        f"near_singular_events: {rec.near_singular_events}",
        f"wall_time_s: {wall_s:.3f}",
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


_PLOT_SCRIPT = """\
# gnuplot script for the layouts produced by one simulation run.
# Usage: gnuplot plot.gp  (expects run.csv in the working directory)
set datafile separator ','
set key autotitle columnhead
set grid

set terminal pngcairo size 1100,800
set output 'euler_angles.png'
set multiplot layout 3,1 title 'True and estimated Euler angles (rad)'
plot 'run.csv' using 1:2 with lines title 'roll true', \\
     'run.csv' using 1:5 with lines title 'roll est'
plot 'run.csv' using 1:3 with lines title 'pitch true', \\
     'run.csv' using 1:6 with lines title 'pitch est'
plot 'run.csv' using 1:4 with lines title 'yaw true', \\
     'run.csv' using 1:7 with lines title 'yaw est'
unset multiplot

set output 'position.png'
set multiplot layout 3,1 title 'True and estimated position (m)'
plot 'run.csv' using 1:8 with lines title 'x true', \\
     'run.csv' using 1:11 with lines title 'x est'
plot 'run.csv' using 1:9 with lines title 'y true', \\
     'run.csv' using 1:12 with lines title 'y est'
plot 'run.csv' using 1:10 with lines title 'z true', \\
     'run.csv' using 1:13 with lines title 'z est'
unset multiplot

set output 'envelopes.png'
set multiplot layout 4,1 title 'Error channels against their envelopes'
plot 'run.csv' using 1:14 with lines title 'e1', \\
     'run.csv' using 1:18 with lines title 'xi1', \\
     'run.csv' using 1:(-column(18)) with lines title '-xi1'
plot 'run.csv' using 1:15 with lines title 'e2', \\
     'run.csv' using 1:19 with lines title 'xi2', \\
     'run.csv' using 1:(-column(19)) with lines title '-xi2'
plot 'run.csv' using 1:16 with lines title 'e3', \\
     'run.csv' using 1:20 with lines title 'xi3', \\
     'run.csv' using 1:(-column(20)) with lines title '-xi3'
plot 'run.csv' using 1:17 with lines title 'e4', \\
     'run.csv' using 1:21 with lines title 'xi4', \\
     'run.csv' using 1:(-column(21)) with lines title '-xi4'
unset multiplot
"""


def _resolve_scenario(args) -> ScenarioConfig:
    if args.config is not None:
        cfg = load_config_file(args.config)
    else:
        name = args.scenario or "paper"
        if name not in SCENARIOS:
            raise ConfigError(
                f"unknown scenario {name!r}; available: {', '.join(sorted(SCENARIOS))}"
            )
        cfg = SCENARIOS[name]()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "dt", None) is not None:
        overrides["dt"] = args.dt
    if getattr(args, "duration", None) is not None:
        overrides["duration"] = args.duration
    if getattr(args, "strict", False):
        overrides["strict"] = True
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    if getattr(args, "noise_free", False):
        n_vec = len(cfg.measurement_noise.vector_stds)
        n_lm = len(cfg.measurement_noise.landmark_stds)
        cfg = dataclasses.replace(
            cfg,
            measurement_noise=MeasurementNoise(
                vector_stds=(0.0,) * n_vec, landmark_stds=(0.0,) * n_lm
            ),
            omega_noise_std=0.0,
            velocity_noise_std=0.0,
        )
    return cfg


def cmd_simulate(args) -> int:
    try:
        cfg = _resolve_scenario(args)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        t0 = time.perf_counter()
        rec = run_scenario(cfg)
        wall = time.perf_counter() - t0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_csv(rec, out_dir / "run.csv")
    write_summary(rec, cfg, wall, out_dir / "summary.txt")
    (out_dir / "plot.gp").write_text(_PLOT_SCRIPT, encoding="utf-8")
    if rec.abort_reason == "envelope":
        print(f"aborted: envelope violation at row {rec.aborted_at}", file=sys.stderr)
        return EXIT_ENVELOPE
    if rec.abort_reason == "near_singular":
        print(f"aborted: near-singular state at row {rec.aborted_at}", file=sys.stderr)
        return EXIT_NEAR_SINGULAR
    print(f"wrote {rec.rows} rows to {out_dir / 'run.csv'} ({wall:.2f}s)")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = [args.suite] if args.suite else None
    if names and names[0] not in SUITES:
        print(
            f"error: unknown suite {names[0]!r}; available: {', '.join(SUITES)}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    results = run_suites(names, trials=args.trials, seed=args.seed or 0)
    all_ok = True
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(
            f"[{status}] {res.name}: {res.trials - res.failures}/{res.trials} checks,"
            f" max err {res.max_err:.3e}, {res.elapsed_s:.2f}s"
        )
        all_ok = all_ok and res.passed
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILED


def cmd_dump_config(args) -> int:
    try:
        cfg = _resolve_scenario(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = dump_config(cfg)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppfpose",
        description="Pose-filter simulation and verification harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario and write artifacts")
    sim.add_argument("--scenario", default=None, help="built-in scenario name")
    sim.add_argument("--config", default=None, help="scenario config file")
    sim.add_argument("--seed", type=int, default=None, help="seed override")
    sim.add_argument("--out", default=".", help="output directory")
    sim.add_argument("--dt", type=float, default=None, help="time step override (s)")
    sim.add_argument("--duration", type=float, default=None, help="duration override (s)")
    sim.add_argument(
        "--noise-free", action="store_true", help="zero all measurement noise"
    )
    sim.add_argument(
        "--strict",
        action="store_true",
        help="abort on envelope violation instead of clamping",
    )
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run the numerical property suites")
    ver.add_argument("--suite", default=None, help="run a single suite by name")
    ver.add_argument("--trials", type=int, default=None, help="sample-count override")
    ver.add_argument("--seed", type=int, default=None, help="seed override")
    ver.set_defaults(func=cmd_verify)

    dump = sub.add_parser("dump-config", help="print a scenario as a config file")
    dump.add_argument("--scenario", default=None, help="built-in scenario name")
    dump.add_argument("--config", default=None, help="round-trip an existing file")
    dump.add_argument("--seed", type=int, default=None, help="seed override")
    dump.add_argument("--out", default=None, help="write to a file instead of stdout")
    dump.set_defaults(func=cmd_dump_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
