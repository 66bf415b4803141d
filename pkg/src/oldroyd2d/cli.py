"""Command-line front end: run scenarios, list them, validate configs.

Exit codes: 0 when every verdict passes, 2 when a run records a blow-up,
1 for configuration errors, unknown scenarios/flags, or failed verdicts.
``OLDROYD2D_THREADS`` caps the FFT worker pool for the whole process.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import nullcontext

import scipy.fft as _fft

from .scenarios import SCENARIOS, ScenarioConfig, apply_overrides, default_config, run_scenario


class _Parser(argparse.ArgumentParser):
    """Argparse that exits 1 (not 2) on usage errors, per the CLI contract."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="oldroyd2d",
        description="Viscoelastic-flow experiment runner (periodic 2D pseudo-spectral).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="execute a scenario, write series.csv and report.json")
    run_parser.add_argument("--scenario", required=True, help="one of the named scenarios")
    run_parser.add_argument("--config", help="JSON config file (defaults to the scenario's stock config)")
    run_parser.add_argument("--out", help="output directory for series.csv / report.json")
    run_parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="PATH=VALUE",
        help="dotted-path config override, e.g. stepper.dt=0.01 (repeatable)",
    )

    sub.add_parser("list-scenarios", help="print the available scenario names")

    validate_parser = sub.add_parser("validate", help="check a config file against all invariants")
    validate_parser.add_argument("--config", required=True, help="JSON config file to check")
    return parser


def _load_config(path: str) -> dict:
    with open(path) as handle:
        return json.load(handle)


def _fft_workers_context():
    raw = os.environ.get("OLDROYD2D_THREADS")
    if raw is None:
        return nullcontext()
    try:
        workers = int(raw)
        if workers < 1:
            raise ValueError
    except ValueError:
        raise SystemExit(f"OLDROYD2D_THREADS must be a positive integer, got {raw!r}")
    return _fft.set_workers(workers)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "list-scenarios":
        for name in SCENARIOS:
            print(name)
        return 0

    if args.command == "validate":
        try:
            cfg = ScenarioConfig.from_dict(_load_config(args.config))
        except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
            print(f"invalid config: {exc}", file=sys.stderr)
            return 1
        print(f"config ok: scenario {cfg.scenario}")
        return 0

    # run
    if args.scenario not in SCENARIOS:
        print(
            f"unknown scenario {args.scenario!r}; expected one of {', '.join(SCENARIOS)}",
            file=sys.stderr,
        )
        return 1
    try:
        doc = _load_config(args.config) if args.config else default_config(args.scenario)
        doc["scenario"] = args.scenario
        apply_overrides(doc, args.override)
        if args.out:
            doc["out_dir"] = args.out
        cfg = ScenarioConfig.from_dict(doc)
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1

    with _fft_workers_context():
        report = run_scenario(cfg)

    for verdict in report.verdicts:
        tag = "pass" if verdict.passed else "FAIL"
        print(f"[{tag}] {verdict.name}: {json.dumps(verdict.measured)}")
    for blow in report.blowups:
        print(f"[blow-up] run {blow.get('run', '?')} at t={blow.get('time'):g}")
    status = "PASS" if report.passed else ("BLOW-UP" if report.blowups else "FAIL")
    print(
        f"{report.scenario}: {status} "
        f"({report.step_count} steps, {report.wall_seconds:.1f}s)"
    )
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
