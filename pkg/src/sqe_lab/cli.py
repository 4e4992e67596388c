"""Command-line entry point.

    sqe-lab <experiment> [--seed N] [--trials N] [--n-sqe N] [--grid-size M]
            [--eta X] [--eps X] [--out PATH] [--config FILE] ...

Writes the experiment's CSV data file(s) plus one JSON run summary into the
output directory. Exit code 0 when every check passes, 1 on a failed
check, 2 on configuration or I/O errors. Environment variables
``SQE_LAB_SEED`` and ``SQE_LAB_OUT`` override the seed and output
directory; explicit flags outrank both, and flags outrank the config file.
Config files hold ``key = value`` lines (``#`` comments allowed) using the
flag names with ``-`` or ``_``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from pathlib import Path

from .experiments import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    build_summary,
    run_experiment,
)

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_FLOAT_FIELDS = {"eta", "eps_eq", "r_min", "alpha_start", "alpha_end"}
_STR_FIELDS = {"experiment", "output_path", "mode"}


def _coerce(key: str, raw: str):
    if key in _STR_FIELDS:
        return raw
    if key in _FLOAT_FIELDS:
        return float(raw)
    return int(raw)


def parse_config_file(path: str | Path) -> dict:
    """Strict key=value config parsing; unknown keys are rejected."""
    overrides = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        key = key.replace("-", "_")
        if key == "seed":
            key = "master_seed"
        if key == "eps":
            key = "eps_eq"
        if key == "out":
            key = "output_path"
        if key not in _FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            overrides[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {raw!r}") from exc
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqe-lab",
        description="Deterministic ensemble experiments with emergent quantum statistics.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--seed", type=int, dest="master_seed", default=None,
                        help="64-bit master seed (default 42)")
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--n-sqe", type=int, dest="n_sqe", default=None)
    parser.add_argument("--grid-size", type=int, dest="grid_size", default=None)
    parser.add_argument("--eta", type=float, default=None)
    parser.add_argument("--eps", type=float, dest="eps_eq", default=None)
    parser.add_argument("--r-min", type=float, dest="r_min", default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out", dest="output_path", default=None)
    parser.add_argument("--config", default=None, help="key = value config file")
    parser.add_argument("--alpha-start", type=float, dest="alpha_start", default=None)
    parser.add_argument("--alpha-end", type=float, dest="alpha_end", default=None)
    parser.add_argument("--steps", type=int, default=None)
    parser.add_argument("--dt-sweeps", type=int, dest="dt_sweeps", default=None)
    parser.add_argument("--mode", choices=("adiabatic", "stochastic"), default=None)
    parser.add_argument("--total-n", type=int, dest="total_n", default=None)
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {"experiment": args.experiment}
    if args.config:
        file_overrides = parse_config_file(args.config)
        file_overrides.pop("experiment", None)
        values.update(file_overrides)
    if os.environ.get("SQE_LAB_SEED"):
        try:
            values["master_seed"] = int(os.environ["SQE_LAB_SEED"])
        except ValueError as exc:
            raise ConfigError(f"SQE_LAB_SEED is not an integer: "
                              f"{os.environ['SQE_LAB_SEED']!r}") from exc
    if os.environ.get("SQE_LAB_OUT"):
        values["output_path"] = os.environ["SQE_LAB_OUT"]
    for key in _FIELDS:
        if key == "experiment":
            continue
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            values[key] = flag_value
    return ExperimentConfig(**values)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, header: list, rows: list) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def run(config: ExperimentConfig) -> int:
    """Execute one experiment; returns the process exit code."""
    t0 = time.perf_counter()
    try:
        result = run_experiment(config)
    except (ConfigError, ValueError) as exc:
        # incompatible settings surface here (e.g. a grid that misses the
        # experiment's angles)
        print(f"sqe-lab: config error: {exc}", file=sys.stderr)
        return 2
    wall = time.perf_counter() - t0

    out_dir = Path(config.output_path)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, (header, rows) in result.files.items():
            write_csv(out_dir / name, header, rows)
        summary = build_summary(config, result)
        summary_path = out_dir / f"{config.experiment}_summary.json"
        summary_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    except OSError as exc:
        print(f"sqe-lab: output error: {exc}", file=sys.stderr)
        return 2

    status = "PASS" if result.passed else "FAIL"
    print(f"{config.experiment}: {status} "
          f"({sum(c['passed'] for c in result.checks)}/{len(result.checks)} checks, "
          f"{wall:.2f}s) -> {summary_path}")
    return 0 if result.passed else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
    except (ConfigError, OSError) as exc:
        print(f"sqe-lab: config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(config)
    except ConfigError as exc:
        print(f"sqe-lab: config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
