"""Command-line entry point: ``wiener-neumann <command> --config <path> --out <path> [--seed N]``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from .config import REPORT_VERSION, load
from .experiments import COMMANDS

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def write_series(series: dict, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(series["columns"])
        for row in series["rows"]:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def run(command: str, config_path, out_path, seed: int | None = None) -> int:
    start = time.perf_counter()
    try:
        if command not in COMMANDS:
            raise ValueError(f"unknown command {command!r}")
        cfg = load(config_path, seed)
        records, series = COMMANDS[command](cfg)
    except (OSError, ValueError, RuntimeError, KeyError, TypeError, jsonschema.ValidationError,
            json.JSONDecodeError) as exc:
        print(f"wiener-neumann: {command}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    passed = all(r["pass"] for r in records)
    report = {
        "schema": REPORT_VERSION,
        "command": command,
        "seed": cfg.seed,
        "config": cfg.raw,
        "records": records,
        "pass": passed,
        "wall_time": time.perf_counter() - start,
    }
    if series is not None:
        extra = {k: v for k, v in series.items() if k not in ("columns", "rows")}
        if extra:
            report["details"] = extra
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")
    if series is not None and "columns" in series:
        write_series(series, out.with_suffix(".csv"))
    for r in records:
        if not r["pass"]:
            print(f"FAIL {r['name']} [{r['theorem']}]: {r['statistic']:.6g} > {r['threshold']:.6g}",
                  file=sys.stderr)
    return EXIT_PASS if passed else EXIT_FAIL


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wiener-neumann",
                                     description="Desk-scale checks for weighted Gaussian Neumann problems.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON configuration (schema wn-config/1)")
    parser.add_argument("--out", required=True, help="path of the JSON report")
    parser.add_argument("--seed", type=int, default=None, help="override the configuration seed")
    args = parser.parse_args(argv)
    return run(args.command, args.config, args.out, args.seed)


if __name__ == "__main__":
    sys.exit(main())
