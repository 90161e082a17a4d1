"""Command-line front end: ``multistop {validate,solve,sweep,check}``.

Exit codes: 0 success, 2 validation failure, 3 numeric failure, 4 config error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .checks import run_checks
from .config import ConfigError, RunConfig, load_config
from .errors import ModelError, MultistopError, ValidationFailedError
from .levy import RefractionSpec, validate
from .multi import solve_all

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_CONFIG = 0, 2, 3, 4


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _error(code: int, exc: BaseException) -> int:
    msg = "; ".join([str(exc), *getattr(exc, "__notes__", [])]).replace("\n", " ")
    print(f"error: code={code} kind={type(exc).__name__} message={msg}", file=sys.stderr)
    return code


def _report_validation(cfg: RunConfig, refraction) -> bool:
    report = validate(cfg.model, cfg.contract, refraction)
    for line in report.lines():
        print(line)
    return report.ok


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_validate(cfg: RunConfig, args) -> int:
    return EXIT_OK if _report_validation(cfg, cfg.refraction) else EXIT_VALIDATION


def cmd_solve(cfg: RunConfig, args) -> int:
    refraction = cfg.refraction if cfg.contract.n_exercises > 1 else None
    if cfg.contract.n_exercises > 1 and refraction is None:
        raise ModelError("n_exercises > 1 needs a [refraction] section with rate or mean")
    res = solve_all(cfg.model, cfg.contract, refraction)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "thresholds.csv", ["k", "x_star_log", "s_star_price"],
               [[k, fmt(x), fmt(math.exp(x))] for k, x in enumerate(res.thresholds, 1)])
    lo, hi = cfg.grid_bounds(res.thresholds[0])
    grid = np.linspace(lo, hi, cfg.output.grid_points)
    cols = [v(grid) for v in res.values]
    payoff = np.maximum(np.exp(grid) - cfg.contract.strike, 0.0)
    rows = [[fmt(x), *(fmt(c[i]) for c in cols), fmt(payoff[i])] for i, x in enumerate(grid)]
    _write_csv(out / "values.csv", ["x", *(f"v{k}" for k in range(1, res.n + 1)), "payoff"], rows)
    for k, x in enumerate(res.thresholds, 1):
        print(f"k={k} x_star={fmt(x)} s_star={fmt(math.exp(x))}")
    return EXIT_OK


def _sweep_cell(job):
    model, contract, shape, mean = job
    try:
        res = solve_all(model, contract, RefractionSpec.from_mean(mean, shape))
        return list(res.thresholds), None
    except MultistopError as e:
        return None, f"{type(e).__name__}: {e}"


def cmd_sweep(cfg: RunConfig, args) -> int:
    means = tuple(args.means) if args.means else cfg.output.sweep_means
    shape = cfg.refraction.shape if cfg.refraction is not None else cfg.refraction_shape
    if not _report_validation(cfg, None):
        return EXIT_VALIDATION
    jobs = [(cfg.model, cfg.contract, shape, m) for m in means]
    if cfg.sim.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.sim.workers) as pool:
            results = list(pool.map(_sweep_cell, jobs))
    else:
        results = [_sweep_cell(j) for j in jobs]
    rows, failed = [], 0
    for m, (ths, err) in zip(means, results):
        if err is not None:
            failed += 1
            print(f"cell delta_bar={fmt(m)} failed: {err}", file=sys.stderr)
            rows.extend([fmt(m), k, "nan"] for k in range(1, cfg.contract.n_exercises + 1))
            continue
        rows.extend([fmt(m), k, fmt(x)] for k, x in enumerate(ths, 1))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "sweep.csv", ["delta_bar", "k", "x_star"], rows)
    print(f"{len(means) - failed}/{len(means)} cells solved")
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_check(cfg: RunConfig, args) -> int:
    refraction = cfg.refraction if cfg.contract.n_exercises > 1 else None
    if not _report_validation(cfg, refraction):
        return EXIT_VALIDATION
    results = run_checks(cfg.model, cfg.contract, refraction, cfg.sim, cfg.output.grid_points,
                         mc=not args.no_mc)
    lines = [r.line() for r in results]
    n_fail = sum(not r.passed for r in results)
    lines.append(f"SUMMARY {len(results) - n_fail}/{len(results)} passed "
                 f"(seed={cfg.sim.seed}, paths={cfg.sim.n_paths}, workers={cfg.sim.workers})")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "check_report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_NUMERIC if n_fail else EXIT_OK


COMMANDS = {"validate": cmd_validate, "solve": cmd_solve, "sweep": cmd_sweep, "check": cmd_check}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="multistop",
                                description="Multiple-exercise perpetual calls under refraction.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="INI config file")
        s.add_argument("--out", default=".", help="output directory")
        s.add_argument("--seed", type=int, help="override [mc] seed")
        s.add_argument("--paths", type=int, help="override [mc] n_paths")
        s.add_argument("--workers", type=int, help="override [mc] workers")
        if name == "sweep":
            s.add_argument("--means", type=float, nargs="+", help="mean refraction times")
        if name == "check":
            s.add_argument("--no-mc", action="store_true", help="skip Monte Carlo cross-checks")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        overrides = {k: v for k, v in (("seed", args.seed), ("n_paths", args.paths),
                                       ("workers", args.workers)) if v is not None}
        if overrides:
            cfg = replace(cfg, sim=replace(cfg.sim, **overrides))
    except (ConfigError, ValueError) as e:
        return _error(EXIT_CONFIG, e)
    try:
        return COMMANDS[args.command](cfg, args)
    except ValidationFailedError as e:
        for line in e.report.lines():
            print(line)
        return _error(EXIT_VALIDATION, e)
    except ModelError as e:
        return _error(EXIT_CONFIG, e)
    except (MultistopError, ArithmeticError, ValueError) as e:
        return _error(EXIT_NUMERIC, e)


if __name__ == "__main__":
    sys.exit(main())
