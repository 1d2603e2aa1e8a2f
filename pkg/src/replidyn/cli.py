"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 degenerate
or unclassifiable parameters, 4 I/O error.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .dynamics import IntegrationError, integrate
from .equilibria import pareto_report, stationary_states
from .model import SimplexError, SimplexPoint, check_assumptions, normalized_matrix
from .portrait import PortraitSpec, render_portrait
from .regimes import (
    AssumptionsViolated,
    ClassificationRefused,
    classify_regime,
    estimate_basins,
)
from .verify import random_params, run_suite

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4


class CliError(Exception):
    def __init__(self, message: str, code: int, payload: Optional[dict] = None):
        super().__init__(message)
        self.code = code
        self.payload = payload


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _emit(text: str, output: Optional[str], cfg: Optional[RunConfig] = None) -> Optional[Path]:
    if output is None or output == "-":
        sys.stdout.write(text)
        return None
    path = Path(output)
    if cfg is not None and not path.is_absolute():
        path = cfg.output_dir / path
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_IO) from None
    return path


def _config(args) -> RunConfig:
    out_dir = Path(args.out_dir) if getattr(args, "out_dir", None) else None
    try:
        return load_config(args.config, args.params, out_dir)
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None


def parse_point(text: str) -> SimplexPoint:
    try:
        parts = [float(Fraction(p.strip())) for p in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise CliError(f"--x0: cannot parse {text!r} as three comma-separated shares", EXIT_INPUT) from None
    if len(parts) != 3:
        raise CliError(f"--x0: expected three shares, got {len(parts)}", EXIT_INPUT)
    try:
        return SimplexPoint(*parts)
    except SimplexError as exc:
        raise CliError(f"--x0: {exc}", EXIT_INPUT) from None


def classification_report(cfg: RunConfig) -> dict:
    params = cfg.params
    B = normalized_matrix(params)
    rep = check_assumptions(params)
    eq = stationary_states(params)
    out = {
        "params": params.as_dict(),
        "normalized_matrix": {k: getattr(B, k) for k in "abcdef"},
        "assumptions": dict(rep.__dict__),
        "stationary_states": [s.as_dict() for s in eq.states],
        "pareto": pareto_report(params).as_dict(),
    }
    if eq.notes:
        out["notes"] = list(eq.notes)
    try:
        out["regime"] = classify_regime(params).as_dict()
    except ClassificationRefused as exc:
        out["error"] = str(exc)
        out["refusal"] = "assumptions" if isinstance(exc, AssumptionsViolated) else "degenerate"
        raise CliError(str(exc), EXIT_DEGENERATE, out) from None
    if eq.degenerate:
        out["error"] = "degenerate stationary state"
        raise CliError(out["error"], EXIT_DEGENERATE, out)
    return out


def cmd_classify(args) -> int:
    cfg = _config(args)
    _emit(_dump_json(classification_report(cfg)), args.output, cfg)
    return EXIT_OK


def trajectory_csv(traj) -> str:
    buf = io.StringIO()
    buf.write("t,x1,x2,x3\n")
    for t, x in zip(traj.times, traj.states):
        buf.write(",".join([fmt(t), fmt(x[0]), fmt(x[1]), fmt(x[2])]) + "\n")
    return buf.getvalue()


def lv_csv(traj) -> str:
    buf = io.StringIO()
    buf.write("t,X,Y\n")
    for t, x in zip(traj.times, traj.states):
        if x[0] <= 1e-9:
            break
        buf.write(",".join([fmt(t), fmt(x[1] / x[0]), fmt(x[2] / x[0])]) + "\n")
    return buf.getvalue()


def cmd_simulate(args) -> int:
    cfg = _config(args)
    x0 = parse_point(args.x0)
    try:
        traj = integrate(cfg.params, x0, cfg.integrator)
    except IntegrationError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    text = trajectory_csv(traj)
    if args.coords == "lv":
        if args.output in (None, "-"):
            text += "\n" + lv_csv(traj)
        else:
            p = Path(args.output)
            _emit(lv_csv(traj), str(p.with_name(p.stem + ".lv.csv")), cfg)
    _emit(text, args.output, cfg)
    final = ", ".join(fmt(v) for v in traj.final)
    sys.stderr.write(f"outcome: {traj.outcome} t={fmt(traj.times[-1])} final=({final})\n")
    return EXIT_OK


def basin_csv(bm) -> str:
    buf = io.StringIO()
    buf.write("x1,x2,x3,label\n")
    for x, lab in zip(bm.points, bm.labels):
        buf.write(f"{fmt(x[0])},{fmt(x[1])},{fmt(x[2])},{lab}\n")
    return buf.getvalue()


def cmd_basins(args) -> int:
    cfg = _config(args)
    R = args.resolution or cfg.resolution
    if R < 10:
        raise CliError("resolution must be at least 10", EXIT_INPUT)
    bm = estimate_basins(cfg.params, R, cfg.integrator, threads=args.threads)
    summary = {"resolution": R, "points": len(bm.labels), "fractions": bm.fractions,
               "counts": bm.counts, "unresolved": bm.unresolved}
    csv_path = _emit(basin_csv(bm), args.output, cfg)
    text = _dump_json(summary)
    if args.summary:
        _emit(text, args.summary, cfg)
    elif csv_path is None:
        sys.stderr.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_portrait(args) -> int:
    cfg = _config(args)
    starts = None
    if args.start:
        starts = [list(parse_point(s)) for s in args.start]
    spec = PortraitSpec(size=args.size, starts=starts, n_starts=args.starts, seed=cfg.seed,
                        basins=not args.no_basins, basin_resolution=args.basin_resolution,
                        integrator=cfg.integrator)
    _emit(render_portrait(cfg.params, spec), args.output, cfg)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.random:
        seed = 42 if args.seed is None else args.seed
        rng = np.random.default_rng(seed)
        draws = [random_params(rng, assumptions=True, margin=1e-3) for _ in range(args.random)]
    else:
        cfg = _config(args)
        draws = [cfg.params]
        seed = cfg.seed if args.seed is None else args.seed
        if stationary_states(cfg.params).degenerate:
            raise CliError("degenerate parameters; stability properties undefined",
                           EXIT_DEGENERATE, {"params": cfg.params.as_dict()})
    results = run_suite(draws, seed=seed)
    report = {"draws": len(draws), "seed": seed, "properties": [r.as_dict() for r in results],
              "passed": all(r.passed for r in results)}
    for r in results:
        sys.stderr.write(f"{'PASS' if r.passed else 'FAIL'} {r.name} "
                         f"({r.checked} checked, {len(r.failures)} failed)\n")
    _emit(_dump_json(report), args.output)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="replidyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", nargs="?", help="JSON config file")
        p.add_argument("--params", help="inline JSON config instead of a file")
        p.add_argument("-o", "--output", help="output file (default: standard output)")
        p.add_argument("--out-dir", help="directory for relative output paths")

    p = sub.add_parser("classify", help="stationary states, regime and Pareto report")
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    common(p)
    p.add_argument("--x0", required=True, help="initial shares, e.g. 0.9,0.05,0.05 or 1/3,1/3,1/3")
    p.add_argument("--coords", choices=("simplex", "lv"), default="simplex")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("basins", help="basin map over the interior lattice")
    common(p)
    p.add_argument("--resolution", type=int, help="lattice resolution R (overrides config)")
    p.add_argument("--summary", help="write the summary JSON here")
    p.add_argument("--threads", type=int, help="worker threads (default REPLIDYN_THREADS or CPU count)")
    p.set_defaults(func=cmd_basins)

    p = sub.add_parser("portrait", help="ternary phase portrait as SVG")
    common(p)
    p.add_argument("--size", type=int, default=600)
    p.add_argument("--starts", type=int, default=24, help="number of seeded trajectory starts")
    p.add_argument("--start", action="append", help="explicit start (repeatable)")
    p.add_argument("--no-basins", action="store_true")
    p.add_argument("--basin-resolution", type=int, default=60)
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("verify", help="run the property suite")
    common(p)
    p.add_argument("--random", type=int, help="check N random draws instead of a config")
    p.add_argument("--seed", type=int, help="seed for random draws and starts")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        if exc.payload is not None:
            sys.stdout.write(_dump_json(exc.payload))
        sys.stderr.write(f"replidyn: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
