"""Command-line entry point: ``scrforge {dilation-exp,matching-exp,approx,random-system}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, NumericalFailureError, ResourceLimitError
from .experiments import (
    ExperimentConfig,
    emit_plots,
    load_series,
    run_dilation_experiment,
    run_matching_experiment,
    synthetic_series,
)
from .experiments.runs import write_rows
from .io import load_system, save_scr, save_system, write_manifest
from .linalg import operator_norm
from .pipeline import approximate_scr, uniform_streams
from .reservoir import LinearReadout, LinearReservoir

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

log = logging.getLogger("scrforge")


def parse_int_list(text: str) -> tuple[int, ...]:
    """``"2,6,10"`` or ``"20..160:20"`` (inclusive range with step)."""
    text = text.strip()
    try:
        if ".." in text:
            span, _, step = text.partition(":")
            lo, hi = (int(v) for v in span.split(".."))
            step_i = int(step) if step else 1
            if step_i < 1 or hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1, step_i))
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse integer list {text!r}") from None


def _run_manifest(out: Path, command: str, started: datetime, seconds: float, extra: dict) -> None:
    items = {"command": command, "started_utc": started.isoformat(timespec="seconds"), "seconds": round(seconds, 3)}
    items.update(extra)
    write_manifest(out / "run.txt", items)


def _config_items(cfg: ExperimentConfig, keys) -> dict:
    d = dataclasses.asdict(cfg)
    return {k: d[k] for k in keys}


def cmd_dilation(args) -> int:
    cfg = ExperimentConfig(dataset=args.dataset, column=args.column, rho=args.rho, input_scale=args.input_scale,
                           horizon=args.horizon, ridge=args.ridge, orders=args.orders,
                           seeds=tuple(range(args.seeds)), washout=args.washout, max_steps=args.max_steps,
                           out_dir=args.out)
    if args.synthetic:
        series = synthetic_series(args.synthetic, seed=args.data_seed, scale=cfg.input_scale)
    else:
        if args.data is None:
            raise InvalidInputError("--data PATH is required unless --synthetic is given")
        series = load_series(args.data, cfg.dataset, cfg.column, cfg.input_scale)
    started, t0 = datetime.now(timezone.utc), time.perf_counter()
    rows = run_dilation_experiment(cfg, series)
    out = Path(args.out)
    write_rows(out / "dilation_rows.csv", [f.name for f in dataclasses.fields(rows[0])],
               [dataclasses.astuple(r) for r in rows])
    emit_plots(rows, "dilation", out, title=series.name)
    _run_manifest(out, "dilation-exp", started, time.perf_counter() - t0, {
        "series": series.name, "column": series.column, "length": len(series.stream), "bound": series.bound,
        **_config_items(cfg, ("rho", "input_scale", "horizon", "ridge", "orders", "seeds", "washout")),
    })
    failed = sum(r.status != "ok" for r in rows)
    print(f"wrote {len(rows)} rows to {out} ({failed} failed)")
    return EXIT_OK


def cmd_matching(args) -> int:
    cfg = ExperimentConfig(sizes=args.sizes, samples=args.samples, delta=args.delta, seed=args.seed,
                           out_dir=args.out)
    started, t0 = datetime.now(timezone.utc), time.perf_counter()
    rows = run_matching_experiment(cfg)
    out = Path(args.out)
    write_rows(out / "matching_rows.csv", [f.name for f in dataclasses.fields(rows[0])],
               [dataclasses.astuple(r) for r in rows])
    emit_plots(rows, "matching", out, title=f"delta = {cfg.delta:g}")
    _run_manifest(out, "matching-exp", started, time.perf_counter() - t0,
                  _config_items(cfg, ("sizes", "samples", "delta", "seed")))
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_approx(args) -> int:
    R = load_system(args.system)
    validation = uniform_streams(R.m, R.input_bound, args.streams, args.length, args.seed)
    scr, report = approximate_scr(R, args.epsilon, validation)
    out = Path(args.out)
    save_scr(scr, out / "scr")
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    (out / "report.csv").write_text(report.to_csv_row(), encoding="utf-8")
    ok = report.empirical_output_gap < args.epsilon
    print(f"n_scr={report.n_scr} gap={report.empirical_output_gap:.3e} epsilon={args.epsilon:g} "
          f"{'ok' if ok else 'EXCEEDED'}")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_random_system(args) -> int:
    rng = np.random.default_rng(args.seed)
    W = rng.standard_normal((args.n, args.n))
    W *= args.lam / operator_norm(W)
    V = rng.uniform(-args.v_scale, args.v_scale, size=(args.n, args.m))
    A = rng.standard_normal((args.d, args.n)) / 2
    save_system(LinearReservoir(W, V, LinearReadout(A), args.input_bound), args.out)
    print(f"wrote system to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scrforge", description="Approximate linear reservoirs by simple cycle reservoirs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dilation-exp", help="state MSE of cyclic dilations versus dilation order")
    d.add_argument("--dataset", choices=("ett", "ecl"), default="ett")
    d.add_argument("--data", type=Path, help="CSV file of the dataset")
    d.add_argument("--synthetic", type=int, metavar="LENGTH", help="use a synthetic stream instead of --data")
    d.add_argument("--data-seed", type=int, default=0, help="seed of the synthetic stream")
    d.add_argument("--column")
    d.add_argument("--out", type=Path, required=True)
    d.add_argument("--seeds", type=int, default=15)
    d.add_argument("--horizon", type=int, default=300)
    d.add_argument("--rho", type=float, default=0.9)
    d.add_argument("--ridge", type=float, default=1e-9)
    d.add_argument("--input-scale", type=float, default=1.0)
    d.add_argument("--orders", type=parse_int_list, default=ExperimentConfig.orders)
    d.add_argument("--washout", type=int)
    d.add_argument("--max-steps", type=int)
    d.set_defaults(func=cmd_dilation)

    m = sub.add_parser("matching-exp", help="matched cycle length versus the closed-form bound")
    m.add_argument("--out", type=Path, required=True)
    m.add_argument("--delta", type=float, default=0.1)
    m.add_argument("--sizes", type=parse_int_list, default=ExperimentConfig.sizes)
    m.add_argument("--samples", type=int, default=10)
    m.add_argument("--seed", type=int, default=0)
    m.set_defaults(func=cmd_matching)

    a = sub.add_parser("approx", help="build an SCR epsilon-close to a stored system")
    a.add_argument("--system", type=Path, required=True)
    a.add_argument("--epsilon", type=float, required=True)
    a.add_argument("--out", type=Path, required=True)
    a.add_argument("--streams", type=int, default=20)
    a.add_argument("--length", type=int, default=500)
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_approx)

    r = sub.add_parser("random-system", help="write a random contractive system directory")
    r.add_argument("--out", type=Path, required=True)
    r.add_argument("--n", type=int, default=4)
    r.add_argument("--m", type=int, default=1)
    r.add_argument("--d", type=int, default=1)
    r.add_argument("--lam", type=float, default=0.8)
    r.add_argument("--v-scale", type=float, default=0.1)
    r.add_argument("--input-bound", type=float, default=1.0)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_random_system)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvalidInputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailureError, ResourceLimitError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
