"""Batch command-line front end.

Subcommands: ``inspect`` (dataset counts), ``vectorize`` (count matrices to
CSV plus a binary cache), ``evaluate`` (one leave-one-event-out run),
``sweep`` (grids over interval, learning rate, batch size and implementation),
``synth`` (write a synthetic corpus) and ``reproduce`` (the full-size sweep
recipe).  Option precedence is flags over config file over defaults; exit
codes are 0 success, 1 usage/config error, 2 data error, 3 training error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import tomli
from joblib import Parallel, delayed

from .errors import ConfigError, DataError, RumorTsError
from .evaluation import RunSettings, leave_one_event_out
from .ingest import load_dataset
from .synthetic import generate_synthetic_corpus, write_corpus_tree
from .timeseries import (
    CANONICAL_INTERVAL_MINUTES,
    IntervalConfig,
    build_matrix,
    cache_path,
    dataset_fingerprint,
    save_cache,
    save_csv,
)

ENV_ROOT = "RUMOR_TS_DATA"

SWEEP_AXES = {
    "t": [2, 5, 10, 30, 60],
    "lr": [5e-6, 1e-5, 1.5e-5],
    "batch": [16, 32, 64],
    "impl": ["i1", "i2", "i3"],
}


@dataclass
class RunConfig:
    """Merged CLI options; serialized verbatim into every artifact."""

    root: str | None = None
    events: list[str] | None = None
    interval_min: int = 60
    svd_rank: int = 32
    impl: str = "i1"
    lr: float = 1e-5
    batch: int = 32
    epochs: int = 300
    seed: int = 0
    out: str = "runs"
    jobs: int = 1
    fit_on_all: bool = False
    bootstrap: bool = False

    def settings(self) -> RunSettings:
        return RunSettings(
            interval_minutes=self.interval_min, svd_rank=self.svd_rank,
            impl=self.impl, learning_rate=self.lr, batch_size=self.batch,
            epochs=self.epochs, seed=self.seed, fit_on_all=self.fit_on_all,
            bootstrap=self.bootstrap, jobs=self.jobs)

    def require_root(self) -> Path:
        root = self.root or os.environ.get(ENV_ROOT)
        if not root:
            raise ConfigError(
                f"no dataset root: pass --root or set {ENV_ROOT}")
        return Path(root)


class _Parser(argparse.ArgumentParser):
    """argparse that signals usage problems as ConfigError (exit code 1)."""

    def error(self, message):
        raise ConfigError(message)


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            values = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(
            f"config file {path}: unknown keys {', '.join(sorted(unknown))}")
    return values


def merge_config(args: argparse.Namespace) -> RunConfig:
    """defaults < config file < explicit flags."""
    merged = asdict(RunConfig())
    config_path = getattr(args, "config", None)
    if config_path:
        merged.update(_load_config_file(config_path))
    for key in merged:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
    cfg = RunConfig(**merged)
    if cfg.interval_min not in CANONICAL_INTERVAL_MINUTES:
        raise ConfigError(
            f"--interval-min must be one of {CANONICAL_INTERVAL_MINUTES}, "
            f"got {cfg.interval_min}")
    cfg.settings()  # validates the numeric domains
    return cfg


def _add_common_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="TOML file with key = value pairs mirroring the flags")
    sub.add_argument("--root", help=f"dataset root (fallback: ${ENV_ROOT})")
    sub.add_argument("--events", help="comma-separated event list (default: all but the excluded pair)")
    sub.add_argument("--interval-min", dest="interval_min", type=int,
                     help="bucket width in minutes: 2, 5, 10, 30 or 60 (default 60)")
    sub.add_argument("--svd-rank", dest="svd_rank", type=int,
                     help="reduction rank (default 32, clamped per fold)")
    sub.add_argument("--impl", choices=["i1", "i2", "i3"], help="ensemble line-up (default i1)")
    sub.add_argument("--lr", type=float, help="learning rate (default 1e-5)")
    sub.add_argument("--batch", type=int, help="batch input size (default 32)")
    sub.add_argument("--epochs", type=int, help="training epochs (default 300)")
    sub.add_argument("--seed", type=int, help="base seed (default 0)")
    sub.add_argument("--out", help="output directory (default runs)")
    sub.add_argument("--jobs", type=int, help="parallel folds or sweep cells (default 1)")
    sub.add_argument("--fit-on-all", dest="fit_on_all", action="store_const", const=True,
                     help="fit SVD and scaler on train+test rows instead of train only")
    sub.add_argument("--bootstrap", action="store_const", const=True,
                     help="train each member on a with-replacement resample")


def _event_list(cfg: RunConfig) -> list[str] | None:
    if cfg.events is None:
        return None
    if isinstance(cfg.events, str):
        return [e.strip() for e in cfg.events.split(",") if e.strip()]
    return list(cfg.events)


def cmd_inspect(cfg: RunConfig) -> int:
    raw, summary = load_dataset(cfg.require_root(), _event_list(cfg))
    total_r = sum(1 for c in raw.conversations if c.label == 1)
    total_n = len(raw.conversations) - total_r
    print(f"{'Event':<24}{'Rumors':>16}{'Non-rumors':>16}{'Total':>8}")
    for event in raw.events:
        r = sum(1 for c in raw.conversations if c.event == event and c.label == 1)
        n = sum(1 for c in raw.conversations if c.event == event and c.label == 0)
        t = r + n
        print(f"{event:<24}{r:>8} ({100 * r / t:5.2f}%)"
              f"{n:>8} ({100 * n / t:5.2f}%){t:>8}")
    total = total_r + total_n
    print(f"{'Total':<24}{total_r:>8} ({100 * total_r / total:5.2f}%)"
          f"{total_n:>8} ({100 * total_n / total:5.2f}%){total:>8}")
    if summary.errors:
        print(f"{len(summary.errors)} conversation(s) dropped; see the load summary")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "load_summary.json").write_text(summary.to_json(), encoding="utf-8")
    return 0


def cmd_vectorize(cfg: RunConfig, interval_minutes: list[int] | None = None) -> int:
    raw, _ = load_dataset(cfg.require_root(), _event_list(cfg))
    fingerprint = dataset_fingerprint(raw)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for minutes in interval_minutes or [cfg.interval_min]:
        interval = IntervalConfig.from_minutes(minutes)
        cached = cache_path(out, fingerprint, interval)
        if cached.exists():
            print(f"T={minutes} min: cache {cached.name} is up to date")
            continue
        ds = build_matrix(list(raw.conversations), interval)
        sparsity = float((ds.matrix == 0).mean())
        save_cache(ds, out, fingerprint, interval)
        save_csv(ds, out / f"counts_{fingerprint}_T{interval.interval_seconds}.csv")
        print(f"T={minutes} min: seq_len={ds.seq_len} sparsity={sparsity:.4f}")
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    raw, _ = load_dataset(cfg.require_root(), _event_list(cfg))
    report = leave_one_event_out(raw, cfg.settings())
    out = Path(cfg.out)
    json_path, csv_path = report.write(out)
    (out / "run_config.json").write_text(
        json.dumps(asdict(cfg), indent=2, sort_keys=True), encoding="utf-8")
    for fold in report.folds:
        status = f"ERROR: {fold.error}" if fold.failed else (
            f"micro-F1 {fold.micro_f1:.5f}  macro-F1 {fold.macro_f1:.5f}")
        print(f"fold {fold.event}: {status}")
    print(f"mean micro-F1 {report.mean_micro_f1:.5f}  "
          f"mean macro-F1 {report.mean_macro_f1:.5f}")
    print(f"wrote {json_path} and {csv_path}")
    return 0


def _sweep_cell(cfg: RunConfig, combo: dict) -> dict:
    cell_cfg = RunConfig(**{**asdict(cfg), **combo})
    resolved = {"interval_min": cell_cfg.interval_min, "lr": cell_cfg.lr,
                "batch": cell_cfg.batch, "impl": cell_cfg.impl}
    try:
        raw, _ = load_dataset(cell_cfg.require_root(), _event_list(cell_cfg))
        settings = cell_cfg.settings()
        # Cells may run in parallel with each other; folds stay sequential inside.
        settings = RunSettings(**{**asdict(settings), "jobs": 1})
        report = leave_one_event_out(raw, settings)
    except RumorTsError as exc:
        return {**resolved, "error": str(exc)}
    return {**resolved,
            "micro_f1": report.mean_micro_f1,
            "macro_f1": report.mean_macro_f1,
            "excluded_folds": len(report.excluded)}


def cmd_sweep(cfg: RunConfig, vary: list[str]) -> int:
    axes = {}
    for axis in vary:
        if axis not in SWEEP_AXES:
            raise ConfigError(
                f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")
        axes[axis] = SWEEP_AXES[axis]
    if not axes:
        raise ConfigError("sweep needs at least one --vary axis")
    key_map = {"t": "interval_min", "lr": "lr", "batch": "batch", "impl": "impl"}
    names = list(axes)
    combos = [dict(zip((key_map[a] for a in names), values))
              for values in itertools.product(*(axes[a] for a in names))]

    if cfg.jobs > 1:
        cells = Parallel(n_jobs=cfg.jobs)(
            delayed(_sweep_cell)(cfg, combo) for combo in combos)
    else:
        cells = [_sweep_cell(cfg, combo) for combo in combos]

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.json").write_text(json.dumps({
        "config": asdict(cfg), "vary": names, "cells": cells,
    }, indent=2, sort_keys=True), encoding="utf-8")

    _print_sweep_table(cfg, cells, names, key_map)
    print(f"wrote {out / 'sweep.json'}")
    return 0


def _print_sweep_table(cfg: RunConfig, cells: list[dict], names: list[str],
                       key_map: dict[str, str]) -> None:
    """Rows are interval x varied value, columns are the implementations."""
    impls = SWEEP_AXES["impl"] if "impl" in names else [cfg.impl]
    row_axes = [a for a in names if a != "impl"]
    if "t" not in row_axes:
        row_axes.insert(0, "t")
    row_values = list(itertools.product(
        *([SWEEP_AXES[a] if a in names else [
            cfg.interval_min if a == "t" else getattr(cfg, key_map[a])]
           for a in row_axes])))

    def cell_for(row: tuple, impl: str) -> str:
        want = {key_map[a]: v for a, v in zip(row_axes, row)}
        if "impl" in names:
            want["impl"] = impl
        for cell in cells:
            if all(cell.get(k) == v for k, v in want.items()):
                return "FAILED" if "error" in cell else f"{cell['micro_f1']:.5f}"
        return "-"

    header = "  ".join(f"{a:>10}" for a in row_axes) + "  " + \
        "  ".join(f"{i:>8}" for i in impls)
    print(header)
    for row in row_values:
        line = "  ".join(f"{v:>10}" for v in row) + "  " + \
            "  ".join(f"{cell_for(row, impl):>8}" for impl in impls)
        print(line)


def cmd_synth(cfg: RunConfig, n_events: int, per_event: int,
              burst_gap: float, horizon: int) -> int:
    raw = generate_synthetic_corpus(
        n_events=n_events, conversations_per_event=per_event, seed=cfg.seed,
        burst_mean_gap=burst_gap, horizon_seconds=horizon)
    root = write_corpus_tree(raw, cfg.out)
    rumors = sum(1 for c in raw.conversations if c.label == 1)
    print(f"wrote {len(raw.conversations)} conversations "
          f"({rumors} rumors) across {len(raw.events)} events under {root}")
    return 0


def cmd_reproduce(cfg: RunConfig, run: bool) -> int:
    """Print (or run) the full-size sweeps behind the headline tables."""
    base = f"--root {cfg.root or '$' + ENV_ROOT} --epochs 300 --seed {cfg.seed}"
    commands = [
        f"rumor-ts sweep {base} --batch 32 --vary t --vary lr --vary impl --out {cfg.out}/lr_sweep",
        f"rumor-ts sweep {base} --lr 1e-5 --vary t --vary batch --vary impl --out {cfg.out}/batch_sweep",
    ]
    if not run:
        print("# Full-corpus reproduction recipe (hours of compute; needs the real dataset):")
        for command in commands:
            print(command)
        return 0
    for vary, sub in (("t lr impl", "lr_sweep"), ("t batch impl", "batch_sweep")):
        sub_cfg = RunConfig(**{**asdict(cfg), "out": str(Path(cfg.out) / sub)})
        code = cmd_sweep(sub_cfg, vary.split())
        if code != 0:
            return code
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="rumor-ts", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_inspect = sub.add_parser("inspect", help="per-event class counts")
    p_vectorize = sub.add_parser("vectorize", help="build count matrices and caches")
    p_vectorize.add_argument("--all-intervals", action="store_true",
                             help="vectorize every canonical interval width")
    p_evaluate = sub.add_parser("evaluate", help="one leave-one-event-out run")
    p_sweep = sub.add_parser("sweep", help="grid of evaluate runs")
    p_sweep.add_argument("--vary", action="append", default=[],
                         choices=list(SWEEP_AXES),
                         help="axis to sweep (repeatable)")
    p_synth = sub.add_parser("synth", help="write a synthetic corpus")
    p_synth.add_argument("--n-events", type=int, default=3)
    p_synth.add_argument("--per-event", type=int, default=120)
    p_synth.add_argument("--burst-gap", type=float, default=15.0,
                         help="mean seconds between rumor reactions")
    p_synth.add_argument("--horizon", type=int, default=10800,
                         help="non-rumor reaction window in seconds")
    p_reproduce = sub.add_parser("reproduce", help="full-size sweep recipe")
    p_reproduce.add_argument("--run", action="store_true",
                             help="execute the sweeps instead of printing them")

    for p in (p_inspect, p_vectorize, p_evaluate, p_sweep, p_synth, p_reproduce):
        _add_common_options(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = merge_config(args)
        if args.command == "inspect":
            return cmd_inspect(cfg)
        if args.command == "vectorize":
            minutes = list(CANONICAL_INTERVAL_MINUTES) if args.all_intervals else None
            return cmd_vectorize(cfg, minutes)
        if args.command == "evaluate":
            return cmd_evaluate(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.vary)
        if args.command == "synth":
            return cmd_synth(cfg, args.n_events, args.per_event,
                             args.burst_gap, args.horizon)
        if args.command == "reproduce":
            return cmd_reproduce(cfg, args.run)
        raise ConfigError(f"unknown command {args.command!r}")
    except RumorTsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
