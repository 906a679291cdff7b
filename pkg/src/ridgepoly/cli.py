"""Command line front end.

Subcommands: generate (series CSV), train (single seeded fit), evaluate
(saved model on the out-of-sample split), gradcheck (finite-difference
validation of the sensitivity recursion), benchmark (multi-seed sweep plus
no-feedback baseline) and compare (literature comparison table).

Exit status is 0 on success; failures print one machine-parseable line
``error.<category>: message`` to stderr and return 1.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .dataset import (build_patterns, generate_mackey_glass, load_series_csv,
                      save_patterns_csv, save_series_csv)
from .errors import (ConfigError, DegenerateRangeError, GrowthExhaustedError,
                     NumericDivergenceError)
from .harness import (ExperimentConfig, benchmark, dumps_config, emit_comparison,
                      load_config, prepare_data, read_report_rmses, run_single,
                      write_report_csv)
from .metrics import evaluate, save_forecast_csv
from .network import FeedbackMode, add_block, load_model, new_network, save_model
from .trainer import GradientMode, TrainerConfig, gradient_check

_MODE_NAMES = [m.value for m in FeedbackMode]


def _resolve_config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = load_config(args.config, strict=args.strict)
    else:
        cfg = ExperimentConfig()
    trainer_updates = {}
    if getattr(args, "seed", None) is not None:
        trainer_updates["seed"] = args.seed
    if getattr(args, "gradient", None) is not None:
        trainer_updates["gradient_mode"] = GradientMode.from_name(args.gradient)
    updates = {}
    if getattr(args, "seeds", None) is not None:
        updates["n_seeds"] = args.seeds
    if getattr(args, "mode", None) is not None:
        updates["mode"] = FeedbackMode.from_name(args.mode)
    if getattr(args, "out", None) is not None:
        updates["out_dir"] = args.out
    if getattr(args, "sweep", None) is not None:
        updates["sweep_size"] = args.sweep
    if trainer_updates:
        updates["trainer"] = replace(cfg.trainer, **trainer_updates)
    if updates:
        cfg = replace(cfg, **updates)
    if args.strict:
        try:
            cfg.trainer.validate_strict()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return cfg


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(cfg)
    if cfg.series_path is not None:
        series = load_series_csv(cfg.series_path)
    else:
        series = generate_mackey_glass(cfg.mg)
    save_series_csv(series, out / "series.csv")
    patterns = build_patterns(series.values, cfg.lags, cfg.horizon)
    save_patterns_csv(patterns, cfg.lags, out / "patterns.csv")
    print(f"wrote {len(series.values)} points to {out / 'series.csv'} "
          f"and {len(patterns)} patterns to {out / 'patterns.csv'}")
    return 0


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(cfg)
    data = prepare_data(cfg)
    art = run_single(data, cfg.trainer, cfg.mode)
    art.history.to_csv(out / "growth.csv")
    save_model(art.net, out / "model.txt")
    r = art.result
    print(f"seed {r.seed} mode {r.mode.value}: grew to {r.final_k} blocks in "
          f"{r.epochs_run} epochs (best epoch {r.best_epoch}, sse {r.best_train_sse:.6g})")
    print(f"out-of-sample rmse: normalized {r.rmse_normalized:.6g}, "
          f"de-normalized {r.rmse_denormalized:.6g}")
    print(f"wrote {out / 'model.txt'} and {out / 'growth.csv'}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(cfg)
    net = load_model(args.model)
    data = prepare_data(cfg)
    result = evaluate(net, data.test, data.norm)
    save_forecast_csv(data.test, result, data.norm, out / "forecast.csv")
    print(f"evaluated {result.n} out-of-sample patterns: rmse normalized "
          f"{result.rmse_normalized:.6g}, de-normalized {result.rmse_denormalized:.6g}")
    print(f"wrote {out / 'forecast.csv'}")
    return 0


def cmd_gradcheck(args) -> int:
    cfg = _resolve_config(args)
    rng = np.random.default_rng(cfg.trainer.seed)
    m_external = 2
    net = new_network(cfg.mode, m_external, cfg.trainer.init_range, rng)
    for _ in range(args.blocks - 1):
        add_block(net, cfg.trainer.init_range, rng, max_blocks=cfg.trainer.max_blocks)
    patterns = build_patterns(rng.uniform(0.2, 0.8, size=args.steps + m_external + 1),
                              lags=tuple(range(m_external)), horizon=1)
    report = gradient_check(net, patterns, cfg.trainer, epsilon=args.epsilon)
    print(f"gradient check: mode {cfg.mode.value}, {net.k} block(s), "
          f"trainable order {net.k}, {len(patterns)} steps, epsilon {args.epsilon:g}")
    for name, check in (("paper", report.paper), ("exact", report.exact)):
        print(f"  {name:<6} max rel err {check.max_rel_error:.3e}  "
              f"mean rel err {check.mean_rel_error:.3e}")
    return 0


def cmd_benchmark(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(cfg)
    data = prepare_data(cfg)
    save_series_csv(data.series, out / "series.csv")
    report = benchmark(cfg, data=data)
    rows = report.main_results + report.baseline_results
    write_report_csv(rows, cfg, out / "report.csv")
    best = report.best_artifacts
    best.history.to_csv(out / "growth.csv")
    save_forecast_csv(data.test, best.eval_result, data.norm, out / "forecast.csv")
    comparison = emit_comparison(report.best_rmse_denormalized,
                                 label=f"{cfg.mode.value} (this run)")
    (out / "comparison.txt").write_text(comparison)
    print(f"{cfg.mode.value} over {cfg.n_seeds} seeds x {len(report.cells)} sweep cells:")
    print(f"  best de-normalized rmse  {report.best_rmse_denormalized:.6g} "
          f"(seed {best.result.seed})")
    mean = np.mean([r.rmse_denormalized for r in report.main_results])
    std = np.std([r.rmse_denormalized for r in report.main_results])
    print(f"  mean {mean:.6g}  std {std:.6g}")
    print(f"  beats the no-feedback baseline on {report.wins} of {cfg.n_seeds} seeds")
    print(f"wrote report.csv, growth.csv, forecast.csv, series.csv, comparison.txt to {out}")
    return 0


def cmd_compare(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(cfg)
    if args.rmse is not None:
        run_rmse = args.rmse
    elif args.report is not None:
        run_rmse = min(read_report_rmses(args.report))
    else:
        raise ConfigError("compare needs --rmse VALUE or --report PATH")
    text = emit_comparison(run_rmse, label=f"{cfg.mode.value} (this run)")
    (out / "comparison.txt").write_text(text)
    print(text, end="")
    return 0


def cmd_showconfig(args) -> int:
    cfg = _resolve_config(args)
    print(dumps_config(cfg), end="")
    return 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="config file (key = value lines)")
    sub.add_argument("--seed", type=int, help="base RNG seed")
    sub.add_argument("--seeds", type=int, help="number of consecutive seeds")
    sub.add_argument("--mode", choices=_MODE_NAMES, help="feedback variant")
    sub.add_argument("--gradient", choices=["paper", "exact"],
                     help="sensitivity recursion variant")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--strict", action="store_true",
                     help="enforce the published parameter ranges")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ridgepoly",
        description="Ridge polynomial networks with error/output feedback "
                    "for multi-step time series forecasting.")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("generate", help="generate the benchmark series CSV")
    _add_common(sub)
    sub.set_defaults(func=cmd_generate)

    sub = subs.add_parser("train", help="train one seeded model")
    _add_common(sub)
    sub.set_defaults(func=cmd_train)

    sub = subs.add_parser("evaluate", help="evaluate a saved model out of sample")
    _add_common(sub)
    sub.add_argument("--model", required=True, help="model file from 'train'")
    sub.set_defaults(func=cmd_evaluate)

    sub = subs.add_parser("gradcheck", help="finite-difference gradient validation")
    _add_common(sub)
    sub.add_argument("--blocks", type=int, default=1,
                     help="network size; the largest block is the trainable one")
    sub.add_argument("--steps", type=int, default=30, help="sequence length")
    sub.add_argument("--epsilon", type=float, default=1e-6, help="perturbation size")
    sub.set_defaults(func=cmd_gradcheck)

    sub = subs.add_parser("benchmark",
                          help="multi-seed sweep plus no-feedback baseline")
    _add_common(sub)
    sub.add_argument("--sweep", type=int,
                     help="extra sweep cells sampled from the published ranges")
    sub.set_defaults(func=cmd_benchmark)

    sub = subs.add_parser("compare", help="literature comparison table")
    _add_common(sub)
    sub.add_argument("--rmse", type=float, help="de-normalized RMSE of this run")
    sub.add_argument("--report", help="report.csv to take the best RMSE from")
    sub.set_defaults(func=cmd_compare)

    sub = subs.add_parser("showconfig", help="print the fully resolved config")
    _add_common(sub)
    sub.set_defaults(func=cmd_showconfig)

    return parser


_CATEGORIES: list[tuple[type, str]] = [
    (ConfigError, "config"),
    (NumericDivergenceError, "numeric-divergence"),
    (GrowthExhaustedError, "growth-exhausted"),
    (DegenerateRangeError, "degenerate-range"),
    (FileNotFoundError, "io"),
    (IsADirectoryError, "io"),
    (PermissionError, "io"),
    (ValueError, "invalid-input"),
]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - mapped to exit categories
        for etype, category in _CATEGORIES:
            if isinstance(exc, etype):
                print(f"error.{category}: {exc}", file=sys.stderr)
                return 1
        raise


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
