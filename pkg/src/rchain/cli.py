"""Command line entry point: ``rchain {generate,train,compare,evaluate}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .datagen import generate_trajectories, read_trajectory_csv, write_trajectory_csv
from .harness import (
    ExperimentConfig,
    compare_schemes,
    config_hash,
    evaluate,
    load_config,
    train_one,
    write_loss_csv,
    write_metrics_csv,
)
from .loss import SCHEMES
from .mlp import DivergenceError, load_checkpoint, save_checkpoint
from .trajectory import extract_windows


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def _out(cfg) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(args):
    cfg = _config(args)
    path = _out(cfg) / "trajectories.csv"
    write_trajectory_csv(generate_trajectories(cfg.dataset), path)
    print(path)


def cmd_train(args):
    cfg = _config(args)
    if args.scheme:
        cfg = replace(cfg, scheme=args.scheme)
    out = _out(cfg)
    res = train_one(cfg)
    ckpt = out / f"model_{cfg.scheme}.npz"
    save_checkpoint(ckpt, res.params, res.standardizer,
                    {"scheme": cfg.scheme, "n": cfg.dataset.n, "m": cfg.dataset.m,
                     "config_hash": config_hash(cfg)})
    write_loss_csv(res.reports, out / f"loss_{cfg.scheme}.csv")
    last = res.reports[-1]
    print(f"{cfg.scheme}: final val_abs_loss {last.val_abs_loss:.6f} -> {ckpt}")


def cmd_compare(args):
    cfg = _config(args)
    cmp = compare_schemes(replace(cfg, scheme=args.baseline),
                          replace(cfg, scheme=args.candidate), cfg.output_dir)
    s = cmp.summary()
    print(json.dumps(s))
    if not cmp.direction_ok:
        print(f"warning: {cmp.candidate} did not beat {cmp.baseline} at this seed",
              file=sys.stderr)


def cmd_evaluate(args):
    cfg = _config(args)
    params, standardizer, meta = load_checkpoint(args.checkpoint)
    n, m = int(meta["n"]), int(meta["m"])
    samples = [s for t in read_trajectory_csv(args.data)
               for s in extract_windows(t, n, m, args.stride)]
    metrics = args.metrics.split(",") if args.metrics else list(cfg.eval_metrics)
    report = evaluate(params, samples, metrics, meta["scheme"], standardizer)
    path = _out(cfg) / "metrics.csv"
    write_metrics_csv(report, path)
    print(path)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rchain", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=int, help="override every seed in the config")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write synthetic trajectories to CSV")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", parents=[common], help="train one model")
    t.add_argument("--scheme", choices=SCHEMES)
    t.set_defaults(func=cmd_train)

    c = sub.add_parser("compare", parents=[common], help="train two schemes on the same data")
    c.add_argument("--baseline", choices=SCHEMES, default="relative_eq4")
    c.add_argument("--candidate", choices=SCHEMES, default="residual_chain_eq7")
    c.set_defaults(func=cmd_compare)

    e = sub.add_parser("evaluate", parents=[common], help="metrics of a checkpoint on CSV data")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--data", required=True, help="trajectory CSV")
    e.add_argument("--stride", type=int, default=1)
    e.add_argument("--metrics", help="comma-separated subset of ade,fde,dtw,frechet,hausdorff,chamfer")
    e.set_defaults(func=cmd_evaluate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ValueError, DivergenceError, OSError, KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"rchain {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
