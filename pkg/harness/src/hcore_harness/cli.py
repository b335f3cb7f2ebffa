"""Harness entry point: run the two-arm protocol, optionally over a seed
sweep, and report the per-arm accuracies."""

from __future__ import annotations

import argparse
import csv
import statistics
import sys
from pathlib import Path

from .experiment import SELECTORS, run_paper_experiment

__all__ = ["main", "entrypoint"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hcore-harness",
        description="CNN experiments with core-guided re-initialization via the hcore CLI.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="train the Kaiming and re-initialization arms")
    p.add_argument(
        "--dataset",
        choices=["cifar10", "cifar100", "mnist", "synthetic-cifar10", "synthetic-cifar100", "synthetic-mnist"],
        required=True,
    )
    p.add_argument("--selector", choices=list(SELECTORS), default="all")
    p.add_argument("--pretrain-epochs", type=int, default=10)
    p.add_argument("--epochs", type=int, default=150)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1, help="run this many consecutive seeds")
    p.add_argument("--out-dir", default="runs")
    p.add_argument("--data-root", default=None)
    p.add_argument("--train-limit", type=int, default=None)
    p.add_argument("--test-limit", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--cli", default="hcore", help="path to the hcore CLI")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    finals = {"kaiming": [], "hcore": []}
    for seed in range(args.seed, args.seed + args.seeds):
        result = run_paper_experiment(
            dataset=args.dataset,
            selector=args.selector,
            pretrain_epochs=args.pretrain_epochs,
            total_epochs=args.epochs,
            seed=seed,
            out_dir=args.out_dir,
            data_root=args.data_root,
            train_limit=args.train_limit,
            test_limit=args.test_limit,
            batch_size=args.batch_size,
            lr=args.lr,
            momentum=args.momentum,
            cli=args.cli,
        )
        for arm in ("kaiming", "hcore"):
            finals[arm].append(result.final_accuracy(arm))
            print(
                f"seed {seed} {arm}: final {result.final_accuracy(arm):.4f} "
                f"best {result.best_accuracy(arm):.4f}"
            )
    if args.seeds > 1:
        medians = {arm: statistics.median(vals) for arm, vals in finals.items()}
        print(
            f"median over {args.seeds} seeds: kaiming {medians['kaiming']:.4f} "
            f"hcore {medians['hcore']:.4f}"
        )
        path = Path(args.out_dir) / f"{args.dataset}_{args.selector}_N{args.pretrain_epochs}_medians.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["arm", "median_final_accuracy", "seeds"])
            for arm, median in medians.items():
                writer.writerow([arm, repr(median), args.seeds])
        print(f"wrote {path}")
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
