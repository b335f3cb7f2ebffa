"""Command-line surface: decompose graphs, extract layer graphs,
re-initialize snapshots, train models, and verify the centered statistic.

Exit codes: 0 success, 2 input/format problems, 3 internal contract
violations, 4 check failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .datasets import IdxFormatError, blob_dataset, mnist_dataset
from .formats import (
    EdgeListFormatError,
    Hcw1FormatError,
    decode_hcw1,
    encode_hcw1,
    read_edge_list,
    write_core_csv,
    write_edge_list,
    write_metrics_csv,
    write_plan_csv,
)
from .hypergraph import hcore_numbers, whcore_numbers
from .mlp import (
    DivergenceError,
    MlpModel,
    TrainConfig,
    init_baseline,
    run_experiment,
    train,
)
from .nngraph import snapshot_graphs
from .plans import PlanMismatchError, build_plan, sample_reinit
from .zeromean import (
    MIN_SAMPLES,
    conv_core_pair_source,
    halfnormal_pair_source,
    zero_mean_check,
)

__all__ = ["main", "entrypoint"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONTRACT = 3
EXIT_CHECK_FAILED = 4


def _echo_config(args: argparse.Namespace) -> None:
    resolved = {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in sorted(vars(args).items())
        if key != "func"
    }
    print(f"config: {json.dumps(resolved, sort_keys=True)}")


def cmd_decompose(args) -> int:
    with open(args.graph) as fh:
        graph = read_edge_list(fh)
    if args.weighted:
        cores = whcore_numbers(graph, l=args.l)
    else:
        cores = hcore_numbers(graph, ignore_weights=True, l=args.l)
    with open(args.out, "w", newline="") as fh:
        write_core_csv(cores, fh)
    print(f"wrote {len(cores.values)} core numbers to {args.out}")
    return EXIT_OK


def cmd_extract_graph(args) -> int:
    snapshot = decode_hcw1(Path(args.weights).read_bytes())
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, graphs in snapshot_graphs(snapshot, selector=args.layers):
        for sign, graph in (("plus", graphs.g_plus), ("minus", graphs.g_minus)):
            path = out_dir / f"{name}.{sign}.edges"
            with open(path, "w") as fh:
                fh.write(f"# layer {name} ({sign} weights), "
                         f"{len(graph.left_ids)} left x {len(graph.right_ids)} right\n")
                write_edge_list(graph, fh)
            written.append(path)
    print(f"wrote {len(written)} edge lists to {out_dir}")
    return EXIT_OK


def cmd_reinit(args) -> int:
    snapshot = decode_hcw1(Path(args.weights).read_bytes())
    plan = build_plan(snapshot, selector=args.layers)
    fresh = sample_reinit(snapshot, plan, seed=args.seed, selector=args.layers)
    Path(args.out).write_bytes(encode_hcw1(fresh))
    sidecars = write_plan_csv(plan, args.out)
    print(f"wrote {args.out} (+ {len(sidecars)} plan csvs)")
    return EXIT_OK


def _load_dataset(args):
    arch = args.arch
    if args.dataset == "mnist":
        return mnist_dataset(
            root=args.data_dir,
            train_limit=args.train_limit,
            test_limit=args.test_limit,
        )
    return blob_dataset(
        n_train=args.train_limit or 512,
        n_test=args.test_limit or 128,
        n_features=arch[0],
        n_classes=arch[-1],
        seed=args.seed,
    )


def cmd_train(args) -> int:
    config = TrainConfig(
        arch=args.arch,
        epochs=args.epochs,
        learning_rate=args.lr,
        momentum=args.momentum,
        batch_size=args.batch_size,
        pretrain_epochs=args.pretrain_epochs,
        seed=args.seed,
        init=args.init,
    )
    dataset = _load_dataset(args)
    if config.init == "hcore":
        baseline_log, hcore_log = run_experiment(dataset, config)
        with open(args.metrics, "w", newline="") as fh:
            write_metrics_csv(hcore_log, fh)
        baseline_path = args.metrics_baseline or _sibling(args.metrics, "baseline")
        with open(baseline_path, "w", newline="") as fh:
            write_metrics_csv(baseline_log, fh)
        print(
            f"final test accuracy: hcore {hcore_log.final_test_accuracy():.4f} "
            f"vs kaiming {baseline_log.final_test_accuracy():.4f}"
        )
        print(f"wrote {args.metrics} and {baseline_path}")
    else:
        model = init_baseline(MlpModel.zeros(config.arch), config.init, config.seed)
        _, log = train(model, dataset, config)
        with open(args.metrics, "w", newline="") as fh:
            write_metrics_csv(log, fh)
        if log.records:
            print(f"final test accuracy: {log.final_test_accuracy():.4f}")
        print(f"wrote {args.metrics}")
    return EXIT_OK


def _sibling(path, tag: str) -> str:
    p = Path(path)
    return str(p.with_name(f"{p.stem}.{tag}{p.suffix}"))


def cmd_check_zero_mean(args) -> int:
    if args.negative_control:
        sample, f = halfnormal_pair_source(shift=0.5)
        result = zero_mean_check(sample, f, args.samples, seed=args.seed)
        print(f"negative control (shifted law): {result}")
        return EXIT_OK if result.passed else EXIT_CHECK_FAILED
    sample_a, f_a = halfnormal_pair_source()
    result_a = zero_mean_check(sample_a, f_a, args.samples, seed=args.seed)
    print(f"mode a (half-normal, identity): {result_a}")
    sample_b, f_b = conv_core_pair_source()
    result_b = zero_mean_check(sample_b, f_b, args.samples, seed=args.seed)
    print(f"mode b (conv layer core means): {result_b}")
    return EXIT_OK if (result_a.passed and result_b.passed) else EXIT_CHECK_FAILED


def _arch(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"arch must be comma-separated ints, got {text!r}")
    if len(sizes) < 2:
        raise argparse.ArgumentTypeError("arch needs at least input and output sizes")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hcore",
        description="Hypercore decompositions and core-guided re-initialization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="core numbers of an edge-list graph")
    p.add_argument("--graph", required=True, help="edge-list file: left right [weight]")
    p.add_argument("--weighted", action="store_true", help="use weighted degrees")
    p.add_argument("--l", type=int, default=2, help="hyperedge cardinality threshold")
    p.add_argument("--out", required=True, help="output CSV (node_id,core)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("extract-graph", help="dump signed layer graphs as edge lists")
    p.add_argument("--weights", required=True, help="input HCW1 snapshot")
    p.add_argument("--layers", choices=["linear", "conv", "all"], default="all")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_extract_graph)

    p = sub.add_parser("reinit", help="re-initialize a snapshot from its core numbers")
    p.add_argument("--weights", required=True, help="input HCW1 snapshot")
    p.add_argument("--out", required=True, help="output HCW1 snapshot")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--layers", choices=["linear", "conv", "all"], default="all")
    p.set_defaults(func=cmd_reinit)

    p = sub.add_parser("train", help="train an MLP, optionally with re-initialization")
    p.add_argument("--dataset", choices=["mnist", "synthetic"], default="synthetic")
    p.add_argument("--arch", type=_arch, default=(784, 64, 32, 10),
                   help="comma-separated layer sizes")
    p.add_argument("--init", choices=["kaiming", "xavier", "hcore"], default="kaiming")
    p.add_argument("--pretrain-epochs", type=int, default=10)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metrics", required=True, help="output CSV (epoch,split,loss,accuracy)")
    p.add_argument("--metrics-baseline", default=None,
                   help="baseline-arm CSV for --init hcore (default: <metrics>.baseline)")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--train-limit", type=int, default=None)
    p.add_argument("--test-limit", type=int, default=None)
    p.add_argument("--data-dir", default=None,
                   help="dataset root (default: $HCORE_DATA_DIR, then ./data/mnist)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("check-zero-mean", help="Monte-Carlo check of the centered statistic")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--negative-control", action="store_true",
                   help="run the shifted-law control (expected to fail)")
    p.set_defaults(func=cmd_check_zero_mean)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "check-zero-mean" and args.samples < MIN_SAMPLES:
        parser.error(f"--samples must be >= {MIN_SAMPLES}")
    if args.command == "train" and args.pretrain_epochs < 1 and args.init == "hcore":
        parser.error("--init hcore needs --pretrain-epochs >= 1")
    _echo_config(args)
    try:
        return args.func(args)
    except (PlanMismatchError, DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (EdgeListFormatError, Hcw1FormatError, IdxFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
