"""Command line handshake: dataset JSONL pair in, metrics JSON out.

Example:

    tdost-trainer --source out/a.jsonl --target out/b.jsonl \
        --metrics out/metrics.json --classifier bilstm --seed 7
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .data import (
    DatasetError,
    label_order,
    load_manifest,
    load_windows,
    shared_labels,
)
from .encoders import make_encoder
from .train import (
    KIND_BASELINE_IDS,
    KINDS,
    ClassifierSpec,
    TrainPlan,
    transfer_run,
)

PLANS = ("paper", "baseline", "fast")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdost-trainer",
        description="train sentence-window classifiers and score a frozen "
        "transfer to a second home",
    )
    parser.add_argument("--version", action="version",
                        version=f"tdost-trainer {__version__}")
    parser.add_argument("--source", required=True, type=Path,
                        help="training dataset (JSONL, manifest alongside)")
    parser.add_argument("--target", required=True, type=Path,
                        help="evaluation dataset from the other home")
    parser.add_argument("--metrics", required=True, type=Path,
                        help="where to write the metrics JSON")
    parser.add_argument("--classifier", required=True, choices=KINDS)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--encoder", default="hash",
                        help="sentence encoder name (default: hash)")
    parser.add_argument("--dimension", type=int, default=256,
                        help="hash encoder output width")
    parser.add_argument("--hash-seed", type=int, default=0,
                        help="hash encoder seed, independent of --seed")
    parser.add_argument("--plan", choices=PLANS, default=None,
                        help="hyperparameter grid (default: paper, or the "
                        "fixed baseline cell for baseline_ids)")
    parser.add_argument("--epochs", type=int, default=None,
                        help="override the plan's epoch count")
    parser.add_argument("--batch-size", type=int, default=None)
    parser.add_argument("--workers", type=int, default=1,
                        help="grid cells to train as parallel processes")
    return parser


def resolve_plan(args: argparse.Namespace) -> TrainPlan | None:
    plan = None
    if args.plan == "paper":
        plan = TrainPlan.paper()
    elif args.plan == "baseline":
        plan = TrainPlan.baseline()
    elif args.plan == "fast":
        plan = TrainPlan.fast()
    if args.epochs is not None or args.batch_size is not None:
        if plan is None:
            plan = (TrainPlan.baseline()
                    if args.classifier == KIND_BASELINE_IDS
                    else TrainPlan.paper())
        plan = TrainPlan(
            epochs=args.epochs if args.epochs is not None else plan.epochs,
            learning_rates=plan.learning_rates,
            weight_decays=plan.weight_decays,
            batch_size=(args.batch_size if args.batch_size is not None
                        else plan.batch_size),
        )
    return plan


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        source = load_windows(args.source)
        target = load_windows(args.target)
        source_manifest = load_manifest(args.source)
        source_order = label_order(source, source_manifest)
        labels = shared_labels(source_order, [w.label for w in target])

        encoder = None
        if args.classifier != KIND_BASELINE_IDS:
            encoder = make_encoder(args.encoder, dimension=args.dimension,
                                   seed=args.hash_seed)
        spec = ClassifierSpec(kind=args.classifier)
        result = transfer_run(source, target, labels, spec,
                              resolve_plan(args), encoder,
                              seed=args.seed, workers=max(1, args.workers))
        args.metrics.parent.mkdir(parents=True, exist_ok=True)
        args.metrics.write_text(result.to_json(), encoding="utf-8")
    except DatasetError as err:
        print(f"tdost-trainer: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"tdost-trainer: {err}", file=sys.stderr)
        return 1
    mean_acc = sum(f["acc"] for f in result.folds) / len(result.folds)
    print(f"{args.classifier}: mean target accuracy "
          f"{mean_acc:.3f} over {len(result.folds)} folds "
          f"-> {args.metrics}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
