"""Command-line entry point: train the toy model and export feature CSVs."""

import argparse
import sys

from . import AdapterConfig, TrainingDivergedError, extract_features


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smia-adapter",
        description="Export last-layer gradient features for unlearning audits.",
    )
    parser.add_argument("--hidden-width", type=int, default=32)
    parser.add_argument("--epochs", type=int, default=400)
    parser.add_argument("--train-n", type=int, default=200, help="training samples per class")
    parser.add_argument("--holdout-n", type=int, default=200, help="held-out samples per class")
    parser.add_argument("--target-class", type=int, default=0, choices=(0, 1))
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--alpha", type=float, required=True, help="audit-set mixing rate")
    parser.add_argument("--outdir", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = AdapterConfig(
        hidden_width=args.hidden_width,
        epochs=args.epochs,
        train_n=args.train_n,
        holdout_n=args.holdout_n,
        target_class=args.target_class,
        seed=args.seed,
    )
    try:
        manifest = extract_features(config, args.alpha, args.outdir)
    except (TrainingDivergedError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {manifest['n_member']} member, {manifest['n_nonmember']} non-member, "
        f"{manifest['n_audit']} audit feature rows (d={manifest['feature_dim']}) to {args.outdir}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
