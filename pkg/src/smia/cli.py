"""Command-line interface.

Subcommands:

* ``audit``: run a bootstrap forgetting-rate audit over three feature CSVs.
* ``synth``: generate synthetic member/non-member/audit CSVs with known truth.
* ``bounds``: evaluate the statistical-error and auditing-error bounds.
* ``tnr-curve``: sweep the implied true-negative rate over non-member shares.
* ``sinkhorn``: regularized transport distance between two feature CSVs.

Exit codes: 0 success, 1 usage/IO/validation error, 2 audit failure
(degenerate populations, too many failed bootstrap groups, numerical
collapse).  All randomness flows from ``--seed`` (default 42), so runs are
reproducible by default; ``--entropy`` opts into OS-entropy seeding.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from pathlib import Path

import numpy as np

from .bounds import BoundInputs, auditing_bound, statistical_error_term, tnr_curve
from .estimators import Smia0Auditor, SmiaMAuditor, SmiaWAuditor
from .exceptions import AuditFailureError
from .io import load_feature_matrix, write_feature_matrix, write_report
from .synth import GaussianPopulationSpec, gen_gaussian, gen_mixture
from .transport import SinkhornConfig, cost_matrix, sinkhorn

_KERNEL_FAMILIES = {
    "rbf": "rbf",
    "laplacian": "laplacian",
    "poly": "polynomial",
    "rq": "rational_quadratic",
}


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_seed_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=42, help="master RNG seed (u64)")
    p.add_argument(
        "--entropy",
        action="store_true",
        help="seed from OS entropy instead of --seed (non-reproducible)",
    )


def _resolve_seed(args) -> int:
    return secrets.randbits(63) if args.entropy else args.seed


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smia", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("audit", help="bootstrap forgetting-rate audit")
    p.add_argument("--member", required=True, help="member feature CSV")
    p.add_argument("--nonmember", required=True, help="non-member feature CSV")
    p.add_argument("--audit", required=True, help="pending-audit feature CSV")
    p.add_argument("--method", required=True, choices=["smia0", "smia-m", "smia-w"])
    p.add_argument("--k", type=int, default=200, help="bootstrap groups")
    _add_seed_flags(p)
    p.add_argument("--out", required=True, help="report JSON output path")
    p.add_argument("--kernel", choices=sorted(_KERNEL_FAMILIES), default="rbf")
    p.add_argument("--sigma", type=float, default=None, help="kernel bandwidth (default: median heuristic)")
    p.add_argument("--poly-c", type=float, default=1.0)
    p.add_argument("--poly-p", type=int, default=2)
    p.add_argument("--rq-alpha", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=None, help="transport regularization (default: 5%% of median cost)")
    p.add_argument("--wp", type=int, default=2, help="transport cost exponent")
    p.add_argument("--mode", choices=["ratio", "polarization"], default="ratio")
    p.add_argument("--mean-weight", type=float, default=1.0)
    p.add_argument("--no-filter", action="store_true", help="skip outlier exclusion")
    p.add_argument("--z-threshold", type=float, default=6.0)
    p.add_argument("--resample-fraction", type=float, default=1.0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("synth", help="generate synthetic audit fixtures")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, default=1000, help="rows per output set")
    p.add_argument("--d", type=int, default=2, help="feature dimension")
    p.add_argument("--sep", type=float, default=3.0, help="per-coordinate mean separation")
    _add_seed_flags(p)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bounds", help="evaluate auditing-error bounds")
    p.add_argument("--risk", type=float, default=0.0, help="empirical risk")
    p.add_argument("--chi2", type=float, default=0.0)
    p.add_argument("--m", type=int, default=100, help="sample count")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--dinf", type=float, default=0.0, help="order-infinity Renyi divergence")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("tnr-curve", help="TNR vs non-member share sweep")
    p.add_argument("--accuracy", type=float, required=True)
    p.add_argument("--tpr", type=float, required=True)
    p.add_argument("--p-min", type=float, default=0.01)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--p-steps", type=int, default=100)
    p.set_defaults(func=cmd_tnr_curve)

    p = sub.add_parser("sinkhorn", help="regularized transport distance")
    p.add_argument("--x", required=True, help="first feature CSV")
    p.add_argument("--y", required=True, help="second feature CSV")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--wp", type=int, default=2)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_sinkhorn)

    return parser


def _load(path: str, flag: str) -> np.ndarray:
    try:
        return load_feature_matrix(path)
    except FileNotFoundError:
        raise FileNotFoundError(f"{flag}: no such file: {path}") from None


def cmd_audit(args) -> int:
    x_t = _load(args.member, "--member")
    x_v = _load(args.nonmember, "--nonmember")
    x_f = _load(args.audit, "--audit")
    seed = _resolve_seed(args)
    common = dict(
        outlier_filter=not args.no_filter,
        z_threshold=args.z_threshold,
        k=args.k,
        seed=seed,
        resample_fraction=args.resample_fraction,
        threads=args.threads,
    )
    if args.method == "smia0":
        auditor = Smia0Auditor(mean_weight=args.mean_weight, **common)
    elif args.method == "smia-m":
        auditor = SmiaMAuditor(
            kernel=_KERNEL_FAMILIES[args.kernel],
            sigma=args.sigma,
            poly_c=args.poly_c,
            poly_p=args.poly_p,
            rq_alpha=args.rq_alpha,
            **common,
        )
    else:
        auditor = SmiaWAuditor(
            epsilon=args.epsilon, wp=args.wp, mode=args.mode, **common
        )
    report = auditor.fit(x_t, x_v).audit(x_f)
    write_report(report, args.out)
    print(
        f"alpha_p50={report.alpha_p50:.6f} "
        f"ci=[{report.alpha_p5:.6f}, {report.alpha_p95:.6f}]"
    )
    return 0


def cmd_synth(args) -> int:
    if not 0.0 <= args.alpha <= 1.0:
        raise ValueError(f"--alpha must be in [0, 1], got {args.alpha}")
    seed = _resolve_seed(args)
    eye = np.eye(args.d)
    pool_t = gen_gaussian(
        GaussianPopulationSpec(np.zeros(args.d), eye, args.n, seed)
    )
    pool_v = gen_gaussian(
        GaussianPopulationSpec(np.full(args.d, args.sep), eye, args.n, seed + 1)
    )
    x_f, (n_from_t, n_from_v) = gen_mixture(pool_t, pool_v, args.alpha, args.n, seed + 2)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_feature_matrix(pool_t, outdir / "member.csv")
    write_feature_matrix(pool_v, outdir / "nonmember.csv")
    write_feature_matrix(x_f, outdir / "audit.csv")
    truth = {
        "alpha": args.alpha,
        "n": args.n,
        "d": args.d,
        "sep": args.sep,
        "seed": seed,
        "n_from_member": n_from_t,
        "n_from_nonmember": n_from_v,
    }
    (outdir / "truth.json").write_text(json.dumps(truth, indent=2) + "\n")
    print(f"wrote member/nonmember/audit CSVs and truth.json to {outdir}")
    return 0


def cmd_bounds(args) -> int:
    inputs = BoundInputs(
        empirical_risk=args.risk,
        chi2=args.chi2,
        m=args.m,
        delta=args.delta,
        d_inf=args.dinf,
    )
    print(f"statistical_error={statistical_error_term(args.chi2, args.m, args.delta):.12g}")
    print(f"auditing_bound={auditing_bound(inputs):.12g}")
    return 0


def cmd_tnr_curve(args) -> int:
    print("p,tnr,feasible")
    for p in np.linspace(args.p_min, args.p_max, args.p_steps):
        tnr, feasible = tnr_curve(args.accuracy, args.tpr, float(p))
        print(f"{p:.6g},{tnr:.12g},{int(feasible)}")
    return 0


def cmd_sinkhorn(args) -> int:
    x = _load(args.x, "--x")
    y = _load(args.y, "--y")
    config = SinkhornConfig(
        epsilon=args.epsilon,
        p=args.wp,
        max_iters=args.max_iters,
        tol=args.tol,
    )
    c = cost_matrix(x, y, args.wp)
    plan = sinkhorn(
        np.full(x.shape[0], 1.0 / x.shape[0]),
        np.full(y.shape[0], 1.0 / y.shape[0]),
        c,
        config,
    )
    print(f"w_eps={plan.w_eps:.12g}")
    print(f"iterations={plan.iterations}")
    print(f"max_marginal_violation={plan.max_marginal_violation:.6g}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # raised by --help (0) and usage errors (1)
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except AuditFailureError as exc:
        print(f"audit failed: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
