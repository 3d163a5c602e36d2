"""Command-line interface.

Subcommands: gen-blobs, gen-rings, kernels build|inspect, run, eval.
Exit codes: 0 success, 1 usage error, 2 data error, 3 solver hard failure.
"""

import argparse
import sys

import numpy as np

from . import harness, kernels, metrics, solvers
from .errors import DataError, FactorizationError, SolverError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def build_parser():
    parser = _Parser(prog="unikern", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gb = sub.add_parser("gen-blobs", help="generate Gaussian blob data")
    gb.add_argument("--clusters", type=int, default=3)
    gb.add_argument("--per-cluster", type=int, default=50)
    gb.add_argument("--dim", type=int, default=10)
    gb.add_argument("--separation", type=float, default=6.0)
    gb.add_argument("--noise-sigma", type=float, default=1.0)
    gb.add_argument("--seed", type=int, default=0)
    gb.add_argument("--out", required=True, help="output directory")

    gr = sub.add_parser("gen-rings", help="generate concentric ring data")
    gr.add_argument("--per-ring", type=int, default=100)
    gr.add_argument("--radii", type=_float_list, default=[1.0, 3.0])
    gr.add_argument("--noise-sigma", type=float, default=0.05)
    gr.add_argument("--seed", type=int, default=0)
    gr.add_argument("--out", required=True, help="output directory")

    kn = sub.add_parser("kernels", help="kernel cache utilities")
    ksub = kn.add_subparsers(dest="kernels_command", required=True)
    kb = ksub.add_parser("build", help="build and cache kernels")
    kb.add_argument("--features", required=True)
    kb.add_argument(
        "--kernel",
        default="linear",
        help="linear | gaussian:T | polynomial:A,B | bank",
    )
    kb.add_argument("--out", required=True, help="file, or directory for bank")
    ki = ksub.add_parser("inspect", help="describe a cached kernel")
    ki.add_argument("path")

    rn = sub.add_parser("run", help="run a solver, optionally over a grid")
    rn.add_argument("--solver", choices=("scsk", "scmk", "tsep"), required=True)
    rn.add_argument("--features", required=True)
    rn.add_argument("--labels")
    rn.add_argument(
        "--kernel",
        action="append",
        help="repeatable; linear | gaussian:T | polynomial:A,B | bank",
    )
    rn.add_argument("--alpha", type=float, default=1.0)
    rn.add_argument("--beta", type=float, default=1.0)
    rn.add_argument("--gamma", type=float, default=1e-4)
    rn.add_argument("--mu", type=float, default=1.0)
    rn.add_argument("--clusters", type=int, required=True)
    rn.add_argument("--max-iter", type=int, default=100)
    rn.add_argument("--tol", type=float, default=1e-4)
    rn.add_argument("--seed", type=int, default=0)
    rn.add_argument("--grid-alpha", type=_float_list)
    rn.add_argument("--grid-beta", type=_float_list)
    rn.add_argument("--grid-gamma", type=_float_list)
    rn.add_argument("--grid-mu", type=_float_list)
    rn.add_argument("--out", help="directory for report.txt and records.csv")

    ev = sub.add_parser("eval", help="score two label files")
    ev.add_argument("predicted")
    ev.add_argument("truth")

    return parser


def _cmd_gen_blobs(args):
    ds = harness.gen_blobs(
        args.clusters,
        args.per_cluster,
        args.dim,
        args.separation,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
    )
    fpath, lpath = harness.write_dataset(ds, args.out)
    print(f"wrote {fpath}")
    print(f"wrote {lpath}")
    return 0


def _cmd_gen_rings(args):
    ds = harness.gen_rings(
        args.per_ring,
        args.radii,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
    )
    fpath, lpath = harness.write_dataset(ds, args.out)
    print(f"wrote {fpath}")
    print(f"wrote {lpath}")
    return 0


def _cmd_kernels_build(args):
    from pathlib import Path

    ds = harness.load_csv(args.features)
    if args.kernel.strip().lower() == "bank":
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        bank = kernels.standard_bank(ds.X)
        for i, km in enumerate(bank):
            path = out / f"bank_{i:02d}.ukrn"
            kernels.save_kernel(km, path)
            print(f"wrote {path} ({km.spec.label()})")
        return 0
    spec = kernels.parse_spec(args.kernel)
    km = kernels.normalize_kernel(
        kernels.repair_psd(kernels.build_kernel(ds.X, spec))
    )
    kernels.save_kernel(km, args.out)
    print(f"wrote {args.out} ({km.spec.label()})")
    return 0


def _cmd_kernels_inspect(args):
    km = kernels.load_kernel(args.path)
    sym = np.abs(km.K - km.K.T).max()
    print(f"path: {args.path}")
    print(f"samples: {km.n}")
    print(f"kind: {km.spec.label()}")
    print(f"normalized: {km.normalized}")
    print(f"max_entry: {km.K.max()!r}")
    print(f"min_entry: {km.K.min()!r}")
    print(f"symmetry_gap: {sym!r}")
    return 0


def _cmd_run(args):
    ds = harness.load_csv(args.features, args.labels)
    params = solvers.HyperParams(
        c=args.clusters,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        mu=args.mu,
        max_outer=args.max_iter,
        tol=args.tol,
        seed=args.seed,
    )
    kernel_args = args.kernel or (
        ["bank"] if args.solver == "scmk" else ["linear"]
    )
    use_bank = any(k.strip().lower() == "bank" for k in kernel_args)
    if use_bank and len(kernel_args) > 1:
        print("error: 'bank' cannot be combined with other kernels",
              file=sys.stderr)
        return 1
    if use_bank and args.solver != "scmk":
        print("error: the kernel bank requires --solver scmk",
              file=sys.stderr)
        return 1
    specs = [] if use_bank else [kernels.parse_spec(k) for k in kernel_args]
    grid = {}
    for key in harness.GRID_KEYS:
        values = getattr(args, f"grid_{key}")
        if values:
            grid[key] = values
    config = harness.RunConfig(
        solver=args.solver,
        params=params,
        kernel_specs=specs or [kernels.linear()],
        use_bank=use_bank,
        grid=grid,
    )
    report = harness.run(ds, config)
    if args.out:
        rpath, cpath = harness.write_report(report, args.out)
        print(f"wrote {rpath}")
        print(f"wrote {cpath}")
    else:
        sys.stdout.write(report.text())
    if report.summary["failed"] == len(report.records):
        return 3
    return 0


def _cmd_eval(args):
    pred = harness.load_labels(args.predicted)
    truth = harness.load_labels(args.truth)
    if pred.size != truth.size:
        raise DataError(
            f"label count mismatch: {args.predicted} has {pred.size}, "
            f"{args.truth} has {truth.size}"
        )
    print(f"accuracy={metrics.accuracy(pred, truth)!r}")
    print(f"nmi={metrics.nmi(pred, truth)!r}")
    print(f"purity={metrics.purity(pred, truth)!r}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen-blobs":
            return _cmd_gen_blobs(args)
        if args.command == "gen-rings":
            return _cmd_gen_rings(args)
        if args.command == "kernels":
            if args.kernels_command == "build":
                return _cmd_kernels_build(args)
            return _cmd_kernels_inspect(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "eval":
            return _cmd_eval(args)
        parser.error(f"unknown command {args.command!r}")
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FactorizationError, SolverError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
