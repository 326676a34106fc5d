"""Command-line interface: train, simulate, report, serve, synth."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .bundle import ModelBundle, train_bundle
from .data import (
    DatasetError,
    benchmark_beta,
    benchmark_levels,
    generate_synthetic,
    load_dataset,
    save_dataset,
    split_train_test,
)
from .engine import MEAN_OF_ROOTS, ROOT_OF_MEAN
from .harness import (
    oracle_position_frequencies,
    read_trajectories,
    simulate,
    summarize,
    write_position_frequencies,
    write_summary,
    write_trajectories,
)

ORDERER_KINDS = ("dqo", "random", "fixed_decreasing", "fixed_selection", "oracle")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqo",
        description="Adaptive questionnaire engine: train models, benchmark "
        "question orderings, and serve interactive survey sessions.",
    )
    parser.add_argument("--version", action="version", version=f"dqo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model bundle from a CSV + metadata pair")
    p.add_argument("--data", required=True, help="training CSV")
    p.add_argument("--meta", required=True, help="JSON metadata sidecar")
    p.add_argument("--out", required=True, help="output bundle path (e.g. model.dqo)")
    p.add_argument("--alpha", type=float, default=0.1, help="interval significance level")
    p.add_argument("--k", type=int, default=100, help="imputation neighbor count")
    p.add_argument("--max-levels", type=int, default=10, help="continuous stats bins")
    p.add_argument("--max-features", type=int, default=30, help="selection budget")
    p.add_argument("--min-improvement", type=float, default=0.0, help="selection stop rule")
    p.add_argument("--name", default=None, help="bundle name (default: output stem)")

    p = sub.add_parser("simulate", help="replay question-asking over a test CSV")
    p.add_argument("--model", required=True, help="trained bundle path")
    p.add_argument("--test", required=True, help="test CSV (columns per the bundle)")
    p.add_argument("--orderers", default="dqo", help=f"comma list of {','.join(ORDERER_KINDS)}")
    p.add_argument("--lambda", dest="lambda_values", default="0",
                   help="comma list of cost tradeoffs")
    p.add_argument("--alpha", type=float, default=0.1, help="interval significance level")
    p.add_argument("--seed", type=int, default=0, help="random-orderer seed")
    p.add_argument("--width-form", choices=(ROOT_OF_MEAN, MEAN_OF_ROOTS),
                   default=ROOT_OF_MEAN, help="expected-width aggregation form")
    p.add_argument("--out", required=True, help="output directory for trajectory CSVs")

    p = sub.add_parser("report", help="summarize trajectory CSVs into an AUC table")
    p.add_argument("runs", help="directory containing traj_*.csv files")
    p.add_argument("--out", required=True, help="summary CSV path")

    p = sub.add_parser("serve", help="serve the interactive survey session API")
    p.add_argument("--model", action="append", required=True,
                   help="bundle path (repeatable; id defaults to the file stem)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ttl", type=float, default=3600.0, help="session lifetime, seconds")

    p = sub.add_parser("synth", help="generate a synthetic benchmark dataset")
    p.add_argument("--out-dir", required=True, help="directory for train.csv/test.csv/meta.json")
    p.add_argument("--n", type=int, default=2000, help="training rows")
    p.add_argument("--test-rows", type=int, default=100)
    p.add_argument("--d", type=int, default=15, help="feature count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sd", type=float, default=1.0)
    p.add_argument("--free", type=int, default=2, help="free (extractable) feature count")
    return parser


def _cmd_train(args: argparse.Namespace) -> int:
    table = load_dataset(args.data, args.meta)
    bundle = train_bundle(
        table,
        alpha=args.alpha,
        k=args.k,
        max_levels=args.max_levels,
        max_features=args.max_features,
        min_improvement=args.min_improvement,
        name=args.name or Path(args.out).stem,
    )
    bundle.save(args.out)
    trace = bundle.selection
    print(f"wrote {args.out}: {bundle.model.n_features} features "
          f"({len(bundle.free_set)} free + {len(trace.ordered_features)} selected), "
          f"n={bundle.x_train.shape[0]}, loocv {trace.initial_error:.6g} -> "
          f"{(trace.cv_errors[-1] if trace.cv_errors else trace.initial_error):.6g}")
    return 0


def _load_test_table(bundle: ModelBundle, csv_path: str):
    """Load a test CSV against the bundle's own feature schema."""
    from .data import DatasetTable, _read_rows  # local: shares the strict cell parser

    x, y = _read_rows(Path(csv_path), bundle.specs, bundle.target_name)
    return DatasetTable(x=x, y=y, features=bundle.specs, target_name=bundle.target_name)


def _cmd_simulate(args: argparse.Namespace) -> int:
    bundle = ModelBundle.load(args.model)
    test = _load_test_table(bundle, args.test)
    orderers = [o.strip() for o in args.orderers.split(",") if o.strip()]
    for kind in orderers:
        if kind not in ORDERER_KINDS:
            print(f"unknown orderer {kind!r}; expected one of {ORDERER_KINDS}", file=sys.stderr)
            return 2
    lambda_values = [float(v) for v in args.lambda_values.split(",") if v.strip()]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for kind in orderers:
        for lam in lambda_values:
            trajs = simulate(
                test,
                bundle,
                orderers=[kind],
                lambda_values=[lam],
                alpha=args.alpha,
                seed=args.seed,
                width_form=args.width_form,
            )
            path = out_dir / f"traj_{kind}_lam{lam:g}.csv"
            write_trajectories(trajs, path)
            print(f"wrote {path} ({len(trajs)} trajectories)")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    runs = sorted(Path(args.runs).glob("traj_*.csv"))
    if not runs:
        print(f"no traj_*.csv files under {args.runs}", file=sys.stderr)
        return 1
    trajectories = []
    for path in runs:
        trajectories.extend(read_trajectories(path))
    summaries = summarize(trajectories)
    summaries.sort(key=lambda s: (s.orderer, s.lam))
    write_summary(summaries, args.out)
    print(f"wrote {args.out} ({len(summaries)} orderer/lambda rows)")

    oracle_trajs = [t for t in trajectories if t.orderer == "oracle"]
    if oracle_trajs:
        counts, feature_ids = oracle_position_frequencies(oracle_trajs)
        pos_path = Path(args.out).with_name("oracle_positions.csv")
        write_position_frequencies(counts, feature_ids, pos_path)
        print(f"wrote {pos_path}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    bundles = {}
    for spec in args.model:
        if "=" in spec:
            model_id, path = spec.split("=", 1)
        else:
            model_id, path = Path(spec).stem, spec
        bundles[model_id] = ModelBundle.load(path)
    app = create_app(bundles, ttl_seconds=args.ttl)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    full = generate_synthetic(
        n=args.n + args.test_rows,
        d=args.d,
        beta=benchmark_beta(args.d),
        noise_sd=args.noise_sd,
        discrete_levels=benchmark_levels(args.d),
        seed=args.seed,
        free_features=args.free,
    )
    test_fraction = args.test_rows / (args.n + args.test_rows)
    train, test = split_train_test(full, test_fraction, seed=args.seed)
    save_dataset(train, out_dir / "train.csv", out_dir / "meta.json")
    save_dataset(test, out_dir / "test.csv", out_dir / "meta.test.json")
    print(f"wrote {out_dir}/train.csv ({train.n_rows} rows), "
          f"{out_dir}/test.csv ({test.n_rows} rows), {out_dir}/meta.json")
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "simulate": _cmd_simulate,
    "report": _cmd_report,
    "serve": _cmd_serve,
    "synth": _cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (DatasetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
