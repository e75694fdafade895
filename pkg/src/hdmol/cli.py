"""Command-line entry point: ``hdmol {gen-synthetic,encode,run,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import experiment, spikes, vsa
from .experiment import ExperimentConfig
from .structures import gen_synthetic, load_dataset, save_dataset


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", dest="dataset_path", help="JSON dataset file (default: synthetic data)")
    p.add_argument("--synthetic-n", type=int)
    p.add_argument("--synthetic-max-atoms", type=int)
    p.add_argument("--synthetic-seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdmol", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log every run")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="write a synthetic dataset as JSON")
    p.add_argument("--n", type=int, default=54)
    p.add_argument("--max-atoms", type=int, default=12)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("encode", help="encode a dataset into feature vectors (.npz)")
    p.add_argument("--method", choices=experiment.METHODS, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--dim", type=int, default=vsa.DEFAULT_DIM)
    p.add_argument("--reservoir-size", type=int, default=400)
    p.add_argument("--length-scale", type=float, default=1.0)
    p.add_argument("--out", help="output .npz with arrays X, y, ids")
    p.add_argument("--dump-frames", action="store_true",
                   help="print every spike frame as a 0/1 string")
    _add_data_args(p)

    p = sub.add_parser("run", help="run an experiment and append a CSV results row")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    p.add_argument("--method", choices=experiment.METHODS)
    p.add_argument("--task", choices=experiment.TASKS)
    p.add_argument("--readout", choices=experiment.READOUTS)
    p.add_argument("--dim", type=int)
    p.add_argument("--reservoir-size", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", "--base-seed", dest="base_seed", type=int)
    p.add_argument("--length-scale", type=float)
    p.add_argument("--ridge", type=float)
    p.add_argument("--mlp-hidden", type=lambda s: tuple(int(x) for x in s.split(",")),
                   help="comma-separated hidden widths, e.g. 64,32")
    p.add_argument("--mlp-epochs", type=int)
    p.add_argument("--mlp-lr", type=float)
    p.add_argument("--jobs", type=int)
    p.add_argument("--output", dest="output_path", help="results CSV (appended)")
    _add_data_args(p)

    p = sub.add_parser("report", help="print a method x metric table from results CSVs")
    p.add_argument("results", nargs="+")
    return parser


_RUN_KEYS = ("method", "task", "readout", "dim", "reservoir_size", "runs", "base_seed",
             "length_scale", "ridge", "mlp_hidden", "mlp_epochs", "mlp_lr", "jobs",
             "output_path", "dataset_path", "synthetic_n", "synthetic_max_atoms", "synthetic_seed")


def config_from_args(args) -> ExperimentConfig:
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            values = json.load(f)
        if not isinstance(values, dict):
            raise experiment.ConfigError(f"{args.config}: expected a JSON object")
    for key in _RUN_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if "method" not in values:
        raise experiment.ConfigError("--method is required (on the command line or in --config)")
    return ExperimentConfig.from_dict(values)


def _graphs(args):
    if args.dataset_path:
        return load_dataset(args.dataset_path)
    return gen_synthetic(vsa.make_rng(args.synthetic_seed or 1), args.synthetic_n or 54,
                         args.synthetic_max_atoms or 12)


def cmd_gen_synthetic(args) -> None:
    graphs = gen_synthetic(vsa.make_rng(args.seed), args.n, args.max_atoms)
    save_dataset(graphs, args.out)
    print(f"wrote {len(graphs)} records to {args.out}")


def cmd_encode(args) -> None:
    graphs = _graphs(args)
    if args.dump_frames:
        for g in graphs:
            for e, frame in zip(sorted(g.edges, key=lambda e: (min(e.i, e.j), max(e.i, e.j))),
                                spikes.encode_graph(g)):
                print(f"{g.id}\t{e.i}-{e.j}\t{spikes.frame_to_string(frame)}")
    if args.out:
        cfg = ExperimentConfig(method=args.method, dim=args.dim, reservoir_size=args.reservoir_size,
                               length_scale=args.length_scale)
        X = experiment.encode_features(graphs, args.method, args.seed, cfg)
        y = np.array([np.nan if g.bandgap is None else g.bandgap for g in graphs])
        np.savez(args.out, X=X, y=y, ids=np.array([g.id for g in graphs]))
        print(f"wrote {X.shape[0]} x {X.shape[1]} features to {args.out}")


def cmd_run(args) -> None:
    cfg = config_from_args(args)
    row = experiment.run_experiment(cfg)
    print(experiment.format_table([row]), end="")
    if cfg.output_path:
        print(f"appended results to {cfg.output_path}")


def cmd_report(args) -> None:
    rows = []
    for path in args.results:
        rows += experiment.read_results(path)
    print(experiment.format_table(rows), end="")


COMMANDS = {
    "gen-synthetic": cmd_gen_synthetic,
    "encode": cmd_encode,
    "run": cmd_run,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError, KeyError, RuntimeError) as exc:
        msg = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
        print(f"hdmol: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
