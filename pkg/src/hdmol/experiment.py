"""Experiment protocol: encode, split 70/30, train a readout, average over runs.

Run ``r`` of an experiment uses seed ``base_seed + r`` for everything it
draws (codebooks, axis basis, reservoir, split, SGD order, MLP init), each
from its own sub-stream, so any single run can be re-executed in isolation.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import graphhd, readout, reservoir, spikes, sspgraphd, vsa
from .structures import gen_synthetic, load_dataset

log = logging.getLogger(__name__)

METHODS = ("graphhd", "ssp-graphhd", "reservoir")
TASKS = (readout.REGRESSION, readout.CLASSIFICATION)
READOUTS = ("linear", "sgd", "mlp")
CSV_HEADER = ("method", "task", "readout", "dim_or_size", "runs", "base_seed",
              "metric", "mean", "std", "timestamp")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    method: str = "ssp-graphhd"
    task: str = readout.REGRESSION
    readout: str | None = None            # defaults: linear (regression), sgd (classification)
    dim: int = vsa.DEFAULT_DIM
    reservoir_size: int = 400
    runs: int | None = None               # defaults: 25 for the reservoir, 1 otherwise
    base_seed: int = 1
    fixed_seed: bool = False              # every run uses base_seed (degenerate averaging)
    dataset_path: str | None = None
    synthetic_n: int = 54
    synthetic_max_atoms: int = 12
    synthetic_seed: int = 1
    output_path: str | None = None
    train_fraction: float = 0.7
    levels: int = graphhd.DEFAULT_LEVELS
    length_scale: float = 1.0
    center: bool = False
    row_normalize: bool = True            # L2-normalise hypervector rows before standardising
    ridge: float = 1e-6
    sgd_epochs: int = 200
    sgd_lr: float = 1e-3
    mlp_hidden: tuple[int, ...] | None = None
    mlp_epochs: int = 2000
    mlp_lr: float = 1e-2
    jobs: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; expected one of {TASKS}")
        ro = self.readout or ("linear" if self.task == readout.REGRESSION else "sgd")
        object.__setattr__(self, "readout", ro)
        if ro not in READOUTS:
            raise ConfigError(f"unknown readout {ro!r}; expected one of {READOUTS}")
        if self.task == readout.CLASSIFICATION and ro != "sgd":
            raise ConfigError(f"classification uses the sgd readout, not {ro!r}")
        if self.task == readout.REGRESSION and ro == "sgd":
            raise ConfigError("the sgd readout is a classifier; use linear or mlp for regression")
        if self.runs is None:
            object.__setattr__(self, "runs", 25 if self.method == "reservoir" else 1)
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.base_seed < 0:
            raise ConfigError("base_seed must be non-negative")
        if self.mlp_hidden is not None:
            object.__setattr__(self, "mlp_hidden", tuple(int(h) for h in self.mlp_hidden))

    @property
    def dim_or_size(self) -> int:
        return self.reservoir_size if self.method == "reservoir" else self.dim

    @property
    def label(self) -> str:
        return method_label(self.method, self.dim_or_size)

    def run_seed(self, r: int) -> int:
        return self.base_seed if self.fixed_seed else self.base_seed + r

    def mlp_config(self, seed: int) -> readout.MlpConfig:
        hidden = self.mlp_hidden
        if hidden is None:
            hidden = readout.GRAPHHD_MLP.hidden if self.method == "graphhd" else readout.SSP_GRAPHD_MLP.hidden
        return readout.MlpConfig(hidden=hidden, epochs=self.mlp_epochs,
                                 learning_rate=self.mlp_lr, seed=seed)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def method_label(method: str, dim_or_size: int) -> str:
    if method == "reservoir":
        return f"Reservoir-{dim_or_size}"
    return {"graphhd": "GrapHD", "ssp-graphhd": "SSP-GrapHD"}[method]


@dataclass
class ResultsRow:
    method: str
    task: str
    readout: str
    dim_or_size: int
    runs: int
    base_seed: int
    metric: str
    mean: float
    std: float
    timestamp: str = ""
    per_run: list[float] = field(default_factory=list)
    baseline: list[float] = field(default_factory=list)

    def csv_fields(self) -> list[str]:
        return [self.method, self.task, self.readout, str(self.dim_or_size), str(self.runs),
                str(self.base_seed), self.metric, repr(float(self.mean)), repr(float(self.std)),
                self.timestamp]

    @property
    def label(self) -> str:
        return method_label(self.method, self.dim_or_size)


# --------------------------------------------------------------------------
# Encoding
# --------------------------------------------------------------------------

def load_graphs(cfg: ExperimentConfig):
    if cfg.dataset_path:
        return load_dataset(cfg.dataset_path)
    return gen_synthetic(vsa.make_rng(cfg.synthetic_seed), cfg.synthetic_n, cfg.synthetic_max_atoms)


def reservoir_features(res: reservoir.Reservoir, graphs) -> np.ndarray:
    rows = []
    for g in graphs:
        frames = spikes.encode_graph(g)
        # an edgeless graph never drives the reservoir, so it stays silent
        rows.append(reservoir.run(res, frames) if frames else np.zeros(res.size))
    return np.stack(rows)


def encode_features(graphs, method: str, seed: int, cfg: ExperimentConfig) -> np.ndarray:
    if method == "graphhd":
        cb = graphhd.make_codebook(seed, cfg.dim, cfg.levels)
        return graphhd.encode_dataset(graphs, cb)
    if method == "ssp-graphhd":
        cb = sspgraphd.make_codebook(seed, cfg.dim)
        basis = sspgraphd.make_basis(seed, cfg.dim, cfg.length_scale)
        return sspgraphd.encode_dataset(graphs, cb, basis, cfg.center)
    if method == "reservoir":
        res = reservoir.build_reservoir(reservoir.ReservoirConfig(size=cfg.reservoir_size, seed=seed))
        return reservoir_features(res, graphs)
    raise ConfigError(f"unknown method {method!r}")


def _row_normalize(X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    return X / np.where(norms > 0, norms, 1.0)


# --------------------------------------------------------------------------
# Protocol
# --------------------------------------------------------------------------

def run_once(cfg: ExperimentConfig, graphs, r: int) -> tuple[float, float]:
    """One run: returns (metric, trivial-baseline metric) on the test split."""
    seed = cfg.run_seed(r)
    labels = [g.bandgap for g in graphs]
    if any(v is None for v in labels):
        missing = [g.id for g in graphs if g.bandgap is None]
        raise ConfigError(f"records without a bandgap label: {missing[:5]}")
    X = encode_features(graphs, cfg.method, seed, cfg)
    if cfg.row_normalize and cfg.method != "reservoir":
        X = _row_normalize(X)
    data = readout.FeatureMatrix(X, labels, [g.id for g in graphs])
    if cfg.task == readout.CLASSIFICATION:
        data = data.binary()
    train, test = readout.split(data, cfg.train_fraction, vsa.make_rng(seed, vsa.STREAM_SPLIT))
    scaler = readout.Standardizer.fit(train.X)
    train, test = scaler.apply(train), scaler.apply(test)

    if cfg.task == readout.REGRESSION:
        baseline = readout.mean_absolute_error(np.full(len(test), train.y.mean()), test.y)
        if cfg.readout == "mlp":
            model = readout.train_mlp(train, cfg.mlp_config(seed))
        else:
            model = readout.train_linear_regressor(train, cfg.ridge)
    else:
        majority = float(train.y.mean() >= 0.5)
        baseline = readout.accuracy(np.full(len(test), majority), test.y)
        model = readout.train_sgd_classifier(train, cfg.sgd_epochs, cfg.sgd_lr,
                                             vsa.make_rng(seed, vsa.STREAM_SGD))
    metric = readout.evaluate(model, test, cfg.task)
    log.info("%s run %d seed %d: %s=%.6g (baseline %.6g)", cfg.label, r, seed,
             metric_name(cfg.task), metric, baseline)
    return metric, baseline


def metric_name(task: str) -> str:
    return "mae" if task == readout.REGRESSION else "accuracy"


def _run_worker(args):
    cfg, graphs, r = args
    return run_once(cfg, graphs, r)


def run_experiment(cfg: ExperimentConfig, graphs=None, timestamp: str | None = None) -> ResultsRow:
    if graphs is None:
        graphs = load_graphs(cfg)
    jobs = [(cfg, graphs, r) for r in range(cfg.runs)]
    if cfg.jobs > 1 and cfg.runs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_worker, jobs))
    else:
        results = [_run_worker(j) for j in jobs]
    values = np.array([m for m, _ in results])
    row = ResultsRow(
        method=cfg.method, task=cfg.task, readout=cfg.readout, dim_or_size=cfg.dim_or_size,
        runs=cfg.runs, base_seed=cfg.base_seed, metric=metric_name(cfg.task),
        mean=float(values.mean()), std=float(values.std()),
        timestamp=timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        per_run=values.tolist(), baseline=[b for _, b in results],
    )
    if cfg.output_path:
        emit_results([row], cfg.output_path)
    return row


# --------------------------------------------------------------------------
# Results files
# --------------------------------------------------------------------------

def emit_results(rows, path) -> None:
    """Append rows to a CSV results file, writing the header for a new file."""
    rows = list(rows)
    if not rows:
        raise ValueError("no results rows to write")
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    try:
        with open(path, "a", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            if new:
                w.writerow(CSV_HEADER)
            for row in rows:
                w.writerow(row.csv_fields())
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc


def read_results(path) -> list[ResultsRow]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [ResultsRow(r["method"], r["task"], r["readout"], int(r["dim_or_size"]),
                           int(r["runs"]), int(r["base_seed"]), r["metric"],
                           float(r["mean"]), float(r["std"]), r["timestamp"])
                for r in reader]


def format_table(rows) -> str:
    """Method x metric table: MAE and classification accuracy columns.

    When a method has both an MLP and a linear regression result, the MLP
    value is shown with the linear one in parentheses.
    """
    order, cells = [], {}
    for row in rows:
        if row.label not in cells:
            order.append(row.label)
            cells[row.label] = {}
        cells[row.label][(row.metric, row.readout)] = row

    def fmt(r):
        return f"{r.mean:.4f}" + (f" +/- {r.std:.4f}" if r.runs > 1 else "")

    lines = []
    out = io.StringIO()
    head = ("Method", "MAE", "Class. Acc.")
    for label in order:
        c = cells[label]
        mlp, lin = c.get(("mae", "mlp")), c.get(("mae", "linear"))
        if mlp and lin:
            mae = f"{fmt(mlp)} ({fmt(lin)})"
        else:
            mae = fmt(mlp or lin) if (mlp or lin) else "--"
        acc = c.get(("accuracy", "sgd"))
        lines.append((label, mae, fmt(acc) if acc else "--"))
    widths = [max(len(x[k]) for x in [head, *lines]) for k in range(3)]
    sep = "+" + "+".join("-" * (w + 2) for w in widths) + "+"
    print(sep, file=out)
    print("| " + " | ".join(h.ljust(w) for h, w in zip(head, widths)) + " |", file=out)
    print(sep, file=out)
    for line in lines:
        print("| " + " | ".join(x.ljust(w) for x, w in zip(line, widths)) + " |", file=out)
    print(sep, file=out)
    return out.getvalue()


def config_to_json(cfg: ExperimentConfig) -> str:
    return json.dumps(asdict(cfg), sort_keys=True)


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
