"""Readout heads and the evaluation protocol.

* ridge linear regression (normal equations, unpenalised bias)
* hinge-loss linear classifier trained by per-sample SGD
* small rectifier MLPs trained by full-batch gradient descent on squared error
* seeded train/test split, train-only feature standardisation, MAE/accuracy
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

REGRESSION = "regression"
CLASSIFICATION = "classification"


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class FeatureMatrix:
    X: np.ndarray
    y: np.ndarray
    ids: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} rows but {y.shape[0]} labels")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "ids", tuple(self.ids))

    def __len__(self) -> int:
        return self.X.shape[0]

    def take(self, idx) -> "FeatureMatrix":
        ids = tuple(self.ids[k] for k in idx) if self.ids else ()
        return FeatureMatrix(self.X[idx], self.y[idx], ids)

    def binary(self) -> "FeatureMatrix":
        """Labels 1 for a non-zero bandgap, 0 otherwise."""
        return replace(self, y=(self.y != 0).astype(float))


def split(data: FeatureMatrix, train_fraction: float, rng: np.random.Generator):
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    n = len(data)
    n_train = int(np.floor(train_fraction * n + 0.5))
    if n < 2 or n_train == 0 or n_train == n:
        raise ValueError(f"split of {n} rows at {train_fraction} leaves an empty side")
    order = rng.permutation(n)
    return data.take(order[:n_train]), data.take(order[n_train:])


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        return cls(mean, np.where(std > 0, std, 1.0))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale

    def apply(self, data: FeatureMatrix) -> FeatureMatrix:
        return FeatureMatrix(self.transform(data.X), data.y, data.ids)


# --------------------------------------------------------------------------
# Linear models
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearModel:
    w: np.ndarray
    b: float
    task: str = REGRESSION

    def decision(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.w + self.b

    def predict(self, X: np.ndarray) -> np.ndarray:
        s = self.decision(X)
        return (s > 0).astype(float) if self.task == CLASSIFICATION else s


def _check_finite(X, y=None):
    if not np.all(np.isfinite(X)) or (y is not None and not np.all(np.isfinite(y))):
        raise ValueError("features and labels must be finite")


def train_linear_regressor(train: FeatureMatrix, ridge: float = 1e-6) -> LinearModel:
    """Minimise ||Xw + b - y||^2 + ridge ||w||^2 with b unpenalised.

    Centering removes the bias from the system. With more features than
    rows the same normal-equation solution is obtained through the
    n x n Gram matrix, w = Xc^T (Xc Xc^T + ridge I)^-1 yc.
    """
    X, y = train.X, train.y
    if len(train) < 1:
        raise ValueError("need at least one training row")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    _check_finite(X, y)
    x_mean, y_mean = X.mean(axis=0), y.mean()
    Xc, yc = X - x_mean, y - y_mean
    n, d = Xc.shape
    if n >= d:
        A = Xc.T @ Xc + ridge * np.eye(d)
        rhs = Xc.T @ yc
        try:
            w = linalg.solve(A, rhs, assume_a="sym")
        except linalg.LinAlgError:
            w = linalg.lstsq(A, rhs)[0]
    else:
        K = Xc @ Xc.T + ridge * np.eye(n)
        try:
            alpha = linalg.solve(K, yc, assume_a="sym")
        except linalg.LinAlgError:
            alpha = linalg.lstsq(K, yc)[0]
        w = Xc.T @ alpha
    return LinearModel(w, float(y_mean - x_mean @ w), REGRESSION)


def hinge_objective(w: np.ndarray, b: float, X: np.ndarray, y_pm: np.ndarray, l2: float):
    """Mean hinge loss plus ``l2/2 * ||w||^2`` and its (sub)gradient.

    ``y_pm`` holds labels in {-1, +1}.
    """
    margin = y_pm * (X @ w + b)
    active = margin < 1
    loss = np.mean(np.maximum(0.0, 1 - margin)) + 0.5 * l2 * w @ w
    coef = -(y_pm * active) / len(y_pm)
    return loss, X.T @ coef + l2 * w, float(coef.sum())


def train_sgd_classifier(train: FeatureMatrix, epochs: int = 200, lr: float = 1e-3,
                         rng: np.random.Generator | None = None, l2: float = 1e-4) -> LinearModel:
    X, y = train.X, train.y
    _check_finite(X, y)
    classes = np.unique(y)
    if classes.size < 2:
        raise ValueError("SGD classifier needs both classes in the training set")
    if not set(classes) <= {0.0, 1.0}:
        raise ValueError("classification labels must be 0 or 1")
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(0))
    y_pm = np.where(y > 0, 1.0, -1.0)
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(epochs):
        for k in rng.permutation(len(y)):
            x_k = X[k]
            if y_pm[k] * (x_k @ w + b) < 1:
                w = w - lr * (l2 * w - y_pm[k] * x_k)
                b += lr * y_pm[k]
            else:
                w = w - lr * l2 * w
    return LinearModel(w, b, CLASSIFICATION)


# --------------------------------------------------------------------------
# MLP
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MlpConfig:
    hidden: tuple[int, ...] = (10,)
    epochs: int = 2000
    learning_rate: float = 1e-2
    batch_size: int | None = None  # None means full batch
    seed: int = 0
    input_scale: float | None = None  # None means 1/sqrt(n_features)

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if any(h < 1 for h in self.hidden):
            raise ValueError("hidden layer widths must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")


SSP_GRAPHD_MLP = MlpConfig(hidden=(10,))
GRAPHHD_MLP = MlpConfig(hidden=(64, 32))


@dataclass
class MlpModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    task: str = REGRESSION
    input_scale: float = 1.0
    history: list[float] = field(default_factory=list)

    def forward(self, X: np.ndarray):
        acts = [np.asarray(X, dtype=float) * self.input_scale]
        pre = []
        for k, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = acts[-1] @ W + b
            pre.append(z)
            acts.append(np.maximum(z, 0.0) if k < len(self.weights) - 1 else z)
        return pre, acts

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.forward(X)[1][-1][:, 0]


def init_mlp(n_in: int, cfg: MlpConfig) -> MlpModel:
    """He-initialised network.

    Inputs are multiplied by ``input_scale`` (default 1/sqrt(n_in)) and the
    first layer's init is widened by the inverse factor, so the forward pass
    matches plain He init while first-layer gradient steps no longer grow
    with the feature count.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    scale = cfg.input_scale if cfg.input_scale is not None else 1.0 / np.sqrt(n_in)
    sizes = [n_in, *cfg.hidden, 1]
    weights = [rng.normal(0.0, np.sqrt(2.0 / a), size=(a, b)) for a, b in zip(sizes[:-1], sizes[1:])]
    weights[0] /= scale
    biases = [np.zeros(b) for b in sizes[1:]]
    return MlpModel(weights, biases, input_scale=float(scale))


def mlp_loss_and_grads(model: MlpModel, X: np.ndarray, y: np.ndarray):
    """Half mean squared error and gradients for every weight and bias."""
    pre, acts = model.forward(X)
    err = acts[-1][:, 0] - y
    loss = 0.5 * float(np.mean(err ** 2))
    delta = (err / len(y))[:, None]
    gw, gb = [None] * len(model.weights), [None] * len(model.biases)
    for k in reversed(range(len(model.weights))):
        gw[k] = acts[k].T @ delta
        gb[k] = delta.sum(axis=0)
        if k:
            delta = (delta @ model.weights[k].T) * (pre[k - 1] > 0)
    return loss, gw, gb


def train_mlp(train: FeatureMatrix, cfg: MlpConfig = SSP_GRAPHD_MLP) -> MlpModel:
    X, y = train.X, train.y
    _check_finite(X, y)
    model = init_mlp(X.shape[1], cfg)
    rng = np.random.Generator(np.random.PCG64(cfg.seed + 1))
    n = len(y)
    bs = n if cfg.batch_size is None else max(1, min(cfg.batch_size, n))
    for epoch in range(cfg.epochs):
        order = np.arange(n) if bs == n else rng.permutation(n)
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            with np.errstate(over="ignore", invalid="ignore"):
                loss, gw, gb = mlp_loss_and_grads(model, X[idx], y[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"MLP diverged at epoch {epoch}")
            for k in range(len(model.weights)):
                model.weights[k] -= cfg.learning_rate * gw[k]
                model.biases[k] -= cfg.learning_rate * gb[k]
        model.history.append(loss)
    return model


# --------------------------------------------------------------------------
# Metrics
# --------------------------------------------------------------------------

def mean_absolute_error(pred, y) -> float:
    return float(np.mean(np.abs(np.asarray(pred, dtype=float) - np.asarray(y, dtype=float))))


def accuracy(pred, y) -> float:
    return float(np.mean(np.asarray(pred) == np.asarray(y)))


def evaluate(model, test: FeatureMatrix, task: str) -> float:
    """MAE for regression, fraction correct for classification."""
    if len(test) == 0:
        raise ValueError("empty test set")
    if task not in (REGRESSION, CLASSIFICATION):
        raise ValueError(f"unknown task {task!r}")
    if getattr(model, "task", None) != task:
        raise ValueError(f"model trained for {getattr(model, 'task', None)!r}, asked to evaluate {task!r}")
    pred = model.predict(test.X)
    if task == REGRESSION:
        return mean_absolute_error(pred, test.y)
    return accuracy(pred, test.y)
