"""Single-hidden-layer built-up/non-built-up classifier.

A 6 -> H (sigmoid) -> 1 (sigmoid) network trained full-batch with binary
cross-entropy plus L2 weight decay, model selection by grid search over
(hidden units, decay strength) with stratified k-fold cross validation.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ConfigError, DataError
from .nn import (
    Activation,
    LayerSpec,
    LossKind,
    Mlp,
    TrainConfig,
    backward,
    forward,
    init_weights,
    sgd_step,
)
from .seeds import derive_seed
from .stats import ConfusionMatrix, EvalReport


@dataclass
class ClassifierConfig:
    hidden_units_grid: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    lambda_grid: list[float] = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.4])
    folds: int = 10
    train: TrainConfig = field(
        default_factory=lambda: TrainConfig(
            learning_rate=0.05, batch_size=1, epochs=2000, seed=0
        )
    )

    def __post_init__(self):
        if not self.hidden_units_grid or not self.lambda_grid:
            raise ConfigError("grids must be non-empty")
        if any(h < 1 for h in self.hidden_units_grid):
            raise ConfigError("hidden unit counts must be >= 1")
        if any(lam < 0 for lam in self.lambda_grid):
            raise ConfigError("lambda values must be >= 0")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")


@dataclass
class FitResult:
    model: Mlp
    chosen_hidden_units: int
    chosen_lambda: float
    cv_accuracy: float


def _classifier_spec(n_features: int, hidden_units: int) -> list[LayerSpec]:
    return [
        LayerSpec(n_features, hidden_units, Activation.SIGMOID),
        LayerSpec(hidden_units, 1, Activation.SIGMOID),
    ]


def fit_network(
    x: np.ndarray,
    y: np.ndarray,
    hidden_units: int,
    weight_decay: float,
    train: TrainConfig,
    seed: int,
) -> Mlp:
    """Full-batch gradient descent on BCE + weight decay for train.epochs steps."""
    x = np.asarray(x, dtype=float)
    targets = np.asarray(y, dtype=float).reshape(-1, 1)
    if x.shape[0] != targets.shape[0]:
        raise ArgumentError("feature and label counts differ")
    net = init_weights(_classifier_spec(x.shape[1], hidden_units), seed)
    for _ in range(train.epochs):
        grads, _ = backward(
            net, x, targets, loss=LossKind.BINARY_CROSS_ENTROPY, weight_decay=weight_decay
        )
        sgd_step(net, grads, train.learning_rate)
    return net


def predict(
    model: Mlp, pixels: np.ndarray, threshold: float = 0.5
) -> tuple[np.ndarray, np.ndarray]:
    """Class labels (positive iff probability >= threshold) and probabilities."""
    pixels = np.asarray(pixels, dtype=float)
    if pixels.ndim == 1:
        pixels = pixels[None, :]
    out = forward(model, pixels)
    probs = out[:, 0]
    return probs >= threshold, probs


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Fold index per sample; class proportions preserved, remainder round-robin.

    Within each class the shuffled members are dealt onto a fold cursor that
    continues across classes, so folds stay balanced even when a class has
    fewer members than there are folds (leave-one-out keeps working).
    """
    y = np.asarray(y)
    if folds > y.size:
        raise ArgumentError(f"folds={folds} exceeds dataset size {y.size}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(y.size, dtype=np.int64)
    cursor = 0
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        for i in idx:
            assignment[i] = cursor % folds
            cursor += 1
    return assignment


def cross_validate(
    x: np.ndarray,
    y: np.ndarray,
    hidden_units: int,
    weight_decay: float,
    folds: int,
    seed: int,
    train: TrainConfig | None = None,
    threshold: float = 0.5,
) -> float:
    """Mean held-out accuracy over stratified folds; seeded-deterministic."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=bool)
    if x.shape[0] != y.size:
        raise ArgumentError("feature and label counts differ")
    if np.unique(y).size < 2:
        raise DataError("cross validation needs both classes present")
    train = train or ClassifierConfig().train
    assignment = stratified_folds(y, folds, derive_seed(seed, "cv-folds"))
    accuracies = []
    for fold in range(folds):
        held = assignment == fold
        if not held.any():
            continue
        net = fit_network(
            x[~held],
            y[~held],
            hidden_units,
            weight_decay,
            train,
            derive_seed(seed, f"cv-fit-{fold}"),
        )
        labels, _ = predict(net, x[held], threshold=threshold)
        accuracies.append(float(np.mean(labels == y[held])))
    return float(np.mean(accuracies))


def grid_search(
    x: np.ndarray,
    y: np.ndarray,
    config: ClassifierConfig,
    seed: int,
    threads: int = 1,
) -> FitResult:
    """Evaluate every (hidden units, lambda) cell by CV, refit the winner.

    Ties on cv accuracy break toward fewer hidden units, then stronger decay.
    All cells share one fold assignment so scores are comparable.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=bool)
    cells = [(h, lam) for h in config.hidden_units_grid for lam in config.lambda_grid]

    def run_cell(cell: tuple[int, float]) -> float:
        h, lam = cell
        return cross_validate(
            x, y, h, lam, config.folds, seed, train=config.train
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(run_cell, cells))
    else:
        scores = [run_cell(c) for c in cells]

    best_idx = 0
    for i in range(1, len(cells)):
        h, lam = cells[i]
        bh, blam = cells[best_idx]
        if scores[i] > scores[best_idx]:
            best_idx = i
        elif scores[i] == scores[best_idx] and (h < bh or (h == bh and lam > blam)):
            best_idx = i
    best_h, best_lam = cells[best_idx]
    model = fit_network(
        x, y, best_h, best_lam, config.train, derive_seed(seed, "refit")
    )
    return FitResult(
        model=model,
        chosen_hidden_units=best_h,
        chosen_lambda=best_lam,
        cv_accuracy=scores[best_idx],
    )


def evaluate(
    model: Mlp,
    x_test: np.ndarray,
    y_test: np.ndarray,
    positive_label: str = "builtup",
    threshold: float = 0.5,
) -> EvalReport:
    """Confusion matrix and derived metrics on a labeled test set."""
    y_test = np.asarray(y_test, dtype=bool)
    if np.unique(y_test).size < 2:
        raise DataError("test set must contain both classes")
    labels, _ = predict(model, x_test, threshold=threshold)
    cm = ConfusionMatrix(
        tp=int(np.sum(labels & y_test)),
        fn=int(np.sum(~labels & y_test)),
        fp=int(np.sum(labels & ~y_test)),
        tn=int(np.sum(~labels & ~y_test)),
        positive_label=positive_label,
    )
    return EvalReport.from_confusion(cm)
