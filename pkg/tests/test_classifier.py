"""Cross validation, grid search, prediction, and evaluation."""

import numpy as np
import pytest

from pixelgan.classifier import (
    ClassifierConfig,
    cross_validate,
    evaluate,
    fit_network,
    grid_search,
    predict,
    stratified_folds,
)
from pixelgan.errors import ArgumentError, DataError
from pixelgan.nn import Activation, LayerSpec, Mlp, TrainConfig


def fast_train(epochs=400, lr=0.5):
    return TrainConfig(learning_rate=lr, batch_size=1, epochs=epochs, seed=0)


def separable_toy(n=80, seed=0):
    """Positive iff B1 > 0.5, with a wide margin; other bands are noise."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, size=(n, 6))
    y = rng.random(n) < 0.5
    x[y, 0] = rng.uniform(0.8, 1.0, size=int(y.sum()))
    x[~y, 0] = rng.uniform(0.0, 0.2, size=int((~y).sum()))
    return x, y


def xor_toy(n=200, seed=1):
    """Class = XOR of (B1 > 0.5, B2 > 0.5); needs at least 2 hidden units."""
    rng = np.random.default_rng(seed)
    quad = rng.integers(0, 4, size=n)
    a = np.isin(quad, (1, 3)).astype(float)
    b = np.isin(quad, (2, 3)).astype(float)
    x = rng.uniform(0, 1, size=(n, 6))
    x[:, 0] = np.where(a > 0, rng.uniform(0.8, 1.0, n), rng.uniform(0.0, 0.2, n))
    x[:, 1] = np.where(b > 0, rng.uniform(0.8, 1.0, n), rng.uniform(0.0, 0.2, n))
    y = (a != b)
    return x, y


# --- folds -----------------------------------------------------------------------

def test_stratified_folds_preserve_proportions():
    y = np.array([True] * 30 + [False] * 120)
    folds = stratified_folds(y, folds=10, seed=3)
    for f in range(10):
        held = folds == f
        assert held.sum() == 15
        assert y[held].sum() == 3  # 30 positives over 10 folds


def test_stratified_folds_remainders_round_robin():
    y = np.array([True] * 7 + [False] * 11)
    folds = stratified_folds(y, folds=4, seed=0)
    sizes = [int((folds == f).sum()) for f in range(4)]
    assert sum(sizes) == 18
    assert max(sizes) - min(sizes) <= 1


def test_leave_one_out_with_two_per_class():
    x = np.array(
        [[0.9, 0, 0, 0, 0, 0], [0.95, 0, 0, 0, 0, 0], [0.1, 0, 0, 0, 0, 0], [0.05, 0, 0, 0, 0, 0]]
    )
    y = np.array([True, True, False, False])
    acc = cross_validate(x, y, hidden_units=1, weight_decay=0.0, folds=4, seed=0,
                         train=fast_train(300))
    assert 0.0 <= acc <= 1.0


def test_cv_deterministic():
    x, y = separable_toy()
    a = cross_validate(x, y, 2, 0.1, 5, seed=9, train=fast_train())
    b = cross_validate(x, y, 2, 0.1, 5, seed=9, train=fast_train())
    assert a == b


def test_cv_separable_data_scores_high():
    x, y = separable_toy(n=100)
    acc = cross_validate(x, y, 2, 0.0, 10, seed=1, train=fast_train())
    assert acc >= 0.99


def test_cv_rejects_single_class():
    x = np.zeros((10, 6))
    y = np.ones(10, dtype=bool)
    with pytest.raises(DataError):
        cross_validate(x, y, 1, 0.0, 5, seed=0, train=fast_train())


def test_cv_rejects_too_many_folds():
    x, y = separable_toy(n=10)
    with pytest.raises(ArgumentError):
        cross_validate(x, y, 1, 0.0, 11, seed=0, train=fast_train())


# --- grid search --------------------------------------------------------------------

def test_grid_of_one_pair():
    x, y = separable_toy()
    cfg = ClassifierConfig(hidden_units_grid=[2], lambda_grid=[0.1], folds=4,
                           train=fast_train())
    fit = grid_search(x, y, cfg, seed=0)
    assert fit.chosen_hidden_units == 2
    assert fit.chosen_lambda == 0.1


def test_xor_needs_two_hidden_units():
    x, y = xor_toy()
    cfg = ClassifierConfig(hidden_units_grid=[1, 2], lambda_grid=[0.0], folds=4,
                           train=TrainConfig(learning_rate=1.0, batch_size=1, epochs=1500, seed=0))
    fit = grid_search(x, y, cfg, seed=2)
    assert fit.chosen_hidden_units == 2


def test_tie_breaks_to_smaller_h_then_larger_lambda():
    # force exact ties on a trivially separable set where every cell is perfect
    x, y = separable_toy(n=40)
    cfg = ClassifierConfig(hidden_units_grid=[3, 1], lambda_grid=[0.0, 0.001], folds=4,
                           train=fast_train())
    fit = grid_search(x, y, cfg, seed=0)
    assert fit.cv_accuracy == 1.0
    assert fit.chosen_hidden_units == 1
    assert fit.chosen_lambda == 0.001


def test_grid_search_deterministic():
    x, y = separable_toy()
    cfg = ClassifierConfig(hidden_units_grid=[1, 2], lambda_grid=[0.1, 0.2], folds=4,
                           train=fast_train())
    a = grid_search(x, y, cfg, seed=5)
    b = grid_search(x, y, cfg, seed=5)
    assert (a.chosen_hidden_units, a.chosen_lambda, a.cv_accuracy) == (
        b.chosen_hidden_units, b.chosen_lambda, b.cv_accuracy
    )
    assert np.array_equal(a.model.weights[0], b.model.weights[0])


def test_grid_search_threads_match_serial():
    x, y = separable_toy()
    cfg = ClassifierConfig(hidden_units_grid=[1, 2], lambda_grid=[0.1, 0.4], folds=3,
                           train=fast_train(150))
    serial = grid_search(x, y, cfg, seed=5, threads=1)
    threaded = grid_search(x, y, cfg, seed=5, threads=4)
    assert serial.chosen_hidden_units == threaded.chosen_hidden_units
    assert serial.cv_accuracy == threaded.cv_accuracy


# --- predict / evaluate ---------------------------------------------------------------

def test_predict_threshold_is_inclusive():
    # single unit with zero weights emits exactly 0.5
    net = Mlp(
        layers=[LayerSpec(6, 1, Activation.SIGMOID)],
        weights=[np.zeros((1, 6))],
        biases=[np.zeros(1)],
    )
    labels, probs = predict(net, np.zeros((3, 6)), threshold=0.5)
    assert np.all(probs == 0.5)
    assert np.all(labels)


def test_predict_probabilities_in_open_interval():
    x, y = separable_toy()
    net = fit_network(x, y, 2, 0.1, fast_train(), seed=4)
    _, probs = predict(net, x)
    assert np.all((probs > 0) & (probs < 1))


def test_fit_matches_labels_on_separable_data():
    x, y = separable_toy(n=120)
    net = fit_network(x, y, 2, 0.0, fast_train(), seed=0)
    labels, _ = predict(net, x)
    assert np.mean(labels == y) >= 0.99


def test_evaluate_constant_negative_baseline():
    # a model with a hugely negative bias predicts nonbuiltup everywhere
    net = Mlp(
        layers=[LayerSpec(6, 1, Activation.SIGMOID)],
        weights=[np.zeros((1, 6))],
        biases=[np.array([-50.0])],
    )
    y = np.array([True] * 2000 + [False] * 5000)
    x = np.zeros((7000, 6))
    report = evaluate(net, x, y)
    assert report.accuracy == pytest.approx(5000 / 7000)
    assert report.kappa == 0.0


def test_evaluate_reconstructed_benchmark_row():
    # confusion counts derived from sensitivity .9994 / specificity .9955
    # at 5000/2000 test-class sizes
    from pixelgan.stats import ConfusionMatrix, EvalReport

    report = EvalReport.from_confusion(ConfusionMatrix(tp=4997, fn=3, fp=9, tn=1991))
    assert report.accuracy == pytest.approx(0.9983, abs=1e-4)
    assert report.kappa == pytest.approx(0.9958, abs=5e-4)


def test_evaluate_perfect_model():
    x, y = separable_toy(n=60)
    net = fit_network(x, y, 2, 0.0, fast_train(600), seed=0)
    report = evaluate(net, x, y)
    if report.accuracy == 1.0:
        assert report.kappa == 1.0
