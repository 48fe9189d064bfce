"""Dense feed-forward networks with manual backpropagation.

One engine shared by the GAN generator, the GAN discriminator, and the
pixel classifier: sigmoid / ReLU / identity activations, binary
cross-entropy plus the two adversarial generator objectives, L2 weight
decay on weight matrices (never biases), and plain minibatch SGD.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ArgumentError, ConfigError, DataError, NumericError

# Probabilities are clamped to [PROB_EPS, 1 - PROB_EPS] before any log so
# losses stay finite even for saturated outputs.
PROB_EPS = 1e-7

CHECKPOINT_SCHEMA = "checkpoint.v1"


class Activation(str, Enum):
    SIGMOID = "sigmoid"
    RELU = "relu"
    IDENTITY = "identity"


class LossKind(str, Enum):
    BINARY_CROSS_ENTROPY = "binary_cross_entropy"
    GENERATOR_NON_SATURATING = "generator_non_saturating"
    GENERATOR_SATURATING = "generator_saturating"


@dataclass(frozen=True)
class LayerSpec:
    input_width: int
    output_width: int
    activation: Activation

    def __post_init__(self):
        if self.input_width < 1 or self.output_width < 1:
            raise ConfigError(
                f"layer widths must be >= 1, got {self.input_width}x{self.output_width}"
            )


@dataclass
class TrainConfig:
    learning_rate: float
    batch_size: int
    epochs: int
    weight_decay_lambda: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.weight_decay_lambda < 0:
            raise ConfigError("weight_decay_lambda must be >= 0")


@dataclass
class Mlp:
    layers: list[LayerSpec]
    weights: list[np.ndarray]  # each (output_width, input_width)
    biases: list[np.ndarray]  # each (output_width,)

    @property
    def input_width(self) -> int:
        return self.layers[0].input_width

    @property
    def output_width(self) -> int:
        return self.layers[-1].output_width

    def validate(self) -> None:
        _check_chaining(self.layers)
        for i, (spec, w, b) in enumerate(zip(self.layers, self.weights, self.biases)):
            if w.shape != (spec.output_width, spec.input_width):
                raise ArgumentError(f"layer {i}: weight shape {w.shape} does not match spec")
            if b.shape != (spec.output_width,):
                raise ArgumentError(f"layer {i}: bias shape {b.shape} does not match spec")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NumericError(f"layer {i}: non-finite parameters")

    def copy(self) -> "Mlp":
        return Mlp(
            layers=list(self.layers),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]


def _check_chaining(specs: list[LayerSpec]) -> None:
    if not specs:
        raise ConfigError("at least one layer is required")
    for i in range(len(specs) - 1):
        if specs[i].output_width != specs[i + 1].input_width:
            raise ConfigError(
                f"layer {i} output width {specs[i].output_width} does not chain "
                f"into layer {i + 1} input width {specs[i + 1].input_width}"
            )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign to avoid overflow in exp
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _apply_activation(kind: Activation, z: np.ndarray) -> np.ndarray:
    if kind is Activation.SIGMOID:
        return _sigmoid(z)
    if kind is Activation.RELU:
        return np.maximum(z, 0.0)
    return z


def _activation_grad(kind: Activation, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if kind is Activation.SIGMOID:
        return a * (1.0 - a)
    if kind is Activation.RELU:
        return (z > 0.0).astype(z.dtype)
    return np.ones_like(z)


def init_weights(specs: list[LayerSpec], seed: int) -> Mlp:
    """Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases."""
    _check_chaining(specs)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for spec in specs:
        limit = np.sqrt(6.0 / (spec.input_width + spec.output_width))
        weights.append(rng.uniform(-limit, limit, size=(spec.output_width, spec.input_width)))
        biases.append(np.zeros(spec.output_width))
    return Mlp(layers=list(specs), weights=weights, biases=biases)


def _as_batch(net: Mlp, x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.input_width:
        raise ArgumentError(
            f"input shape {x.shape} incompatible with network input width {net.input_width}"
        )
    return x, single


def _forward_trace(net: Mlp, x: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Forward pass keeping per-layer pre-activations and activations.

    Returns (activations, preactivations) where activations[0] is the input
    batch and activations[-1] the network output.
    """
    acts = [x]
    pres = []
    a = x
    for i, (spec, w, b) in enumerate(zip(net.layers, net.weights, net.biases)):
        z = a @ w.T + b
        a = _apply_activation(spec.activation, z)
        if not np.all(np.isfinite(a)):
            raise NumericError(f"non-finite activation in layer {i}")
        pres.append(z)
        acts.append(a)
    return acts, pres


def forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Evaluate the network on a single vector or a batch of row vectors."""
    batch, single = _as_batch(net, x)
    acts, _ = _forward_trace(net, batch)
    out = acts[-1]
    return out[0] if single else out


def _loss_and_output_grad(
    kind: LossKind, outputs: np.ndarray, targets: np.ndarray | None
) -> tuple[float, np.ndarray]:
    """Mean-over-batch loss and its gradient with respect to the raw outputs.

    Probabilities are clamped before the log. The gradient is exact for the
    clamped loss: zero wherever the clamp is active, the usual expression
    strictly inside (PROB_EPS, 1 - PROB_EPS).
    """
    k = outputs.shape[0]
    p = np.clip(outputs, PROB_EPS, 1.0 - PROB_EPS)
    inside = ((outputs > PROB_EPS) & (outputs < 1.0 - PROB_EPS)).astype(float)
    if kind is LossKind.BINARY_CROSS_ENTROPY:
        if targets is None:
            raise ArgumentError("binary cross-entropy requires targets")
        t = np.asarray(targets, dtype=float)
        if t.shape != outputs.shape:
            raise ArgumentError(f"target shape {t.shape} does not match output {outputs.shape}")
        loss = -np.mean(np.sum(t * np.log(p) + (1.0 - t) * np.log(1.0 - p), axis=1))
        dout = (p - t) / (p * (1.0 - p)) / k
    elif kind is LossKind.GENERATOR_NON_SATURATING:
        # minimize -log D(G(z))
        loss = -np.mean(np.sum(np.log(p), axis=1))
        dout = -1.0 / p / k
    else:
        # literal objective: minimize log(1 - D(G(z)))
        loss = np.mean(np.sum(np.log(1.0 - p), axis=1))
        dout = -1.0 / (1.0 - p) / k
    return float(loss), dout * inside


def _backward_from(
    net: Mlp, acts: list[np.ndarray], pres: list[np.ndarray], dout: np.ndarray
) -> tuple[Gradients, np.ndarray]:
    """Backpropagate an output-side gradient; returns parameter and input grads."""
    n_layers = len(net.layers)
    gw: list[np.ndarray | None] = [None] * n_layers
    gb: list[np.ndarray | None] = [None] * n_layers
    delta = dout
    for i in reversed(range(n_layers)):
        dz = delta * _activation_grad(net.layers[i].activation, pres[i], acts[i + 1])
        gw[i] = dz.T @ acts[i]
        gb[i] = dz.sum(axis=0)
        delta = dz @ net.weights[i]
    return Gradients(weights=gw, biases=gb), delta


def backward(
    net: Mlp,
    inputs: np.ndarray,
    targets: np.ndarray | None,
    loss: LossKind = LossKind.BINARY_CROSS_ENTROPY,
    weight_decay: float = 0.0,
) -> tuple[Gradients, float]:
    """Analytic gradients of the regularized mean batch loss.

    The returned loss is the base loss plus weight_decay * sum(w^2) over all
    weight matrices; the corresponding 2 * weight_decay * w term is added to
    each weight gradient. Biases are never decayed.
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2:
        raise ArgumentError("inputs must be a (batch, width) matrix")
    if inputs.shape[0] == 0:
        raise ArgumentError("empty batch")
    if inputs.shape[1] != net.input_width:
        raise ArgumentError(
            f"input width {inputs.shape[1]} does not match network input {net.input_width}"
        )
    if weight_decay < 0:
        raise ArgumentError("weight_decay must be >= 0")
    acts, pres = _forward_trace(net, inputs)
    loss_value, dout = _loss_and_output_grad(loss, acts[-1], targets)
    grads, _ = _backward_from(net, acts, pres, dout)
    if weight_decay > 0.0:
        for i, w in enumerate(net.weights):
            loss_value += weight_decay * float(np.sum(w * w))
            grads.weights[i] = grads.weights[i] + 2.0 * weight_decay * w
    return grads, loss_value


def sgd_step(net: Mlp, grads: Gradients, learning_rate: float) -> Mlp:
    """In-place w <- w - lr * g on every weight and bias; returns the net."""
    if len(grads.weights) != len(net.weights) or len(grads.biases) != len(net.biases):
        raise ArgumentError("gradient layer count does not match network")
    for i, (w, gw) in enumerate(zip(net.weights, grads.weights)):
        if w.shape != gw.shape:
            raise ArgumentError(f"layer {i}: weight gradient shape {gw.shape} != {w.shape}")
        if net.biases[i].shape != grads.biases[i].shape:
            raise ArgumentError(f"layer {i}: bias gradient shape mismatch")
    for w, gw in zip(net.weights, grads.weights):
        w -= learning_rate * gw
    for b, gb in zip(net.biases, grads.biases):
        b -= learning_rate * gb
    return net


# --- checkpoint serialization -------------------------------------------------

def mlp_to_dict(net: Mlp) -> dict:
    return {
        "layer_specs": [
            {"in": s.input_width, "out": s.output_width, "activation": s.activation.value}
            for s in net.layers
        ],
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }


def mlp_from_dict(d: dict) -> Mlp:
    try:
        specs = [
            LayerSpec(int(s["in"]), int(s["out"]), Activation(s["activation"]))
            for s in d["layer_specs"]
        ]
        weights = [np.asarray(w, dtype=float) for w in d["weights"]]
        biases = [np.asarray(b, dtype=float) for b in d["biases"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed network block: {exc}") from exc
    net = Mlp(layers=specs, weights=weights, biases=biases)
    net.validate()
    return net


def save_mlp(path: str | Path, net: Mlp, normalization: dict | None = None) -> None:
    """Write a single-network checkpoint; floats round-trip bit-exactly."""
    doc = {"schema_version": CHECKPOINT_SCHEMA, **mlp_to_dict(net), "normalization": normalization}
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_mlp(path: str | Path) -> tuple[Mlp, dict | None]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt checkpoint {path}: {exc}") from exc
    if doc.get("schema_version") != CHECKPOINT_SCHEMA:
        raise DataError(f"unsupported checkpoint schema {doc.get('schema_version')!r}")
    return mlp_from_dict(doc), doc.get("normalization")
