"""Adversarial training of a generator/discriminator pair on pixel data.

The generator maps uniform noise in [-1, 1]^noise_dim to 6-band pixels in
normalized [0, 1] space; the discriminator scores realness. Training
alternates discriminator ascent (cross-entropy on real-vs-fake labels) with
generator descent on either the non-saturating or the literal saturating
objective.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import BandNormalization
from .errors import ArgumentError, ConfigError, DataError, NumericError, StateError
from .nn import (
    CHECKPOINT_SCHEMA,
    Activation,
    LayerSpec,
    LossKind,
    Mlp,
    TrainConfig,
    _apply_activation,
    _backward_from,
    _forward_trace,
    _loss_and_output_grad,
    init_weights,
    mlp_from_dict,
    mlp_to_dict,
    sgd_step,
)
from .seeds import derive_seed

PROB_EPS = 1e-7
DATA_DIM = 6


def default_generator_spec(noise_dim: int = 100, hidden: int = 100, data_dim: int = DATA_DIM):
    return [
        LayerSpec(noise_dim, hidden, Activation.SIGMOID),
        LayerSpec(hidden, hidden, Activation.RELU),
        LayerSpec(hidden, data_dim, Activation.RELU),
    ]


def default_discriminator_spec(data_dim: int = DATA_DIM, hidden: int = 100):
    # the output layer squashes with a sigmoid so D(x) lands in (0, 1)
    return [
        LayerSpec(data_dim, hidden, Activation.SIGMOID),
        LayerSpec(hidden, hidden, Activation.RELU),
        LayerSpec(hidden, 1, Activation.SIGMOID),
    ]


@dataclass
class GanConfig:
    noise_dim: int = 100
    generator_spec: list[LayerSpec] = field(default_factory=default_generator_spec)
    discriminator_spec: list[LayerSpec] = field(default_factory=default_discriminator_spec)
    d_steps_per_g_step: int = 2
    generator_loss: LossKind = LossKind.GENERATOR_NON_SATURATING
    # discriminator may train faster than the generator; None = same rate
    d_learning_rate: float | None = 0.1
    # fraction of final iterations over which generator weights are averaged;
    # the alternating game orbits its equilibrium, the tail average sits near
    # the center of the orbit
    generator_average_fraction: float = 0.25
    train: TrainConfig = field(
        default_factory=lambda: TrainConfig(
            learning_rate=0.02, batch_size=32, epochs=8000, seed=0
        )
    )

    def __post_init__(self):
        if self.noise_dim < 1:
            raise ConfigError("noise_dim must be >= 1")
        if self.d_steps_per_g_step < 1:
            raise ConfigError("d_steps_per_g_step must be >= 1")
        if self.d_learning_rate is not None and self.d_learning_rate <= 0:
            raise ConfigError("d_learning_rate must be > 0")
        if not (0.0 <= self.generator_average_fraction <= 1.0):
            raise ConfigError("generator_average_fraction must be in [0, 1]")
        if self.generator_spec[0].input_width != self.noise_dim:
            raise ConfigError("generator input width must equal noise_dim")
        if self.generator_spec[-1].output_width != self.discriminator_spec[0].input_width:
            raise ConfigError("generator output width must equal discriminator input width")
        if self.discriminator_spec[-1].output_width != 1:
            raise ConfigError("discriminator must emit a single probability")

    @property
    def data_dim(self) -> int:
        return self.generator_spec[-1].output_width


@dataclass
class GanModel:
    generator: Mlp
    discriminator: Mlp
    normalization: BandNormalization | None = None


def sample_noise(count: int, noise_dim: int, seed: int) -> np.ndarray:
    """(count x noise_dim) matrix of U[-1, 1] draws; seeded-deterministic."""
    if count < 1:
        raise ArgumentError("count must be >= 1")
    if noise_dim < 1:
        raise ArgumentError("noise_dim must be >= 1")
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=(count, noise_dim))


def gan_value(d_on_real: np.ndarray, d_on_fake: np.ndarray) -> float:
    """Minimax value estimate: mean log D(x) + mean log(1 - D(G(z)))."""
    d_on_real = np.asarray(d_on_real, dtype=float).ravel()
    d_on_fake = np.asarray(d_on_fake, dtype=float).ravel()
    if d_on_real.size == 0 or d_on_fake.size == 0:
        raise ArgumentError("empty probability vector")
    r = np.clip(d_on_real, PROB_EPS, 1.0 - PROB_EPS)
    f = np.clip(d_on_fake, PROB_EPS, 1.0 - PROB_EPS)
    return float(np.mean(np.log(r)) + np.mean(np.log(1.0 - f)))


def _discriminator_step(
    disc: Mlp, real: np.ndarray, fake: np.ndarray, learning_rate: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """One cross-entropy ascent step on real-vs-fake labels.

    Returns the loss plus D's pre-update outputs on both batches (for the
    value trace).
    """
    inputs = np.vstack([real, fake])
    targets = np.vstack(
        [np.ones((real.shape[0], 1)), np.zeros((fake.shape[0], 1))]
    )
    acts, pres = _forward_trace(disc, inputs)
    loss, dout = _loss_and_output_grad(LossKind.BINARY_CROSS_ENTROPY, acts[-1], targets)
    grads, _ = _backward_from(disc, acts, pres, dout)
    sgd_step(disc, grads, learning_rate)
    outputs = acts[-1][:, 0]
    return loss, outputs[: real.shape[0]], outputs[real.shape[0]:]


# generator gradients are clipped entrywise; a confidently wrong early
# discriminator can otherwise fling the generator far outside the data range,
# after which training never recovers
GEN_GRAD_CLIP = 1.0


def _generator_step(
    gen: Mlp, disc: Mlp, noise: np.ndarray, loss_kind: LossKind, learning_rate: float
) -> float:
    """One clipped generator descent step through a frozen discriminator."""
    g_acts, g_pres = _forward_trace(gen, noise)
    d_acts, d_pres = _forward_trace(disc, g_acts[-1])
    loss, dout = _loss_and_output_grad(loss_kind, d_acts[-1], None)
    _, d_input_grad = _backward_from(disc, d_acts, d_pres, dout)
    g_grads, _ = _backward_from(gen, g_acts, g_pres, d_input_grad)
    for i in range(len(g_grads.weights)):
        np.clip(g_grads.weights[i], -GEN_GRAD_CLIP, GEN_GRAD_CLIP, out=g_grads.weights[i])
        np.clip(g_grads.biases[i], -GEN_GRAD_CLIP, GEN_GRAD_CLIP, out=g_grads.biases[i])
    sgd_step(gen, g_grads, learning_rate)
    return loss


# Raw Glorot scales suit neither net here: on [0, 1] pixels the
# discriminator's first sigmoid layer barely sees its input, and depending on
# the seed several generator output ReLUs start dead (a dead band has no
# gradient path of its own and recovers only through side effects). Each
# network is therefore standardized layer by layer over a seeded noise probe
# so every unit starts in its active range, deterministically per seed.
_PROBE_SIZE = 512
# pre-activation targets: (mean, sd) for hidden layers and the output layer
_HIDDEN_TARGET = (0.0, 1.0)
_GEN_OUTPUT_TARGET = (0.5, 0.35)


def _standardize_net(net: Mlp, probe: np.ndarray, output_target: tuple[float, float]) -> None:
    a = probe
    for i, spec in enumerate(net.layers):
        t_mean, t_sd = output_target if i == len(net.layers) - 1 else _HIDDEN_TARGET
        z = a @ net.weights[i].T + net.biases[i]
        sd = np.maximum(z.std(axis=0), 1e-8)
        scale = t_sd / sd
        net.weights[i] *= scale[:, None]
        net.biases[i] = t_mean - z.mean(axis=0) * scale
        a = _apply_activation(spec.activation, a @ net.weights[i].T + net.biases[i])


def _init_gan_networks(config: GanConfig, seed: int) -> tuple[Mlp, Mlp]:
    gen = init_weights(config.generator_spec, derive_seed(seed, "gan-generator-init"))
    disc = init_weights(config.discriminator_spec, derive_seed(seed, "gan-discriminator-init"))
    noise_probe = np.random.default_rng(derive_seed(seed, "gan-init-probe")).uniform(
        -1.0, 1.0, size=(_PROBE_SIZE, config.noise_dim)
    )
    _standardize_net(gen, noise_probe, _GEN_OUTPUT_TARGET)
    pixel_probe = np.random.default_rng(derive_seed(seed, "gan-init-pixel-probe")).uniform(
        0.0, 1.0, size=(_PROBE_SIZE, config.data_dim)
    )
    _standardize_net(disc, pixel_probe, _HIDDEN_TARGET)
    return gen, disc


def train_gan(
    data: np.ndarray,
    config: GanConfig,
    normalization: BandNormalization | None = None,
) -> tuple[GanModel, list[dict]]:
    """Adversarial training on normalized pixels; returns model plus trace.

    data must be an (n x data_dim) matrix with entries in [0, 1]. Each
    iteration runs d_steps_per_g_step discriminator updates followed by one
    generator update; the trace records the pre-update minimax value and
    both losses per iteration. Fully deterministic given config.train.seed.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != config.data_dim:
        raise ArgumentError(f"expected (n, {config.data_dim}) data, got {data.shape}")
    n = data.shape[0]
    if n < config.train.batch_size:
        raise ConfigError(f"need at least batch_size={config.train.batch_size} rows, got {n}")
    if not np.all(np.isfinite(data)):
        raise DataError("training data contains non-finite values")
    if data.min() < -1e-9 or data.max() > 1.0 + 1e-9:
        raise ArgumentError("training data must be normalized into [0, 1]")

    seed = config.train.seed
    gen, disc = _init_gan_networks(config, seed)
    rng = np.random.default_rng(derive_seed(seed, "gan-train"))
    g_lr = config.train.learning_rate
    d_lr = config.d_learning_rate if config.d_learning_rate is not None else g_lr
    batch = config.train.batch_size
    iters = config.train.epochs
    avg_start = iters - int(round(iters * config.generator_average_fraction))
    avg_w = [np.zeros_like(w) for w in gen.weights]
    avg_b = [np.zeros_like(b) for b in gen.biases]
    avg_count = 0

    trace: list[dict] = []
    for it in range(iters):
        try:
            d_loss = 0.0
            d_real = d_fake = None
            for _ in range(config.d_steps_per_g_step):
                real = data[rng.choice(n, size=batch, replace=False)]
                noise = rng.uniform(-1.0, 1.0, size=(batch, config.noise_dim))
                fake = np.asarray(_forward_trace(gen, noise)[0][-1])
                d_loss, d_real, d_fake = _discriminator_step(disc, real, fake, d_lr)
            g_noise = rng.uniform(-1.0, 1.0, size=(batch, config.noise_dim))
            g_loss = _generator_step(gen, disc, g_noise, config.generator_loss, g_lr)
        except NumericError as exc:
            raise NumericError(f"iteration {it}: {exc}") from exc
        if it >= avg_start:
            for acc, w in zip(avg_w, gen.weights):
                acc += w
            for acc, b in zip(avg_b, gen.biases):
                acc += b
            avg_count += 1
        trace.append(
            {
                "iteration": it,
                "value": gan_value(d_real, d_fake),
                "d_loss": d_loss,
                "g_loss": g_loss,
            }
        )
    if avg_count > 0:
        gen = Mlp(
            layers=list(gen.layers),
            weights=[w / avg_count for w in avg_w],
            biases=[b / avg_count for b in avg_b],
        )
    return GanModel(generator=gen, discriminator=disc, normalization=normalization), trace


def generate_pixels(model: GanModel, count: int, seed: int) -> np.ndarray:
    """Sample noise, run the generator, denormalize into band units."""
    if count < 1:
        raise ArgumentError("count must be >= 1")
    if model.normalization is None:
        raise StateError("model has no normalization metadata; cannot denormalize")
    noise = sample_noise(count, model.generator.input_width, seed)
    scaled = _forward_trace(model.generator, noise)[0][-1]
    return model.normalization.invert(scaled)


# --- persistence ---------------------------------------------------------------

def save_gan(path: str | Path, model: GanModel) -> None:
    doc = {
        "schema_version": CHECKPOINT_SCHEMA,
        "generator": mlp_to_dict(model.generator),
        "discriminator": mlp_to_dict(model.discriminator),
        "normalization": model.normalization.to_dict() if model.normalization else None,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_gan(path: str | Path) -> GanModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt checkpoint {path}: {exc}") from exc
    if doc.get("schema_version") != CHECKPOINT_SCHEMA:
        raise DataError(f"unsupported checkpoint schema {doc.get('schema_version')!r}")
    try:
        gen = mlp_from_dict(doc["generator"])
        disc = mlp_from_dict(doc["discriminator"])
    except KeyError as exc:
        raise DataError(f"checkpoint missing network block: {exc}") from exc
    norm = doc.get("normalization")
    return GanModel(
        generator=gen,
        discriminator=disc,
        normalization=BandNormalization.from_dict(norm) if norm else None,
    )
