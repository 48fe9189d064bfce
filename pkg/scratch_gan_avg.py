import sys
import time

import numpy as np

from pixelgan.data import BandNormalization
from pixelgan.gan import (
    GanConfig,
    GanModel,
    _discriminator_step,
    _generator_step,
    _init_gan_networks,
    generate_pixels,
)
from pixelgan.nn import TrainConfig, LossKind, Mlp, _forward_trace
from pixelgan.seeds import derive_seed
from pixelgan.stats import ks_two_sample, ball_divergence_test


def builtup_sample(rng, n, eps_scale=2.5):
    mu = np.array([95, 105, 118, 128, 122, 108.0])
    load = np.array([6, 7, 8, 9, 8, 7.0])
    return mu + rng.normal(size=(n, 1)) * load + rng.normal(scale=eps_scale, size=(n, 6))


def train_avg(data01, norm, master, iters, d_lr, g_lr, dsteps, bs, avg_frac):
    cfg = GanConfig(
        d_steps_per_g_step=dsteps,
        train=TrainConfig(learning_rate=g_lr, batch_size=bs, epochs=iters,
                          seed=derive_seed(master, "train-gan")),
    )
    gen, disc = _init_gan_networks(cfg, cfg.train.seed)
    rng = np.random.default_rng(derive_seed(cfg.train.seed, "gan-train"))
    n = data01.shape[0]
    avg_start = int(iters * (1 - avg_frac))
    sum_w = [np.zeros_like(w) for w in gen.weights]
    sum_b = [np.zeros_like(b) for b in gen.biases]
    count = 0
    for it in range(iters):
        for _ in range(dsteps):
            real = data01[rng.choice(n, size=bs, replace=False)]
            noise = rng.uniform(-1, 1, size=(bs, 100))
            fake = _forward_trace(gen, noise)[0][-1]
            _discriminator_step(disc, real, fake, d_lr)
        gn = rng.uniform(-1, 1, size=(bs, 100))
        _generator_step(gen, disc, gn, LossKind.GENERATOR_NON_SATURATING, g_lr)
        if it >= avg_start:
            for acc, w in zip(sum_w, gen.weights):
                acc += w
            for acc, b in zip(sum_b, gen.biases):
                acc += b
            count += 1
    avg_gen = Mlp(
        layers=list(gen.layers),
        weights=[w / count for w in sum_w],
        biases=[b / count for b in sum_b],
    )
    return GanModel(avg_gen, disc, norm)


if __name__ == "__main__":
    iters = int(sys.argv[1]) if len(sys.argv) > 1 else 6000
    avg_frac = float(sys.argv[2]) if len(sys.argv) > 2 else 0.5
    seeds = int(sys.argv[3]) if len(sys.argv) > 3 else 10
    rng = np.random.default_rng(42)
    orig = builtup_sample(rng, 100)
    norm = BandNormalization.fit(orig)
    data01 = norm.apply(orig)
    t0 = time.time()
    passes = 0
    detail = []
    for master in range(seeds):
        model = train_avg(data01, norm, master, iters, 0.1, 0.02, 2, 32, avg_frac)
        ks_ok = 0
        ball_ok = 0
        for s in range(1, 4):
            g = generate_pixels(model, 100, seed=derive_seed(master, f"generate:{s}"))
            ks_ok += sum(ks_two_sample(orig[:, b], g[:, b]).p_value > 0.05 for b in range(6))
            ball_ok += ball_divergence_test(orig, g, permutations=999,
                                            seed=derive_seed(master, f"ball:{s}")).p_value > 0.05
        ok = ks_ok / 18 >= 0.9 and ball_ok == 3
        passes += ok
        detail.append(f"{ks_ok}/{ball_ok}")
    print(f"avg iters={iters} frac={avg_frac}: pass {passes}/{seeds} [{' '.join(detail)}] {time.time()-t0:.0f}s")
