import sys
import time

import numpy as np

from pixelgan.data import BandNormalization
from pixelgan.gan import (
    GanConfig,
    _discriminator_step,
    _generator_step,
    _init_gan_networks,
    generate_pixels,
    GanModel,
)
from pixelgan.nn import TrainConfig, LossKind, _forward_trace
from pixelgan.seeds import derive_seed
from pixelgan.stats import ks_two_sample, ball_divergence_test


def builtup_sample(rng, n, eps_scale=2.5):
    mu = np.array([95, 105, 118, 128, 122, 108.0])
    load = np.array([6, 7, 8, 9, 8, 7.0])
    return mu + rng.normal(size=(n, 1)) * load + rng.normal(scale=eps_scale, size=(n, 6))


def train_decay(data01, norm, master, iters, d_lr0, g_lr0, decay_to, dsteps, bs, snaps):
    """Training loop with linear lr decay; yields snapshot metrics."""
    cfg = GanConfig(
        d_steps_per_g_step=dsteps,
        train=TrainConfig(learning_rate=g_lr0, batch_size=bs, epochs=iters,
                          seed=derive_seed(master, "train-gan")),
    )
    gen, disc = _init_gan_networks(cfg, cfg.train.seed)
    rng = np.random.default_rng(derive_seed(cfg.train.seed, "gan-train"))
    n = data01.shape[0]
    out = []
    for it in range(iters):
        frac = it / max(1, iters - 1)
        scale = 1.0 - (1.0 - decay_to) * frac
        d_lr = d_lr0 * scale
        g_lr = g_lr0 * scale
        for _ in range(dsteps):
            real = data01[rng.choice(n, size=bs, replace=False)]
            noise = rng.uniform(-1, 1, size=(bs, 100))
            fake = _forward_trace(gen, noise)[0][-1]
            _discriminator_step(disc, real, fake, d_lr)
        gn = rng.uniform(-1, 1, size=(bs, 100))
        _generator_step(gen, disc, gn, LossKind.GENERATOR_NON_SATURATING, g_lr)
        if it + 1 in snaps:
            model = GanModel(gen, disc, norm)
            ks_ok = 0
            ball_ok = 0
            for s in range(1, 4):
                g = generate_pixels(model, 100, seed=derive_seed(master, f"generate:{s}"))
                ks_ok += sum(ks_two_sample(orig[:, b], g[:, b]).p_value > 0.05 for b in range(6))
                ball_ok += ball_divergence_test(orig, g, permutations=199,
                                                seed=derive_seed(master, f"ball:{s}")).p_value > 0.05
            out.append((it + 1, ks_ok, ball_ok))
    return out


if __name__ == "__main__":
    mode = sys.argv[1]
    rng = np.random.default_rng(42)
    orig = builtup_sample(rng, 100)
    norm = BandNormalization.fit(orig)
    data01 = norm.apply(orig)
    snaps = (1500, 3000, 4500, 6000, 9000)
    if mode == "traj":
        for master in (3, 5, 0):
            t0 = time.time()
            res = train_decay(data01, norm, master, 9000, 0.1, 0.02, 1.0, 2, 32, snaps)
            print(f"no-decay master={master}: {res} ({time.time()-t0:.0f}s)", flush=True)
    if mode == "decay":
        for master in (3, 5, 0, 1, 2, 4):
            t0 = time.time()
            res = train_decay(data01, norm, master, 6000, 0.1, 0.02, 0.1, 2, 32, (3000, 6000))
            print(f"decay master={master}: {res} ({time.time()-t0:.0f}s)", flush=True)
