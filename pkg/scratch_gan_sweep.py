import sys
import time

import numpy as np

from scratch_gan_avg import builtup_sample
from pixelgan.data import BandNormalization
from pixelgan.gan import GanConfig, train_gan, generate_pixels
from pixelgan.nn import TrainConfig
from pixelgan.seeds import derive_seed
from pixelgan.stats import ks_two_sample, ball_divergence_test

rng = np.random.default_rng(42)
orig = builtup_sample(rng, 100)
norm = BandNormalization.fit(orig)
data01 = norm.apply(orig)


def check(master, d_lr, g_lr, dsteps, iters, avg, perms=499):
    cfg = GanConfig(
        d_steps_per_g_step=dsteps,
        d_learning_rate=d_lr,
        generator_average_fraction=avg,
        train=TrainConfig(learning_rate=g_lr, batch_size=32, epochs=iters,
                          seed=derive_seed(master, "train-gan")),
    )
    model, _ = train_gan(data01, cfg, normalization=norm)
    ks_ok = 0
    ball_ok = 0
    for s in range(1, 4):
        g = generate_pixels(model, 100, seed=derive_seed(master, f"generate:{s}"))
        ks_ok += sum(ks_two_sample(orig[:, b], g[:, b]).p_value > 0.05 for b in range(6))
        ball_ok += ball_divergence_test(orig, g, permutations=perms,
                                        seed=derive_seed(master, f"ball:{s}")).p_value > 0.05
    return ks_ok, ball_ok


def sweep(configs, seeds):
    for tag, d_lr, g_lr, dsteps, iters, avg in configs:
        t0 = time.time()
        passes = 0
        detail = []
        for master in range(seeds):
            ks_ok, ball_ok = check(master, d_lr, g_lr, dsteps, iters, avg)
            passes += (ks_ok / 18 >= 0.9 and ball_ok == 3)
            detail.append(f"{ks_ok}/{ball_ok}")
        print(f"{tag}: pass {passes}/{seeds} [{' '.join(detail)}] {time.time()-t0:.0f}s",
              flush=True)


STAGES = {
    "1": [
        ("a d.1 g.02 s2 8k a.25", 0.1, 0.02, 2, 8000, 0.25),
        ("b d.2 g.05 s2 8k a.25", 0.2, 0.05, 2, 8000, 0.25),
        ("c d.05 g.01 s2 8k a.25", 0.05, 0.01, 2, 8000, 0.25),
    ],
    "2": [
        ("d d.1 g.03 s3 6k a.25", 0.1, 0.03, 3, 6000, 0.25),
        ("e d.2 g.03 s2 8k a.5", 0.2, 0.03, 2, 8000, 0.5),
        ("f d.3 g.05 s2 8k a.25", 0.3, 0.05, 2, 8000, 0.25),
    ],
}

if __name__ == "__main__":
    which = sys.argv[1]
    seeds = int(sys.argv[2]) if len(sys.argv) > 2 else 4
    sweep(STAGES[which], seeds)
