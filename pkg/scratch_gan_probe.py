import sys
import time

import numpy as np

from pixelgan.data import BandNormalization
from pixelgan.gan import GanConfig, train_gan, generate_pixels
from pixelgan.nn import TrainConfig
from pixelgan.seeds import derive_seed
from pixelgan.stats import ks_two_sample, ball_divergence_test


def builtup_sample(rng, n, eps_scale):
    mu = np.array([95, 105, 118, 128, 122, 108.0])
    load = np.array([6, 7, 8, 9, 8, 7.0])
    f = rng.normal(size=(n, 1))
    eps = rng.normal(scale=eps_scale, size=(n, 6))
    return mu + f * load + eps


def run(tag, iters, d_lr, g_lr, dsteps, bs, eps_scale, seeds=6):
    rng = np.random.default_rng(42)
    orig = builtup_sample(rng, 100, eps_scale)
    norm = BandNormalization.fit(orig)
    data01 = norm.apply(orig)
    t0 = time.time()
    passes = 0
    detail = []
    for master in range(seeds):
        cfg = GanConfig(
            d_steps_per_g_step=dsteps,
            d_learning_rate=d_lr,
            train=TrainConfig(
                learning_rate=g_lr, batch_size=bs, epochs=iters,
                seed=derive_seed(master, "train-gan"),
            ),
        )
        model, _ = train_gan(data01, cfg, normalization=norm)
        ks_ok = 0
        ball_ok = 0
        for s in range(1, 4):
            gen = generate_pixels(model, 100, seed=derive_seed(master, f"generate:{s}"))
            ks_ok += sum(
                ks_two_sample(orig[:, b], gen[:, b]).p_value > 0.05 for b in range(6)
            )
            ball_ok += (
                ball_divergence_test(
                    orig, gen, permutations=999, seed=derive_seed(master, f"ball:{s}")
                ).p_value
                > 0.05
            )
        ok = ks_ok / 18 >= 0.9 and ball_ok == 3
        passes += ok
        detail.append(f"{ks_ok}/{ball_ok}")
    print(f"{tag}: pass {passes}/{seeds}  [{' '.join(detail)}]  {time.time()-t0:.0f}s", flush=True)


if __name__ == "__main__":
    which = sys.argv[1] if len(sys.argv) > 1 else "all"
    if which in ("all", "1"):
        run("A it6000 glr.02 eps2.5", 6000, 0.1, 0.02, 2, 32, 2.5)
        run("B it6000 glr.02 eps4.0", 6000, 0.1, 0.02, 2, 32, 4.0)
    if which in ("all", "2"):
        run("C it10000 glr.02 eps4.0", 10000, 0.1, 0.02, 2, 32, 4.0)
        run("D it6000 glr.03 d3 eps4.0", 6000, 0.1, 0.03, 3, 32, 4.0)
