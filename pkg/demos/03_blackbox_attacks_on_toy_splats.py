"""
Query-budgeted black-box attacks on the miniature splat renderer.

The toy splat victim turns view 1 into a field of 2-D Gaussian splats
(depth and opacity keyed to luminance) and re-renders every view by
front-to-back alpha compositing. It exposes no gradients, so we attack
it with NES gradient estimation and with a block-diagonal evolution
strategy, both sampling in the low-frequency DCT domain.

A near-iso-luminant scene is the interesting target: tiny pixel changes
can flip splat depth order, so an L-inf budget of 8/255 buys real
damage in the rendered output.
"""

import numpy as np
from scipy import ndimage

import freqattack as fa

EPS = 8 / 255


def tile_scene(h=32, w=32, seed=0, tile=8, smooth=1.0):
    # two hues with nearly equal luminance, mixed by a smoothed tile mask
    rng = np.random.default_rng(seed)
    c1 = np.array([0.80, 0.35, 0.30])
    c2 = np.array([0.20, 0.65, 0.30])
    pick = rng.integers(0, 2, (h // tile, w // tile)).astype(float)
    m = ndimage.gaussian_filter(np.kron(pick, np.ones((tile, tile))),
                                smooth, mode="nearest")
    img = m[..., None] * c1 + (1 - m[..., None]) * c2
    return np.clip(img + rng.normal(0, 0.004, (h, w, 1)), 0, 1)[None].repeat(2, 0)


victim = fa.ToySplatVictim()

# Push the scene through the renderer a few times so the clean input is
# a near-fixed-point: the clean self-render loss becomes tiny and any
# attack-induced damage stands out.
clean = tile_scene()
for _ in range(3):
    clean = victim.render(clean)

clean_render = victim.render(clean)
clean_loss = fa.adv_loss(clean, clean_render, fa.LossConfig())
base_psnr = fa.psnr(clean_render, clean)
print(f"clean loss {clean_loss:.6f}, clean rendered PSNR {base_psnr:.2f} dB")

# Both attacks get the same ~4000-query budget.
nes_cfg = fa.NesConfig(samples=40, sigma=0.1, n=16, s=3, epsilon=EPS,
                       iters=49, seed=1)
cma_cfg = fa.CmaConfig(population=40, n=16, s=3, epsilon=EPS,
                       iters=100, seed=1)

for name, run in (("NES", lambda: fa.nes_pgd_attack(victim, clean, nes_cfg)),
                  ("CMA-ES", lambda: fa.cmaes_attack(victim, clean, cma_cfg))):
    adv, report = run()
    drop = base_psnr - fa.psnr(victim.render(adv), clean)
    print(f"{name:7s}: {report.query_count} queries, "
          f"loss x{report.final_loss / clean_loss:.2f}, "
          f"rendered PSNR drop {drop:.2f} dB, "
          f"input PSNR {fa.psnr(adv, clean):.2f} dB")
