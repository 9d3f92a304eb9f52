import os
import sys

import numpy as np
from scipy import ndimage

sys.path.insert(0, os.path.dirname(__file__))

import freqattack as fa  # noqa: E402


def tile_scene(h=32, w=32, seed=0, tile=8, smooth=1.0):
    """Two iso-luminant hues mixed by a smoothed random tile mask, with a
    tiny luminance dither. Near-equal luminance makes splat depth-order
    flips cheap under a small L-inf budget."""
    rng = np.random.default_rng(seed)
    c1 = np.array([0.80, 0.35, 0.30])
    c2 = np.array([0.20, 0.65, 0.30])
    pick = rng.integers(0, 2, (h // tile, w // tile)).astype(float)
    m = ndimage.gaussian_filter(np.kron(pick, np.ones((tile, tile))),
                                smooth, mode="nearest")
    img = m[..., None] * c1 + (1 - m[..., None]) * c2
    img = np.clip(img + rng.normal(0, 0.004, (h, w, 1)), 0, 1)
    return np.stack([img, img])


def splat_fixture_scene(victim=None, renders=3):
    """The frozen attack benchmark: the tile scene pushed through the splat
    renderer a few times so the clean input is a near-fixed-point of
    rendering (small clean self-render loss, high attack leverage)."""
    victim = victim or fa.ToySplatVictim()
    scene = tile_scene()
    for _ in range(renders):
        scene = victim.render(scene)
    return scene
