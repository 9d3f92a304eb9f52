"""In-server victims: identity echo and a separable Gaussian blur with a
fixed color-mixing matrix. The blur is written independently (np.pad +
explicit dot products) but computes the same math as its client-side
counterpart: kernel size 5, sigma 1.0, reflect boundary, identical mixing
matrix."""

from __future__ import annotations

import numpy as np

KERNEL_SIZE = 5
SIGMA = 1.0

COLOR_MIX = np.array([
    [0.84, 0.08, 0.08],
    [0.08, 0.84, 0.08],
    [0.08, 0.08, 0.84],
])


def _kernel():
    x = np.arange(KERNEL_SIZE) - (KERNEL_SIZE - 1) / 2.0
    k = np.exp(-(x ** 2) / (2.0 * SIGMA ** 2))
    return k / k.sum()


def identity_render(images):
    return np.array(images, dtype=np.float64)


def blur_render(images):
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 4 or images.shape[3] != 3:
        raise ValueError(f"expected (N, H, W, 3), got {images.shape}")
    k = _kernel()
    half = KERNEL_SIZE // 2
    # reflect padding without edge repetition, then explicit 1-D passes
    padded = np.pad(images, ((0, 0), (half, half), (0, 0), (0, 0)),
                    mode="reflect")
    rows = sum(k[o] * padded[:, o:o + images.shape[1]] for o in range(KERNEL_SIZE))
    padded = np.pad(rows, ((0, 0), (0, 0), (half, half), (0, 0)),
                    mode="reflect")
    cols = sum(k[o] * padded[:, :, o:o + images.shape[2]] for o in range(KERNEL_SIZE))
    return cols @ COLOR_MIX.T


VICTIMS = {
    "identity": identity_render,
    "blur": blur_render,
}
