"""Perturbation parameterizations shared by the black-box attacks.

Both NES and CMA-ES optimize a coefficient array of shape (J, D) and need
a linear map from coefficients to a spatial perturbation. The frequency
parameterization goes through the low-frequency block DCT; the pixel
parameterization (the no-DCT ablation) is the identity reshape.
"""

from __future__ import annotations

import numpy as np

from ..dct import dct_matrix, freq_grad_to_spatial
from ..errors import ConfigError
from ..images import assemble_blocks, partition_blocks


class DctParam:
    """Coefficients are the top-left s x s DCT entries of every per-channel
    n x n block; the spatial map is C^T pad(coef) C per block."""

    def __init__(self, n, s, clean_shape):
        if not 1 <= s <= n:
            raise ConfigError(f"need 1 <= s <= n, got s={s}, n={n}")
        nv, h, w, _ = clean_shape
        if h % n or w % n:
            raise ConfigError(f"image {h}x{w} not divisible by block size {n}")
        self.n = n
        self.s = s
        self.basis = dct_matrix(n)
        self._template = partition_blocks(np.zeros(clean_shape), n)
        self.shape = (self._template.block_count, s * s)

    def to_spatial(self, coef):
        coef = np.asarray(coef).reshape(self.shape[0], self.s, self.s)
        grid = freq_grad_to_spatial(coef, self.basis, self._template)
        return assemble_blocks(grid)


class PixelParam:
    """Full pixel-space coefficients; spatial map is a reshape."""

    def __init__(self, clean_shape):
        self.image_shape = tuple(clean_shape)
        nv, h, w, c = clean_shape
        self.shape = (1, nv * h * w * c)

    def to_spatial(self, coef):
        return np.asarray(coef, dtype=np.float64).reshape(self.image_shape)


def make_param(clean_shape, n, s, use_dct):
    return DctParam(n, s, clean_shape) if use_dct else PixelParam(clean_shape)
