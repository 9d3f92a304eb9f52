"""
What does a low-frequency block-DCT perturbation look like?

The attacks in this package never touch pixels directly: they move a
small set of low-frequency DCT coefficients per block and let the
inverse transform spread that energy smoothly across each block. This
script walks through the parameterization on a tiny image.
"""

import numpy as np

import freqattack as fa

rng = np.random.default_rng(0)

# A single 16x16 view, tiled into 8x8 blocks per color channel.
image = rng.random((1, 16, 16, 3))
n, s = 8, 3
basis = fa.dct_matrix(n)
grid = fa.partition_blocks(image, n)
print(f"{grid.block_count} blocks of {n}x{n} "
      f"({grid.block_count * s * s} low-frequency coefficients vs "
      f"{image.size} pixels)")

# The forward transform is orthonormal: energy is preserved exactly.
coeffs = fa.block_dct(grid, basis)
print("Frobenius norm, spatial vs frequency:",
      np.linalg.norm(grid.blocks), np.linalg.norm(coeffs.blocks))

# Perturb only the top-left s x s coefficients of every block and
# invert. The result differs from the original by a smooth pattern.
delta = rng.normal(0, 0.05, (grid.block_count, s, s))
perturbed = fa.assemble_blocks(fa.perturbed_idct(coeffs, delta, s, basis))
diff = perturbed - image
print("max |perturbation|:", np.abs(diff).max())

# Because the map is linear, the same perturbation can be produced
# without ever transforming the image: pad the coefficients with zeros
# and apply the inverse basis.
direct = fa.assemble_blocks(fa.freq_grad_to_spatial(delta, basis, grid))
print("linearity check (should be ~1e-16):",
      np.abs(perturbed - (image + direct)).max())

# High-frequency content of the perturbation is identically zero: its
# DCT has support only in the top-left s x s corner of each block.
back = fa.block_dct(fa.partition_blocks(direct, n), basis).blocks
print("energy outside the low-frequency corner:",
      np.abs(back[:, s:, s:]).max())
