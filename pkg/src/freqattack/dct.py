"""Orthonormal block DCT-II, low-frequency sub-block editing, and the
zero-pad map from low-frequency gradients back to spatial blocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class DctBasis:
    """n x n orthonormal DCT-II matrix. Row k holds frequency k; row 0 is
    the constant DC row sqrt(1/n)."""

    n: int
    C: np.ndarray


def dct_matrix(n):
    """C[k, i] = gamma(k) * cos(pi/n * (i + 1/2) * k), gamma(0)=sqrt(1/n),
    gamma(k>=1)=sqrt(2/n)."""
    if n < 1:
        raise DimensionError(f"block size must be >= 1, got {n}")
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    gamma = np.full(n, np.sqrt(2.0 / n))
    gamma[0] = np.sqrt(1.0 / n)
    c = gamma[:, None] * np.cos(np.pi / n * (i + 0.5) * k)
    return DctBasis(n, c)


def _check_basis(blocks, basis):
    if blocks.shape[-2:] != (basis.n, basis.n):
        raise DimensionError(
            f"blocks are {blocks.shape[-2]}x{blocks.shape[-1]} but basis has n={basis.n}")


def block_dct(grid, basis):
    """Forward transform, F = C X C^T per block. Norm-preserving."""
    _check_basis(grid.blocks, basis)
    coeffs = basis.C @ grid.blocks @ basis.C.T
    return grid.with_blocks(coeffs)


def perturbed_idct(coeffs, delta, s, basis):
    """Inverse transform after adding delta (J, s, s) to each block's
    top-left s x s coefficients. With delta=0 this inverts block_dct."""
    _check_basis(coeffs.blocks, basis)
    n = basis.n
    if s > n or s < 0:
        raise DimensionError(f"low-frequency side {s} must be in [0, n={n}]")
    f = np.array(coeffs.blocks)
    if s > 0:
        delta = np.asarray(delta, dtype=np.float64)
        if delta.shape != (f.shape[0], s, s):
            raise DimensionError(
                f"delta shape {delta.shape} != ({f.shape[0]}, {s}, {s})")
        f[:, :s, :s] += delta
    out = basis.C.T @ f @ basis.C
    return coeffs.with_blocks(out)


def pad_low_freq(g, n):
    """Zero-pad (..., s, s) low-frequency entries into (..., n, n) blocks."""
    g = np.asarray(g, dtype=np.float64)
    s = g.shape[-1]
    if g.shape[-2] != s:
        raise DimensionError(f"low-frequency blocks must be square, got {g.shape[-2:]}")
    if s > n:
        raise DimensionError(f"low-frequency side {s} exceeds block side {n}")
    out = np.zeros(g.shape[:-2] + (n, n))
    out[..., :s, :s] = g
    return out


def freq_grad_to_spatial(g, basis, like):
    """Map per-block low-frequency gradients (J, s, s) to spatial blocks:
    C^T pad(g) C. `like` supplies the grid geometry."""
    g = np.asarray(g, dtype=np.float64)
    if g.shape[0] != like.block_count:
        raise DimensionError(
            f"got {g.shape[0]} gradient blocks for a {like.block_count}-block grid")
    padded = pad_low_freq(g, basis.n)
    return like.with_blocks(basis.C.T @ padded @ basis.C)
