"""Image sets, block tiling, clamping, L-inf projection, PSNR/SSIM, and I/O.

An image set is a float64 ndarray of shape (N, H, W, 3) with pixel values
in [0, 1]. N views share one resolution. All functions here are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import DimensionError, ShapeMismatch, WindowError

# Rec. 601 luma weights, used for SSIM and the toy splat depth/opacity keys.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def validate_image_set(x, name="images"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 4 or x.shape[3] != 3:
        raise ShapeMismatch(f"{name}: expected shape (N, H, W, 3), got {x.shape}")
    if x.shape[0] < 1:
        raise ShapeMismatch(f"{name}: need at least one view")
    return x


def check_same_shape(a, b):
    a = validate_image_set(a, "a")
    b = validate_image_set(b, "b")
    if a.shape != b.shape:
        raise ShapeMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def luminance(x):
    """Per-pixel luma of an (..., 3) array."""
    return np.asarray(x) @ LUMA_WEIGHTS


@dataclass
class BlockGrid:
    """Per-channel n x n tiles of an image set, in (view, channel, block-row,
    block-col) order.  blocks has shape (J, n, n)."""

    blocks: np.ndarray
    n: int
    n_views: int
    height: int
    width: int

    @property
    def block_count(self):
        return self.blocks.shape[0]

    def block_origin(self, j):
        """Map block index -> (view, channel, row offset, col offset)."""
        n = self.n
        bh, bw = self.height // n, self.width // n
        per_view = 3 * bh * bw
        view, rem = divmod(j, per_view)
        chan, rem = divmod(rem, bh * bw)
        br, bc = divmod(rem, bw)
        return view, chan, br * n, bc * n

    def with_blocks(self, blocks):
        return BlockGrid(np.asarray(blocks, dtype=np.float64), self.n,
                         self.n_views, self.height, self.width)


def partition_blocks(images, n):
    """Tile an image set into per-channel n x n blocks, row-major per channel
    per view. Raises DimensionError unless n divides both H and W."""
    images = validate_image_set(images)
    nv, h, w, _ = images.shape
    if n < 1:
        raise DimensionError(f"block size must be >= 1, got {n}")
    if h % n or w % n:
        raise DimensionError(f"image {h}x{w} not divisible by block size {n}")
    # (N, H, W, 3) -> (N, 3, H/n, W/n, n, n)
    arr = images.reshape(nv, h // n, n, w // n, n, 3)
    arr = arr.transpose(0, 5, 1, 3, 2, 4)
    blocks = np.ascontiguousarray(arr.reshape(-1, n, n))
    return BlockGrid(blocks, n, nv, h, w)


def assemble_blocks(grid):
    """Inverse of partition_blocks; bit-exact round trip."""
    n, nv, h, w = grid.n, grid.n_views, grid.height, grid.width
    arr = grid.blocks.reshape(nv, 3, h // n, w // n, n, n)
    arr = arr.transpose(0, 2, 4, 3, 5, 1)
    return np.ascontiguousarray(arr.reshape(nv, h, w, 3))


def clamp_pixels(images):
    return np.clip(validate_image_set(images), 0.0, 1.0)


def linf_project(adv, clean, epsilon):
    """Clamp adv into the L-inf ball of radius epsilon around clean, then
    into [0, 1]."""
    adv, clean = check_same_shape(adv, clean)
    if epsilon < 0:
        raise ShapeMismatch(f"epsilon must be >= 0, got {epsilon}")
    out = np.clip(adv, clean - epsilon, clean + epsilon)
    return np.clip(out, 0.0, 1.0)


def mse(a, b):
    a, b = check_same_shape(a, b)
    return float(np.mean((a - b) ** 2))


def psnr(a, b):
    """10*log10(1/MSE) with peak 1.0; +inf for identical inputs."""
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return -10.0 * math.log10(err)


def _gaussian_window(size=11, sigma=1.5):
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def _window_matrix(length, size=11):
    """(length-size+1, length) banded matrix applying a 1-D window with
    'valid' boundary handling."""
    g = _gaussian_window(size)
    rows = length - size + 1
    m = np.zeros((rows, length))
    for i in range(rows):
        m[i, i:i + size] = g
    return m


def ssim(a, b, window_size=11, sigma=1.5):
    """Mean single-scale SSIM on luma, 11x11 Gaussian window (sigma 1.5),
    C1=0.01^2, C2=0.03^2, averaged over views."""
    a, b = check_same_shape(a, b)
    _, h, w, _ = a.shape
    if h < window_size or w < window_size:
        raise WindowError(f"image {h}x{w} smaller than {window_size}x{window_size} window")
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    wv = _window_matrix(h, window_size)
    wh = _window_matrix(w, window_size)

    def smooth(x):
        return wv @ x @ wh.T

    vals = []
    for ya, yb in zip(luminance(a), luminance(b)):
        mu_a = smooth(ya)
        mu_b = smooth(yb)
        var_a = smooth(ya * ya) - mu_a ** 2
        var_b = smooth(yb * yb) - mu_b ** 2
        cov = smooth(ya * yb) - mu_a * mu_b
        num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
        den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
        vals.append(np.mean(num / den))
    return float(np.mean(vals))


# ---------------------------------------------------------------------------
# I/O: 8-bit PNG at the boundary, FIMG raw float64 tensors for exactness.

def save_png(path, image):
    """Write one (H, W, 3) view as 8-bit RGB, quantizing round(x*255)."""
    img = np.asarray(image, dtype=np.float64)
    q = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(q, mode="RGB").save(path)


def load_png(path):
    """Read an 8-bit RGB PNG as one (H, W, 3) view, dequantizing v/255."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return arr / 255.0


def save_fimg(path, images):
    """Raw tensor file: header line 'FIMG v1 N H W', then row-major
    view-major little-endian float64 data."""
    images = validate_image_set(images)
    nv, h, w, _ = images.shape
    with open(path, "wb") as f:
        f.write(f"FIMG v1 {nv} {h} {w}\n".encode("ascii"))
        f.write(np.ascontiguousarray(images, dtype="<f8").tobytes())


def load_fimg(path):
    with open(path, "rb") as f:
        header = f.readline().decode("ascii").split()
        if len(header) != 5 or header[0] != "FIMG" or header[1] != "v1":
            raise DimensionError(f"{path}: not a FIMG v1 file")
        nv, h, w = (int(v) for v in header[2:])
        raw = f.read()
    expected = nv * h * w * 3
    if len(raw) != expected * 8:
        raise DimensionError(f"{path}: expected {expected * 8} payload bytes, "
                             f"got {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8")
    return data.reshape(nv, h, w, 3).astype(np.float64)
