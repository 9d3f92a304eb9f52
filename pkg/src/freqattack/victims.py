"""The opaque victim boundary: image set in, re-rendered image set out.

Ships four in-process toys spanning trivial/linear/nonlinear behaviour:
identity, black (constant zero), a differentiable separable Gaussian blur
with a fixed color-mixing matrix, and a black-box miniature 2D splat
renderer with front-to-back alpha compositing.
"""

from __future__ import annotations

import threading

import numpy as np
from scipy.spatial import cKDTree

from .errors import Unsupported, ViewCountMismatch
from .images import check_same_shape, luminance, validate_image_set


class QueryLedger:
    """Counts victim render calls and keeps a (query index, loss) trace."""

    def __init__(self):
        self.query_count = 0
        self.loss_trace = []
        self._lock = threading.Lock()

    def bump(self):
        with self._lock:
            self.query_count += 1

    def record_loss(self, loss):
        self.loss_trace.append((self.query_count, float(loss)))


class Victim:
    """Base victim. Subclasses implement _render (and _render_grad when
    differentiable). Rendering increments the attached QueryLedger."""

    name = "victim"
    differentiable = False
    thread_safe = True
    expected_views = None  # None = any view count

    def __init__(self):
        self.ledger = None

    def check_views(self, images):
        images = validate_image_set(images)
        if self.expected_views is not None and images.shape[0] != self.expected_views:
            raise ViewCountMismatch(
                f"{self.name} expects {self.expected_views} views, got {images.shape[0]}")
        return images

    def render(self, images):
        images = self.check_views(images)
        out = self._render(images)
        if self.ledger is not None:
            self.ledger.bump()
        return out

    def render_grad(self, images, upstream):
        if not self.differentiable:
            raise Unsupported(f"{self.name} does not expose gradients")
        images, upstream = check_same_shape(images, upstream)
        images = self.check_views(images)
        return self._render_grad(images, upstream)

    def _render(self, images):
        raise NotImplementedError

    def _render_grad(self, images, upstream):
        raise NotImplementedError


class IdentityVictim(Victim):
    name = "identity"
    differentiable = True

    def _render(self, images):
        return images.copy()

    def _render_grad(self, images, upstream):
        return upstream.copy()


class BlackVictim(Victim):
    name = "black"
    differentiable = True

    def _render(self, images):
        return np.zeros_like(images)

    def _render_grad(self, images, upstream):
        return np.zeros_like(upstream)


# Fixed, well-conditioned color-mixing matrix applied after the blur.
COLOR_MIX = np.array([
    [0.84, 0.08, 0.08],
    [0.08, 0.84, 0.08],
    [0.08, 0.08, 0.84],
])

BLUR_KERNEL_SIZE = 5
BLUR_SIGMA = 1.0


def _blur_kernel():
    x = np.arange(BLUR_KERNEL_SIZE) - (BLUR_KERNEL_SIZE - 1) / 2.0
    k = np.exp(-(x ** 2) / (2.0 * BLUR_SIGMA ** 2))
    return k / k.sum()


def _reflect_index(i, length):
    # numpy-style reflect (no edge repetition)
    if i < 0:
        i = -i
    if i >= length:
        i = 2 * length - 2 - i
    return i


def blur_matrix(length):
    """(length, length) matrix applying the 1-D blur kernel with reflect
    boundary handling. Explicit so the VJP is an exact transpose."""
    k = _blur_kernel()
    half = BLUR_KERNEL_SIZE // 2
    m = np.zeros((length, length))
    for i in range(length):
        for o in range(-half, half + 1):
            m[i, _reflect_index(i + o, length)] += k[o + half]
    return m


class BlurVictim(Victim):
    """Separable Gaussian blur (kernel 5, sigma 1.0, reflect padding)
    followed by a fixed 3x3 color mix. Fully differentiable."""

    name = "blur"
    differentiable = True

    def __init__(self):
        super().__init__()
        self._mats = {}

    def _mat(self, length):
        if length not in self._mats:
            self._mats[length] = blur_matrix(length)
        return self._mats[length]

    def _render(self, images):
        _, h, w, _ = images.shape
        bv, bh = self._mat(h), self._mat(w)
        out = np.einsum("ab,nbwc->nawc", bv, images)
        out = np.einsum("de,naec->nadc", bh, out)
        return out @ COLOR_MIX.T

    def _render_grad(self, images, upstream):
        _, h, w, _ = images.shape
        bv, bh = self._mat(h), self._mat(w)
        g = upstream @ COLOR_MIX
        g = np.einsum("ab,nbwc->nawc", bv.T, g)
        g = np.einsum("de,naec->nadc", bh.T, g)
        return g


DEFAULT_VIEW_TRANSFORMS = (
    np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
    np.array([[1.05, 0.0, 2.0], [0.0, 1.05, 1.0]]),
)

SPLAT_RADIUS = 1.0
SPLAT_OPACITY_SLOPE = 4.0
SPLAT_OPACITY_LO = 0.05
SPLAT_OPACITY_SPAN = 0.90
SPLAT_CULL_FACTOR = 3.0


def splat_opacity(lum):
    """Logistic in luminance, scaled into (0.05, 0.95)."""
    return SPLAT_OPACITY_LO + SPLAT_OPACITY_SPAN / (
        1.0 + np.exp(-SPLAT_OPACITY_SLOPE * (lum - 0.5)))


class ToySplatVictim(Victim):
    """Miniature 2D Gaussian-splat renderer (black box).

    Every pixel of view 1 becomes an isotropic splat (position = pixel
    center, fixed radius, opacity and depth key from luminance, color =
    pixel RGB). Each output view maps splat centers through its affine
    2x3 transform and composites front-to-back in ascending depth with
    per-splat effective alpha alpha * exp(-d^2 / (2 r^2)), culling splats
    farther than 3 r from the pixel center. Background is black.
    """

    name = "toysplat"
    differentiable = False

    def __init__(self, view_transforms=DEFAULT_VIEW_TRANSFORMS, radius=SPLAT_RADIUS,
                 cull=True):
        super().__init__()
        self.transforms = [np.asarray(t, dtype=np.float64) for t in view_transforms]
        for t in self.transforms:
            if t.shape != (2, 3):
                raise ViewCountMismatch(f"view transforms must be 2x3, got {t.shape}")
        self.expected_views = len(self.transforms)
        self.radius = float(radius)
        self.cull = cull
        self._geometry = {}

    def _geom(self, h, w):
        """Per-view sparse (pixel, splat) adjacency with Gaussian falloff
        weights. Depends only on resolution, so cached."""
        key = (h, w)
        if key in self._geometry:
            return self._geometry[key]
        ys, xs = np.mgrid[0:h, 0:w]
        centers = np.stack([xs.ravel() + 0.5, ys.ravel() + 0.5], axis=1)  # (P, 2)
        views = []
        for t in self.transforms:
            pos = centers @ t[:, :2].T + t[:, 2]
            if self.cull:
                tree = cKDTree(pos)
                neighbors = tree.query_ball_point(centers, SPLAT_CULL_FACTOR * self.radius)
                counts = np.fromiter((len(nb) for nb in neighbors), dtype=np.int64,
                                     count=len(neighbors))
                pix_idx = np.repeat(np.arange(h * w), counts)
                prim_idx = np.concatenate([np.asarray(nb, dtype=np.int64)
                                           for nb in neighbors]) if counts.sum() else \
                    np.zeros(0, dtype=np.int64)
            else:
                pix_idx = np.repeat(np.arange(h * w), h * w)
                prim_idx = np.tile(np.arange(h * w), h * w)
                counts = np.full(h * w, h * w, dtype=np.int64)
            d2 = np.sum((centers[pix_idx] - pos[prim_idx]) ** 2, axis=1)
            weight = np.exp(-d2 / (2.0 * self.radius ** 2))
            views.append((pix_idx, prim_idx, weight))
        self._geometry[key] = views
        return views

    def _render(self, images):
        nv, h, w, _ = images.shape
        pixels = images[0].reshape(-1, 3)  # splats come from view 1
        lum = luminance(pixels)
        alpha = splat_opacity(lum)
        # global front-to-back order: ascending depth key, ties by index
        order = np.argsort(lum, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)

        out = np.zeros_like(images)
        for v, (pix_idx, prim_idx, weight) in enumerate(self._geom(h, w)):
            if pix_idx.size == 0:
                continue
            sort_key = pix_idx * np.int64(h * w) + rank[prim_idx]
            perm = np.argsort(sort_key, kind="stable")
            pix = pix_idx[perm]
            prim = prim_idx[perm]
            a_eff = alpha[prim] * weight[perm]
            # exclusive per-pixel transmittance via segmented log-cumsum
            log1m = np.log1p(-a_eff)
            cum = np.concatenate([[0.0], np.cumsum(log1m)[:-1]])
            starts = np.concatenate([[0], np.flatnonzero(np.diff(pix)) + 1])
            seg_of = np.repeat(starts, np.diff(np.concatenate([starts, [pix.size]])))
            trans = np.exp(cum - cum[seg_of])
            contrib = trans * a_eff
            view = np.zeros((h * w, 3))
            for ch in range(3):
                view[:, ch] = np.bincount(pix, weights=contrib * pixels[prim, ch],
                                          minlength=h * w)
            out[v] = np.clip(view, 0.0, 1.0).reshape(h, w, 3)
        return out


def toy_splat_render(inputs, view_transforms, radius=SPLAT_RADIUS, cull=True):
    """Functional wrapper around ToySplatVictim for one-off renders."""
    victim = ToySplatVictim(view_transforms, radius=radius, cull=cull)
    return victim.render(inputs)


def make_victim(name):
    """Victim registry used by the harness ('identity', 'black', 'blur',
    'toysplat')."""
    registry = {
        "identity": IdentityVictim,
        "black": BlackVictim,
        "blur": BlurVictim,
        "toysplat": ToySplatVictim,
    }
    if name not in registry:
        raise ViewCountMismatch(f"unknown victim {name!r}")
    return registry[name]()
