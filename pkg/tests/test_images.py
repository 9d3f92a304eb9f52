import math

import numpy as np
import pytest

import freqattack as fa


def rand_set(seed=0, n=2, h=16, w=16):
    return np.random.default_rng(seed).random((n, h, w, 3))


class TestValidation:
    def test_rejects_wrong_rank(self):
        with pytest.raises(fa.ShapeMismatch):
            fa.clamp_pixels(np.zeros((4, 4, 3)))

    def test_rejects_wrong_channels(self):
        with pytest.raises(fa.ShapeMismatch):
            fa.clamp_pixels(np.zeros((1, 4, 4, 4)))

    def test_rejects_zero_views(self):
        with pytest.raises(fa.ShapeMismatch):
            fa.clamp_pixels(np.zeros((0, 4, 4, 3)))

    def test_mismatched_shapes(self):
        with pytest.raises(fa.ShapeMismatch):
            fa.mse(np.zeros((1, 4, 4, 3)), np.zeros((1, 8, 8, 3)))


class TestBlocks:
    def test_roundtrip_bit_exact(self):
        x = rand_set(1)
        grid = fa.partition_blocks(x, 4)
        assert np.array_equal(fa.assemble_blocks(grid), x)

    def test_block_count(self):
        grid = fa.partition_blocks(rand_set(2, n=2, h=16, w=24), 8)
        # 2 views * 3 channels * 2 * 3 blocks
        assert grid.block_count == 2 * 3 * (16 // 8) * (24 // 8)

    def test_block_contents_match_slice(self):
        x = rand_set(3, n=1, h=8, w=8)
        grid = fa.partition_blocks(x, 4)
        for j in range(grid.block_count):
            v, c, r0, c0 = grid.block_origin(j)
            expect = x[v, r0:r0 + 4, c0:c0 + 4, c]
            assert np.array_equal(grid.blocks[j], expect)

    def test_indivisible_raises(self):
        with pytest.raises(fa.DimensionError):
            fa.partition_blocks(rand_set(0, h=10, w=16), 8)


class TestProjection:
    def test_linf_project_bounds(self):
        rng = np.random.default_rng(4)
        clean = rng.random((1, 8, 8, 3))
        adv = clean + rng.normal(0, 0.2, clean.shape)
        eps = 8 / 255
        out = fa.linf_project(adv, clean, eps)
        assert np.max(np.abs(out - clean)) <= eps + 1e-15
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_zero_epsilon_returns_clean(self):
        clean = rand_set(5, n=1, h=4, w=4)
        out = fa.linf_project(clean + 0.3, clean, 0.0)
        assert np.allclose(out, np.clip(clean, 0, 1))


class TestMetrics:
    def test_psnr_uniform_eight_over_255(self):
        # uniform |delta| = 8/255 -> PSNR = -20 log10(8/255) = 30.0724 dB
        a = np.full((1, 16, 16, 3), 0.5)
        b = a + 8 / 255
        assert fa.psnr(a, b) == pytest.approx(-20 * math.log10(8 / 255), abs=1e-10)
        assert fa.psnr(a, b) == pytest.approx(30.0690, abs=1e-3)

    def test_psnr_identical_is_inf(self):
        a = rand_set(6)
        assert fa.psnr(a, a) == math.inf

    def test_ssim_self_is_one(self):
        a = rand_set(7)
        assert fa.ssim(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_ssim_matches_direct_convolution_oracle(self):
        # independent oracle: explicit sliding-window loops on luma
        rng = np.random.default_rng(8)
        a = rng.random((1, 14, 14, 3))
        b = np.clip(a + rng.normal(0, 0.05, a.shape), 0, 1)
        size, sigma = 11, 1.5
        x = np.arange(size) - (size - 1) / 2
        g1 = np.exp(-x ** 2 / (2 * sigma ** 2))
        g1 /= g1.sum()
        win = np.outer(g1, g1)
        ya = a[0] @ np.array([0.299, 0.587, 0.114])
        yb = b[0] @ np.array([0.299, 0.587, 0.114])
        c1, c2 = 0.01 ** 2, 0.03 ** 2
        vals = []
        for i in range(14 - size + 1):
            for j in range(14 - size + 1):
                pa = ya[i:i + size, j:j + size]
                pb = yb[i:i + size, j:j + size]
                mu_a = np.sum(win * pa)
                mu_b = np.sum(win * pb)
                va = np.sum(win * pa * pa) - mu_a ** 2
                vb = np.sum(win * pb * pb) - mu_b ** 2
                cov = np.sum(win * pa * pb) - mu_a * mu_b
                vals.append(((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                            / ((mu_a ** 2 + mu_b ** 2 + c1) * (va + vb + c2)))
        assert fa.ssim(a, b) == pytest.approx(np.mean(vals), abs=1e-12)

    def test_ssim_too_small_raises(self):
        with pytest.raises(fa.WindowError):
            fa.ssim(rand_set(9, h=8, w=8), rand_set(9, h=8, w=8))

    def test_luminance_weights(self):
        px = np.array([1.0, 0.0, 0.0])
        assert fa.luminance(px) == pytest.approx(0.299)
        assert fa.luminance(np.ones(3)) == pytest.approx(1.0)


class TestIO:
    def test_fimg_roundtrip_bit_exact(self, tmp_path):
        x = rand_set(10)
        p = tmp_path / "x.fimg"
        fa.save_fimg(p, x)
        assert np.array_equal(fa.load_fimg(p), x)

    def test_fimg_bad_header(self, tmp_path):
        p = tmp_path / "bad.fimg"
        p.write_bytes(b"NOPE v1 1 2 2\n" + b"\0" * 96)
        with pytest.raises(fa.DimensionError):
            fa.load_fimg(p)

    def test_fimg_truncated_payload(self, tmp_path):
        p = tmp_path / "short.fimg"
        p.write_bytes(b"FIMG v1 1 2 2\n" + b"\0" * 10)
        with pytest.raises(fa.DimensionError):
            fa.load_fimg(p)

    def test_png_roundtrip_quantized(self, tmp_path):
        x = rand_set(11, n=1)[0]
        p = tmp_path / "x.png"
        fa.save_png(p, x)
        back = fa.load_png(p)
        assert np.max(np.abs(back - x)) <= 0.5 / 255 + 1e-12

    def test_png_exact_on_grid_values(self, tmp_path):
        x = np.round(rand_set(12, n=1)[0] * 255) / 255
        p = tmp_path / "grid.png"
        fa.save_png(p, x)
        assert np.allclose(fa.load_png(p), x, atol=1e-12)
