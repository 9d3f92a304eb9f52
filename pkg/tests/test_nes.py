import numpy as np
import pytest

import freqattack as fa
from freqattack.attacks.nes import _nes_gradient_pixel
from freqattack.attacks.rng import CounterRng


def rand_set(seed=0, h=16, w=16, n=2):
    return np.random.default_rng(seed).random((n, h, w, 3))


def subspace_project(grad, n, s):
    """Project a spatial gradient onto the low-frequency DCT subspace."""
    basis = fa.dct_matrix(n)
    grid = fa.partition_blocks(grad, n)
    coeffs = basis.C @ grid.blocks @ basis.C.T
    low = coeffs[:, :s, :s]
    return fa.assemble_blocks(fa.freq_grad_to_spatial(low, basis, grid))


def analytic_black_grad(x, lam=0.05):
    g_ref, _ = fa.adv_loss_grad(x, np.zeros_like(x), fa.LossConfig(lam=lam))
    return g_ref


def cosine(a, b):
    return float(np.sum(a * b) / (np.linalg.norm(a) * np.linalg.norm(b)))


class TestConfig:
    def test_bad_samples(self):
        with pytest.raises(fa.ConfigError):
            fa.NesConfig(samples=0)

    def test_bad_sigma(self):
        with pytest.raises(fa.ConfigError):
            fa.NesConfig(sigma=0.0)

    def test_bad_subspace(self):
        with pytest.raises(fa.ConfigError):
            fa.NesConfig(n=4, s=5)


class TestEstimator:
    def test_estimate_lives_in_subspace(self):
        x = rand_set(0)
        cfg = fa.NesConfig(samples=4, iters=1)
        basis = fa.dct_matrix(cfg.n)
        g = fa.nes_gradient(fa.BlurVictim(), x, basis, cfg, CounterRng(0))
        assert np.max(np.abs(g - subspace_project(g, cfg.n, cfg.s))) < 1e-10

    def test_antithetic_cancels_on_flat_loss(self):
        # identity victim: loss identically 0, so the estimate is exactly 0
        x = rand_set(1)
        cfg = fa.NesConfig(samples=6, iters=1)
        basis = fa.dct_matrix(cfg.n)
        g = fa.nes_gradient(fa.IdentityVictim(), x, basis, cfg, CounterRng(0))
        assert not np.any(g)

    def test_query_count_two_m(self):
        x = rand_set(2)
        cfg = fa.NesConfig(samples=5, iters=1)
        v = fa.BlurVictim()
        v.ledger = fa.QueryLedger()
        fa.nes_gradient(v, x, fa.dct_matrix(cfg.n), cfg, CounterRng(0))
        assert v.ledger.query_count == 10

    def test_deterministic_given_seed(self):
        x = rand_set(3)
        cfg = fa.NesConfig(samples=4, iters=1, seed=7)
        basis = fa.dct_matrix(cfg.n)
        g1 = fa.nes_gradient(fa.BlurVictim(), x, basis, cfg, CounterRng(7))
        g2 = fa.nes_gradient(fa.BlurVictim(), x, basis, cfg, CounterRng(7))
        assert np.array_equal(g1, g2)

    def test_cosine_matches_dimension_law(self):
        # antithetic smoothing of a near-quadratic loss: E[cos] is about
        # 1/sqrt(1 + d/M) with d the subspace dimension
        x = np.clip(rand_set(4, h=32, w=32, n=1) * 0.5 + 0.25, 0, 1)
        cfg = fa.NesConfig(samples=64, sigma=0.02, iters=1,
                           loss=fa.LossConfig(lam=0.0))
        basis = fa.dct_matrix(cfg.n)
        truth = subspace_project(analytic_black_grad(x, lam=0.0), cfg.n, cfg.s)
        d = 1 * (32 // cfg.n) ** 2 * 3 * cfg.s ** 2
        expect = 1.0 / np.sqrt(1.0 + d / cfg.samples)
        cos = np.mean([
            cosine(fa.nes_gradient(fa.BlackVictim(), x, basis, cfg,
                                   CounterRng(seed)), truth)
            for seed in range(20)])
        assert cos == pytest.approx(expect, abs=0.1)

    def test_cosine_improves_with_more_samples(self):
        x = np.clip(rand_set(5, h=16, w=16, n=1) * 0.5 + 0.25, 0, 1)
        truth = subspace_project(analytic_black_grad(x, lam=0.0), 8, 3)
        basis = fa.dct_matrix(8)
        cos = {}
        for m in (8, 128):
            cfg = fa.NesConfig(samples=m, sigma=0.02, iters=1,
                               loss=fa.LossConfig(lam=0.0))
            cos[m] = np.mean([
                cosine(fa.nes_gradient(fa.BlackVictim(), x, basis, cfg,
                                       CounterRng(seed)), truth)
                for seed in range(10)])
        assert cos[128] > cos[8]

    def test_averaged_estimates_align(self):
        # averaging many independent estimates concentrates the direction
        x = np.clip(rand_set(6, h=16, w=16, n=1) * 0.5 + 0.25, 0, 1)
        truth = subspace_project(analytic_black_grad(x, lam=0.0), 8, 3)
        basis = fa.dct_matrix(8)
        cfg = fa.NesConfig(samples=32, sigma=0.02, iters=1,
                           loss=fa.LossConfig(lam=0.0))
        avg = np.mean([fa.nes_gradient(fa.BlackVictim(), x, basis, cfg,
                                       CounterRng(seed))
                       for seed in range(60)], axis=0)
        assert cosine(avg, truth) > 0.95

    def test_pixel_ablation_full_rank(self):
        x = rand_set(7, h=8, w=8)
        cfg = fa.NesConfig(samples=4, iters=1, use_dct=False)
        g = _nes_gradient_pixel(fa.BlurVictim(), x, cfg, CounterRng(0))
        assert g.shape == x.shape


class TestAttack:
    def test_query_accounting(self):
        cfg = fa.NesConfig(samples=3, iters=4)
        _, report = fa.nes_pgd_attack(fa.BlurVictim(), rand_set(8), cfg)
        assert report.query_count == 4 * (2 * 3 + 1)

    def test_budget_respected(self):
        clean = rand_set(9)
        cfg = fa.NesConfig(samples=2, iters=3, epsilon=8 / 255)
        adv, _ = fa.nes_pgd_attack(fa.ToySplatVictim(), clean, cfg)
        assert np.max(np.abs(adv - clean)) <= 8 / 255 + 1e-12
        assert adv.min() >= 0 and adv.max() <= 1

    def test_deterministic(self):
        clean = rand_set(10)
        cfg = fa.NesConfig(samples=2, iters=3, seed=11)
        a1, r1 = fa.nes_pgd_attack(fa.BlurVictim(), clean, cfg)
        a2, r2 = fa.nes_pgd_attack(fa.BlurVictim(), clean, cfg)
        assert np.array_equal(a1, a2)
        assert r1.loss_trace == r2.loss_trace

    def test_seeds_differ(self):
        clean = rand_set(11)
        a1, _ = fa.nes_pgd_attack(fa.BlurVictim(), clean,
                                  fa.NesConfig(samples=2, iters=2, seed=0))
        a2, _ = fa.nes_pgd_attack(fa.BlurVictim(), clean,
                                  fa.NesConfig(samples=2, iters=2, seed=1))
        assert not np.array_equal(a1, a2)

    def test_keep_best_reports_max_trace_loss(self):
        cfg = fa.NesConfig(samples=2, iters=5)
        _, report = fa.nes_pgd_attack(fa.BlurVictim(), rand_set(12), cfg)
        assert report.final_loss == pytest.approx(
            max(v for _, v in report.loss_trace))

    def test_raises_on_indivisible_input(self):
        with pytest.raises(fa.FreqAttackError):
            fa.nes_pgd_attack(fa.BlurVictim(), rand_set(13, h=10, w=10),
                              fa.NesConfig(samples=2, iters=1, n=8))
