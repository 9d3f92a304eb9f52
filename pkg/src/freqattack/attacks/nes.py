"""Gradient-based black-box attack: antithetic NES estimation over
low-frequency DCT coefficients, mapped back to a spatial gradient and
consumed by sign-PGD updates.

The no-DCT ablation samples the same antithetic estimator directly in
pixel space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dct import block_dct, dct_matrix, freq_grad_to_spatial, perturbed_idct
from ..errors import ConfigError
from ..images import (assemble_blocks, clamp_pixels, linf_project,
                      partition_blocks, validate_image_set)
from ..losses import LossConfig, adv_loss
from ..victims import QueryLedger
from .pgd import check_budget
from .report import AttackReport
from .rng import CounterRng


@dataclass
class NesConfig:
    samples: int = 40        # M antithetic pairs per iteration
    sigma: float = 0.1       # search deviation in coefficient units
    n: int = 8
    s: int = 3
    epsilon: float = 8 / 255
    eta: float = 2 / 255
    iters: int = 100
    loss: LossConfig = field(default_factory=LossConfig)
    seed: int = 0
    keep_best: bool = True
    use_dct: bool = True

    def __post_init__(self):
        check_budget(self.epsilon, self.eta, self.iters)
        if self.samples < 1:
            raise ConfigError(f"need at least 1 sample, got {self.samples}")
        if self.sigma <= 0:
            raise ConfigError(f"sigma must be > 0, got {self.sigma}")
        if not 1 <= self.s <= self.n:
            raise ConfigError(f"need 1 <= s <= n, got s={self.s}, n={self.n}")


def _probe_loss(victim, probe, cfg):
    return adv_loss(probe, victim.render(probe), cfg.loss)


def nes_gradient(victim, current, basis, cfg, rng, iteration=0):
    """Antithetic NES estimate of the loss gradient at `current`,
    restricted to the low-frequency DCT subspace. Exactly 2M queries."""
    current = validate_image_set(current)
    grid = partition_blocks(current, cfg.n)
    coeffs = block_dct(grid, basis)
    j = grid.block_count
    g = np.zeros((j, cfg.s, cfg.s))
    for m in range(cfg.samples):
        u = rng.normal((iteration, m), (j, cfg.s, cfg.s))
        plus = clamp_pixels(assemble_blocks(
            perturbed_idct(coeffs, cfg.sigma * u, cfg.s, basis)))
        minus = clamp_pixels(assemble_blocks(
            perturbed_idct(coeffs, -cfg.sigma * u, cfg.s, basis)))
        g += (_probe_loss(victim, plus, cfg) - _probe_loss(victim, minus, cfg)) * u
    g /= 2.0 * cfg.samples * cfg.sigma
    return assemble_blocks(freq_grad_to_spatial(g, basis, grid))


def _nes_gradient_pixel(victim, current, cfg, rng, iteration=0):
    """Same estimator with noise sampled directly on pixels."""
    g = np.zeros_like(current)
    for m in range(cfg.samples):
        u = rng.normal((iteration, m), current.shape)
        plus = clamp_pixels(current + cfg.sigma * u)
        minus = clamp_pixels(current - cfg.sigma * u)
        g += (_probe_loss(victim, plus, cfg) - _probe_loss(victim, minus, cfg)) * u
    return g / (2.0 * cfg.samples * cfg.sigma)


def nes_pgd_attack(victim, clean, cfg):
    """Full attack loop: estimate, sign-step, project, clamp; tracks the
    best projected iterate (one extra query per iteration)."""
    clean = clamp_pixels(validate_image_set(clean))
    basis = dct_matrix(cfg.n) if cfg.use_dct else None
    rng = CounterRng(cfg.seed)
    ledger = QueryLedger()
    victim.ledger = ledger

    current = clean.copy()
    best = current
    best_loss = -np.inf
    try:
        for t in range(cfg.iters):
            if cfg.use_dct:
                grad = nes_gradient(victim, current, basis, cfg, rng, iteration=t)
            else:
                grad = _nes_gradient_pixel(victim, current, cfg, rng, iteration=t)
            current = linf_project(current + cfg.eta * np.sign(grad), clean, cfg.epsilon)
            if cfg.keep_best:
                loss = _probe_loss(victim, current, cfg)
                ledger.record_loss(loss)
                if loss > best_loss:
                    best, best_loss = current, loss
    finally:
        victim.ledger = None

    adv = best if cfg.keep_best else current
    report = AttackReport(
        method="nes",
        config={"samples": cfg.samples, "sigma": cfg.sigma, "n": cfg.n, "s": cfg.s,
                "epsilon": cfg.epsilon, "eta": cfg.eta, "iters": cfg.iters,
                "lambda": cfg.loss.lam, "keep_best": cfg.keep_best,
                "use_dct": cfg.use_dct},
        seed=cfg.seed,
        query_count=ledger.query_count,
        loss_trace=list(ledger.loss_trace),
        final_loss=best_loss if cfg.keep_best else None,
    )
    return adv, report
