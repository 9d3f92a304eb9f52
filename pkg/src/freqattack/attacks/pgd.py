"""White-box sign-gradient ascent with L-inf projection.

Maximizes adv_loss(I, render(I)) by differentiating through both loss
arguments: the direct term plus the vector-Jacobian product through the
victim.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, Unsupported
from ..images import clamp_pixels, linf_project, validate_image_set
from ..losses import LossConfig, adv_loss, adv_loss_grad
from ..victims import QueryLedger
from .report import AttackReport


def check_budget(epsilon, eta, iters):
    if epsilon < 0:
        raise ConfigError(f"epsilon must be >= 0, got {epsilon}")
    if eta <= 0:
        raise ConfigError(f"step size must be > 0, got {eta}")
    if epsilon > 0 and eta > epsilon:
        raise ConfigError(f"step size {eta} exceeds budget {epsilon}")
    if iters < 1:
        raise ConfigError(f"need at least 1 iteration, got {iters}")


@dataclass
class PgdConfig:
    epsilon: float = 8 / 255
    eta: float = 2 / 255
    iters: int = 50
    loss: LossConfig = field(default_factory=LossConfig)
    keep_best: bool = True

    def __post_init__(self):
        check_budget(self.epsilon, self.eta, self.iters)


def _total_grad(victim, images, cfg_loss):
    """(loss, d adv_loss(I, render(I)) / dI); one victim query."""
    rendered = victim.render(images)
    loss = adv_loss(images, rendered, cfg_loss)
    g_ref, g_ren = adv_loss_grad(images, rendered, cfg_loss)
    return loss, g_ref + victim.render_grad(images, g_ren)


def pgd_attack(victim, clean, cfg):
    """Returns (adversarial image set, AttackReport)."""
    if not victim.differentiable:
        raise Unsupported(f"{victim.name} is not differentiable")
    clean = clamp_pixels(validate_image_set(clean))
    ledger = QueryLedger()
    victim.ledger = ledger

    current = clean.copy()
    best = current
    best_loss = -np.inf
    try:
        for _ in range(cfg.iters):
            loss, grad = _total_grad(victim, current, cfg.loss)
            ledger.record_loss(loss)
            if loss > best_loss:
                best, best_loss = current, loss
            step = current + cfg.eta * np.sign(grad)
            current = linf_project(step, clean, cfg.epsilon)
        # score the final iterate too; the loop only scored its predecessors
        final_loss = adv_loss(current, victim.render(current), cfg.loss)
        ledger.record_loss(final_loss)
        if final_loss > best_loss:
            best, best_loss = current, final_loss
    finally:
        victim.ledger = None

    adv = best if cfg.keep_best else current
    final = best_loss if cfg.keep_best else final_loss
    report = AttackReport(
        method="whitebox-pgd",
        config={"epsilon": cfg.epsilon, "eta": cfg.eta, "iters": cfg.iters,
                "lambda": cfg.loss.lam, "keep_best": cfg.keep_best},
        seed=None,
        query_count=ledger.query_count,
        loss_trace=list(ledger.loss_trace),
        final_loss=final,
    )
    return adv, report
