"""Gradient-free black-box attack: block-wise diagonal CMA-ES over
low-frequency DCT coefficients, with a single global step size, evolution
paths, and rank-1 / rank-mu diagonal covariance updates.

The optimizer core (cma_init / cma_sample / cma_update / cma_maximize) is
dimension-agnostic: state lives on (n_blocks, dim) arrays and only the
concatenated global norm couples blocks. The attack wires it to a victim
through a perturbation parameterization.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ConfigError, RankCountError
from ..images import clamp_pixels, linf_project, validate_image_set
from ..losses import LossConfig, adv_loss
from ..victims import QueryLedger
from .param import make_param
from .report import AttackReport
from .rng import CounterRng

V_FLOOR = 1e-20
HSIG_THRESHOLD_BASE = 1.4


@dataclass
class CmaConfig:
    population: int = 40
    sigma_init: float = 1.0
    n: int = 8
    s: int = 3
    epsilon: float = 8 / 255
    iters: int = 100
    loss: LossConfig = field(default_factory=LossConfig)
    seed: int = 0
    keep_best: bool = True
    use_dct: bool = True

    def __post_init__(self):
        if self.population < 4 or self.population % 2:
            raise ConfigError(f"population must be even and >= 4, got {self.population}")
        if self.sigma_init <= 0:
            raise ConfigError(f"sigma_init must be > 0, got {self.sigma_init}")
        if self.epsilon < 0:
            raise ConfigError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.iters < 1:
            raise ConfigError(f"need at least 1 iteration, got {self.iters}")
        if not 1 <= self.s <= self.n:
            raise ConfigError(f"need 1 <= s <= n, got s={self.s}, n={self.n}")


@dataclass
class CmaState:
    a: np.ndarray        # (n_blocks, dim) means
    v: np.ndarray        # (n_blocks, dim) diagonal covariance
    p_c: np.ndarray      # (n_blocks, dim) covariance path
    p_s: np.ndarray      # (n_blocks, dim) conjugate (step-size) path
    sigma: float
    generation: int
    population: int
    mu: int
    weights: np.ndarray  # (mu,) positive, decreasing, sum 1
    mu_eff: float
    c_c: float
    c_s: float
    c_1: float
    c_mu: float
    d_sigma: float
    chi_n: float
    d_total: int


def cma_init(n_blocks, dim, population, sigma_init):
    """Initial state plus all derived strategy constants."""
    if n_blocks < 1 or dim < 1:
        raise ConfigError(f"invalid search shape ({n_blocks}, {dim})")
    if population < 4 or population % 2:
        raise ConfigError(f"population must be even and >= 4, got {population}")
    mu = population // 2
    d_total = n_blocks * dim
    w = np.log(mu + 0.5) - np.log(np.arange(mu) + 1.0)
    w /= w.sum()
    mu_eff = 1.0 / np.sum(w ** 2)
    c_c = (4.0 + mu_eff / d_total) / (d_total + 4.0 + 2.0 * mu_eff / d_total)
    c_s = (mu_eff + 2.0) / (d_total + mu_eff + 5.0)
    c_1 = 2.0 / ((d_total + 1.3) ** 2 + mu_eff)
    c_mu = min(1.0 - c_1,
               2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((d_total + 2.0) ** 2 + mu_eff))
    d_sigma = 1.0 + 2.0 * max(0.0, np.sqrt((mu_eff - 1.0) / (d_total + 1.0)) - 1.0) + c_s
    chi_n = np.sqrt(d_total) * (1.0 - 1.0 / (4.0 * d_total) + 1.0 / (21.0 * d_total ** 2))
    return CmaState(
        a=np.zeros((n_blocks, dim)),
        v=np.ones((n_blocks, dim)),
        p_c=np.zeros((n_blocks, dim)),
        p_s=np.zeros((n_blocks, dim)),
        sigma=float(sigma_init),
        generation=0,
        population=population,
        mu=mu,
        weights=w,
        mu_eff=float(mu_eff),
        c_c=float(c_c),
        c_s=float(c_s),
        c_1=float(c_1),
        c_mu=float(c_mu),
        d_sigma=float(d_sigma),
        chi_n=float(chi_n),
        d_total=d_total,
    )


def cma_sample(state, rng, iteration=None):
    """Draw the generation's candidates: delta_b = a + sigma sqrt(v) * z_b.
    Returns (deltas, z), both (population, n_blocks, dim)."""
    t = state.generation if iteration is None else iteration
    shape = state.a.shape
    z = np.stack([rng.normal((t, b), shape) for b in range(state.population)])
    deltas = state.a[None] + state.sigma * np.sqrt(state.v)[None] * z
    return deltas, z


def cma_rank(losses):
    """Candidate indices sorted by descending loss, ties broken by
    ascending index."""
    losses = np.asarray(losses, dtype=np.float64)
    return np.argsort(-losses, kind="stable")


def cma_evaluate_and_rank(victim, clean, candidates, cfg, param):
    """Render each candidate perturbation and score it; exactly B queries.
    Returns (ranked indices, losses, candidate images)."""
    losses = np.empty(len(candidates))
    images = []
    for b, delta in enumerate(candidates):
        perturbed = clamp_pixels(
            linf_project(clean + param.to_spatial(delta), clean, cfg.epsilon))
        losses[b] = adv_loss(perturbed, victim.render(perturbed), cfg.loss)
        images.append(perturbed)
    return cma_rank(losses), losses, images


def cma_update(state, selected):
    """One strategy update from the rank-ordered top-mu candidate deltas
    (shape (mu, n_blocks, dim)). Returns the next state."""
    selected = np.asarray(selected, dtype=np.float64)
    if selected.shape != (state.mu,) + state.a.shape:
        raise RankCountError(
            f"expected {(state.mu,) + state.a.shape} selected deltas, got {selected.shape}")
    w = state.weights
    a_old = state.a
    v_old = np.maximum(state.v, V_FLOOR)
    inv_sqrt_v = 1.0 / np.sqrt(v_old)
    sigma = state.sigma

    a_new = np.einsum("b,bjd->jd", w, selected)
    y = (a_new - a_old) / sigma

    c_s, c_c = state.c_s, state.c_c
    p_s = (1.0 - c_s) * state.p_s + np.sqrt(c_s * (2.0 - c_s) * state.mu_eff) * inv_sqrt_v * y
    ps_norm = float(np.linalg.norm(p_s))

    t = state.generation
    correction = np.sqrt(1.0 - (1.0 - c_s) ** (2 * (t + 1)))
    threshold = (HSIG_THRESHOLD_BASE + 2.0 / (state.d_total + 1.0)) * state.chi_n
    h_sig = 1.0 if ps_norm / correction < threshold else 0.0

    p_c = (1.0 - c_c) * state.p_c + h_sig * np.sqrt(c_c * (2.0 - c_c) * state.mu_eff) * y
    sigma_new = sigma * np.exp((c_s / state.d_sigma) * (ps_norm / state.chi_n - 1.0))

    steps = inv_sqrt_v[None] * (selected - a_old[None]) / sigma
    rank_mu = np.einsum("b,bjd->jd", w, steps ** 2)
    v_new = ((1.0 - state.c_1 - state.c_mu) * v_old
             + state.c_1 * (p_c ** 2 + (1.0 - h_sig) * c_c * (2.0 - c_c) * v_old)
             + state.c_mu * rank_mu)
    v_new = np.maximum(v_new, V_FLOOR)

    return replace(state, a=a_new, v=v_new, p_c=p_c, p_s=p_s,
                   sigma=float(sigma_new), generation=t + 1)


def cma_maximize(fitness, n_blocks, dim, population, sigma_init, iters, seed=0):
    """Victim-free optimization hook: maximize fitness(delta) where delta
    has shape (n_blocks, dim). Returns (final mean, best delta seen,
    per-generation best fitness)."""
    state = cma_init(n_blocks, dim, population, sigma_init)
    rng = CounterRng(seed)
    best = state.a.copy()
    best_fit = -np.inf
    history = []
    for _ in range(iters):
        deltas, _ = cma_sample(state, rng)
        fits = np.array([fitness(d) for d in deltas])
        order = cma_rank(fits)
        if fits[order[0]] > best_fit:
            best_fit = float(fits[order[0]])
            best = deltas[order[0]].copy()
        history.append(float(fits[order[0]]))
        state = cma_update(state, deltas[order[:state.mu]])
    return state.a, best, history


def cmaes_attack(victim, clean, cfg):
    """Full gradient-free attack. Query count is exactly iters*population;
    best-candidate tracking reuses ranking losses."""
    clean = clamp_pixels(validate_image_set(clean))
    param = make_param(clean.shape, cfg.n, cfg.s, cfg.use_dct)
    n_blocks, dim = param.shape
    state = cma_init(n_blocks, dim, cfg.population, cfg.sigma_init)
    rng = CounterRng(cfg.seed)
    ledger = QueryLedger()
    victim.ledger = ledger

    best_img = clean
    best_loss = -np.inf
    try:
        for _ in range(cfg.iters):
            deltas, _ = cma_sample(state, rng)
            flat = deltas.reshape(cfg.population, n_blocks, dim)
            order, losses, images = cma_evaluate_and_rank(
                victim, clean, flat, cfg, param)
            top = order[0]
            ledger.record_loss(losses[top])
            if losses[top] > best_loss:
                best_loss = float(losses[top])
                best_img = images[top]
            state = cma_update(state, flat[order[:state.mu]])
    finally:
        victim.ledger = None

    final_mean_img = clamp_pixels(
        linf_project(clean + param.to_spatial(state.a), clean, cfg.epsilon))
    adv = best_img if cfg.keep_best else final_mean_img
    report = AttackReport(
        method="cmaes",
        config={"population": cfg.population, "sigma_init": cfg.sigma_init,
                "n": cfg.n, "s": cfg.s, "epsilon": cfg.epsilon, "iters": cfg.iters,
                "lambda": cfg.loss.lam, "keep_best": cfg.keep_best,
                "use_dct": cfg.use_dct},
        seed=cfg.seed,
        query_count=ledger.query_count,
        loss_trace=list(ledger.loss_trace),
        final_loss=best_loss if cfg.keep_best else None,
    )
    return adv, report
