"""Independent reference implementations used by the unit and acceptance
suites: a plain-float transcription of the diagonal evolution strategy and
a brute-force splat compositor. Deliberately written without reusing the
package's vectorized code paths."""

import math

import numpy as np

from freqattack.victims import SPLAT_CULL_FACTOR, splat_opacity


def scalar_oracle(population, sigma0, fitness, zs_per_gen, generations):
    """One-dimensional diagonal strategy in plain floats; returns
    per-generation (a, v, p_c, p_s, sigma) tuples."""
    mu = population // 2
    d = 1
    w = [math.log(mu + 0.5) - math.log(b + 1.0) for b in range(mu)]
    tot = sum(w)
    w = [x / tot for x in w]
    mu_eff = 1.0 / sum(x * x for x in w)
    c_c = (4.0 + mu_eff / d) / (d + 4.0 + 2.0 * mu_eff / d)
    c_s = (mu_eff + 2.0) / (d + mu_eff + 5.0)
    c_1 = 2.0 / ((d + 1.3) ** 2 + mu_eff)
    c_mu = min(1.0 - c_1,
               2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((d + 2.0) ** 2 + mu_eff))
    d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (d + 1.0)) - 1.0) + c_s
    chi = math.sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d))

    a, v, p_c, p_s, sigma = 0.0, 1.0, 0.0, 0.0, sigma0
    out = []
    for t in range(generations):
        zs = zs_per_gen[t]
        deltas = [a + sigma * math.sqrt(v) * z for z in zs]
        order = sorted(range(population),
                       key=lambda b: (-fitness(deltas[b]), b))
        sel = [deltas[order[i]] for i in range(mu)]
        v_old = max(v, 1e-20)
        a_new = sum(wi * di for wi, di in zip(w, sel))
        y = (a_new - a) / sigma
        p_s = (1.0 - c_s) * p_s + math.sqrt(c_s * (2.0 - c_s) * mu_eff) * y / math.sqrt(v_old)
        corr = math.sqrt(1.0 - (1.0 - c_s) ** (2 * (t + 1)))
        h_sig = 1.0 if abs(p_s) / corr < (1.4 + 2.0 / (d + 1.0)) * chi else 0.0
        p_c = (1.0 - c_c) * p_c + h_sig * math.sqrt(c_c * (2.0 - c_c) * mu_eff) * y
        sigma_new = sigma * math.exp((c_s / d_sigma) * (abs(p_s) / chi - 1.0))
        rank_mu = sum(wi * ((di - a) / (sigma * math.sqrt(v_old))) ** 2
                      for wi, di in zip(w, sel))
        v = max((1.0 - c_1 - c_mu) * v_old
                + c_1 * (p_c ** 2 + (1.0 - h_sig) * c_c * (2.0 - c_c) * v_old)
                + c_mu * rank_mu, 1e-20)
        a, sigma = a_new, sigma_new
        out.append((a, v, p_c, p_s, sigma))
    return out


def brute_force_splat_render(images, transforms, radius=1.0, cull=True):
    """Slow reference compositor: explicit per-pixel front-to-back loop."""
    nv, h, w, _ = images.shape
    pixels = images[0].reshape(-1, 3)
    lum = pixels @ np.array([0.299, 0.587, 0.114])
    alpha = splat_opacity(lum)
    order = np.argsort(lum, kind="stable")
    ys, xs = np.mgrid[0:h, 0:w]
    centers = np.stack([xs.ravel() + 0.5, ys.ravel() + 0.5], axis=1)
    out = np.zeros_like(images)
    for v, t in enumerate(transforms):
        t = np.asarray(t, dtype=float)
        pos = centers @ t[:, :2].T + t[:, 2]
        for p in range(h * w):
            color = np.zeros(3)
            trans = 1.0
            for prim in order:  # ascending depth, ties by index
                d2 = np.sum((centers[p] - pos[prim]) ** 2)
                if cull and d2 > (SPLAT_CULL_FACTOR * radius) ** 2:
                    continue
                a = alpha[prim] * np.exp(-d2 / (2 * radius ** 2))
                color += trans * a * pixels[prim]
                trans *= 1.0 - a
            out[v].reshape(-1, 3)[p] = np.clip(color, 0, 1)
    return out
