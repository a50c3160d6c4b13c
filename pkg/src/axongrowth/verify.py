"""Self-checks of the gain kernels, reported by the ``kernels`` subcommand."""

from __future__ import annotations

import math

import numpy as np

from .backstepping import build_gain_artifacts, validate_gains
from .linalg import mat_exp
from .model import derive_constants


def series_expm(M, terms=40):
    """Taylor series with scaling and squaring; an oracle independent of the Pade core."""
    M = np.asarray(M, dtype=float)
    nrm = np.abs(M).sum(axis=0).max()
    s = max(0, int(math.ceil(math.log2(nrm / 0.5)))) if nrm > 0 else 0
    A = M / 2.0**s
    term = np.eye(M.shape[0])
    total = term.copy()
    for k in range(1, terms):
        term = term @ A / k
        total = total + term
    for _ in range(s):
        total = total @ total
    return total


def _rel(a, b):
    scale = max(float(np.linalg.norm(b)), 1e-300)
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / scale)


def kernel_report(cfg, n_samples=20, n_random=50, seed=0):
    phys = cfg.physical
    dc = derive_constants(phys)
    art = build_gain_artifacts(cfg.gains, dc, phys)
    checks = {}

    target = dc.H - cfg.gains.eps
    err = _rel(art.phi(0.0), target)
    checks["phi0_equals_H_minus_eps"] = {"value": err, "tol": 1e-12, "passed": err <= 1e-12}

    offsets = np.linspace(-cfg.solver.l_cap, 0.0, n_samples)
    h = 1e-9
    worst = 0.0
    for x in offsets:
        fd = (art.phi(x + h) - art.phi(x - h)) / (2 * h)
        worst = max(worst, _rel(fd, art.phi_prime(x)))
    checks["phi_prime_finite_difference"] = {"value": worst, "tol": 1e-6, "passed": worst <= 1e-6}

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_random):
        M = rng.normal(size=(4, 4))
        M *= rng.uniform(0.0, 10.0) / np.linalg.norm(M, 2)
        worst = max(worst, _rel(mat_exp(M), series_expm(M)))
    checks["mat_exp_vs_series"] = {"value": worst, "tol": 1e-10, "passed": worst <= 1e-10}

    gains = validate_gains(cfg.gains, dc)
    checks["gain_conditions"] = {"value": gains.margin, "tol": 0.0, "passed": gains.hurwitz}

    xs = np.linspace(0.0, phys.l_s, 7)
    return {
        "passed": all(c["passed"] for c in checks.values()),
        "checks": checks,
        "hurwitz": gains.as_dict(),
        "N1": art.N1.tolist(),
        "samples": {
            "x_m": xs.tolist(),
            "phi_neg_x": [art.phi(-x).tolist() for x in xs],
            "p_x": [art.p(x).tolist() for x in xs],
        },
    }
