"""Slepian-Wolf coding by random binning with an empirical-conditional-entropy decoder.

The decoder looks in the bin of x for the unique sequence with H_hat(. | y) <= gamma.
Given (x, y), only the number N of other qualifying sequences matters: with
M uniform independent bins, K ~ Binomial(N, 1/M) of them share x's bin.
  x qualifies:     correct iff K = 0, otherwise erasure (not unique).
  x fails:         undetected iff K = 1, otherwise erasure.
Each trial contributes these conditional probabilities exactly; only (x, y) is sampled.
Once M >= |X|^n every sequence gets its own bin, so K = 0 always.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .._numeric import log2_one_minus_exp2
from ..asymptotics import gaussian_quantile
from ..dmc_core import JointPmf, SourceStats
from ..errors import ArgumentError
from ..mtypes import THRESHOLD_SLACK, TypeClassSpec, conditional_type_count_log2
from .rng import ROLE_SOURCE, run_trials, trial_rng
from .types import ErrorEstimates, SimConfig, mean_ci


def sw_design(src: SourceStats, x_size: int, y_size: int, n: int, eps_t: float) -> tuple[float, float]:
    """gamma = H(X|Y) + sqrt(V(X|Y)/n) Phi^-1(1 - eps_t); log2 M = n R_n rounded up to whole bins,
    R_n = gamma + (|X||Y| + 1/2) log2(n+1) / n."""
    if not 0.0 < eps_t < 1.0:
        raise ArgumentError(f"eps_t must lie in (0, 1), got {eps_t}")
    if int(n) != n or n < 1:
        raise ArgumentError(f"blocklength must be a positive integer, got {n}")
    gamma = src.cond_entropy_bits + math.sqrt(src.cond_varentropy_bits2 / n) * gaussian_quantile(1.0 - eps_t)
    raw = n * gamma + (x_size * y_size + 0.5) * math.log2(n + 1)
    if raw <= 0:
        return gamma, 0.0
    if raw > 52:
        return gamma, raw
    return gamma, math.log2(math.ceil(2.0 ** raw - 1e-9))


def binning_probs(log2_n: float, logM: float) -> tuple[float, float]:
    """(P[K = 0], P[K = 1]) for K ~ Binomial(N, 2^-logM), N = 2^log2_n (N = 0 for -inf)."""
    if log2_n == -math.inf:
        return 1.0, 0.0
    if logM <= 0:  # a single bin holds everything
        count = 2.0 ** log2_n
        return 0.0, 1.0 if abs(count - 1.0) < 1e-9 else 0.0
    log1m = log2_one_minus_exp2(-logM) * math.log(2)   # ln(1 - 1/M)
    count = 2.0 ** log2_n
    ln_p0 = count * log1m
    p0 = math.exp(ln_p0)
    ln_p1 = log2_n * math.log(2) - logM * math.log(2) + (count - 1.0) * log1m
    p1 = math.exp(ln_p1)
    return p0, min(p1, 1.0 - p0)


def _log2_minus_one(log2_c: float) -> float:
    """log2(2^c - 1); -inf when the count is one."""
    if log2_c == -math.inf or log2_c <= 1e-12:
        return -math.inf
    if log2_c > 60:
        return log2_c
    return math.log2(2.0 ** log2_c - 1.0)


def simulate_sw(pxy: JointPmf, n: int, logM: float, gamma: float, cfg: SimConfig) -> ErrorEstimates:
    """Error rates of random binning; breakdown splits the threshold miss from bin collisions."""
    if int(n) != n or n < 1:
        raise ArgumentError(f"blocklength must be a positive integer, got {n}")
    if not logM >= 0:
        raise ArgumentError(f"logM must be >= 0, got {logM}")
    xs, ys = pxy.x_size, pxy.y_size
    flat = pxy.matrix.ravel()
    cum = np.cumsum(flat)
    slack = THRESHOLD_SLACK * max(1.0, abs(gamma))
    singleton = logM >= n * math.log2(xs) - 1e-9

    @lru_cache(maxsize=None)
    def count_log2(ytype):
        return conditional_type_count_log2(TypeClassSpec(n, ytype), xs, gamma)

    def one(t):
        rng = trial_rng(cfg.seed, t, ROLE_SOURCE)
        idx = np.minimum(np.searchsorted(cum, rng.random(n), side="right"), flat.size - 1)
        joint = np.bincount(idx, minlength=xs * ys).reshape(xs, ys).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            cj = np.where(joint > 0, joint * np.log2(np.where(joint > 0, joint, 1.0)), 0.0).sum()
            b = joint.sum(axis=0)
            cb = np.where(b > 0, b * np.log2(np.where(b > 0, b, 1.0)), 0.0).sum()
        ece = max((cb - cj) / n, 0.0)
        qualifies = ece <= gamma + slack
        total = count_log2(tuple(int(v) for v in b))
        others = _log2_minus_one(total) if qualifies else total
        p0, p1 = (1.0, 0.0) if singleton else binning_probs(others, logM)
        if qualifies:
            return 0.0, 1.0 - p0, 0.0
        return p1, 1.0 - p1, 1.0

    res = run_trials(one, cfg.trials, cfg.threads, width=3)
    u, e, miss = res[:, 0], res[:, 1], res[:, 2]
    tot = u + e
    return ErrorEstimates(
        eps_u_hat=float(u.mean()),
        eps_e_hat=float(e.mean()),
        eps_t_hat=float(tot.mean()),
        ci_halfwidth={"eps_u": mean_ci(u), "eps_e": mean_ci(e), "eps_t": mean_ci(tot)},
        trials_used=cfg.trials,
        mode=cfg.mode,
        breakdown={"threshold_miss": float(miss.mean()),
                   "collision_erasure": float((e - miss).mean())},
    )


def sw_undetected_bound(n: int, x_size: int, y_size: int, logM: float, gamma: float) -> float:
    """(n+1)^{|X||Y|} 2^{-(logM - n gamma)}: type-counting bound on the undetected rate."""
    lb = x_size * y_size * math.log2(n + 1) - (logM - n * gamma)
    return 2.0 ** min(lb, 1000.0)
