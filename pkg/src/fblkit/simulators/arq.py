"""Block-level simulation of single-codeword repetition with erasure feedback.

Each attempt of a block is erased with probability eps_e, ends in an
undetected error with probability eps_u, and is decoded correctly otherwise;
an erased block is resent. A macro-trial sends b messages.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError
from .rng import ROLE_ARQ, run_trials, trial_rng
from .types import Estimate, SimConfig, mean_ci


@dataclass(frozen=True)
class ArqEstimates:
    throughput: Estimate          # useful bits per channel use
    undetected_rate: Estimate     # fraction of messages ending in an undetected error
    coverage: Estimate | None     # fraction of macro-trials inside the Hoeffding interval
    interval: tuple[float, float] | None  # non-erased fraction of the first b slots
    confidence: float | None
    trials_used: int

    def to_dict(self) -> dict:
        out = {"throughput": self.throughput.to_dict(), "undetected_rate": self.undetected_rate.to_dict()}
        if self.coverage is not None:
            out["coverage"] = self.coverage.to_dict()
            out["interval"] = list(self.interval)
            out["confidence"] = self.confidence
        return out


def simulate_arq(rate_bits_per_use: float, eps_e: float, eps_u: float, b: int, cfg: SimConfig,
                 delta: float | None = None) -> ArqEstimates:
    """Throughput = rate * (correct messages) / (attempts), averaged over macro-trials.

    With ``delta``, also reports how often the number of non-erased slots among
    the first b channel blocks lands in b (1 - eps_e -/+ delta), the event the
    Hoeffding guarantee 1 - 2 exp(-b delta^2) speaks about.
    """
    if not (0.0 <= eps_e < 1.0 and 0.0 <= eps_u and eps_e + eps_u <= 1.0):
        raise ArgumentError(f"need 0 <= eps_e < 1, eps_u >= 0, eps_e + eps_u <= 1; got {eps_e}, {eps_u}")
    if int(b) != b or b < 1:
        raise ArgumentError(f"b must be a positive integer, got {b}")
    if not rate_bits_per_use >= 0:
        raise ArgumentError(f"rate must be >= 0, got {rate_bits_per_use}")
    if delta is not None and not delta > 0:
        raise ArgumentError(f"delta must be positive, got {delta}")
    p_wrong = eps_u / (1.0 - eps_e)
    lo = hi = None
    if delta is not None:
        lo, hi = b * (1.0 - eps_e - delta), b * (1.0 - eps_e + delta)

    def one(t):
        rng = trial_rng(cfg.seed, t, ROLE_ARQ)
        attempts = rng.geometric(1.0 - eps_e, size=b) if eps_e > 0 else np.ones(b, dtype=np.int64)
        wrong = rng.random(b) < p_wrong
        good = b - int(wrong.sum())
        through = rate_bits_per_use * good / float(attempts.sum())
        inside = math.nan
        if delta is not None:
            # slot k is non-erased exactly when it ends some message's attempts
            landed = int((np.cumsum(attempts) <= b).sum())
            inside = float(lo <= landed <= hi)
        return through, (b - good) / b, inside

    res = run_trials(one, cfg.trials, cfg.threads, width=3)
    thr = res[:, 0]
    t = cfg.trials
    throughput = Estimate(math.fsum(thr) / t, 1.96 * float(thr.std(ddof=1)) / math.sqrt(t) if t > 1 else math.inf)
    undetected = Estimate(float(res[:, 1].mean()), mean_ci(res[:, 1]))
    coverage = None
    conf = None
    if delta is not None:
        cov = res[:, 2]
        coverage = Estimate(float(cov.mean()), mean_ci(cov))
        conf = max(1.0 - 2.0 * math.exp(-b * delta * delta), 0.0)
    return ArqEstimates(throughput, undetected, coverage,
                        None if lo is None else (1.0 - eps_e - delta, 1.0 - eps_e + delta), conf, t)
