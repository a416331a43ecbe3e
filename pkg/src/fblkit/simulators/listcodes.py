"""List codes: i.i.d. random codebooks with information-density threshold decoding.

The decoder returns every message whose normalized information density with
the output is at least gamma. Errors: the true message misses the list (E1)
or the list is longer than the cap L (E2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._numeric import iid_sum_log2_tail
from ..asymptotics import gaussian_quantile
from ..dmc_core import Channel, Pmf
from ..errors import ArgumentError
from .rng import ROLE_CHANNEL, ROLE_CODEBOOK, run_trials, sample_channel, trial_rng
from .types import CodeParams, Estimate, SimConfig, check_exact_limits, mean_ci, proportion_ci

DENSITY_SLACK = 1e-12


@dataclass(frozen=True)
class ListEstimates:
    p_e1: Estimate
    p_oversize: Estimate
    mean_extra_list: Estimate
    trials_used: int
    mode: str

    def to_dict(self) -> dict:
        return {"p_e1": self.p_e1.to_dict(), "p_oversize": self.p_oversize.to_dict(),
                "mean_extra_list": self.mean_extra_list.to_dict()}


def list_design(v_eps: float, c: float, n: int, eps: float, L: int) -> tuple[float, float]:
    """gamma = C + sqrt(V_eps/n) Phi^-1(eps) and log2 M with M = floor((L-1) 2^{n gamma})."""
    if int(L) != L or L < 2:
        raise ArgumentError(f"the M = floor((L-1) 2^(n gamma)) rule needs L >= 2, got L={L}")
    if not 0.0 < eps < 1.0:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps}")
    if not v_eps >= 0:
        raise ArgumentError(f"dispersion must be >= 0, got {v_eps}")
    gamma = c + math.sqrt(v_eps / n) * gaussian_quantile(eps)
    raw = math.log2(L - 1) + n * gamma
    if raw > 52:
        return gamma, raw
    m = math.floor(2.0 ** raw + 1e-9)
    if m < 1:
        return gamma, 0.0
    return gamma, math.log2(m)


def _density_table(w: Channel, caid: Pmf) -> np.ndarray:
    """log2 W(y|x) / (PW)(y); -inf where W(y|x) = 0, 0 where the output is impossible."""
    q = caid.probs @ w.matrix
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.log2(w.matrix) - np.log2(np.where(q > 0, q, 1.0))[None, :]
    return dens


def pair_log2_tail(w: Channel, caid: Pmf, n: int, gamma: float) -> float:
    """log2 P[i(Xbar; Y) >= n gamma] with Xbar ~ caid^n independent of Y ~ (caid W)^n."""
    q = caid.probs @ w.matrix
    dens = _density_table(w, caid)
    probs = np.outer(caid.probs, q)
    keep = probs > 0
    vals = dens[keep]
    pr = probs[keep]
    # an impossible (x, y) pair never reaches the threshold; a huge negative value keeps it finite
    vals = np.where(np.isfinite(vals), vals, -1e300)
    return iid_sum_log2_tail(vals, pr, n, n * gamma)


def _sample_iid(caid: Pmf, shape, rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(caid.probs)
    u = rng.random(shape)
    return np.minimum(np.searchsorted(cum, u, side="right"), caid.size - 1)


def simulate_list(w: Channel, caid: Pmf, code: CodeParams, gamma: float, cfg: SimConfig) -> ListEstimates:
    """Error events of the threshold list decoder on the i.i.d. random-code ensemble.

    exact_codebook: fresh codebook per trial, empirical P[E1], P[|list| > L] and mean |list minus 1|.
    decomposed: P[E1] by Monte Carlo on the true codeword; E|list minus 1| = (M-1) p_pair
    computed exactly; P[|list| > L] replaced by its Markov bound E|list minus 1| / (L-1).
    """
    if caid.size != w.input_size:
        raise ArgumentError(f"input law has {caid.size} atoms, channel has {w.input_size} inputs")
    dens = _density_table(w, caid)
    n = code.n
    thr = n * gamma
    slack = DENSITY_SLACK * max(1.0, abs(thr))

    if cfg.mode == "exact_codebook":
        check_exact_limits(n, code.logM_bits)
        m = code.M

        def one(t):
            cb = _sample_iid(caid, (m, n), trial_rng(cfg.seed, t, ROLE_CODEBOOK))
            y = sample_channel(w.matrix, cb[0], trial_rng(cfg.seed, t, ROLE_CHANNEL))
            score = dens[cb, y[None, :]].sum(axis=1)
            in_list = score >= thr - slack
            size = int(in_list.sum())
            return float(not in_list[0]), float(size > code.L), float(size - int(in_list[0]))

        res = run_trials(one, cfg.trials, cfg.threads, width=3)
        t = cfg.trials
        k1, k2 = res[:, 0].sum(), res[:, 1].sum()
        extra = res[:, 2]
        return ListEstimates(
            Estimate(k1 / t, proportion_ci(k1, t)),
            Estimate(k2 / t, proportion_ci(k2, t)),
            Estimate(float(extra.mean()), 1.96 * float(extra.std(ddof=1)) / math.sqrt(t) if t > 1 else math.inf),
            t, "exact_codebook",
        )

    def first(t):
        x = _sample_iid(caid, n, trial_rng(cfg.seed, t, ROLE_CODEBOOK))
        y = sample_channel(w.matrix, x, trial_rng(cfg.seed, t, ROLE_CHANNEL))
        return float(dens[x, y].sum() < thr - slack)

    e1 = run_trials(first, cfg.trials, cfg.threads)[:, 0]
    log2_m1 = code.log2_m_minus_1()
    if log2_m1 == -math.inf:
        mean_extra = 0.0
    else:
        mean_extra = 2.0 ** min(log2_m1 + pair_log2_tail(w, caid, n, gamma), 1000.0)
    oversize = min(mean_extra / (code.L - 1), 1.0) if code.L > 1 else math.nan
    return ListEstimates(
        Estimate(float(e1.mean()), mean_ci(e1)),
        Estimate(oversize, 0.0, "bound"),
        Estimate(mean_extra, 0.0, "exact"),
        cfg.trials, "decomposed",
    )
