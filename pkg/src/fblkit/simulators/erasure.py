"""Erasure codes: constant-composition random codebooks with an EMI-threshold
decoder or one of Forney's likelihood-ratio rules.

Outcome codes per trial: 0 correct, 1 undetected error, 2 erasure.
"""
from __future__ import annotations

import math

import numpy as np

from ..asymptotics import gaussian_quantile
from ..dmc_core import Channel, Pmf, conditional_information_variance, mutual_information
from ..errors import ArgumentError, UnsupportedModeError
from ..mtypes import THRESHOLD_SLACK, TypeClassSpec, competitor_log2_tail_marginal
from .rng import ROLE_CHANNEL, ROLE_CODEBOOK, run_trials, sample_channel, trial_rng
from .types import (
    CodeParams, DecoderSpec, ErrorEstimates, SimConfig, check_exact_limits, mean_ci, proportion_ci,
)

CORRECT, UNDETECTED, ERASURE = 0, 1, 2


def erasure_design(p: Pmf, w: Channel, n: int, eps_e_target: float) -> tuple[float, float]:
    """Threshold gamma and log2 M for the EMI-threshold construction.

    gamma = I(P,W) + sqrt(V(P,W)/n) Phi^-1(target);
    M is the smallest integer with log2 M >= n gamma - (|X||Y| + |X| + 1/2) log2 n.
    """
    if not 0.0 < eps_e_target < 1.0:
        raise ArgumentError(f"target erasure probability must lie in (0, 1), got {eps_e_target}")
    if int(n) != n or n < 1:
        raise ArgumentError(f"blocklength must be a positive integer, got {n}")
    gamma = mutual_information(p, w) + math.sqrt(conditional_information_variance(p, w) / n) * \
        gaussian_quantile(eps_e_target)
    xs, ys = w.input_size, w.output_size
    target = n * gamma - (xs * ys + xs + 0.5) * math.log2(n)
    if target <= 0:
        return gamma, 0.0
    if target > 52:
        return gamma, target
    return gamma, math.log2(math.ceil(2.0 ** target - 1e-9))


def _emi_rows(codebook: np.ndarray, y: np.ndarray, xs: int, ys: int) -> np.ndarray:
    """Empirical mutual information of every codeword row with y."""
    m, n = codebook.shape
    flat = codebook * ys + y[None, :] + (np.arange(m) * xs * ys)[:, None]
    counts = np.bincount(flat.ravel(), minlength=m * xs * ys).reshape(m, xs, ys).astype(float)

    def h(c):
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(c > 0, c * np.log2(np.where(c > 0, c, 1.0)), 0.0)
        return math.log2(n) - t.reshape(m, -1).sum(axis=1) / n

    return np.maximum(h(counts.sum(axis=2)) + h(counts.sum(axis=1)) - h(counts), 0.0)


def _log_likelihoods(codebook: np.ndarray, y: np.ndarray, w: Channel) -> np.ndarray:
    with np.errstate(divide="ignore"):
        lw = np.log2(w.matrix)
    return lw[codebook, y[None, :]].sum(axis=1)


def decode_erasure(codebook: np.ndarray, y: np.ndarray, dec: DecoderSpec, w: Channel) -> tuple[int, str]:
    """Decoded message index (or -1 for erasure) and the reason code.

    The EMI rule does not look at ``w`` beyond its alphabet sizes.
    Forney rules: if several messages meet the acceptance inequality (possible
    only for psi < 1) the most likely of them is returned, lowest index first.
    """
    xs, ys = w.input_size, w.output_size
    if dec.kind == "emi_threshold":
        emi = _emi_rows(codebook, y, xs, ys)
        hit = np.flatnonzero(emi >= dec.gamma_bits - THRESHOLD_SLACK * max(1.0, abs(dec.gamma_bits)))
        if hit.size == 1:
            return int(hit[0]), "unique"
        return -1, "none" if hit.size == 0 else "multiple"
    ll = _log_likelihoods(codebook, y, w)
    m = ll.size
    log_psi = math.log2(dec.psi)
    if dec.kind == "forney_simple":
        order = np.argsort(-ll, kind="stable")
        top = ll[order[0]]
        second = ll[order[1]] if m > 1 else -math.inf
        rival = np.where(np.arange(m) == order[0], second, top)
    else:
        finite = np.isfinite(ll)
        if not finite.any():
            return -1, "none"
        ref = ll[finite].max()
        lin = np.where(finite, np.exp2(ll - ref), 0.0)
        with np.errstate(divide="ignore"):
            rival = np.log2(np.maximum(lin.sum() - lin, 0.0)) + ref
    ok = (ll >= rival + log_psi) & np.isfinite(ll)
    hit = np.flatnonzero(ok)
    if hit.size == 0:
        return -1, "none"
    if hit.size == 1:
        return int(hit[0]), "unique"
    best = hit[np.argmax(ll[hit])]
    return int(best), "tie_break"


def draw_codebook(spec: TypeClassSpec, m: int, rng: np.random.Generator) -> np.ndarray:
    base = np.repeat(np.arange(spec.size), spec.counts)
    return rng.permuted(np.tile(base, (m, 1)), axis=1)


def _exact(w: Channel, code: CodeParams, dec: DecoderSpec, cfg: SimConfig) -> ErrorEstimates:
    check_exact_limits(code.n, code.logM_bits)
    spec = code.codeword_type()
    m = code.M

    def one(t):
        cb = draw_codebook(spec, m, trial_rng(cfg.seed, t, ROLE_CODEBOOK))
        y = sample_channel(w.matrix, cb[0], trial_rng(cfg.seed, t, ROLE_CHANNEL))
        idx, why = decode_erasure(cb, y, dec, w)
        outcome = ERASURE if idx < 0 else (CORRECT if idx == 0 else UNDETECTED)
        return outcome, why == "none"

    res = run_trials(one, cfg.trials, cfg.threads, width=2)
    outcome = res[:, 0].astype(int)
    k_u = int((outcome == UNDETECTED).sum())
    k_e = int((outcome == ERASURE).sum())
    k_none = int(((outcome == ERASURE) & (res[:, 1] > 0)).sum())
    t = cfg.trials
    return ErrorEstimates(
        eps_u_hat=k_u / t,
        eps_e_hat=k_e / t,
        eps_t_hat=(k_u + k_e) / t,
        ci_halfwidth={"eps_u": proportion_ci(k_u, t), "eps_e": proportion_ci(k_e, t),
                      "eps_t": proportion_ci(k_u + k_e, t)},
        trials_used=t,
        mode="exact_codebook",
        breakdown={"correct": (t - k_u - k_e) / t, "erasure_no_candidate": k_none / t,
                   "erasure_multiple": (k_e - k_none) / t},
    )


def _decomposed(w: Channel, code: CodeParams, dec: DecoderSpec, cfg: SimConfig) -> ErrorEstimates:
    if dec.kind != "emi_threshold":
        raise UnsupportedModeError(f"decomposed mode supports emi_threshold only, not {dec.kind}")
    spec = code.codeword_type()
    xs, ys = w.input_size, w.output_size
    gamma = dec.gamma_bits
    slack = THRESHOLD_SLACK * max(1.0, abs(gamma))

    def one(t):
        x = draw_codebook(spec, 1, trial_rng(cfg.seed, t, ROLE_CODEBOOK))
        y = sample_channel(w.matrix, x[0], trial_rng(cfg.seed, t, ROLE_CHANNEL))
        return float(_emi_rows(x, y, xs, ys)[0] < gamma - slack)

    f1 = run_trials(one, cfg.trials, cfg.threads)[:, 0]
    p_f1 = float(f1.mean())
    ci_f1 = mean_ci(f1)
    log2_m1 = code.log2_m_minus_1()
    if log2_m1 == -math.inf:
        log2_tail = -math.inf
        union = 0.0
    else:
        log2_tail = competitor_log2_tail_marginal(w, spec, gamma)
        union = min(2.0 ** min(log2_m1 + log2_tail, 0.0), 1.0)
    total = min(p_f1 + union, 1.0)
    return ErrorEstimates(
        eps_u_hat=union,
        eps_e_hat=total,
        eps_t_hat=total,
        ci_halfwidth={"eps_u": 0.0, "eps_e": ci_f1, "eps_t": ci_f1},
        trials_used=cfg.trials,
        mode="decomposed",
        breakdown={"p_f1": p_f1, "competitor_log2_tail": log2_tail, "union_term": union},
    )


def simulate_erasure(w: Channel, code: CodeParams, dec: DecoderSpec, cfg: SimConfig) -> ErrorEstimates:
    """Ensemble error rates of the random constant-composition erasure code.

    exact_codebook: fresh codebook per trial, message 0 sent, empirical rates.
    decomposed: P[true codeword misses the threshold] by Monte Carlo plus the
    exact union term (M-1) * P[a competitor meets it]; eps_u is that union
    bound, eps_e and eps_t the bound P[F1] + union (so eps_u + eps_e != eps_t).
    """
    w.require_coding_sizes()
    if code.codeword_type().size != w.input_size:
        raise ArgumentError(f"codeword alphabet has {code.codeword_type().size} symbols, "
                            f"channel input has {w.input_size}")
    if cfg.mode == "exact_codebook":
        return _exact(w, code, dec, cfg)
    return _decomposed(w, code, dec, cfg)
