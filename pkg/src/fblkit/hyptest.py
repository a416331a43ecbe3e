"""Neyman-Pearson type-II errors and the finite-blocklength bounds built on them.

``beta_exact`` solves the deterministic problem

    beta_alpha(P, Q) = min { Q(A) : P(A) >= alpha }

exactly, and also reports the randomized (Neyman-Pearson) relaxation. Over a
finite space the deterministic problem is a 0-1 knapsack, so the likelihood-ratio
prefix is only a starting incumbent; a branch-and-bound over atoms grouped by
identical (P, Q) pairs certifies the optimum, with the randomized value of the
remaining classes as the lower bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numeric import LN2, iid_sum_log2_tail, log2_binom, log2sumexp2
from .dmc_core import JointPmf, Pmf
from .errors import ArgumentError, NumericError

MASS_TOL = 1e-12
MAX_NODES = 2_000_000


@dataclass(frozen=True)
class BetaResult:
    beta_det: float
    beta_rand: float
    threshold: float        # log2 likelihood ratio at the Neyman-Pearson boundary
    type1_achieved: float   # 1 - P(A) for the optimal deterministic A


@dataclass(frozen=True)
class BoundPoint:
    n: int
    eps: float
    logM_bits: float
    kind: str  # dt_achievability | meta_converse | gaussian


def _as_array(x, name):
    if isinstance(x, Pmf):
        return x.probs
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or np.any(arr < 0):
        raise ArgumentError(f"{name} must be a non-negative vector")
    return arr


def _check_alpha(alpha):
    if not 0.0 < alpha <= 1.0:
        raise ArgumentError(f"alpha must lie in (0, 1], got {alpha}")


def _randomized(alpha, p, q):
    """Neyman-Pearson value; returns (beta, log2 LR at the boundary)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.where(q > 0, p / np.where(q > 0, q, 1.0), np.inf)
    lr = np.where(p > 0, lr, 0.0)
    order = np.argsort(-lr, kind="stable")
    cum_p = np.cumsum(p[order])
    k = int(np.searchsorted(cum_p, alpha - MASS_TOL))
    if k >= order.size:
        k = order.size - 1
    before_p = cum_p[k - 1] if k > 0 else 0.0
    before_q = q[order[:k]].sum()
    i = order[k]
    frac = 0.0 if p[i] == 0 else min(max((alpha - before_p) / p[i], 0.0), 1.0)
    beta = before_q + frac * q[i]
    thr = math.log2(lr[i]) if 0 < lr[i] < math.inf else (math.inf if lr[i] == math.inf else -math.inf)
    return min(max(beta, 0.0), 1.0), thr


def _deterministic(alpha, p, q):
    """Exact min Q(A) s.t. P(A) >= alpha; returns (beta, P(A))."""
    free = (p > 0) & (q == 0)
    need0 = alpha - p[free].sum()
    if need0 <= MASS_TOL:
        return 0.0, p[free].sum()

    live = np.flatnonzero((p > 0) & (q > 0))
    # group identical atoms: choosing k atoms of a class is all that matters
    keys = {}
    for i in live:
        keys.setdefault((p[i], q[i]), []).append(i)
    classes = sorted(keys.items(), key=lambda kv: (-kv[0][0] / kv[0][1], kv[1][0]))
    cp = np.array([c[0][0] for c in classes])
    cq = np.array([c[0][1] for c in classes])
    cm = np.array([len(c[1]) for c in classes], dtype=float)
    tot_p = cp * cm
    tot_q = cq * cm
    pre_p = np.concatenate([[0.0], np.cumsum(tot_p)])
    pre_q = np.concatenate([[0.0], np.cumsum(tot_q)])
    kc = len(classes)

    def frac_bound(c, need):
        # cheapest fractional cover of `need` from classes c.. (in LR order)
        if need <= MASS_TOL:
            return 0.0
        target = pre_p[c] + need
        if pre_p[kc] < target - MASS_TOL:
            return math.inf
        j = int(np.searchsorted(pre_p, target - MASS_TOL)) - 1
        j = min(max(j, c), kc - 1)
        rest = max(target - pre_p[j], 0.0)
        return pre_q[j] - pre_q[c] + rest * cq[j] / cp[j]

    best = math.inf
    best_mass = 0.0
    nodes = 0
    # stack of (class index, remaining need, cost so far, mass so far)
    stack = [(0, need0, 0.0, 0.0)]
    while stack:
        c, need, cost, mass = stack.pop()
        nodes += 1
        if nodes > MAX_NODES:
            raise NumericError("deterministic beta search exceeded its node budget")
        if need <= MASS_TOL:
            if cost < best:
                best, best_mass = cost, mass
            continue
        if c >= kc:
            continue
        if cost + frac_bound(c, need) >= best - 1e-15:
            continue
        kmax = int(min(cm[c], math.ceil((need - MASS_TOL) / cp[c])))
        # push small k first so the greedy (largest k) branch is explored first
        for k in range(0, kmax + 1):
            stack.append((c + 1, need - k * cp[c], cost + k * cq[c], mass + k * cp[c]))
    if best == math.inf:
        raise NumericError("no acceptance set reaches the requested P-mass")
    return min(best, 1.0), best_mass + p[free].sum()


def beta_exact(alpha: float, p, q) -> BetaResult:
    """Smallest Q(A) over deterministic tests with P(A) >= alpha, plus its randomized relaxation."""
    _check_alpha(alpha)
    pa, qa = _as_array(p, "p"), _as_array(q, "q")
    if pa.shape != qa.shape:
        raise ArgumentError(f"p and q live on different spaces ({pa.size} vs {qa.size} atoms)")
    beta_r, thr = _randomized(alpha, pa, qa)
    beta_d, mass = _deterministic(alpha, pa, qa)
    return BetaResult(float(beta_d), float(min(beta_r, beta_d)), float(thr), float(max(1.0 - mass, 0.0)))


def dh_divergence(eps: float, p, q) -> tuple[float, float]:
    """(deterministic, randomized) eps-hypothesis-testing divergence in bits."""
    if not 0.0 < eps < 1.0:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps}")
    res = beta_exact(1.0 - eps, p, q)

    def conv(beta):
        return math.inf if beta <= 0 else -math.log2(beta / (1.0 - eps))

    return conv(res.beta_det), conv(res.beta_rand)


def _bsc_log2_pmf(n, q):
    d = np.arange(n + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lq = np.where(d > 0, d * math.log2(q) if q > 0 else -np.inf, 0.0)
        l1q = np.where(n - d > 0, (n - d) * math.log2(1 - q) if q < 1 else -np.inf, 0.0)
    atom = lq + l1q                    # log2 prob of one sequence at distance d
    return d, atom, log2_binom(n, d) + atom


def _log2_bsc_beta(n: int, q: float, alpha: float):
    """log2 of (deterministic, randomized) beta between BSC(q)^n(.|x) and uniform, and k."""
    _, atom, shell = _bsc_log2_pmf(n, q)
    shell_p = np.exp2(shell)
    cum = np.cumsum(shell_p)
    k = int(np.searchsorted(cum, alpha - MASS_TOL))
    k = min(k, n)
    before = cum[k - 1] if k > 0 else 0.0
    deficit = max(alpha - before, 0.0)
    log2_inner = log2sumexp2(log2_binom(n, np.arange(k)))  # sequences at distance < k
    if deficit <= MASS_TOL:
        log2_rand = log2_det = log2_inner
    else:
        log2_cnt = math.log2(deficit) - atom[k]
        log2_cnt = min(log2_cnt, float(log2_binom(n, k)))
        log2_rand = log2sumexp2([log2_inner, log2_cnt])
        if log2_cnt < 50:
            whole = math.ceil(2.0 ** log2_cnt - 1e-9 * 2.0 ** log2_cnt)
            log2_cnt = math.log2(max(whole, 1))
        log2_det = log2sumexp2([log2_inner, log2_cnt])
    return log2_det - n, log2_rand - n, k, float(atom[k])


def beta_bsc_product(n: int, q: float, alpha: float) -> BetaResult:
    """Exact beta between BSC(q)^n(.|x) and the uniform law on {0,1}^n.

    The likelihood ratio falls with Hamming distance, so the optimal test
    accepts every output within distance k-1 of x plus part of the distance-k
    shell (a whole number of sequences when deterministic).
    """
    if int(n) != n or n < 1:
        raise ArgumentError(f"n must be a positive integer, got {n}")
    if not 0.0 < q < 0.5:
        raise ArgumentError(f"BSC crossover must lie in (0, 1/2), got {q}")
    _check_alpha(alpha)
    l_det, l_rand, k, atom_k = _log2_bsc_beta(n, q, alpha)
    _, _, shell = _bsc_log2_pmf(n, q)
    # P-mass of the deterministic set: shells < k plus the accepted part of shell k
    count_k = 2.0 ** (l_det + n) - 2.0 ** log2sumexp2(log2_binom(n, np.arange(k)))
    mass = float(np.exp2(shell[:k]).sum()) + max(count_k, 0.0) * 2.0 ** atom_k
    return BetaResult(2.0 ** l_det, 2.0 ** l_rand, atom_k + n, float(max(1.0 - mass, 0.0)))


def _check_bsc(n, q, eps, allow_zero_q=False):
    if int(n) != n or n < 1:
        raise ArgumentError(f"n must be a positive integer, got {n}")
    lo_ok = q >= 0 if allow_zero_q else q > 0
    if not (lo_ok and q < 0.5):
        raise ArgumentError(f"BSC crossover must lie in {'[' if allow_zero_q else '('}0, 1/2), got {q}")
    if not 0.0 < eps < 1.0:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps}")


def mc_converse_logM(n: int, q: float, eps: float) -> BoundPoint:
    """Meta-converse: log2 M <= -log2 beta_{1-eps}(BSC^n(.|x), uniform)."""
    _check_bsc(n, q, eps, allow_zero_q=True)
    if q == 0:
        return BoundPoint(n, eps, float(n), "meta_converse")
    l_det, _, _, _ = _log2_bsc_beta(n, q, 1.0 - eps)
    return BoundPoint(n, eps, -l_det, "meta_converse")


def _dt_log2_error(n, q, log2_m_minus_1):
    """log2 E[2^{-[i - log2((M-1)/2)]^+}] for the BSC with uniform input."""
    d, atom, shell = _bsc_log2_pmf(n, q)
    info = n + atom                      # information density at e flips
    t = log2_m_minus_1 - 1.0
    expo = shell - np.maximum(info - t, 0.0)
    return log2sumexp2(expo)


def dt_achievability_logM(n: int, q: float, eps: float) -> BoundPoint:
    """Dependence-testing bound: largest M with E[2^{-[i(X;Y) - log2((M-1)/2)]^+}] <= eps.

    Bisection over log2(M-1); once M-1 < 2^52 the integer M is resolved exactly.
    """
    _check_bsc(n, q, eps, allow_zero_q=True)
    log_eps = math.log2(eps)

    def ok(log2_m1):
        return _dt_log2_error(n, q, log2_m1) <= log_eps

    lo, hi = -1.0, float(n + 2)   # M-1 = 2^-1 always feasible in the real relaxation
    if ok(hi):
        raise NumericError("DT search bracket too small")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * max(1.0, hi):
            break
    if lo < 52:
        m1 = int(math.floor(2.0 ** lo))
        while m1 > 0 and not ok(math.log2(m1)):
            m1 -= 1
        while ok(math.log2(m1 + 1)):
            m1 += 1
        return BoundPoint(n, eps, math.log2(m1 + 1), "dt_achievability")
    return BoundPoint(n, eps, lo, "dt_achievability")


def list_mc_bound(n: int, q: float, eps: float, L: int) -> float:
    """Upper bound on log2 M for an (M, L) list code with average error eps on BSC(q)^n."""
    if int(L) != L or L < 1:
        raise ArgumentError(f"list size must be a positive integer, got {L}")
    return math.log2(L) + mc_converse_logM(n, q, eps).logM_bits


def sw_converse_epsilon(n: int, pxy: JointPmf, logM: float, gamma: float,
                        sign: int = -1) -> float:
    """Lower bound on the total error of any Slepian-Wolf code with log2 M = logM bits.

    P[-log2 P(X^n|Y^n) >= logM + n gamma] + sign * 2^{-n gamma}, clamped at 0.
    ``sign=+1`` reproduces the display as typeset; the default -1 is the valid form.
    """
    if not gamma > 0:
        raise ArgumentError(f"gamma must be positive, got {gamma}")
    if sign not in (-1, 1):
        raise ArgumentError("sign must be -1 or +1")
    cond = pxy.conditional_x_given_y()
    pos = pxy.matrix > 0
    dens = -np.log2(cond[pos])
    if math.isinf(logM):
        tail = 0.0
    else:
        tail = 2.0 ** iid_sum_log2_tail(dens, pxy.matrix[pos], n, logM + n * gamma)
    return max(tail + sign * 2.0 ** (-n * gamma), 0.0)


def gaussian_bound_point(n: int, capacity_bits: float, dispersion_bits2: float, eps: float) -> BoundPoint:
    from .asymptotics import AsymptoticParams, ordinary_logM

    return BoundPoint(n, eps, ordinary_logM(AsymptoticParams(n, capacity_bits, dispersion_bits2), eps),
                      "gaussian")


__all__ = [
    "BetaResult", "BoundPoint", "beta_exact", "dh_divergence", "beta_bsc_product",
    "mc_converse_logM", "dt_achievability_logM", "list_mc_bound", "sw_converse_epsilon",
    "gaussian_bound_point", "LN2",
]
