"""Log-domain helpers shared by the bound and simulator modules."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import NumericError

LN2 = math.log(2.0)

# composition enumeration budget for iid_sum_log2_tail
MAX_COMPOSITIONS = 20_000_000


def log2_factorial(k):
    return gammaln(np.asarray(k, dtype=float) + 1.0) / LN2


def log2_binom(n, k):
    k = np.asarray(k, dtype=float)
    return (gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)) / LN2


def log2sumexp2(x) -> float:
    """log2(sum 2**x); -inf for an empty or all -inf input."""
    x = np.asarray(x, dtype=float)
    if x.size == 0 or not np.any(np.isfinite(x)):
        return -math.inf
    return float(logsumexp(x * LN2) / LN2)


def log2_one_minus_exp2(x: float) -> float:
    """log2(1 - 2**x) for x <= 0."""
    if x >= 0:
        return -math.inf
    return math.log1p(-2.0 ** x) / LN2 if x < -1 else math.log2(-math.expm1(x * LN2))


def _group_values(values, probs, decimals: int = 12):
    values = np.asarray(values, dtype=float).ravel()
    probs = np.asarray(probs, dtype=float).ravel()
    keep = probs > 0
    values, probs = values[keep], probs[keep]
    keys = np.round(values, decimals)
    uniq, inv = np.unique(keys, return_inverse=True)
    grouped = np.zeros(uniq.size)
    np.add.at(grouped, inv, probs)
    reps = np.array([values[inv == i][0] for i in range(uniq.size)])
    return reps, grouped


def _compositions(n: int, k: int):
    """Yield arrays of shape (m, k): every vector of k non-negative ints summing to n.

    Streams in chunks over the leading coordinates; the last two are vectorized.
    """
    if k == 1:
        yield np.array([[n]])
        return
    if k == 2:
        a = np.arange(n + 1)
        yield np.stack([a, n - a], axis=1)
        return

    def rec(prefix, remaining, slots):
        if slots == 2:
            a = np.arange(remaining + 1)
            block = np.empty((a.size, len(prefix) + 2), dtype=np.int64)
            if prefix:
                block[:, : len(prefix)] = prefix
            block[:, -2] = a
            block[:, -1] = remaining - a
            yield block
            return
        for first in range(remaining + 1):
            yield from rec(prefix + [first], remaining - first, slots - 1)

    yield from rec([], n, k)


def iid_sum_log2_tail(values, probs, n: int, threshold: float, strict: bool = False) -> float:
    """log2 P[sum_{i<=n} Z_i >= threshold] (or > with ``strict``) for i.i.d. Z ~ (values, probs).

    Exact: sums over all count vectors of the distinct support points with their
    multinomial probabilities. Ties with the threshold are resolved with a
    relative tolerance of 1e-12.
    """
    vals, p = _group_values(values, probs)
    k = vals.size
    if k == 0:
        raise NumericError("distribution has no mass")
    if math.comb(n + k - 1, k - 1) > MAX_COMPOSITIONS:
        raise NumericError(
            f"{math.comb(n + k - 1, k - 1)} count vectors exceed the enumeration budget"
        )
    log2p = np.log2(p)
    base = float(log2_factorial(n))
    slack = 1e-12 * max(1.0, abs(threshold))
    parts = []
    for block in _compositions(n, k):
        sums = block @ vals
        hit = sums > threshold + slack if strict else sums >= threshold - slack
        if not np.any(hit):
            continue
        c = block[hit]
        lp = base - log2_factorial(c).sum(axis=1) + (c * log2p).sum(axis=1)
        parts.append(log2sumexp2(lp))
    return log2sumexp2(np.array(parts)) if parts else -math.inf
