"""Counter-based random streams and a thread-count-invariant trial runner.

Every (seed, trial, role) triple owns an independent Philox stream, so a
trial's draws do not depend on which worker ran it or in what order.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import ArgumentError

ROLE_CODEBOOK = 0
ROLE_CHANNEL = 1
ROLE_SOURCE = 2
ROLE_ARQ = 3

SEED_MASK = (1 << 64) - 1


def trial_rng(seed: int, trial: int, role: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=int(seed) & SEED_MASK, counter=[0, 0, role, trial])
    )


def run_trials(fn, trials: int, threads: int = 1, width: int = 1) -> np.ndarray:
    """Evaluate ``fn(trial)`` for every trial; row t of the result holds trial t's tuple."""
    if trials < 1:
        raise ArgumentError(f"trials must be >= 1, got {trials}")
    if threads < 1:
        raise ArgumentError(f"threads must be >= 1, got {threads}")
    out = np.empty((trials, width), dtype=float)

    def work(lo, hi):
        for t in range(lo, hi):
            out[t] = fn(t)

    if threads == 1:
        work(0, trials)
        return out
    chunk = max(1, math.ceil(trials / (threads * 4)))
    bounds = [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for f in [pool.submit(work, lo, hi) for lo, hi in bounds]:
            f.result()
    return out


def sample_channel(matrix: np.ndarray, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Pass the input sequence ``x`` through the stochastic matrix (inverse-CDF per symbol)."""
    cum = np.cumsum(matrix, axis=1)
    u = rng.random(x.size)
    y = (u[:, None] >= cum[x]).sum(axis=1)
    return np.minimum(y, matrix.shape[1] - 1)
