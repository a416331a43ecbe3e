"""Parameter and result records shared by the simulators, plus confidence intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..dmc_core import Pmf
from ..errors import ArgumentError
from ..mtypes import TypeClassSpec

DECODER_KINDS = ("emi_threshold", "forney_optimal", "forney_simple")
MODES = ("exact_codebook", "decomposed")
EXACT_MAX_LOGM = 20
EXACT_MAX_N = 24
Z95 = 1.959963984540054


@dataclass(frozen=True)
class DecoderSpec:
    kind: str = "emi_threshold"
    gamma_bits: float = math.nan
    psi: float = 1.0

    def __post_init__(self):
        if self.kind not in DECODER_KINDS:
            raise ArgumentError(f"decoder kind must be one of {DECODER_KINDS}, got {self.kind!r}")
        if self.kind == "emi_threshold" and not math.isfinite(self.gamma_bits):
            raise ArgumentError("emi_threshold decoding needs a finite gamma_bits")
        if self.kind != "emi_threshold" and not self.psi > 0:
            raise ArgumentError(f"Forney threshold psi must be positive, got {self.psi}")


@dataclass(frozen=True)
class CodeParams:
    n: int
    logM_bits: float
    L: int = 1
    composition: TypeClassSpec | Pmf | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ArgumentError(f"blocklength must be a positive integer, got {self.n}")
        if not self.logM_bits >= 0:
            raise ArgumentError(f"logM_bits must be >= 0, got {self.logM_bits}")
        if int(self.L) != self.L or self.L < 1:
            raise ArgumentError(f"list cap L must be a positive integer, got {self.L}")
        if isinstance(self.composition, TypeClassSpec) and self.composition.n != self.n:
            raise ArgumentError(f"codeword type has n={self.composition.n}, code has n={self.n}")

    @property
    def M(self) -> int:
        if self.logM_bits > 62:
            raise ArgumentError(f"M = 2^{self.logM_bits:.6g} cannot be instantiated")
        return max(1, int(round(2.0 ** self.logM_bits)))

    def log2_m_minus_1(self) -> float:
        """log2(M - 1), exact for small M and to double precision for huge M."""
        if self.logM_bits > 52:
            return self.logM_bits + math.log2(-math.expm1(-self.logM_bits * math.log(2)))
        m = 2.0 ** self.logM_bits
        return math.log2(m - 1) if m > 1 else -math.inf

    def codeword_type(self) -> TypeClassSpec:
        if isinstance(self.composition, TypeClassSpec):
            return self.composition
        if isinstance(self.composition, Pmf):
            return TypeClassSpec.nearest(self.composition.probs, self.n)
        raise ArgumentError("code needs a codeword composition")


@dataclass(frozen=True)
class SimConfig:
    trials: int
    seed: int = 0
    threads: int = 1
    mode: str = "exact_codebook"

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ArgumentError(f"trials must be a positive integer, got {self.trials}")
        if int(self.threads) != self.threads or self.threads < 1:
            raise ArgumentError(f"threads must be a positive integer, got {self.threads}")
        if self.mode not in MODES:
            raise ArgumentError(f"mode must be one of {MODES}, got {self.mode!r}")


def check_exact_limits(n: int, logM: float):
    if logM > EXACT_MAX_LOGM or n > EXACT_MAX_N:
        raise ArgumentError(
            f"exact_codebook mode needs logM <= {EXACT_MAX_LOGM} and n <= {EXACT_MAX_N}, "
            f"got logM={logM:.6g}, n={n}"
        )


@dataclass(frozen=True)
class Estimate:
    value: float
    ci_halfwidth: float
    kind: str = "empirical"  # empirical | bound | exact

    def to_dict(self) -> dict:
        return {"value": self.value, "ci": self.ci_halfwidth, "kind": self.kind}


@dataclass(frozen=True)
class ErrorEstimates:
    eps_u_hat: float
    eps_e_hat: float
    eps_t_hat: float
    ci_halfwidth: dict
    trials_used: int
    mode: str
    breakdown: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "eps_u": self.eps_u_hat,
            "eps_e": self.eps_e_hat,
            "eps_t": self.eps_t_hat,
            "ci": dict(self.ci_halfwidth),
            "breakdown": dict(self.breakdown),
        }


def wilson_halfwidth(successes: float, trials: int, z: float = Z95) -> float:
    """Largest distance from p_hat to an end of the Wilson score interval."""
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    spread = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(abs(p - (centre - spread)), abs(centre + spread - p))


def proportion_ci(successes: float, trials: int) -> float:
    p = successes / trials
    if successes < 10:
        return wilson_halfwidth(successes, trials)
    return Z95 * math.sqrt(max(p * (1 - p), 0.0) / trials)


def mean_ci(values: np.ndarray) -> float:
    """Half-width for the mean of per-trial values in [0, 1].

    Falls back to the Wilson interval (treating the sum as a count) when the
    total is below 10, where the normal approximation is unreliable.
    """
    values = np.asarray(values, dtype=float)
    t = values.size
    total = float(values.sum())
    if total < 10:
        return wilson_halfwidth(total, t)
    if t < 2:
        return math.inf
    return Z95 * float(values.std(ddof=1)) / math.sqrt(t)
