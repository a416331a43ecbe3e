"""Gaussian (second-order) approximations for ordinary, erasure, list and
Slepian-Wolf coding, plus the expected rate of single-codeword repetition.

Every log-size is in bits. The unspecified O(log n) / o(sqrt n) remainders are
exposed as ``third_order_bits`` (default 0) instead of being guessed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import ndtr, ndtri

from .dmc_core import SourceStats
from .errors import ArgumentError

ERROR_SPEC_TOL = 1e-12


def gaussian_cdf(x: float) -> float:
    return float(ndtr(x))


def gaussian_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ArgumentError(f"quantile needs p in (0, 1), got {p}")
    return float(ndtri(p))


def gaussian_cdf_quantile(value: float, direction: str = "cdf") -> float:
    if direction == "cdf":
        return gaussian_cdf(value)
    if direction == "quantile":
        return gaussian_quantile(value)
    raise ArgumentError(f"direction must be 'cdf' or 'quantile', got {direction!r}")


@dataclass(frozen=True)
class AsymptoticParams:
    n: int
    capacity_bits: float
    dispersion_bits2: float
    third_order_bits: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ArgumentError(f"blocklength must be a positive integer, got {self.n}")
        if not self.dispersion_bits2 >= 0:
            raise ArgumentError(f"dispersion must be >= 0, got {self.dispersion_bits2}")


@dataclass(frozen=True)
class ErrorSpec:
    """Undetected, erasure and total error probabilities (eps_t = eps_u + eps_e)."""

    eps_u: float
    eps_e: float
    eps_t: float

    def __post_init__(self):
        if not 0.0 <= self.eps_u < self.eps_t < 1.0:
            raise ArgumentError(
                f"need 0 <= eps_u < eps_t < 1, got eps_u={self.eps_u}, eps_t={self.eps_t}"
            )
        if abs(self.eps_u + self.eps_e - self.eps_t) > ERROR_SPEC_TOL:
            raise ArgumentError(
                f"eps_u + eps_e = {self.eps_u + self.eps_e!r} differs from eps_t = {self.eps_t!r}"
            )

    @classmethod
    def from_undetected_erasure(cls, eps_u: float, eps_e: float) -> ErrorSpec:
        return cls(eps_u, eps_e, eps_u + eps_e)

    @classmethod
    def from_undetected_total(cls, eps_u: float, eps_t: float) -> ErrorSpec:
        return cls(eps_u, eps_t - eps_u, eps_t)


@dataclass(frozen=True)
class ListParams:
    l: float = 0.0  # noqa: E741 - list exponent per sqrt(n)
    alpha: float = 0.0
    symmetric_singular: bool = False

    def __post_init__(self):
        if not (self.l >= 0 and self.alpha >= 0):
            raise ArgumentError(f"list exponents must be >= 0, got l={self.l}, alpha={self.alpha}")


@dataclass(frozen=True)
class ArqParams:
    b: int
    delta: float

    def __post_init__(self):
        if int(self.b) != self.b or self.b < 1:
            raise ArgumentError(f"number of blocks must be a positive integer, got {self.b}")
        if not self.delta > 0:
            raise ArgumentError(f"Hoeffding slack must be positive, got {self.delta}")


@dataclass(frozen=True)
class ExpectedRate:
    r_erasure: float
    r_ordinary: float
    support: tuple[float, float]        # per-use rate on success, 0 on erasure
    support_probs: tuple[float, float]  # (1 - eps_e, eps_e)


@dataclass(frozen=True)
class HoeffdingInterval:
    lo: float
    hi: float
    confidence: float
    vacuous: bool


@dataclass(frozen=True)
class ListRates:
    second_order_r: float
    third_order_lo: float
    third_order_hi: float


def _check_eps(eps: float, name: str = "eps"):
    if not 0.0 < eps < 1.0:
        raise ArgumentError(f"{name} must lie in (0, 1), got {eps}")


def ordinary_logM(params: AsymptoticParams, eps: float) -> float:
    """nC + sqrt(nV) Phi^-1(eps) + third-order term."""
    _check_eps(eps)
    n = params.n
    return (n * params.capacity_bits
            + math.sqrt(n * params.dispersion_bits2) * gaussian_quantile(eps)
            + params.third_order_bits)


def erasure_logM(params: AsymptoticParams, err: ErrorSpec) -> float:
    """Largest log-size with erasures; depends on the total error only."""
    if not isinstance(err, ErrorSpec):
        raise ArgumentError("expected an ErrorSpec")
    return ordinary_logM(params, err.eps_t)


def expected_rate_erasure(params: AsymptoticParams, err: ErrorSpec,
                          dispersion_ordinary_bits2: float | None = None) -> ExpectedRate:
    """Expected per-use rate with erasures vs. the ordinary rate at error eps_u.

    ``dispersion_ordinary_bits2`` is V_{eps_u} when it differs from the V_{eps_t}
    carried in ``params`` (only for channels whose dispersion depends on eps).
    """
    n = params.n
    success_rate = erasure_logM(params, err) / n
    v_u = params.dispersion_bits2 if dispersion_ordinary_bits2 is None else dispersion_ordinary_bits2
    if err.eps_u > 0:
        r_ord = ordinary_logM(AsymptoticParams(n, params.capacity_bits, v_u,
                                               params.third_order_bits), err.eps_u) / n
    else:
        r_ord = -math.inf if v_u > 0 else params.capacity_bits + params.third_order_bits / n
    return ExpectedRate(
        r_erasure=(1.0 - err.eps_e) * success_rate,
        r_ordinary=r_ord,
        support=(success_rate, 0.0),
        support_probs=(1.0 - err.eps_e, err.eps_e),
    )


CONFIDENCE_CAP = math.nextafter(1.0, 0.0)


def hoeffding_interval(params: AsymptoticParams, err: ErrorSpec, arq: ArqParams) -> HoeffdingInterval:
    """Range of the bits delivered over b blocks and its Hoeffding confidence."""
    limit = min(err.eps_e, 1.0 - err.eps_e)
    if not 0.0 < arq.delta < limit:
        raise ArgumentError(f"delta must lie in (0, {limit}), got {arq.delta}")
    per_block = erasure_logM(params, err)
    lo = (1.0 - err.eps_e - arq.delta) * arq.b * per_block
    hi = (1.0 - err.eps_e + arq.delta) * arq.b * per_block
    raw = 1.0 - 2.0 * math.exp(-arq.b * arq.delta ** 2)
    # the true value is below 1; keep it there when the tail underflows the double spacing near 1
    conf = min(max(raw, 0.0), CONFIDENCE_CAP)
    return HoeffdingInterval(lo, hi, conf, raw <= 0.0)


def list_rates(v_eps: float, eps: float, lp: ListParams) -> ListRates:
    _check_eps(eps)
    if not v_eps >= 0:
        raise ArgumentError(f"dispersion must be >= 0, got {v_eps}")
    r = lp.l + math.sqrt(v_eps) * gaussian_quantile(eps)
    hi = lp.alpha if lp.symmetric_singular else lp.alpha + 0.5
    return ListRates(r, lp.alpha, hi)


def sw_second_order(src: SourceStats, eps_t: float, n: int) -> tuple[float, float]:
    """(optimal second-order rate, n H(X|Y) + sqrt(n) r*) for Slepian-Wolf with erasures."""
    _check_eps(eps_t, "eps_t")
    if int(n) != n or n < 1:
        raise ArgumentError(f"blocklength must be a positive integer, got {n}")
    r_star = math.sqrt(src.cond_varentropy_bits2) * gaussian_quantile(1.0 - eps_t)
    return r_star, n * src.cond_entropy_bits + math.sqrt(n) * r_star
