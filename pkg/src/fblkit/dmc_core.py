"""Discrete memoryless channels, correlated sources and their information quantities.

All logarithms are base 2. Zero-probability terms contribute nothing to any
sum (0 log 0 = 0). Objects validate on construction and are never silently
renormalized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import ArgumentError, NumericError, ValidationError

STOCHASTIC_TOL = 1e-12
DEFAULT_TOL = 1e-9
LOG2E = math.log2(math.e)


def _frozen(values, ndim: int, name: str) -> np.ndarray:
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: entries must be real numbers ({exc})") from None
    if arr.ndim != ndim:
        raise ValidationError(f"{name}: expected a {ndim}-d array, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError(f"{name}: must not be empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Pmf:
    """Probability vector over a finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.probs, 1, "Pmf")
        if np.any(arr < 0):
            raise ValidationError(f"Pmf: negative entry at index {int(np.argmin(arr))}")
        total = arr.sum()
        if abs(total - 1.0) > STOCHASTIC_TOL:
            raise ValidationError(f"Pmf: entries sum to {float(total)!r}, expected 1")
        object.__setattr__(self, "probs", arr)

    @classmethod
    def uniform(cls, size: int) -> Pmf:
        return cls(np.full(size, 1.0 / size))

    @property
    def size(self) -> int:
        return self.probs.shape[0]

    def entropy(self) -> float:
        return _entropy(self.probs)

    def __len__(self):
        return self.size


@dataclass(frozen=True)
class Channel:
    """Row-stochastic matrix W(y|x); rows are inputs."""

    matrix: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.matrix, 2, "Channel")
        if np.any(arr < 0):
            r, c = np.argwhere(arr < 0)[0]
            raise ValidationError(f"Channel: negative entry in row {r}, column {c}")
        sums = arr.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > STOCHASTIC_TOL)
        if bad.size:
            raise ValidationError(f"Channel: row {bad[0]} sums to {float(sums[bad[0]])!r}, expected 1")
        object.__setattr__(self, "matrix", arr)

    @classmethod
    def bsc(cls, q: float) -> Channel:
        if not 0.0 <= q <= 1.0:
            raise ArgumentError(f"BSC crossover must lie in [0, 1], got {q}")
        return cls([[1.0 - q, q], [q, 1.0 - q]])

    @classmethod
    def bec(cls, p: float) -> Channel:
        if not 0.0 <= p <= 1.0:
            raise ArgumentError(f"BEC erasure probability must lie in [0, 1], got {p}")
        # outputs: 0, 1, erasure
        return cls([[1.0 - p, 0.0, p], [0.0, 1.0 - p, p]])

    @property
    def input_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_size(self) -> int:
        return self.matrix.shape[1]

    def output_distribution(self, p: Pmf) -> np.ndarray:
        _check_dims(p, self)
        return p.probs @ self.matrix

    def require_coding_sizes(self):
        if self.input_size < 2 or self.output_size < 2:
            raise ArgumentError(
                f"channel coding needs |X|, |Y| >= 2, got {self.input_size}x{self.output_size}"
            )


@dataclass(frozen=True)
class JointPmf:
    """Joint distribution P_XY(x, y); rows are x."""

    matrix: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.matrix, 2, "JointPmf")
        if np.any(arr < 0):
            r, c = np.argwhere(arr < 0)[0]
            raise ValidationError(f"JointPmf: negative entry at ({r}, {c})")
        total = arr.sum()
        if total == 0:
            raise ValidationError("JointPmf: all entries are zero")
        if abs(total - 1.0) > STOCHASTIC_TOL:
            raise ValidationError(f"JointPmf: entries sum to {float(total)!r}, expected 1")
        object.__setattr__(self, "matrix", arr)

    @classmethod
    def dsbs(cls, p: float) -> JointPmf:
        """Doubly symmetric binary source: X uniform, Y = X flipped w.p. p."""
        if not 0.0 <= p <= 1.0:
            raise ArgumentError(f"DSBS flip probability must lie in [0, 1], got {p}")
        return cls([[0.5 * (1 - p), 0.5 * p], [0.5 * p, 0.5 * (1 - p)]])

    @property
    def x_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def y_size(self) -> int:
        return self.matrix.shape[1]

    def marginal_x(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def marginal_y(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def conditional_x_given_y(self) -> np.ndarray:
        """P(x|y) with columns of zero-probability y left at zero."""
        py = self.marginal_y()
        out = np.zeros_like(self.matrix)
        ok = py > 0
        out[:, ok] = self.matrix[:, ok] / py[ok]
        return out


@dataclass(frozen=True)
class ChannelStats:
    capacity_bits: float
    caid: Pmf
    v_at_caid: float
    v_eps: float | None = None
    eps: float | None = None
    v_min: float | None = None
    v_max: float | None = None
    gap: float = 0.0
    iterations: int = 0


@dataclass(frozen=True)
class SourceStats:
    cond_entropy_bits: float
    cond_varentropy_bits2: float


@dataclass(frozen=True)
class BlahutArimotoTrace:
    caid: np.ndarray
    lower: float
    upper: float
    iterations: int
    history: list = field(default_factory=list)


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _check_dims(p: Pmf, w: Channel):
    if not isinstance(p, Pmf):
        raise ArgumentError("expected a Pmf input distribution")
    if not isinstance(w, Channel):
        raise ArgumentError("expected a Channel")
    if p.size != w.input_size:
        raise ArgumentError(f"input distribution has {p.size} symbols, channel has {w.input_size} inputs")


def _info_density_rows(w: np.ndarray, q: np.ndarray) -> np.ndarray:
    """log2 W(y|x)/q(y) where W(y|x) > 0, else 0 (masked out by callers)."""
    out = np.zeros_like(w)
    pos = w > 0
    qq = np.broadcast_to(q, w.shape)
    out[pos] = np.log2(w[pos] / qq[pos])
    return out


def _divergences(w: np.ndarray, q: np.ndarray) -> np.ndarray:
    """D(W(.|x) || q) for every input x."""
    return (w * _info_density_rows(w, q)).sum(axis=1)


def _row_variances(w: np.ndarray, q: np.ndarray) -> np.ndarray:
    dens = _info_density_rows(w, q)
    mean = (w * dens).sum(axis=1, keepdims=True)
    return (w * (dens - mean) ** 2).sum(axis=1)


def mutual_information(p: Pmf, w: Channel) -> float:
    """I(P, W) in bits."""
    _check_dims(p, w)
    q = p.probs @ w.matrix
    val = float(p.probs @ _divergences(w.matrix, q))
    return max(val, 0.0)


def conditional_information_variance(p: Pmf, w: Channel) -> float:
    """V(P, W) = E_X[Var(log W(Y|X)/PW(Y) | X)] in bits^2."""
    _check_dims(p, w)
    q = p.probs @ w.matrix
    return max(float(p.probs @ _row_variances(w.matrix, q)), 0.0)


def unconditional_information_variance(p: Pmf, w: Channel) -> float:
    """Var(log W(Y|X)/PW(Y)) under the joint P x W."""
    _check_dims(p, w)
    q = p.probs @ w.matrix
    dens = _info_density_rows(w.matrix, q)
    joint = p.probs[:, None] * w.matrix
    mean = (joint * dens).sum()
    return max(float((joint * (dens - mean) ** 2).sum()), 0.0)


def blahut_arimoto(w: Channel, tol: float = DEFAULT_TOL, max_iter: int = 200_000,
                   keep_history: bool = False) -> BlahutArimotoTrace:
    """Blahut-Arimoto iteration from the uniform input.

    Stops once max_x D(W_x||PW) - I(P, W) < tol; both quantities bracket C.
    """
    if not tol > 0:
        raise ArgumentError(f"tol must be positive, got {tol}")
    wm = w.matrix
    p = np.full(w.input_size, 1.0 / w.input_size)
    history = []
    lower = upper = 0.0
    for it in range(max_iter + 1):
        d = _divergences(wm, p @ wm)
        lower = float(p @ d)
        upper = float(d.max())
        if keep_history:
            history.append(lower)
        if upper - lower < tol:
            return BlahutArimotoTrace(p, max(lower, 0.0), upper, it, history)
        p = p * np.exp2(d - upper)
        p /= p.sum()
    raise NumericError(
        f"Blahut-Arimoto did not converge in {max_iter} iterations (gap {upper - lower:.3e})"
    )


def capacity(w: Channel, tol: float = DEFAULT_TOL, max_iter: int = 200_000) -> ChannelStats:
    trace = blahut_arimoto(w, tol, max_iter)
    caid = Pmf(trace.caid)
    return ChannelStats(
        capacity_bits=trace.lower,
        caid=caid,
        v_at_caid=conditional_information_variance(caid, w),
        gap=trace.upper - trace.lower,
        iterations=trace.iterations,
    )


def _lp_extreme(w: np.ndarray, q: np.ndarray, cost: np.ndarray, support: np.ndarray,
                sign: float, slack: float) -> np.ndarray | None:
    # P >= 0 on the support, sum P = 1, |P W - q| <= slack
    idx = np.flatnonzero(support)
    sub = w[idx]
    a_ub = np.vstack([sub.T, -sub.T])
    b_ub = np.concatenate([q + slack, -(q - slack)])
    res = linprog(sign * cost[idx], A_ub=a_ub, b_ub=b_ub,
                  A_eq=np.ones((1, idx.size)), b_eq=[1.0],
                  bounds=[(0, None)] * idx.size, method="highs")
    if not res.success:
        return None
    p = np.zeros(w.shape[0])
    p[idx] = np.clip(res.x, 0, None)
    return p / p.sum()


def dispersion_range(w: Channel, tol: float = DEFAULT_TOL) -> tuple[ChannelStats, Pmf, Pmf]:
    """(stats with v_min/v_max, minimizing caid, maximizing caid) over Pi_tol.

    Every capacity-achieving input induces the same output law, and with that law
    fixed V(P, W) is linear in P. So the extremes over the capacity-achieving set
    are linear programs over {P : PW = Q*, supp P in argmax_x D(W_x||Q*)}; the
    solutions are kept only if they really lie in {P : I(P,W) >= C - tol}.
    """
    stats = capacity(w, tol)
    cap = stats.capacity_bits
    p0 = stats.caid.probs
    q0 = p0 @ w.matrix
    d = _divergences(w.matrix, q0)
    v_rows = _row_variances(w.matrix, q0)
    support = d >= cap - max(tol, 1e-7)
    candidates = [p0]
    for sign in (1.0, -1.0):
        sol = _lp_extreme(w.matrix, q0, v_rows, support, sign, slack=1e-10)
        if sol is not None:
            candidates.append(sol)
    scored = []
    for cand in candidates:
        pm = Pmf(cand)
        if mutual_information(pm, w) >= cap - tol - 1e-13:
            scored.append((conditional_information_variance(pm, w), pm))
    if not scored:
        raise NumericError("no candidate input distribution inside the capacity-achieving set")
    v_lo, p_lo = min(scored, key=lambda t: t[0])
    v_hi, p_hi = max(scored, key=lambda t: t[0])
    out = ChannelStats(
        capacity_bits=cap, caid=stats.caid, v_at_caid=stats.v_at_caid,
        v_min=v_lo, v_max=v_hi, gap=stats.gap, iterations=stats.iterations,
    )
    return out, p_lo, p_hi


def epsilon_dispersion(w: Channel, eps: float, tol: float = DEFAULT_TOL) -> ChannelStats:
    """C and V_eps: minimum dispersion for eps < 1/2, maximum for eps >= 1/2.

    The returned ``caid`` is the input distribution attaining V_eps.
    """
    if not 0.0 < eps < 1.0:
        raise ArgumentError(f"eps must lie in (0, 1), got {eps}")
    stats, p_lo, p_hi = dispersion_range(w, tol)
    chosen, v = (p_lo, stats.v_min) if eps < 0.5 else (p_hi, stats.v_max)
    return ChannelStats(
        capacity_bits=stats.capacity_bits, caid=chosen, v_at_caid=v,
        v_eps=v, eps=eps, v_min=stats.v_min, v_max=stats.v_max,
        gap=stats.gap, iterations=stats.iterations,
    )


def awgn_constants(snr: float) -> tuple[float, float]:
    """Capacity (bits) and dispersion (bits^2) of the real AWGN channel at linear SNR."""
    if not snr >= 0:
        raise ArgumentError(f"SNR must be non-negative, got {snr}")
    c = 0.5 * math.log2(1.0 + snr)
    v = LOG2E ** 2 * snr * (snr + 2.0) / (2.0 * (snr + 1.0) ** 2)
    return c, v


def source_conditional_stats(pxy: JointPmf) -> SourceStats:
    """H(X|Y) and the conditional varentropy Var(-log P(X|Y))."""
    if not isinstance(pxy, JointPmf):
        raise ArgumentError("expected a JointPmf")
    cond = pxy.conditional_x_given_y()
    pos = pxy.matrix > 0
    dens = np.zeros_like(cond)
    dens[pos] = -np.log2(cond[pos])
    joint = pxy.matrix
    h = float((joint * dens).sum())
    var = float((joint * (dens - h) ** 2).sum())
    return SourceStats(max(h, 0.0), max(var, 0.0))
