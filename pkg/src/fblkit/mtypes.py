"""Method-of-types utilities: joint types, empirical information measures,
uniform sampling from a type class and exact competitor tails.

The competitor tail is the probability that a codeword drawn uniformly from
the type class T_P looks informative about a fixed output y. Only the joint
type of (codeword, y) matters, so the probability is a sum over contingency
tables with row sums = codeword counts and column sums = y counts, each
weighted by the counting ratio

    |{x in T_P : joint type of (x, y) = N}| / |T_P|
        = prod_y b_y! / prod_{x,y} N_xy!  *  prod_x a_x! / n!
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._numeric import _compositions, log2_factorial, log2sumexp2
from .dmc_core import Channel, JointPmf
from .errors import ArgumentError, NumericError

# tolerance applied when comparing an empirical information value with a threshold
THRESHOLD_SLACK = 1e-12
MAX_CONDITIONAL_TYPES = 20_000_000


@dataclass(frozen=True)
class SequencePair:
    x: np.ndarray
    y: np.ndarray
    x_size: int
    y_size: int

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.int64).ravel()
        y = np.asarray(self.y, dtype=np.int64).ravel()
        if x.size != y.size:
            raise ArgumentError(f"sequence lengths differ: x has {x.size}, y has {y.size}")
        if x.size == 0:
            raise ArgumentError("sequences must be non-empty")
        for name, seq, size in (("x", x, self.x_size), ("y", y, self.y_size)):
            if size < 1 or seq.min() < 0 or seq.max() >= size:
                raise ArgumentError(f"{name} has symbols outside 0..{size - 1}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_sequences(cls, x, y, x_size: int | None = None, y_size: int | None = None):
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        return cls(x, y, x_size or int(x.max()) + 1, y_size or int(y.max()) + 1)

    @property
    def n(self) -> int:
        return int(self.x.size)


@dataclass(frozen=True)
class TypeClassSpec:
    n: int
    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts) or not counts:
            raise ArgumentError(f"type counts must be non-negative, got {counts}")
        if sum(counts) != self.n:
            raise ArgumentError(f"type counts sum to {sum(counts)}, expected n={self.n}")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def nearest(cls, probs, n: int) -> TypeClassSpec:
        """Type with denominator n closest to ``probs`` (largest-remainder rounding)."""
        probs = np.asarray(probs, dtype=float)
        raw = probs * n
        base = np.floor(raw).astype(int)
        short = n - base.sum()
        order = np.argsort(-(raw - base), kind="stable")
        base[order[:short]] += 1
        return cls(n, tuple(base))

    @classmethod
    def of(cls, seq, size: int) -> TypeClassSpec:
        seq = np.asarray(seq, dtype=np.int64)
        return cls(int(seq.size), tuple(np.bincount(seq, minlength=size)))

    @property
    def size(self) -> int:
        return len(self.counts)

    @property
    def probs(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.n

    def log2_cardinality(self) -> float:
        return float(log2_factorial(self.n) - log2_factorial(np.asarray(self.counts)).sum())


def _h(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _h_counts(counts: np.ndarray, n: int) -> np.ndarray:
    """Entropy (bits) of count vectors along the last axis, each summing to n."""
    c = np.asarray(counts, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(c > 0, c * np.log2(np.where(c > 0, c, 1.0)), 0.0)
    return math.log2(n) - terms.sum(axis=-1) / n


def joint_type(sp: SequencePair) -> np.ndarray:
    counts = np.zeros((sp.x_size, sp.y_size), dtype=np.int64)
    np.add.at(counts, (sp.x, sp.y), 1)
    return counts


def empirical_stats(sp: SequencePair) -> tuple[JointPmf, float, float]:
    """(joint type, empirical mutual information, empirical conditional entropy H(x|y))."""
    counts = joint_type(sp)
    pj = counts / sp.n
    hx, hy, hxy = _h(pj.sum(axis=1)), _h(pj.sum(axis=0)), _h(pj.ravel())
    emi = max(hx + hy - hxy, 0.0)
    ece = max(hxy - hy, 0.0)
    return JointPmf(pj), emi, ece


def sample_type_class(spec: TypeClassSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform member of T_P: a random permutation of the multiset of symbols."""
    return rng.permutation(np.repeat(np.arange(spec.size), spec.counts))


def _tables(rows: tuple[int, ...], cols: tuple[int, ...]):
    """Stream every non-negative integer matrix with the given row and column sums."""
    nr, nc = len(rows), len(cols)
    table = np.zeros((nr, nc), dtype=np.int64)

    def fill_column(j, remaining_rows):
        if j == nc - 1:
            if sum(remaining_rows) == cols[j]:
                table[:, j] = remaining_rows
                yield table.copy()
            return
        yield from fill_cell(j, 0, cols[j], list(remaining_rows))

    def fill_cell(j, i, left, remaining_rows):
        if i == nr - 1:
            if left <= remaining_rows[i]:
                table[i, j] = left
                rest = list(remaining_rows)
                rest[i] -= left
                yield from fill_column(j + 1, rest)
            return
        later_cap = sum(remaining_rows[i + 1:])
        for v in range(max(0, left - later_cap), min(left, remaining_rows[i]) + 1):
            table[i, j] = v
            rest = list(remaining_rows)
            rest[i] -= v
            yield from fill_cell(j, i + 1, left - v, rest)

    yield from fill_column(0, list(rows))


def _check_specs(y_spec: TypeClassSpec, codeword_spec: TypeClassSpec):
    if y_spec.n != codeword_spec.n:
        raise ArgumentError(f"blocklengths differ: y has n={y_spec.n}, codeword n={codeword_spec.n}")


def _hits(emi: np.ndarray, gamma: float, strict: bool) -> np.ndarray:
    slack = THRESHOLD_SLACK * max(1.0, abs(gamma))
    return emi > gamma + slack if strict else emi >= gamma - slack


@lru_cache(maxsize=65536)
def _log2_tail_cached(b: tuple[int, ...], a: tuple[int, ...], gamma: float, strict: bool) -> float:
    n = sum(a)
    la = np.asarray(a)
    lb = np.asarray(b)
    base = float(log2_factorial(la).sum() + log2_factorial(lb).sum() - log2_factorial(n))
    hx = float(_h_counts(la, n))
    hy = float(_h_counts(lb, n))
    if len(a) == 2 and len(b) == 2:
        # N00 = t fixes the whole table
        t = np.arange(max(0, a[0] + b[0] - n), min(a[0], b[0]) + 1)
        cells = np.stack([t, a[0] - t, b[0] - t, n - a[0] - b[0] + t], axis=1)
        emi = hx + hy - _h_counts(cells, n)
        hit = _hits(emi, gamma, strict)
        if not np.any(hit):
            return -math.inf
        return log2sumexp2(base - log2_factorial(cells[hit]).sum(axis=1))
    parts = []
    for tab in _tables(a, b):
        emi = hx + hy - float(_h_counts(tab.ravel(), n))
        if _hits(np.asarray(emi), gamma, strict):
            parts.append(base - float(log2_factorial(tab).sum()))
    return log2sumexp2(parts) if parts else -math.inf


def competitor_log2_tail(y_spec: TypeClassSpec, codeword_spec: TypeClassSpec,
                         gamma: float, strict: bool = False) -> float:
    _check_specs(y_spec, codeword_spec)
    return _log2_tail_cached(y_spec.counts, codeword_spec.counts, float(gamma), bool(strict))


def competitor_tail_exact(y_spec: TypeClassSpec, codeword_spec: TypeClassSpec,
                          gamma: float, strict: bool = False) -> float:
    """P[EMI(Xbar, y) >= gamma] (or > with ``strict``) for Xbar uniform on T_P and y of type ``y_spec``."""
    return min(2.0 ** competitor_log2_tail(y_spec, codeword_spec, gamma, strict), 1.0)


def output_type_log2_distribution(w: Channel, codeword_spec: TypeClassSpec) -> dict[tuple[int, ...], float]:
    """log2 law of the type of Y when a sequence of type ``codeword_spec`` goes through ``w``.

    Row x contributes Multinomial(a_x, W(.|x)) counts; the output type is their sum.
    """
    if codeword_spec.size != w.input_size:
        raise ArgumentError(f"codeword alphabet {codeword_spec.size} differs from channel input {w.input_size}")
    return _output_types_cached(tuple(map(tuple, w.matrix.tolist())), codeword_spec.counts)


@lru_cache(maxsize=256)
def _output_types_cached(matrix: tuple, counts: tuple[int, ...]) -> dict[tuple[int, ...], float]:
    mat = np.asarray(matrix)
    dist = {tuple([0] * mat.shape[1]): 0.0}
    for x, ax in enumerate(counts):
        if ax == 0:
            continue
        row = _multinomial_log2(ax, mat[x])
        nxt: dict[tuple[int, ...], list[float]] = {}
        for k1, l1 in dist.items():
            for k2, l2 in row.items():
                key = tuple(u + v for u, v in zip(k1, k2))
                nxt.setdefault(key, []).append(l1 + l2)
        dist = {k: log2sumexp2(v) for k, v in nxt.items()}
    return dist


def output_type_distribution(w: Channel, codeword_spec: TypeClassSpec) -> dict[tuple[int, ...], float]:
    return {k: 2.0 ** v for k, v in output_type_log2_distribution(w, codeword_spec).items()}


def _multinomial_log2(m: int, probs: np.ndarray) -> dict[tuple[int, ...], float]:
    probs = np.asarray(probs, dtype=float)
    out = {}
    base = float(log2_factorial(m))
    with np.errstate(divide="ignore"):
        lp = np.log2(probs)
    for block in _compositions(m, probs.size):
        for c in block:
            if np.any((c > 0) & (probs == 0)):
                continue
            val = base - float(log2_factorial(c).sum()) + float(np.where(c > 0, c * lp, 0.0).sum())
            out[tuple(int(v) for v in c)] = val
    return out


def competitor_log2_tail_marginal(w: Channel, codeword_spec: TypeClassSpec, gamma: float,
                                  strict: bool = False) -> float:
    """log2 of the competitor tail averaged over Y produced by a codeword of the given type."""
    parts = [lp + competitor_log2_tail(TypeClassSpec(codeword_spec.n, ytype), codeword_spec, gamma, strict)
             for ytype, lp in output_type_log2_distribution(w, codeword_spec).items()]
    return min(log2sumexp2(parts), 0.0)


def competitor_tail_marginal(w: Channel, codeword_spec: TypeClassSpec, gamma: float,
                             strict: bool = False) -> float:
    return 2.0 ** competitor_log2_tail_marginal(w, codeword_spec, gamma, strict)


def lemma1_log2_bound(n: int, x_size: int, y_size: int, gamma: float) -> float:
    if not gamma >= 0:
        raise ArgumentError(f"gamma must be >= 0, got {gamma}")
    return (x_size + x_size * y_size) * math.log2(n + 1) - n * gamma


def lemma1_bound(n: int, x_size: int, y_size: int, gamma: float) -> float:
    """(n+1)^{|X|+|X||Y|} 2^{-n gamma}; dominates every competitor tail with strict threshold."""
    lb = lemma1_log2_bound(n, x_size, y_size, gamma)
    return math.inf if lb > 1023 else 2.0 ** lb


def conditional_type_count_log2(y_spec: TypeClassSpec, x_size: int, gamma: float) -> float:
    """log2 #{x : H_hat(x|y) <= gamma} for a fixed y of the given type.

    The conditional type splits into one x-composition per y value; each column
    contributes sum c log2 c to n H(x, y) and a multinomial factor to the count.
    """
    n = y_spec.n
    sizes = [math.comb(b + x_size - 1, x_size - 1) for b in y_spec.counts]
    if math.prod(sizes) > MAX_CONDITIONAL_TYPES:
        raise NumericError(f"{math.prod(sizes)} conditional types exceed the enumeration budget")
    acc_s = np.zeros(1)
    acc_l = np.zeros(1)
    for b in y_spec.counts:
        c = np.concatenate(list(_compositions(b, x_size))).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            clogc = np.where(c > 0, c * np.log2(np.where(c > 0, c, 1.0)), 0.0).sum(axis=1)
        lmult = float(log2_factorial(b)) - log2_factorial(c).sum(axis=1)
        acc_s = (acc_s[:, None] + clogc[None, :]).ravel()
        acc_l = (acc_l[:, None] + lmult[None, :]).ravel()
    hy = float(_h_counts(np.asarray(y_spec.counts), n))
    hcond = math.log2(n) - acc_s / n - hy
    keep = hcond <= gamma + THRESHOLD_SLACK * max(1.0, abs(gamma))
    return log2sumexp2(acc_l[keep])


__all__ = [
    "SequencePair", "TypeClassSpec", "joint_type", "empirical_stats", "sample_type_class",
    "competitor_tail_exact", "competitor_log2_tail", "output_type_distribution",
    "competitor_tail_marginal", "competitor_log2_tail_marginal",
    "output_type_log2_distribution", "lemma1_bound", "lemma1_log2_bound",
    "conditional_type_count_log2",
]
