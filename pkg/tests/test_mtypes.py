from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fblkit.dmc_core import Channel
from fblkit.errors import ArgumentError, NumericError
from fblkit.mtypes import (
    SequencePair, TypeClassSpec, competitor_tail_exact, competitor_tail_marginal,
    conditional_type_count_log2, empirical_stats, lemma1_bound, output_type_distribution,
    sample_type_class,
)


def entropy(p):
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def emi_direct(x, y, xs, ys):
    """Plain-loop empirical mutual information, independent of the library."""
    n = len(x)
    joint = Counter(zip(x, y))
    px, py = Counter(x), Counter(y)
    return sum(c / n * math.log2(c * n / (px[a] * py[b])) for (a, b), c in joint.items())


def type_class_members(counts):
    base = [s for s, c in enumerate(counts) for _ in range(c)]
    return sorted(set(itertools.permutations(base)))


def brute_tail(y, counts, gamma, xs, ys, strict=False):
    members = type_class_members(counts)
    slack = 1e-12
    hits = 0
    for x in members:
        e = emi_direct(x, y, xs, ys)
        hits += (e > gamma + slack) if strict else (e >= gamma - slack)
    return hits / len(members)


seqs = st.integers(1, 12).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 2), min_size=n, max_size=n),
    st.lists(st.integers(0, 3), min_size=n, max_size=n),
))


class TestEmpiricalStats:
    def test_identical(self):
        x = [0, 1, 1, 0, 1]
        _, emi, ece = empirical_stats(SequencePair.from_sequences(x, x))
        assert emi == pytest.approx(entropy([0.4, 0.6]), abs=1e-12)
        assert ece == pytest.approx(0.0, abs=1e-12)

    def test_product_type(self):
        _, emi, _ = empirical_stats(SequencePair.from_sequences([0, 0, 1, 1], [0, 1, 0, 1]))
        assert emi == pytest.approx(0.0, abs=1e-12)

    def test_two_symbols(self):
        jt, emi, _ = empirical_stats(SequencePair.from_sequences([0, 1], [1, 0]))
        assert emi == pytest.approx(1.0, abs=1e-12)
        assert jt.matrix == pytest.approx(np.array([[0, 0.5], [0.5, 0]]))

    def test_length_mismatch(self):
        with pytest.raises(ArgumentError):
            SequencePair.from_sequences([0, 1], [0])
        with pytest.raises(ArgumentError):
            SequencePair([0, 2], [0, 1], 2, 2)

    @settings(max_examples=200, deadline=None)
    @given(seqs)
    def test_ranges(self, xy):
        x, y = xy
        sp = SequencePair(x, y, 3, 4)
        jt, emi, ece = empirical_stats(sp)
        px = np.bincount(x, minlength=3) / len(x)
        py = np.bincount(y, minlength=4) / len(y)
        assert emi == pytest.approx(emi_direct(x, y, 3, 4), abs=1e-12)
        assert -1e-12 <= emi <= min(entropy(px), entropy(py)) + 1e-12
        assert -1e-12 <= ece <= math.log2(3) + 1e-12
        assert ece == pytest.approx(entropy(jt.matrix.ravel()) - entropy(py), abs=1e-12)


class TestTypeClass:
    def test_validation(self):
        with pytest.raises(ArgumentError):
            TypeClassSpec(4, (1, 2))
        with pytest.raises(ArgumentError):
            TypeClassSpec(1, (2, -1))

    def test_nearest(self):
        assert TypeClassSpec.nearest([0.5, 0.5], 7).counts in ((4, 3), (3, 4))
        assert sum(TypeClassSpec.nearest([0.2, 0.3, 0.5], 11).counts) == 11

    def test_cardinality(self):
        spec = TypeClassSpec(6, (2, 3, 1))
        assert 2 ** spec.log2_cardinality() == pytest.approx(len(type_class_members(spec.counts)))

    def test_singleton(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            assert np.array_equal(sample_type_class(TypeClassSpec(5, (5, 0)), rng), np.zeros(5))

    def test_determinism(self):
        spec = TypeClassSpec(20, (7, 6, 7))
        a = sample_type_class(spec, np.random.default_rng(42))
        b = sample_type_class(spec, np.random.default_rng(42))
        assert np.array_equal(a, b)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 6), min_size=1, max_size=4).filter(lambda c: sum(c) > 0), st.integers(0, 10 ** 6))
    def test_exact_type(self, counts, seed):
        spec = TypeClassSpec(sum(counts), tuple(counts))
        seq = sample_type_class(spec, np.random.default_rng(seed))
        assert TypeClassSpec.of(seq, len(counts)) == spec

    @pytest.mark.slow
    def test_uniformity(self):
        spec = TypeClassSpec(4, (2, 2))
        rng = np.random.default_rng(123)
        draws = 600_000
        codes = Counter()
        batch = np.array([sample_type_class(spec, rng) for _ in range(draws)])
        codes.update((batch * np.array([8, 4, 2, 1])).sum(axis=1).tolist())
        assert len(codes) == 6
        sigma = math.sqrt(draws * (1 / 6) * (5 / 6))
        for c in codes.values():
            assert abs(c - draws / 6) <= 3 * sigma


class TestCompetitorTail:
    def test_examples(self):
        half = TypeClassSpec(2, (1, 1))
        assert competitor_tail_exact(half, half, 0.9) == pytest.approx(1.0, abs=1e-12)
        assert competitor_tail_marginal(Channel.bsc(0.25), half, 0.9) == pytest.approx(0.625, abs=1e-12)
        y = TypeClassSpec(10, (3, 7))
        x = TypeClassSpec(10, (5, 5))
        assert competitor_tail_exact(y, x, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert competitor_tail_exact(y, x, entropy([0.3, 0.7]) + 1e-6) == 0.0

    def test_marginal_brute_force(self):
        # average over y ~ W^n(.|x) for one codeword x of the type: by symmetry this is the marginal
        w = Channel.bsc(0.25)
        counts = (1, 1)
        x0 = (0, 1)
        total = 0.0
        for y in itertools.product((0, 1), repeat=2):
            py = math.prod(w.matrix[a, b] for a, b in zip(x0, y))
            total += py * brute_tail(y, counts, 0.9, 2, 2)
        assert total == pytest.approx(0.625, abs=1e-12)

    def test_mismatched_n(self):
        with pytest.raises(ArgumentError):
            competitor_tail_exact(TypeClassSpec(3, (1, 2)), TypeClassSpec(4, (2, 2)), 0.1)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_binary_exhaustive(self, n):
        for ya in range(n + 1):
            y = tuple([0] * ya + [1] * (n - ya))
            for xa in range(n + 1):
                counts = (xa, n - xa)
                for gamma in (0.0, 0.05, 0.2, 0.5, 0.9):
                    for strict in (False, True):
                        got = competitor_tail_exact(TypeClassSpec(n, (ya, n - ya)), TypeClassSpec(n, counts),
                                                    gamma, strict)
                        assert got == pytest.approx(brute_tail(y, counts, gamma, 2, 2, strict), abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 7), st.integers(0, 10 ** 6), st.floats(0.0, 1.2))
    def test_ternary_exhaustive(self, n, seed, gamma):
        rng = np.random.default_rng(seed)
        y = tuple(rng.integers(0, 3, n).tolist())
        x = rng.integers(0, 3, n)
        counts = tuple(np.bincount(x, minlength=3).tolist())
        got = competitor_tail_exact(TypeClassSpec.of(y, 3), TypeClassSpec(n, counts), gamma)
        assert got == pytest.approx(brute_tail(y, counts, gamma, 3, 3), abs=1e-12)

    def test_output_type_law(self):
        w = Channel([[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]])
        spec = TypeClassSpec(3, (2, 1))
        dist = output_type_distribution(w, spec)
        want = Counter()
        for y in itertools.product(range(3), repeat=3):
            p = w.matrix[0, y[0]] * w.matrix[0, y[1]] * w.matrix[1, y[2]]
            want[tuple(np.bincount(y, minlength=3).tolist())] += p
        assert set(dist) == set(want)
        for k, v in want.items():
            assert dist[k] == pytest.approx(v, abs=1e-14)


class TestTypeCountingBound:
    def test_examples(self):
        assert lemma1_bound(2, 2, 2, 0.9) == pytest.approx(209.3, abs=0.1)
        assert lemma1_bound(10, 2, 2, 0.0) == pytest.approx(11.0 ** 6, rel=1e-14)
        with pytest.raises(ArgumentError):
            lemma1_bound(10, 2, 2, -0.1)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 500), st.floats(0, 2), st.floats(0, 2))
    def test_decreasing(self, n, g1, g2):
        lo, hi = sorted((g1, g2))
        assert lemma1_bound(n, 2, 2, hi) <= lemma1_bound(n, 2, 2, lo)

    def test_dominance(self):
        for n in range(1, 9):
            for gamma in np.arange(1, 10) / 10:
                bound = lemma1_bound(n, 2, 2, gamma)
                for ya in range(n + 1):
                    for xa in range(n + 1):
                        tail = competitor_tail_exact(TypeClassSpec(n, (ya, n - ya)), TypeClassSpec(n, (xa, n - xa)),
                                                     gamma, strict=True)
                        assert tail <= bound


class TestConditionalCount:
    @pytest.mark.parametrize("y", [(0, 1, 1, 2), (0, 0, 1, 1, 1), (2, 2, 2), (0, 1, 2, 0, 1, 2)])
    @pytest.mark.parametrize("gamma", [0.0, 0.3, 0.8, 1.6])
    def test_brute_force(self, y, gamma):
        n = len(y)
        count = 0
        for x in itertools.product(range(2), repeat=n):
            _, _, ece = empirical_stats(SequencePair(x, y, 2, 3))
            count += ece <= gamma + 1e-12
        got = conditional_type_count_log2(TypeClassSpec.of(y, 3), 2, gamma)
        assert 2 ** got == pytest.approx(count, rel=1e-12)

    def test_budget(self):
        with pytest.raises(NumericError):
            conditional_type_count_log2(TypeClassSpec(3000, (1000, 1000, 1000)), 8, 0.5)
