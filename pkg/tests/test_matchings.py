from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from matchperm import (
    EnumerationTooLarge,
    InvalidDimension,
    InvalidMatching,
    InvalidPair,
    Matching,
    SamplerConfig,
    canonical_matching,
    count_matchings,
    coupling_step,
    enumerate_matchings,
    make_rng,
    sample_matching,
)
from matchperm.matchings import iter_pair_blocks, matching_table, pairs_to_pair_of, sample_pairs

from conftest import brute_matchings, double_factorial


def is_valid(p):
    p = np.asarray(p)
    idx = np.arange(p.size)
    return np.all(p != idx) and np.all(p[p] == idx)


class TestMatching:
    def test_rejects_fixed_point(self):
        with pytest.raises(InvalidMatching):
            Matching(np.array([0, 2, 1, 3]))

    def test_rejects_non_involution(self):
        with pytest.raises(InvalidMatching):
            Matching(np.array([1, 2, 3, 0]))

    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidMatching):
            Matching(np.array([1, 0, 4, 2]))

    def test_rejects_odd(self):
        with pytest.raises(InvalidDimension):
            Matching(np.array([1, 2, 0]))

    def test_from_pairs_one_based(self):
        pi = Matching.from_pairs([(1, 3), (2, 4)], one_based=True)
        assert pi.to_list(one_based=True) == [3, 4, 1, 2]
        np.testing.assert_array_equal(pi.pairs(), [[0, 2], [1, 3]])

    def test_from_pairs_missing_index(self):
        with pytest.raises(InvalidMatching):
            Matching.from_pairs([(1, 2), (1, 3)], n=4, one_based=True)

    def test_equality_and_hash(self):
        a = Matching.from_one_based([2, 1, 4, 3])
        assert a == canonical_matching(4)
        assert len({a, canonical_matching(4)}) == 1

    def test_immutable(self):
        pi = canonical_matching(4)
        with pytest.raises(ValueError):
            pi.pair_of[0] = 3


class TestCanonical:
    def test_n4(self):
        assert canonical_matching(4).to_list(one_based=True) == [2, 1, 4, 3]

    def test_n2(self):
        assert canonical_matching(2).to_list(one_based=True) == [2, 1]

    def test_odd(self):
        with pytest.raises(InvalidDimension):
            canonical_matching(5)


class TestEnumerate:
    @pytest.mark.parametrize("n, count", [(2, 1), (4, 3), (6, 15), (8, 105), (10, 945)])
    def test_counts_and_uniqueness(self, n, count):
        ms = list(enumerate_matchings(n))
        assert len(ms) == count == double_factorial(n - 1) == count_matchings(n)
        assert len(set(ms)) == count
        assert all(is_valid(m.pair_of) for m in ms)

    def test_n16_count(self):
        total = sum(b.shape[0] for b in iter_pair_blocks(16))
        assert total == 2_027_025 == double_factorial(15)

    @pytest.mark.parametrize("n", [4, 6, 8])
    def test_same_order_as_brute_force(self, n):
        np.testing.assert_array_equal(matching_table(n), np.array(brute_matchings(n)))

    def test_n16_all_valid_and_distinct(self):
        rows = np.arange(16)
        shifts = (4 * rows).astype(np.uint64)
        keys = []
        for b in iter_pair_blocks(16):
            table = pairs_to_pair_of(b)
            assert np.all(table != rows)
            assert np.all(np.take_along_axis(table, table, axis=1) == rows)
            keys.append(np.bitwise_or.reduce(table.astype(np.uint64) << shifts, axis=1))
        assert np.unique(np.concatenate(keys)).size == 2_027_025

    def test_cutoff(self):
        with pytest.raises(EnumerationTooLarge):
            next(enumerate_matchings(18))
        with pytest.raises(EnumerationTooLarge):
            next(enumerate_matchings(10, cutoff=8))


class TestSampler:
    def test_n2_always_the_only_matching(self):
        rng = make_rng(5)
        for _ in range(10):
            assert sample_matching(2, rng).to_list(one_based=True) == [2, 1]

    def test_odd(self):
        with pytest.raises(InvalidDimension):
            sample_matching(7, make_rng(0))

    def test_deterministic_given_seed(self):
        a = sample_pairs(12, 100, make_rng(42, 3))
        b = sample_pairs(12, 100, make_rng(42, 3))
        np.testing.assert_array_equal(a, b)
        c = sample_pairs(12, 100, make_rng(42, 4))
        assert not np.array_equal(a, c)

    def test_valid(self):
        table = pairs_to_pair_of(sample_pairs(30, 500, make_rng(1)))
        assert all(is_valid(p) for p in table)

    def test_n4_frequencies(self):
        N = 60_000
        table = pairs_to_pair_of(sample_pairs(4, N, make_rng(11)))
        counts = Counter(map(tuple, table))
        assert len(counts) == 3
        for c in counts.values():
            # 1/3 within 4 binomial standard errors
            assert abs(c / N - 1 / 3) <= 4 * np.sqrt(2 / 9 / N)

    @pytest.mark.parametrize("n", [6, 8])
    def test_chi_square_uniformity(self, n):
        K = count_matchings(n)
        N = 200 * K
        table = pairs_to_pair_of(sample_pairs(n, N, make_rng(2024, n)))
        counts = Counter(map(tuple, table))
        assert len(counts) == K
        p = stats.chisquare(list(counts.values())).pvalue
        assert p > 0.001


class TestCoupling:
    def test_example_swap(self):
        pi = Matching.from_one_based([2, 1, 4, 3])
        star = coupling_step(pi, 0, 2)  # I=1, J=3 in 1-based terms
        assert star.to_list(one_based=True) == [3, 4, 1, 2]

    def test_partner_pair_is_identity(self):
        pi = Matching.from_one_based([2, 1, 4, 3])
        assert coupling_step(pi, 0, 1) == pi

    def test_equal_indices(self):
        with pytest.raises(InvalidPair):
            coupling_step(canonical_matching(4), 2, 2)

    def test_out_of_range(self):
        with pytest.raises(InvalidPair):
            coupling_step(canonical_matching(4), 0, 4)

    def test_random_pair_is_valid(self):
        rng = make_rng(3)
        pi = sample_matching(20, rng)
        for _ in range(200):
            pi = coupling_step(pi, rng=rng)
            assert is_valid(pi.pair_of)

    def test_all_pairs_valid_n6(self):
        for pi in enumerate_matchings(6):
            for i in range(6):
                for j in range(6):
                    if i == j:
                        continue
                    star = coupling_step(pi, i, j)
                    assert is_valid(star.pair_of)
                    assert star[i] == j and star[pi[i]] == pi[j]
                    # re-pairing i with its old partner restores pi
                    assert coupling_step(star, i, pi[i]) == pi

    @pytest.mark.parametrize("n", [4, 6])
    def test_joint_law_is_exchangeable(self, n):
        # (pi, pi*) and (pi*, pi) should have the same distribution.
        N = 60_000 if n == 4 else 120_000
        rng = make_rng(77, n)
        index = {tuple(m.pair_of): k for k, m in enumerate(enumerate_matchings(n))}
        K = len(index)
        counts = np.zeros((K, K))
        table = pairs_to_pair_of(sample_pairs(n, N, rng))
        for p in table:
            pi = Matching(p)
            star = coupling_step(pi, rng=rng)
            counts[index[tuple(pi.pair_of)], index[tuple(star.pair_of)]] += 1
        upper = np.triu_indices(K, 1)
        a, b = counts[upper], counts.T[upper]
        keep = (a + b) > 0
        # McNemar-Bowker symmetry test
        stat = np.sum((a[keep] - b[keep]) ** 2 / (a[keep] + b[keep]))
        p = stats.chi2.sf(stat, keep.sum())
        assert p > 0.001


class TestSamplerConfig:
    def test_defaults(self):
        cfg = SamplerConfig()
        assert cfg.enumeration_cutoff == 16 and cfg.replicates >= 1

    @pytest.mark.parametrize(
        "kwargs",
        [dict(replicates=0), dict(enumeration_cutoff=22), dict(enumeration_cutoff=7), dict(seed=-1), dict(seed=2**64)],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SamplerConfig(**kwargs)


@settings(max_examples=50, deadline=None)
@given(half=st.integers(1, 25), seed=st.integers(0, 2**32), i=st.integers(0, 49), j=st.integers(0, 49))
def test_coupling_preserves_matching(half, seed, i, j):
    n = 2 * half
    i, j = i % n, j % n
    pi = sample_matching(n, make_rng(seed))
    if i == j:
        with pytest.raises(InvalidPair):
            coupling_step(pi, i, j)
        return
    star = coupling_step(pi, i, j)
    assert is_valid(star.pair_of)
    changed = np.flatnonzero(star.pair_of != pi.pair_of)
    assert set(changed) <= {i, j, pi[i], pi[j]}
