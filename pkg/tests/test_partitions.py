from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from explodingmoments.partitions import (
    CrossPartition,
    SetPartition,
    bell_number,
    double_factorial_odd,
    enumerate_cross_partitions,
    enumerate_integer_partitions_min2,
    enumerate_pair_partitions,
    enumerate_set_partitions,
    falling_factorial,
    make_partition,
)


def brute_force_partitions(k):
    """Independent oracle: canonicalize every function {1..k} -> {1..k} by its
    fiber structure and collect the distinct ones."""
    seen = set()
    for labels in product(range(k), repeat=k):
        fibers = {}
        for pos, lab in enumerate(labels, start=1):
            fibers.setdefault(lab, []).append(pos)
        canon = tuple(sorted((tuple(b) for b in fibers.values()), key=lambda b: b[0]))
        seen.add(canon)
    return seen


class TestSetPartitions:
    @pytest.mark.parametrize("k,count", [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52)])
    def test_counts(self, k, count):
        assert len(enumerate_set_partitions(k)) == count

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
    def test_matches_brute_force(self, k):
        ours = {p.blocks for p in enumerate_set_partitions(k)}
        assert ours == brute_force_partitions(k)

    def test_counts_match_bell_recurrence(self):
        for k in range(1, 9):
            assert len(enumerate_set_partitions(k)) == bell_number(k)

    def test_k1(self):
        assert enumerate_set_partitions(1) == [make_partition(1, [[1]])]

    def test_guard(self):
        with pytest.raises(ValueError):
            enumerate_set_partitions(13)

    def test_no_duplicates(self):
        parts = enumerate_set_partitions(6)
        assert len({p.blocks for p in parts}) == len(parts)

    def test_canonical_order_enforced(self):
        with pytest.raises(ValueError):
            SetPartition(ground_size=2, blocks=((2,), (1,)))


class TestIndexSets:
    @pytest.mark.parametrize("n,k", [(n, k) for n in range(1, 7) for k in range(1, 6)])
    def test_tiling(self, n, k):
        # the S_pi partition the whole index space [N]^k
        total = sum(p.index_tuple_count(n) for p in enumerate_set_partitions(k))
        assert total == n**k

    def test_membership_matches_count(self):
        n, k = 4, 3
        for p in enumerate_set_partitions(k):
            members = [t for t in product(range(n), repeat=k) if p.contains_tuple(t)]
            assert len(members) == p.index_tuple_count(n)

    def test_each_tuple_in_exactly_one_class(self):
        n, k = 3, 4
        parts = enumerate_set_partitions(k)
        for t in product(range(n), repeat=k):
            assert sum(p.contains_tuple(t) for p in parts) == 1

    def test_falling_factorial(self):
        assert falling_factorial(5, 3) == 60
        assert falling_factorial(2, 3) == 0


class TestPairPartitions:
    def test_counts(self):
        assert len(enumerate_pair_partitions(2)) == 1
        assert len(enumerate_pair_partitions(4)) == 3
        assert len(enumerate_pair_partitions(6)) == 15
        assert enumerate_pair_partitions(3) == []

    def test_counts_match_double_factorial(self):
        for r in range(0, 9):
            assert len(enumerate_pair_partitions(r)) == (
                double_factorial_odd(r) if r >= 2 else 0
            )

    def test_r2(self):
        assert enumerate_pair_partitions(2) == [make_partition(2, [[1, 2]])]

    @pytest.mark.parametrize("r", [2, 4, 6])
    def test_subset_of_set_partitions_with_size2_blocks(self, r):
        all_parts = {p.blocks for p in enumerate_set_partitions(r)}
        for m in enumerate_pair_partitions(r):
            assert m.blocks in all_parts
            assert all(len(b) == 2 for b in m.blocks)


class TestCrossPartitions:
    def test_sizes_2_2(self):
        assert len(enumerate_cross_partitions((2, 2))) == 7

    def test_sizes_2_2_by_filtering(self):
        # independent count: partitions of a 4-set whose blocks never contain
        # two elements of the same origin (origins: {0,1} vs {2,3})
        legal = 0
        for p in enumerate_set_partitions(4):
            ok = all(
                not ({1, 2} <= set(b) or {3, 4} <= set(b)) for b in p.blocks
            )
            legal += ok
        assert legal == len(enumerate_cross_partitions((2, 2)))

    def test_sizes_1_1(self):
        assert len(enumerate_cross_partitions((1, 1))) == 2

    def test_single_origin_cannot_merge(self):
        sigmas = enumerate_cross_partitions((2,))
        assert len(sigmas) == 1
        assert all(len(b) == 1 for b in sigmas[0].blocks)

    def test_guard(self):
        with pytest.raises(ValueError):
            enumerate_cross_partitions((7, 6))

    def test_block_constraint_enforced(self):
        with pytest.raises(ValueError):
            CrossPartition(parts=(2,), blocks=((((0, 0)), (0, 1)),))

    @given(a=st.integers(1, 3), b=st.integers(1, 3))
    @settings(max_examples=9, deadline=None)
    def test_all_blocks_cross_origin_legal(self, a, b):
        for sigma in enumerate_cross_partitions((a, b)):
            for block in sigma.blocks:
                origins = [o for o, _v in block]
                assert len(origins) == len(set(origins))


class TestIntegerPartitionsMin2:
    def test_k4(self):
        assert set(enumerate_integer_partitions_min2(4)) == {(4,), (2, 2)}

    def test_k6(self):
        assert set(enumerate_integer_partitions_min2(6)) == {(6,), (4, 2), (3, 3), (2, 2, 2)}

    def test_k3(self):
        assert enumerate_integer_partitions_min2(3) == [(3,)]

    def test_small_and_empty(self):
        assert enumerate_integer_partitions_min2(0) == []
        assert enumerate_integer_partitions_min2(1) == []
        assert enumerate_integer_partitions_min2(2) == [(2,)]

    @pytest.mark.parametrize("k", range(2, 13))
    def test_brute_force_agreement(self, k):
        ours = set(enumerate_integer_partitions_min2(k))
        ref = set()

        def grow(rest, cap, acc):
            if rest == 0:
                ref.add(tuple(acc))
                return
            for part in range(2, min(cap, rest) + 1):
                grow(rest - part, part, acc + [part])

        grow(k, k, [])
        assert ours == ref
        assert all(sum(m) == k and min(m) >= 2 for m in ours)
