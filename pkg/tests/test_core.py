import math
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roulette.core import (
    AttemptStats,
    RandomSource,
    WeightTable,
    build_table,
    rebuild_max,
    set_weight,
    target_distribution,
)
from roulette.errors import AllZero, EmptyPopulation, IndexOutOfRange, InvalidWeight
from roulette.selectors import AcceptanceEngine

EPS = sys.float_info.epsilon / 2  # unit roundoff

weights_st = st.lists(
    st.floats(min_value=0.0, max_value=1e6, allow_nan=False, allow_infinity=False),
    min_size=1,
    max_size=50,
).filter(lambda ws: any(w > 0 for w in ws))


class TestBuildTable:
    def test_basic(self):
        t = build_table([1, 2, 3, 4])
        assert t.total == 10
        assert t.max_bound == 4
        assert t.count_positive == 4

    def test_singleton(self):
        t = build_table([5])
        assert (t.total, t.max_bound) == (5, 5)

    def test_zeros_allowed(self):
        t = build_table([0, 0, 1])
        assert (t.total, t.max_bound, t.count_positive) == (1, 1, 1)

    @pytest.mark.parametrize("bad", [[1, -1], [1, float("nan")], [float("inf")], [1, "x"]])
    def test_invalid_weight(self, bad):
        with pytest.raises(InvalidWeight):
            build_table(bad)

    def test_empty(self):
        with pytest.raises(EmptyPopulation):
            build_table([])

    def test_all_zero(self):
        with pytest.raises(AllZero):
            build_table([0, 0])

    def test_accepts_generators(self):
        assert build_table(float(i) for i in range(1, 4)).total == 6


class TestSetWeight:
    def test_increase_raises_max(self):
        t = set_weight(build_table([1, 2, 3]), 1, 10)
        assert t.max_bound == 10
        assert t.total == 14

    def test_decrease_keeps_stale_max(self):
        t = set_weight(build_table([1, 2, 3]), 2, 0)
        assert t.max_bound == 3
        assert t.total == 3
        assert t.count_positive == 2

    def test_zeroing_last_positive_fails_at_selection(self):
        t = set_weight(build_table([1]), 0, 0)
        assert t.count_positive == 0
        with pytest.raises(AllZero):
            AcceptanceEngine(t).select(RandomSource(1))
        with pytest.raises(AllZero):
            t.target_distribution()

    @pytest.mark.parametrize("index", [-1, 3, 10])
    def test_index_out_of_range(self, index):
        with pytest.raises(IndexOutOfRange):
            build_table([1, 2, 3]).set_weight(index, 1)

    def test_invalid_value(self):
        with pytest.raises(InvalidWeight):
            build_table([1, 2]).set_weight(0, -0.5)

    def test_version_bumps_only_on_change(self):
        t = build_table([1, 2])
        t.set_weight(0, 1)
        assert t.version == 0
        t.set_weight(0, 3)
        assert t.version == 1

    def test_append(self):
        t = build_table([1])
        assert t.append(7) == 1
        assert (t.total, t.max_bound, t.count_positive, len(t)) == (8, 7, 2, 2)

    def test_drift_resum_resets_counter(self):
        t = build_table([1.0, 2.0])
        for k in range(9):
            t.set_weight(k % 2, 0.1 * (k + 1))
        # 9 adjustments > 4 * 2 forces a from-scratch sum
        assert t._adjustments == 0
        assert t.total == math.fsum(t.weights)


class TestRebuildMax:
    def test_stale_max_rebuilt(self):
        t = build_table([1, 2, 3]).set_weight(2, 0)
        assert t.max_bound == 3
        assert rebuild_max(t).max_bound == 2

    def test_idempotent(self):
        assert rebuild_max(build_table([4, 4])).max_bound == 4

    def test_after_zeroing(self):
        t = build_table([0.1, 0.9, 0.5]).set_weight(1, 0)
        assert rebuild_max(t).max_bound == 0.5


class TestTargetDistribution:
    def test_fractions(self):
        assert target_distribution(build_table([1, 2, 3, 4])) == pytest.approx([0.1, 0.2, 0.3, 0.4], abs=1e-15)

    def test_singleton(self):
        assert target_distribution(build_table([7])) == [1.0]

    def test_degenerate(self):
        assert target_distribution(build_table([0, 1, 0])) == [0, 1, 0]

    @given(weights_st)
    def test_sums_to_one(self, ws):
        p = target_distribution(build_table(ws))
        assert all(x >= 0 for x in p)
        assert abs(math.fsum(p) - 1.0) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(
    weights_st,
    st.lists(
        st.tuples(st.integers(0, 49), st.floats(0.0, 1e6, allow_nan=False, allow_infinity=False)),
        max_size=200,
    ),
)
def test_incremental_total_and_max_bound(ws, updates):
    t = build_table(ws)
    for i, v in updates:
        if i >= len(t):
            continue
        t.set_weight(i, v)
        # max_bound never underestimates (exhaustive scan)
        assert all(w <= t.max_bound for w in t.weights)
        assert t.count_positive == sum(1 for w in t.weights if w > 0)
    exact = math.fsum(t.weights)
    assert abs(t.total - exact) <= 4 * EPS * math.fsum(abs(w) for w in t.weights)


def test_total_survives_cancellation():
    t = build_table([1e16, 1.0, 1.0])
    t.set_weight(0, 0.0)
    assert t.total == 2.0


class TestRandomSource:
    def test_reproducible(self):
        a, b = RandomSource(2**64 - 1), RandomSource(2**64 - 1)
        assert [a.random() for _ in range(100)] == [b.random() for _ in range(100)]
        assert [a.below(17) for _ in range(100)] == [b.below(17) for _ in range(100)]

    def test_distinct_seeds_differ(self):
        assert RandomSource(1).random() != RandomSource(2).random()

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        with pytest.raises(ValueError):
            RandomSource(seed)

    def test_ranges(self):
        rng = RandomSource(3)
        us = [rng.random() for _ in range(10_000)]
        assert all(0.0 <= u < 1.0 for u in us)
        ks = [rng.below(3) for _ in range(10_000)]
        assert set(ks) == {0, 1, 2}
        assert all(rng.below(1) == 0 for _ in range(100))


def test_attempt_stats():
    s = AttemptStats()
    assert math.isnan(s.mean_attempts)
    s.record(1)
    s.record(3)
    assert (s.draws, s.attempts, s.mean_attempts) == (2, 4, 2.0)
    assert s.rejection_rate == 0.5
    s.reset()
    assert (s.draws, s.attempts) == (0, 0)


def test_copy_is_independent():
    t = build_table([1, 2])
    c = t.copy()
    c.set_weight(0, 5)
    assert t.weights == [1, 2]
    assert isinstance(c, WeightTable) and c.total == 7


def test_build_residual_survives_removal():
    # fsum of the pair rounds at 2^20; removing the big weight must not expose that rounding
    t = build_table([786433.0, 262143.10641787632])
    t.set_weight(0, 0.0)
    assert t.total == 262143.10641787632


def test_total_after_near_total_cancellation():
    t = build_table([1.0, 1.838298606283977e-48])
    t.set_weight(0, 0.1)
    t.set_weight(0, 0.0)
    assert t.total == 1.838298606283977e-48
