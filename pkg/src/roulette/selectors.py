"""Roulette-wheel selection engines.

Four interchangeable engines, all drawing index ``i`` with probability
``w_i / sum(w)``:

* :class:`LinearScanEngine` walks the cumulative sums, O(N) per draw.
* :class:`PrefixSumEngine` bisects a precomputed cumulative array, O(log N).
* :class:`AcceptanceEngine` proposes a uniform index and accepts it with
  probability ``w_i / bound``, O(bound / mean weight) expected proposals.
* :class:`HybridEngine` handles a few dominant weights exactly and runs the
  acceptance loop over the rest.

Every engine exposes ``select(rng) -> index`` and
``select_with_attempts(rng) -> (index, attempts)`` and keeps running
:class:`~roulette.core.AttemptStats` in ``engine.stats``.
"""
from __future__ import annotations

from bisect import bisect_right
from typing import List, Optional, Tuple

import numpy as np

from .core import AttemptStats, RandomSource, WeightTable
from .errors import AllZero, AttemptCapExceeded, InvalidBound, InvalidParameters, StaleEngine

__all__ = [
    "DEFAULT_ATTEMPT_CAP",
    "DEFAULT_HEAVY_FRACTION",
    "ENGINE_KINDS",
    "LinearScanEngine",
    "PrefixSumEngine",
    "AcceptanceEngine",
    "HybridEngine",
    "make_engine",
    "select_linear",
    "select_binary",
    "select_acceptance",
    "build_hybrid",
    "select_hybrid",
    "compensated_prefix",
]

DEFAULT_ATTEMPT_CAP = 10**7
DEFAULT_HEAVY_FRACTION = 0.1


def compensated_prefix(weights) -> List[float]:
    """Cumulative sums built with Neumaier compensation.

    ``LinearScanEngine.locate`` repeats exactly this arithmetic, which is what
    makes the linear and binary engines agree bit-for-bit.
    """
    out = []
    s = 0.0
    c = 0.0
    for w in weights:
        t = s + w
        if s >= w:
            c += (s - t) + w
        else:
            c += (w - t) + s
        s = t
        out.append(s + c)
    # Rounding of s + c can in principle dip by an ulp; bisect needs
    # monotone input.  Running max keeps "first prefix above r" unchanged.
    hi = 0.0
    for k, v in enumerate(out):
        if v < hi:
            out[k] = hi
        else:
            hi = v
    return out


def _last_positive(weights) -> int:
    for i in range(len(weights) - 1, -1, -1):
        if weights[i] > 0.0:
            return i
    raise AllZero("all weights are zero")


def _accept_loop(weights, bound, rng, cap) -> Tuple[int, int]:
    n = len(weights)
    below = rng.below
    rand = rng.random
    for attempt in range(1, cap + 1):
        i = below(n)
        if rand() < weights[i] / bound:
            return i, attempt
    raise AttemptCapExceeded(cap)


class _Engine:
    name = "engine"

    def __init__(self, table: WeightTable):
        self.table = table
        self.stats = AttemptStats()

    def select(self, rng: RandomSource) -> int:
        return self.select_with_attempts(rng)[0]

    def select_with_attempts(self, rng: RandomSource) -> Tuple[int, int]:
        raise NotImplementedError

    def select_many(self, rng: RandomSource, size: int) -> Tuple[np.ndarray, np.ndarray]:
        """Draw ``size`` indices; return ``(indices, attempts)`` arrays."""
        idx = np.empty(size, dtype=np.int64)
        att = np.empty(size, dtype=np.int64)
        draw = self.select_with_attempts
        for k in range(size):
            idx[k], att[k] = draw(rng)
        return idx, att

    def expected_attempts(self) -> float:
        return 1.0

    # Mutation helpers.  Engines that cache table-derived state override
    # these so that updates go through them instead of invalidating them.
    def set_weight(self, index: int, value: float) -> None:
        self.table.set_weight(index, value)

    def append(self, value: float) -> int:
        return self.table.append(value)

    def refresh(self) -> None:
        """Bring cached state up to date with the table (no-op by default)."""


class LinearScanEngine(_Engine):
    """Sequential search for the sector holding ``r = u * total``."""

    name = "linear"

    def locate(self, u: float) -> int:
        table = self.table
        r = u * table.total
        s = 0.0
        c = 0.0
        for i, w in enumerate(table.weights):
            t = s + w
            if s >= w:
                c += (s - t) + w
            else:
                c += (w - t) + s
            s = t
            if r < s + c:
                return i
        # r rounded onto/above the final cumulative sum
        return _last_positive(table.weights)

    def select_with_attempts(self, rng):
        self.table.require_positive()
        i = self.locate(rng.random())
        self.stats.draws += 1
        self.stats.attempts += 1
        return i, 1


class PrefixSumEngine(_Engine):
    """Binary search over cumulative sums; must be rebuilt after updates."""

    name = "binary"

    def __init__(self, table: WeightTable):
        super().__init__(table)
        self.rebuild()

    def rebuild(self) -> None:
        table = self.table
        self.prefix = compensated_prefix(table.weights)
        self._fallback = _last_positive(table.weights) if table.count_positive else -1
        self._version = table.version

    def refresh(self) -> None:
        if self._version != self.table.version:
            self.rebuild()

    @property
    def is_stale(self) -> bool:
        return self._version != self.table.version

    def locate(self, u: float) -> int:
        if self._version != self.table.version:
            raise StaleEngine("weight table modified since the prefix sums were built")
        i = bisect_right(self.prefix, u * self.table.total)
        if i == len(self.prefix):
            return self._fallback
        return i

    def select_with_attempts(self, rng):
        self.table.require_positive()
        i = self.locate(rng.random())
        self.stats.draws += 1
        self.stats.attempts += 1
        return i, 1


class AcceptanceEngine(_Engine):
    """Stochastic acceptance: uniform proposal, accept with ``w_i / bound``.

    With ``acceptance_bound=None`` the table's ``max_bound`` is read at every
    call, so incremental updates are picked up without rebuilding.  A fixed
    bound must not be below ``max_bound``.
    """

    name = "acceptance"

    def __init__(
        self,
        table: WeightTable,
        acceptance_bound: Optional[float] = None,
        attempt_cap: int = DEFAULT_ATTEMPT_CAP,
    ):
        super().__init__(table)
        if attempt_cap < 1:
            raise InvalidParameters("attempt_cap must be >= 1")
        if acceptance_bound is not None and not acceptance_bound > 0.0:
            raise InvalidBound(f"acceptance bound must be positive, got {acceptance_bound}")
        self.acceptance_bound = acceptance_bound
        self.attempt_cap = attempt_cap

    @property
    def bound(self) -> float:
        if self.acceptance_bound is None:
            return self.table.max_bound
        return self.acceptance_bound

    def _checked_bound(self) -> float:
        table = self.table
        if self.acceptance_bound is None:
            return table.max_bound
        if self.acceptance_bound < table.max_bound:
            raise InvalidBound(
                f"acceptance bound {self.acceptance_bound} is below the largest weight bound {table.max_bound}"
            )
        return self.acceptance_bound

    def select_with_attempts(self, rng):
        self.table.require_positive()
        i, attempts = _accept_loop(self.table.weights, self._checked_bound(), rng, self.attempt_cap)
        self.stats.draws += 1
        self.stats.attempts += attempts
        return i, attempts

    def select_many(self, rng, size, chunk=1 << 20):
        """Vectorised acceptance loop.

        Proposals are generated in blocks by a numpy generator seeded from
        ``rng``; accepted proposals are taken in order, so draw ``k`` costs
        the number of proposals since draw ``k - 1`` exactly as in the scalar
        loop.  The index stream differs from repeated :meth:`select` calls.
        """
        self.table.require_positive()
        ratio = np.asarray(self.table.weights, dtype=np.float64) / self._checked_bound()
        n = ratio.size
        gen = np.random.Generator(np.random.SFC64(rng.getrandbits(64)))
        idx = np.empty(size, dtype=np.int64)
        att = np.empty(size, dtype=np.int64)
        filled = 0
        pending = 0
        cap = self.attempt_cap
        while filled < size:
            prop = gen.integers(0, n, chunk)
            hits = np.flatnonzero(gen.random(chunk) < ratio[prop])
            if hits.size == 0:
                pending += chunk
            else:
                hits = hits[: size - filled]
                gaps = np.diff(hits, prepend=-1)
                gaps[0] += pending
                if gaps.max() > cap:
                    raise AttemptCapExceeded(cap)
                idx[filled : filled + hits.size] = prop[hits]
                att[filled : filled + hits.size] = gaps
                filled += hits.size
                pending = chunk - 1 - int(hits[-1])
            if pending > cap:
                raise AttemptCapExceeded(cap)
        self.stats.draws += size
        self.stats.attempts += int(att.sum())
        return idx, att

    def expected_attempts(self) -> float:
        table = self.table
        return self.bound * len(table) / table.total

    def rejection_probability(self) -> float:
        table = self.table
        return 1.0 - table.total / (len(table) * self.bound)


class HybridEngine(_Engine):
    """Exact CDF over dominant weights plus acceptance over the remainder.

    Indices with ``w_i > threshold_fraction * total`` form the heavy set.
    With probability ``p_heavy`` one of them is chosen by bisection over their
    cumulative weights; otherwise the acceptance loop runs over the residual
    indices with a bound equal to the residual maximum.

    Updates made through :meth:`set_weight` / :meth:`append` keep the
    partition usable (an updated index may move between the two sets).
    Updates made directly on the table make the engine stale.
    """

    name = "hybrid"

    def __init__(
        self,
        table: WeightTable,
        threshold_fraction: float = DEFAULT_HEAVY_FRACTION,
        attempt_cap: int = DEFAULT_ATTEMPT_CAP,
    ):
        super().__init__(table)
        if not 0.0 < threshold_fraction < 1.0:
            raise InvalidParameters(f"threshold_fraction must be in (0, 1), got {threshold_fraction}")
        if attempt_cap < 1:
            raise InvalidParameters("attempt_cap must be >= 1")
        table.require_positive()
        self.threshold_fraction = threshold_fraction
        self.attempt_cap = attempt_cap
        self.rebuild()

    def rebuild(self) -> None:
        """Recompute the heavy/residual partition from scratch, O(N)."""
        table = self.table
        cut = self.threshold_fraction * table.total
        self.heavy: List[int] = []
        self._heavy_w: List[float] = []
        self._res_idx: List[int] = []
        self._res_w: List[float] = []
        self._res_pos = {}
        for i, w in enumerate(table.weights):
            if w > cut:
                self.heavy.append(i)
                self._heavy_w.append(w)
            else:
                self._res_pos[i] = len(self._res_idx)
                self._res_idx.append(i)
                self._res_w.append(w)
        self._res_max = max(self._res_w, default=0.0)
        self._res_positive = sum(1 for w in self._res_w if w > 0.0)
        self._heavy_dirty = True
        self._version = table.version

    @property
    def residual(self) -> List[int]:
        return list(self._res_idx)

    @property
    def residual_max(self) -> float:
        return self._res_max

    def _rebuild_heavy(self):
        self._heavy_prefix = compensated_prefix(self._heavy_w)
        self._heavy_total = self._heavy_prefix[-1] if self._heavy_prefix else 0.0
        self._heavy_dirty = False

    def _check_current(self):
        if self._version != self.table.version:
            raise StaleEngine("weight table modified outside the hybrid engine")

    @property
    def p_heavy(self) -> float:
        if self._heavy_dirty:
            self._rebuild_heavy()
        if not self.heavy:
            return 0.0
        if self._res_positive == 0:
            return 1.0
        return min(self._heavy_total / self.table.total, 1.0)

    def select_with_attempts(self, rng):
        self._check_current()
        self.table.require_positive()
        p_heavy = self.p_heavy
        if p_heavy > 0.0:
            u = rng.random()
            if u < p_heavy:
                k = bisect_right(self._heavy_prefix, (u / p_heavy) * self._heavy_total)
                if k == len(self._heavy_prefix):
                    k = _last_positive(self._heavy_w)
                self.stats.draws += 1
                self.stats.attempts += 1
                return self.heavy[k], 1
        k, attempts = _accept_loop(self._res_w, self._res_max, rng, self.attempt_cap)
        self.stats.draws += 1
        self.stats.attempts += attempts
        return self._res_idx[k], attempts

    def expected_attempts(self) -> float:
        p = self.p_heavy
        if p >= 1.0:
            return 1.0
        res_total = self.table.total - self._heavy_total
        tau_res = self._res_max * len(self._res_w) / res_total
        return p + (1.0 - p) * tau_res

    def rejection_probability(self) -> float:
        """Per-proposal rejection probability inside the residual loop."""
        if not self._res_w or self._res_positive == 0:
            return 0.0
        if self._heavy_dirty:
            self._rebuild_heavy()
        res_total = self.table.total - self._heavy_total
        return 1.0 - res_total / (len(self._res_w) * self._res_max)

    # -- incremental maintenance -------------------------------------------

    def _residual_remove(self, index):
        k = self._res_pos.pop(index)
        w = self._res_w[k]
        last_i = self._res_idx.pop()
        last_w = self._res_w.pop()
        if k < len(self._res_idx):
            self._res_idx[k] = last_i
            self._res_w[k] = last_w
            self._res_pos[last_i] = k
        if w > 0.0:
            self._res_positive -= 1
        if w >= self._res_max:
            self._res_max = max(self._res_w, default=0.0)

    def _residual_add(self, index, value):
        self._res_pos[index] = len(self._res_idx)
        self._res_idx.append(index)
        self._res_w.append(value)
        if value > 0.0:
            self._res_positive += 1
        if value > self._res_max:
            self._res_max = value

    def _place(self, index, old, value):
        cut = self.threshold_fraction * self.table.total
        if index in self._res_pos:
            if value > cut:
                self._residual_remove(index)
                self.heavy.append(index)
                self._heavy_w.append(value)
                self._heavy_dirty = True
                return
            k = self._res_pos[index]
            self._res_w[k] = value
            if old > 0.0 and value == 0.0:
                self._res_positive -= 1
            elif old == 0.0 and value > 0.0:
                self._res_positive += 1
            if value > self._res_max:
                self._res_max = value
            # a decrease keeps the old maximum as a valid, looser bound
        else:
            k = self.heavy.index(index)
            if value > cut:
                self._heavy_w[k] = value
            else:
                del self.heavy[k]
                del self._heavy_w[k]
                self._residual_add(index, value)
            self._heavy_dirty = True

    def set_weight(self, index: int, value: float) -> None:
        self._check_current()
        old = self.table.weights[index] if 0 <= index < len(self.table) else None
        self.table.set_weight(index, value)
        if old is not None and self.table.weights[index] != old:
            self._place(index, old, self.table.weights[index])
        self._version = self.table.version

    def append(self, value: float) -> int:
        self._check_current()
        i = self.table.append(value)
        w = self.table.weights[i]
        if w > self.threshold_fraction * self.table.total:
            self.heavy.append(i)
            self._heavy_w.append(w)
            self._heavy_dirty = True
        else:
            self._residual_add(i, w)
        self._version = self.table.version
        return i


ENGINE_KINDS = {
    "linear": LinearScanEngine,
    "binary": PrefixSumEngine,
    "acceptance": AcceptanceEngine,
    "hybrid": HybridEngine,
}


def make_engine(kind: str, table: WeightTable, **options) -> _Engine:
    try:
        cls = ENGINE_KINDS[kind]
    except KeyError:
        raise InvalidParameters(
            f"unknown engine {kind!r}; expected one of {', '.join(ENGINE_KINDS)}"
        ) from None
    return cls(table, **options)


def select_linear(engine: LinearScanEngine, rng: RandomSource) -> int:
    return engine.select(rng)


def select_binary(engine: PrefixSumEngine, rng: RandomSource) -> int:
    return engine.select(rng)


def select_acceptance(engine: AcceptanceEngine, rng: RandomSource) -> Tuple[int, int]:
    return engine.select_with_attempts(rng)


def build_hybrid(table: WeightTable, threshold_fraction: float = DEFAULT_HEAVY_FRACTION) -> HybridEngine:
    return HybridEngine(table, threshold_fraction)


def select_hybrid(engine: HybridEngine, rng: RandomSource) -> Tuple[int, int]:
    return engine.select_with_attempts(rng)
