"""Weight storage, randomness source and attempt bookkeeping.

Everything the selection engines share lives here.  A :class:`WeightTable`
keeps the fitness values together with a compensated running total and an
upper bound on the largest weight, so that engines can read ``total`` and
``max_bound`` in O(1).
"""
from __future__ import annotations

import itertools
import math
import random
import sys
from dataclasses import dataclass
from typing import Iterable, List

from .errors import AllZero, EmptyPopulation, IndexOutOfRange, InvalidWeight

__all__ = [
    "RandomSource",
    "AttemptStats",
    "WeightTable",
    "build_table",
    "set_weight",
    "rebuild_max",
    "target_distribution",
]

_SEED_LIMIT = 1 << 64
_UNIT_ROUNDOFF = sys.float_info.epsilon / 2


class RandomSource(random.Random):
    """Seeded, reproducible source of uniform variates.

    Two primitives are used by the engines: :meth:`random` for a unit
    variate in ``[0, 1)`` and :meth:`below` for an integer in ``[0, n)``.
    The same seed always reproduces the same stream.
    """

    def __init__(self, seed: int = 0):
        seed = int(seed)
        if not 0 <= seed < _SEED_LIMIT:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed_value = seed
        super().__init__(seed)

    # Exact rejection-based integer draw from the stdlib (no modulo bias).
    # Aliased rather than wrapped: this sits in the innermost loop.
    below = random.Random._randbelow

    def __repr__(self):
        return f"RandomSource(seed={self.seed_value})"


@dataclass
class AttemptStats:
    """Counts of completed selections and candidate proposals."""

    draws: int = 0
    attempts: int = 0

    def record(self, attempts: int = 1) -> None:
        self.draws += 1
        self.attempts += attempts

    def reset(self) -> None:
        self.draws = 0
        self.attempts = 0

    @property
    def mean_attempts(self) -> float:
        if self.draws == 0:
            return float("nan")
        return self.attempts / self.draws

    @property
    def rejection_rate(self) -> float:
        """Empirical rejection probability, ``1 - draws / attempts``."""
        if self.attempts == 0:
            return float("nan")
        return 1.0 - self.draws / self.attempts


def _check_weight(value) -> float:
    try:
        w = float(value)
    except (TypeError, ValueError):
        raise InvalidWeight(f"weight {value!r} is not a real number") from None
    if not math.isfinite(w) or w < 0.0:
        raise InvalidWeight(f"weight must be finite and >= 0, got {value!r}")
    return w


class WeightTable:
    """Non-negative weights with a maintained total and maximum bound.

    ``max_bound`` is exact after construction and after increases.  When the
    largest weight is decreased the old value is kept as a (stale) upper
    bound; call :meth:`rebuild_max` to tighten it.  ``version`` increments on
    every weight change so that snapshot-based engines can detect staleness.
    """

    __slots__ = (
        "weights",
        "max_bound",
        "count_positive",
        "version",
        "_sum",
        "_comp",
        "_adjustments",
        "_mag",
    )

    def __init__(self, weights: Iterable[float]):
        ws = [_check_weight(w) for w in weights]
        if not ws:
            raise EmptyPopulation("weight sequence is empty")
        self.weights: List[float] = ws
        self.count_positive = sum(1 for w in ws if w > 0.0)
        if self.count_positive == 0:
            raise AllZero("at least one weight must be positive")
        self.max_bound = max(ws)
        self.version = 0
        self._resum()

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, index):
        return self.weights[index]

    def __repr__(self):
        return (
            f"WeightTable(n={len(self.weights)}, total={self.total!r}, "
            f"max_bound={self.max_bound!r}, count_positive={self.count_positive})"
        )

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> float:
        return self._sum + self._comp

    @property
    def mean(self) -> float:
        return self.total / len(self.weights)

    def _resum(self):
        self._sum = math.fsum(self.weights)
        # keep the rounding residual so later cancellation does not expose it
        self._comp = math.fsum(itertools.chain(self.weights, (-self._sum,)))
        self._adjustments = 0
        # sum of |terms| fed to the accumulator since the last resum
        self._mag = self._sum

    def _accumulate(self, x):
        # Neumaier's variant of compensated summation.
        s = self._sum
        t = s + x
        if abs(s) >= abs(x):
            self._comp += (s - t) + x
        else:
            self._comp += (x - t) + s
        self._sum = t

    def require_positive(self) -> None:
        if self.count_positive == 0:
            raise AllZero("all weights are zero")

    def set_weight(self, index: int, value: float) -> "WeightTable":
        n = len(self.weights)
        if not 0 <= index < n:
            raise IndexOutOfRange(f"index {index} out of range for {n} weights")
        value = _check_weight(value)
        old = self.weights[index]
        if value == old:
            return self
        self.weights[index] = value
        self._accumulate(value)
        self._accumulate(-old)
        self._adjustments += 1
        self._mag += value + old
        # second branch: heavy cancellation, where the accumulator's
        # k * u^2 * magnitude error term could rival u * total
        if self._adjustments > 4 * n or 8 * self._adjustments * _UNIT_ROUNDOFF * self._mag > self.total:
            self._resum()
        if old > 0.0 and value == 0.0:
            self.count_positive -= 1
        elif old == 0.0 and value > 0.0:
            self.count_positive += 1
        if value > self.max_bound:
            self.max_bound = value
        self.version += 1
        return self

    def append(self, value: float) -> int:
        """Grow the population by one individual; return its index."""
        value = _check_weight(value)
        self.weights.append(value)
        self._accumulate(value)
        self._adjustments += 1
        self._mag += value
        if value > 0.0:
            self.count_positive += 1
        if value > self.max_bound:
            self.max_bound = value
        self.version += 1
        return len(self.weights) - 1

    def rebuild_max(self) -> "WeightTable":
        """Replace a possibly stale ``max_bound`` with the exact maximum."""
        self.max_bound = max(self.weights)
        return self

    def target_distribution(self) -> List[float]:
        self.require_positive()
        total = self.total
        return [w / total for w in self.weights]

    def copy(self) -> "WeightTable":
        clone = WeightTable.__new__(WeightTable)
        clone.weights = list(self.weights)
        clone.max_bound = self.max_bound
        clone.count_positive = self.count_positive
        clone.version = 0
        clone._sum = self._sum
        clone._comp = self._comp
        clone._adjustments = self._adjustments
        clone._mag = self._mag
        return clone


def build_table(weights: Iterable[float]) -> WeightTable:
    return WeightTable(weights)


def set_weight(table: WeightTable, index: int, value: float) -> WeightTable:
    return table.set_weight(index, value)


def rebuild_max(table: WeightTable) -> WeightTable:
    return table.rebuild_max()


def target_distribution(table: WeightTable) -> List[float]:
    """Selection probabilities ``w_i / sum(w)``."""
    return table.target_distribution()
