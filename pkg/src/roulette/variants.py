"""Acceptance-based sampling variants.

* :class:`WithoutReplacementSampler` zeroes each drawn weight so it can never
  be proposed successfully again.
* :func:`draw_bounded` uses a known constant bound ``B`` instead of tracking
  the maximum.
* :class:`CutoffSampler` uses an acceptance constant ``A`` that may be below
  the maximum, which samples proportionally to ``min(w_i, A)``.
"""
from __future__ import annotations

import math
from typing import List, Tuple

from .core import RandomSource, WeightTable
from .errors import AttemptCapExceeded, Exhausted, InvalidBound, InvalidParameters
from .selectors import DEFAULT_ATTEMPT_CAP, AcceptanceEngine

__all__ = [
    "MAX_POLICIES",
    "WithoutReplacementSampler",
    "CutoffSampler",
    "draw_without_replacement",
    "draw_bounded",
    "draw_cutoff",
    "validate_bound",
]

MAX_POLICIES = ("stale", "rebuild")


class WithoutReplacementSampler:
    """Draws each positive-weight index at most once.

    The sampler works on a private copy of ``table``.  With
    ``max_policy="stale"`` the acceptance bound keeps the original maximum
    after the maximal individual is removed (cheaper per draw, more
    rejections later).  ``"rebuild"`` rescans for the new maximum whenever
    the current maximum is drawn.
    """

    def __init__(self, table: WeightTable, max_policy: str = "stale", attempt_cap: int = DEFAULT_ATTEMPT_CAP):
        if max_policy not in MAX_POLICIES:
            raise InvalidParameters(f"max_policy must be one of {MAX_POLICIES}, got {max_policy!r}")
        self.max_policy = max_policy
        self.table = table.copy()
        self.engine = AcceptanceEngine(self.table, attempt_cap=attempt_cap)
        self.remaining = self.table.count_positive
        self.drawn: List[int] = []

    @property
    def stats(self):
        return self.engine.stats

    @property
    def acceptance_bound(self) -> float:
        return self.table.max_bound

    def draw_with_attempts(self, rng: RandomSource) -> Tuple[int, int]:
        if self.remaining == 0:
            raise Exhausted("all individuals have been drawn")
        i, attempts = self.engine.select_with_attempts(rng)
        old = self.table.weights[i]
        self.table.set_weight(i, 0.0)
        self.remaining -= 1
        self.drawn.append(i)
        if self.max_policy == "rebuild" and old >= self.table.max_bound:
            self.table.rebuild_max()
        return i, attempts

    def draw(self, rng: RandomSource) -> int:
        return self.draw_with_attempts(rng)[0]

    def exhaust(self, rng: RandomSource) -> List[int]:
        """Draw every remaining individual; return the order."""
        order = []
        while self.remaining:
            order.append(self.draw(rng))
        return order


def draw_without_replacement(sampler: WithoutReplacementSampler, rng: RandomSource) -> int:
    return sampler.draw(rng)


def validate_bound(table: WeightTable, bound_B: float) -> None:
    """Upfront O(N) check that no weight exceeds ``bound_B``."""
    if not (math.isfinite(bound_B) and bound_B > 0.0):
        raise InvalidBound(f"bound must be finite and positive, got {bound_B}")
    worst = max(table.weights)
    if worst > bound_B:
        raise InvalidBound(f"weight {worst} exceeds bound {bound_B}")


def draw_bounded(
    table: WeightTable,
    bound_B: float,
    rng: RandomSource,
    attempt_cap: int = DEFAULT_ATTEMPT_CAP,
) -> Tuple[int, int]:
    """Acceptance selection with a caller-supplied constant bound.

    No maximum is consulted.  A weight above ``bound_B`` is only noticed
    when it is proposed, at which point :class:`InvalidBound` is raised.
    """
    if not (math.isfinite(bound_B) and bound_B > 0.0):
        raise InvalidBound(f"bound must be finite and positive, got {bound_B}")
    table.require_positive()
    weights = table.weights
    n = len(weights)
    below = rng.below
    rand = rng.random
    for attempt in range(1, attempt_cap + 1):
        i = below(n)
        w = weights[i]
        if w > bound_B:
            raise InvalidBound(f"weight {w} at index {i} exceeds bound {bound_B}")
        if rand() < w / bound_B:
            return i, attempt
    raise AttemptCapExceeded(attempt_cap)


class CutoffSampler(AcceptanceEngine):
    """Acceptance with constant ``A`` that may lie below the largest weight.

    Weights above ``A`` are always accepted once proposed, so the realised
    distribution is proportional to ``min(w_i, A)``.
    """

    name = "cutoff"

    def __init__(self, table: WeightTable, cutoff: float, attempt_cap: int = DEFAULT_ATTEMPT_CAP):
        if not (math.isfinite(cutoff) and cutoff > 0.0):
            raise InvalidBound(f"cut-off must be finite and positive, got {cutoff}")
        super().__init__(table, acceptance_bound=cutoff, attempt_cap=attempt_cap)

    @property
    def cutoff(self) -> float:
        return self.acceptance_bound

    def _checked_bound(self):
        return self.acceptance_bound

    def effective_weights(self) -> List[float]:
        a = self.acceptance_bound
        return [min(w, a) for w in self.table.weights]

    def effective_distribution(self) -> List[float]:
        self.table.require_positive()
        eff = self.effective_weights()
        total = math.fsum(eff)
        return [w / total for w in eff]

    def expected_attempts(self) -> float:
        # A * N / sum(min(w_i, A)); reduces to max/mean when A = max.
        return self.acceptance_bound * len(self.table) / math.fsum(self.effective_weights())

    def rejection_probability(self) -> float:
        return 1.0 - 1.0 / self.expected_attempts()


def draw_cutoff(sampler: CutoffSampler, rng: RandomSource) -> Tuple[int, int]:
    return sampler.select_with_attempts(rng)
