"""Goodness-of-fit and attempt-count checks for the selection engines."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

import numpy as np

from .core import RandomSource, WeightTable
from .errors import InsufficientDraws, InvalidDof

__all__ = [
    "FrequencyReport",
    "AttemptReport",
    "chi_square_p_value",
    "regularized_gamma_q",
    "frequency_report",
    "run_frequency_test",
    "run_attempt_test",
    "POOL_THRESHOLD",
    "DEFAULT_ALPHA",
]

POOL_THRESHOLD = 5.0
DEFAULT_ALPHA = 1e-3

_EPS = 1e-10
_TINY = 1e-300
_MAX_ITER = 10_000


def _gamma_series_p(a, x):
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum x^n / ((a+1)...(a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf_q(a, x):
    # Modified Lentz evaluation of the continued fraction for Q(a, x).
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma function ``Q(a, x)``."""
    if a <= 0.0:
        raise ValueError("a must be positive")
    if x < 0.0:
        raise ValueError("x must be non-negative")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series_p(a, x))
    return min(1.0, _gamma_cf_q(a, x))


def chi_square_p_value(statistic: float, dof: int) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if isinstance(dof, bool) or int(dof) != dof or dof < 1:
        raise InvalidDof(f"degrees of freedom must be a positive integer, got {dof!r}")
    if math.isnan(statistic) or statistic < 0.0:
        raise ValueError(f"chi-square statistic must be >= 0, got {statistic}")
    return regularized_gamma_q(dof / 2.0, statistic / 2.0)


@dataclass
class FrequencyReport:
    counts: List[int]
    total_draws: int
    chi_square: float
    degrees_of_freedom: int
    p_value: float
    total_variation: float

    def tv_tolerance(self) -> float:
        """Default total-variation tolerance, ``5 * sqrt(N / draws)``."""
        return 5.0 * math.sqrt(len(self.counts) / self.total_draws)

    def passes(self, alpha: float = DEFAULT_ALPHA, tv_tolerance: Optional[float] = None) -> bool:
        if tv_tolerance is None:
            tv_tolerance = self.tv_tolerance()
        return self.p_value > alpha and self.total_variation < tv_tolerance

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AttemptReport:
    draws: int
    mean_attempts: float
    std_error: float
    predicted_tau: float
    predicted_q: float
    z_score: float

    def to_dict(self) -> dict:
        return asdict(self)


def frequency_report(counts: Sequence[int], probabilities: Sequence[float]) -> FrequencyReport:
    """Chi-square and total-variation comparison of counts with target probabilities.

    Cells whose expected count is below 5 are pooled into one bucket.  If
    that bucket is itself below 5 it is folded into the smallest regular
    bucket.  An observation in a zero-probability cell yields an infinite
    statistic and a p-value of 0.
    """
    counts = [int(c) for c in counts]
    if len(counts) != len(probabilities):
        raise ValueError("counts and probabilities differ in length")
    total = sum(counts)
    if total <= 0:
        raise InsufficientDraws("no draws recorded")
    tv = 0.5 * math.fsum(abs(c / total - p) for c, p in zip(counts, probabilities))
    tv = min(tv, 1.0)

    impossible = any(c > 0 and p == 0.0 for c, p in zip(counts, probabilities))
    buckets = []
    pooled_obs = 0
    pooled_exp = 0.0
    for c, p in zip(counts, probabilities):
        e = p * total
        if e >= POOL_THRESHOLD:
            buckets.append([c, e])
        else:
            pooled_obs += c
            pooled_exp += e
    if pooled_exp >= POOL_THRESHOLD:
        buckets.append([pooled_obs, pooled_exp])
    elif pooled_exp > 0.0 or pooled_obs > 0:
        if buckets:
            smallest = min(buckets, key=lambda b: b[1])
            smallest[0] += pooled_obs
            smallest[1] += pooled_exp
        else:
            buckets.append([pooled_obs, pooled_exp])

    dof = len(buckets) - 1
    if impossible:
        chi2 = math.inf
        p_value = 0.0
        dof = max(dof, 1)
    else:
        chi2 = math.fsum((o - e) ** 2 / e for o, e in buckets)
        p_value = chi_square_p_value(chi2, dof) if dof >= 1 else 1.0
    return FrequencyReport(
        counts=counts,
        total_draws=total,
        chi_square=chi2,
        degrees_of_freedom=dof,
        p_value=p_value,
        total_variation=tv,
    )


def run_frequency_test(
    engine,
    table: WeightTable,
    draws: int,
    seed: int,
    probabilities: Optional[Sequence[float]] = None,
    batch: bool = False,
) -> FrequencyReport:
    """Draw ``draws`` selections from ``engine`` and compare with the target.

    ``probabilities`` defaults to ``w_i / sum(w)`` of ``table``; pass the
    clipped distribution when testing a cut-off sampler.  With ``batch=True``
    the engine's vectorised ``select_many`` is used.
    """
    n = len(table)
    if draws < 10 * n:
        raise InsufficientDraws(f"need at least {10 * n} draws for {n} weights, got {draws}")
    if probabilities is None:
        probabilities = table.target_distribution()
    rng = RandomSource(seed)
    if batch:
        idx, _ = engine.select_many(rng, draws)
        counts = np.bincount(idx, minlength=n).tolist()
    else:
        counts = [0] * n
        select = engine.select
        for _ in range(draws):
            counts[select(rng)] += 1
    return frequency_report(counts, probabilities)


def run_attempt_test(engine, draws: int, seed: int, batch: bool = False) -> AttemptReport:
    """Compare the empirical mean number of proposals with the engine's prediction."""
    if draws < 10_000:
        raise InsufficientDraws(f"attempt test needs at least 10^4 draws, got {draws}")
    rng = RandomSource(seed)
    if batch:
        _, att = engine.select_many(rng, draws)
        att = att.tolist()
        total = sum(att)
        total_sq = sum(a * a for a in att)
    else:
        total = 0
        total_sq = 0
        draw = engine.select_with_attempts
        for _ in range(draws):
            a = draw(rng)[1]
            total += a
            total_sq += a * a
    mean = total / draws
    # integer numerator: no cancellation in the sum of squared deviations
    ss = (total_sq * draws - total * total) / draws
    var = max(ss, 0.0) / (draws - 1)
    se = math.sqrt(var / draws)
    tau = engine.expected_attempts()
    if se > 0.0:
        z = (mean - tau) / se
    else:
        z = 0.0 if math.isclose(mean, tau, rel_tol=1e-12) else math.copysign(math.inf, mean - tau)
    return AttemptReport(
        draws=draws,
        mean_attempts=mean,
        std_error=se,
        predicted_tau=tau,
        predicted_q=engine.rejection_probability(),
        z_score=z,
    )
