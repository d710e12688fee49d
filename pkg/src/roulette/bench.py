"""Synthetic workloads, timing harness, CSV export and verification suites."""
from __future__ import annotations

import csv
import json
import math
import re
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .core import RandomSource, WeightTable
from .errors import BenchError, InvalidParameters, InvalidSpec, SelectionError
from .selectors import ENGINE_KINDS, AcceptanceEngine, HybridEngine, make_engine
from .stats import frequency_report, run_attempt_test, run_frequency_test
from .variants import CutoffSampler, WithoutReplacementSampler, draw_bounded

__all__ = [
    "DistributionSpec",
    "BenchRecord",
    "generate_weights",
    "run_bench",
    "export_csv",
    "read_csv",
    "run_verify",
    "render_report",
    "SUITES",
    "CSV_FIELDS",
]

POWER_LAW_CAP = 1e9
CSV_FIELDS = ("method", "n", "dist", "samples", "ns_per_select", "mean_attempts", "seed")
KINDS = ("uniform01", "constant", "two-level", "power-law")

_NUM = r"([0-9.eE+-]+)"


@dataclass(frozen=True)
class DistributionSpec:
    """A named synthetic weight distribution.

    Textual form: ``uniform01``, ``constant``, ``two-level:VALUE:COUNT`` or
    ``power-law:EXPONENT``.
    """

    kind: str
    heavy_value: Optional[float] = None
    heavy_count: Optional[int] = None
    exponent: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown distribution kind {self.kind!r}")
        if self.kind == "two-level":
            if self.heavy_value is None or self.heavy_count is None:
                raise InvalidSpec("two-level needs a heavy value and a heavy count")
            if not (math.isfinite(self.heavy_value) and self.heavy_value >= 0.0):
                raise InvalidSpec(f"heavy value must be finite and >= 0, got {self.heavy_value}")
            if self.heavy_count < 1:
                raise InvalidSpec(f"heavy count must be >= 1, got {self.heavy_count}")
        if self.kind == "power-law":
            if self.exponent is None or not (math.isfinite(self.exponent) and self.exponent > 1.0):
                raise InvalidSpec(f"power-law exponent must be > 1, got {self.exponent}")

    @classmethod
    def parse(cls, text: str) -> "DistributionSpec":
        text = text.strip()
        if text in ("uniform01", "constant"):
            return cls(text)
        m = re.fullmatch(r"two[-_]level:" + _NUM + ":" + r"(\d+)", text)
        if m:
            try:
                return cls("two-level", heavy_value=float(m.group(1)), heavy_count=int(m.group(2)))
            except ValueError:
                pass
        m = re.fullmatch(r"power[-_]law:" + _NUM, text)
        if m:
            try:
                return cls("power-law", exponent=float(m.group(1)))
            except ValueError:
                pass
        raise InvalidSpec(
            f"cannot parse distribution {text!r}; expected uniform01, constant, "
            "two-level:VALUE:COUNT or power-law:EXPONENT"
        )

    def __str__(self):
        if self.kind == "two-level":
            return f"two-level:{self.heavy_value:g}:{self.heavy_count}"
        if self.kind == "power-law":
            return f"power-law:{self.exponent:g}"
        return self.kind


def _open_unit(rng):
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u


def generate_weights(spec: DistributionSpec, n: int, seed: int) -> WeightTable:
    if n < 1:
        raise InvalidSpec(f"population size must be >= 1, got {n}")
    rng = RandomSource(seed)
    if spec.kind == "uniform01":
        ws = [_open_unit(rng) for _ in range(n)]
    elif spec.kind == "constant":
        ws = [1.0] * n
    elif spec.kind == "two-level":
        if spec.heavy_count > n:
            raise InvalidSpec(f"heavy count {spec.heavy_count} exceeds population size {n}")
        if spec.heavy_value == 0.0 and spec.heavy_count == n:
            raise InvalidSpec("two-level spec produces no positive weight")
        ws = [float(spec.heavy_value)] * spec.heavy_count + [1.0] * (n - spec.heavy_count)
    else:
        power = -1.0 / (spec.exponent - 1.0)
        ws = [min(_open_unit(rng) ** power, POWER_LAW_CAP) for _ in range(n)]
    return WeightTable(ws)


@dataclass
class BenchRecord:
    method: str
    n: int
    dist: str
    samples: int
    ns_per_select: float
    mean_attempts: float
    seed: int
    # not part of the CSV row
    build_ns: float = field(default=0.0, compare=False)
    checksum: int = field(default=0, compare=False)

    def row(self) -> List[str]:
        return [
            self.method,
            str(self.n),
            self.dist,
            str(self.samples),
            repr(float(self.ns_per_select)),
            repr(float(self.mean_attempts)),
            str(self.seed),
        ]


def run_bench(
    methods: Sequence[str],
    n_list: Sequence[int],
    spec: DistributionSpec,
    samples: int,
    warmup: int,
    seed: int,
    clock: Callable[[], int] = time.perf_counter_ns,
) -> List[BenchRecord]:
    """Time single selections for every ``(method, n)`` pair.

    Engine construction is timed separately (``build_ns``).  Selected
    indices are summed into ``checksum`` so the timed loop does real work
    whose result is kept.
    """
    if samples < 1000:
        raise InvalidParameters(f"samples must be >= 1000 for stable timing, got {samples}")
    if warmup < 100:
        raise InvalidParameters(f"warmup must be >= 100, got {warmup}")
    unknown = [m for m in methods if m not in ENGINE_KINDS]
    if unknown:
        raise InvalidParameters(f"unknown method(s) {', '.join(unknown)}; expected one of {', '.join(ENGINE_KINDS)}")
    records = []
    for n in n_list:
        table = generate_weights(spec, n, seed)
        for method in methods:
            try:
                t0 = clock()
                engine = make_engine(method, table)
                build_ns = clock() - t0
                rng = RandomSource(seed)
                select = engine.select
                checksum = 0
                for _ in range(warmup):
                    checksum += select(rng)
                engine.stats.reset()
                t0 = clock()
                for _ in range(samples):
                    checksum += select(rng)
                elapsed = clock() - t0
            except SelectionError as exc:
                raise BenchError(f"{method} on {spec} with n={n}: {exc}") from exc
            records.append(
                BenchRecord(
                    method=method,
                    n=n,
                    dist=str(spec),
                    samples=samples,
                    ns_per_select=max(elapsed, 1) / samples,
                    mean_attempts=engine.stats.mean_attempts,
                    seed=seed,
                    build_ns=float(build_ns),
                    checksum=checksum,
                )
            )
    return records


def export_csv(records: Sequence[BenchRecord], path) -> None:
    if not records:
        raise ValueError("no benchmark records to export")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for rec in records:
            writer.writerow(rec.row())


def read_csv(path) -> List[BenchRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [
            BenchRecord(
                method=row["method"],
                n=int(row["n"]),
                dist=row["dist"],
                samples=int(row["samples"]),
                ns_per_select=float(row["ns_per_select"]),
                mean_attempts=float(row["mean_attempts"]),
                seed=int(row["seed"]),
            )
            for row in reader
        ]


# -- verification suites ------------------------------------------------------


def _check(name, passed, observed, expected, tolerance):
    return {
        "name": name,
        "pass": bool(passed),
        "observed": observed,
        "expected": expected,
        "tolerance": tolerance,
    }


def _near(name, observed, expected, tolerance):
    return _check(name, abs(observed - expected) <= tolerance, observed, expected, tolerance)


def _frequency_checks(label, report, tv_tolerance=None):
    if tv_tolerance is None:
        tv_tolerance = report.tv_tolerance()
    return [
        _check(f"{label}/p_value>alpha", report.p_value > 1e-3, report.p_value, 1e-3, None),
        _check(f"{label}/total_variation<tol", report.total_variation < tv_tolerance,
               report.total_variation, 0.0, tv_tolerance),
    ]


def _suite_frequency(seed, draws):
    rng = RandomSource(seed)
    tables = {"[1,2,3,4]": [1, 2, 3, 4], "[0,1,0]": [0, 1, 0], "[9,1]": [9, 1]}
    for k in range(5):
        n = 2 + rng.below(63)
        tables[f"random{k}(n={n})"] = [_open_unit(rng) for _ in range(n)]
    checks = []
    for label, ws in tables.items():
        table = WeightTable(ws)
        for kind in ("linear", "binary", "acceptance", "hybrid"):
            report = run_frequency_test(make_engine(kind, table), table, draws, seed)
            checks += _frequency_checks(f"{kind}/{label}", report)
    return checks


def _suite_attempts(seed, draws):
    checks = []
    table = generate_weights(DistributionSpec("uniform01"), 10_000, seed)
    rep = run_attempt_test(AcceptanceEngine(table), draws, seed)
    checks.append(_near("uniform01(n=1e4)/mean_attempts", rep.mean_attempts, 2.0, 0.05))
    checks.append(_check("uniform01(n=1e4)/|z|<=4", abs(rep.z_score) <= 4.0, rep.z_score, 0.0, 4.0))
    rep = run_attempt_test(AcceptanceEngine(WeightTable([0.25] * 100)), draws, seed)
    checks.append(_near("equal/mean_attempts", rep.mean_attempts, 1.0, 0.0))
    checks.append(_near("equal/predicted_q", rep.predicted_q, 0.0, 0.0))
    rep = run_attempt_test(AcceptanceEngine(WeightTable([1, 3])), draws, seed)
    checks.append(_near("[1,3]/mean_attempts", rep.mean_attempts, 1.5, 0.01))
    checks.append(_near("[1,3]/predicted_q", rep.predicted_q, 1.0 / 3.0, 1e-12))
    return checks


def _suite_variants(seed, draws):
    checks = []
    rng = RandomSource(seed)
    base = WeightTable([1, 2, 3, 4])

    first = [0] * 4
    pair_hits = 0
    not_perm = 0
    trials = draws
    for _ in range(trials):
        order = WithoutReplacementSampler(base).exhaust(rng)
        first[order[0]] += 1
        pair_hits += order[0] == 3 and order[1] == 2
        not_perm += sorted(order) != [0, 1, 2, 3]
    checks.append(_near("without_replacement/non_permutations", not_perm, 0, 0))
    freq = frequency_report(first, base.target_distribution())
    checks += _frequency_checks("without_replacement/first_draw", freq)
    se = math.sqrt(0.2 * 0.8 / trials)
    checks.append(_near("without_replacement/P(3 then 2)", pair_hits / trials, 0.2, max(0.005, 4 * se)))

    uni = generate_weights(DistributionSpec("uniform01"), 10_000, seed)
    means = {}
    for b in (1.0, 2.0):
        total = 0
        counts = [0] * len(uni)
        for _ in range(draws):
            i, a = draw_bounded(uni, b, rng)
            counts[i] += 1
            total += a
        means[b] = total / draws
        freq = frequency_report(counts, uni.target_distribution())
        checks += _frequency_checks(f"bounded(B={b:g})/frequency", freq)
    checks.append(_near("bounded(B=1)/mean_attempts", means[1.0], 2.0, 0.05))
    ratio = means[2.0] / means[1.0]
    checks.append(_near("bounded(B=2)/attempt_ratio", ratio, 2.0, 0.1))

    cut = CutoffSampler(WeightTable([1, 5, 10]), 5.0)
    freq = run_frequency_test(cut, cut.table, draws, seed, probabilities=cut.effective_distribution())
    checks += _frequency_checks("cutoff(A=5)", freq)
    expected = [1 / 11, 5 / 11, 5 / 11]
    worst = max(abs(c / draws - p) for c, p in zip(freq.counts, expected))
    checks.append(_check("cutoff(A=5)/max_abs_freq_error", worst <= 0.005, worst, 0.0, 0.005))
    return checks


def _suite_hybrid(seed, draws):
    checks = []
    spec = DistributionSpec("two-level", heavy_value=1e4, heavy_count=1)
    table = generate_weights(spec, 10_000, seed)
    probs = table.target_distribution()
    # ~5000 proposals per plain draw: use the vectorised loop, and the
    # smallest draw count the frequency test accepts for 10^4 weights.
    plain = AcceptanceEngine(table)
    plain_draws = max(10 * len(table), draws // 10)
    idx, att = plain.select_many(RandomSource(seed), plain_draws)
    plain_mean = float(att.mean())
    checks.append(_check("plain/mean_attempts>1000", plain_mean > 1000, plain_mean, 1000, None))
    counts = [0] * len(table)
    for i in idx.tolist():
        counts[i] += 1
    checks += _frequency_checks("plain/frequency", frequency_report(counts, probs))

    hybrid = HybridEngine(table)
    rep = run_attempt_test(hybrid, draws, seed)
    checks.append(_check("hybrid/mean_attempts<=2.1", rep.mean_attempts <= 2.1, rep.mean_attempts, 2.1, None))
    hybrid_draws = max(10 * len(table), draws)
    freq = run_frequency_test(hybrid, table, hybrid_draws, seed + 1)
    checks += _frequency_checks("hybrid/frequency", freq)
    return checks


SUITES: Dict[str, Callable] = {
    "frequency": _suite_frequency,
    "attempts": _suite_attempts,
    "variants": _suite_variants,
    "hybrid": _suite_hybrid,
}


def run_verify(suite: str, seed: int, draws: int = 100_000) -> Tuple[int, dict]:
    """Run one verification suite; return ``(exit_status, report)``.

    The report holds no timing information, so equal arguments give equal
    reports.
    """
    try:
        fn = SUITES[suite]
    except KeyError:
        raise InvalidParameters(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}") from None
    checks = fn(seed, draws)
    report = {"suite": suite, "seed": seed, "draws": draws, "checks": checks}
    status = 0 if all(c["pass"] for c in checks) else 1
    return status, report


def render_report(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=True) + "\n"
