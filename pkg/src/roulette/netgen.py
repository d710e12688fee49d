"""Preferential-attachment growth as a selection workload.

Each new node links to ``m`` distinct existing nodes picked with
probability proportional to their degree.  Degrees live in a
:class:`~roulette.core.WeightTable`, so any engine can drive the growth.
Degrees only increase, which keeps the table's ``max_bound`` exact.
"""
from __future__ import annotations

import io
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

from .core import RandomSource, WeightTable
from .errors import InvalidParameters
from .selectors import make_engine

__all__ = [
    "GrowingNetwork",
    "grow",
    "degree_histogram",
    "export_edge_list",
    "NETGEN_HEAVY_FRACTION",
]

# The default hybrid threshold (10% of the total) never triggers once a
# network has more than a few dozen nodes; degree-proportional weights need
# a much finer cut for the heavy set to absorb the hubs.
NETGEN_HEAVY_FRACTION = 0.002


@dataclass
class GrowingNetwork:
    node_count: int
    edges: List[Tuple[int, int]]
    degree: WeightTable
    # mean proposals per target selection, one entry per added node
    step_attempts: List[float] = field(default_factory=list)

    @classmethod
    def ring(cls, m0: int) -> "GrowingNetwork":
        if m0 < 3:
            raise InvalidParameters(f"a ring needs at least 3 nodes, got {m0}")
        edges = [(i, (i + 1) % m0) for i in range(m0)]
        return cls(m0, edges, WeightTable([2.0] * m0))

    @classmethod
    def from_edges(cls, node_count: int, edges) -> "GrowingNetwork":
        deg = [0] * node_count
        edges = [(int(u), int(v)) for u, v in edges]
        for u, v in edges:
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise InvalidParameters(f"edge ({u}, {v}) references a missing node")
            deg[u] += 1
            deg[v] += 1
        return cls(node_count, edges, WeightTable(float(d) for d in deg))

    def degrees(self) -> List[int]:
        return [int(d) for d in self.degree.weights]

    @property
    def mean_attempts(self) -> float:
        if not self.step_attempts:
            return float("nan")
        return sum(self.step_attempts) / len(self.step_attempts)


def grow(
    m0: int,
    m: int,
    final_size: int,
    engine_kind: str,
    rng: RandomSource,
    *,
    heavy_fraction: float = NETGEN_HEAVY_FRACTION,
    on_step: Optional[Callable[[GrowingNetwork], None]] = None,
) -> GrowingNetwork:
    """Grow a network from an ``m0``-ring to ``final_size`` nodes.

    ``engine_kind`` is one of ``linear``, ``binary``, ``acceptance`` or
    ``hybrid``.  The binary engine rebuilds its prefix sums once per added
    node (O(N) each); the others absorb updates incrementally.
    ``on_step`` is called with the network after every added node.
    """
    if not (m0 >= m >= 1):
        raise InvalidParameters(f"need m0 >= m >= 1, got m0={m0}, m={m}")
    if final_size <= m0:
        raise InvalidParameters(f"final_size must exceed m0, got {final_size} <= {m0}")
    net = GrowingNetwork.ring(m0)
    options = {"threshold_fraction": heavy_fraction} if engine_kind == "hybrid" else {}
    engine = make_engine(engine_kind, net.degree, **options)
    weights = net.degree.weights
    stats = engine.stats
    for v in range(m0, final_size):
        engine.refresh()
        draws0, attempts0 = stats.draws, stats.attempts
        targets: List[int] = []
        while len(targets) < m:
            t = engine.select(rng)
            if t not in targets:
                targets.append(t)
        net.step_attempts.append((stats.attempts - attempts0) / (stats.draws - draws0))
        engine.append(float(m))
        for t in targets:
            net.edges.append((v, t))
            engine.set_weight(t, weights[t] + 1.0)
        net.node_count += 1
        if on_step is not None:
            on_step(net)
    return net


def degree_histogram(network: GrowingNetwork) -> List[Tuple[int, int]]:
    """Sorted ``(degree, count)`` pairs."""
    return sorted(Counter(network.degrees()).items())


def export_edge_list(network: GrowingNetwork, dest: Union[str, os.PathLike, io.TextIOBase]) -> None:
    """Write ``u v`` per line, 0-based, newline-terminated."""
    text = "".join(f"{u} {v}\n" for u, v in network.edges)
    if hasattr(dest, "write"):
        dest.write(text)
        return
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
