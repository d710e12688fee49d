"""Roulette-wheel selection by stochastic acceptance, with search baselines."""
from .core import (
    AttemptStats,
    RandomSource,
    WeightTable,
    build_table,
    rebuild_max,
    set_weight,
    target_distribution,
)
from .errors import *  # noqa: F401,F403
from .selectors import (
    AcceptanceEngine,
    HybridEngine,
    LinearScanEngine,
    PrefixSumEngine,
    build_hybrid,
    make_engine,
    select_acceptance,
    select_binary,
    select_hybrid,
    select_linear,
)
from .variants import (
    CutoffSampler,
    WithoutReplacementSampler,
    draw_bounded,
    draw_cutoff,
    draw_without_replacement,
    validate_bound,
)

__version__ = "0.1.0"
