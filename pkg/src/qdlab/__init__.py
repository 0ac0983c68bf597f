"""Runtime laboratory for a MAP-Elites style QD algorithm and GSEMO."""

from .bitcore import Genotype, RandomSource, hamming, mutate, new_uniform
from .engines import GSEMO, QD, StopCondition, gsemo_run, qd_run
from .features import Archive, ConnectedComponents, Graph, NumberOfOnes, OfferOutcome
from .problems import (
    Coverage,
    CoverageInstance,
    LinearMonotone,
    MinimumSpanningTree,
    OneMax,
    OneMinMax,
    unitation_family,
)
from .records import RunRecord

__version__ = "0.1.0"

__all__ = [
    "Archive",
    "ConnectedComponents",
    "Coverage",
    "CoverageInstance",
    "GSEMO",
    "Genotype",
    "Graph",
    "LinearMonotone",
    "MinimumSpanningTree",
    "NumberOfOnes",
    "OfferOutcome",
    "OneMax",
    "OneMinMax",
    "QD",
    "RandomSource",
    "RunRecord",
    "StopCondition",
    "gsemo_run",
    "hamming",
    "mutate",
    "new_uniform",
    "qd_run",
    "unitation_family",
]
