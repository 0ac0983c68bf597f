"""Sweep configuration: TOML files with keys mirroring SweepConfig."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..bitcore import RandomSource
from ..engines import StopCondition
from ..features import ConfigurationError, ConnectedComponents, FeatureSpace, NumberOfOnes
from ..oracles import bound_value, exhaustive_submodular, greedy_submodular
from ..problems import (
    Constant,
    Coverage,
    CoverageInstance,
    LinearMonotone,
    MinimumSpanningTree,
    OneMax,
    Problem,
    load_coverage,
    random_connected_graph,
    unitation_family,
)
from ..features import load_graph

BUDGET_FACTOR = 50
# instance generation draws from streams far above any replication stream
INSTANCE_STREAM_BASE = 2**40

PROBLEMS = ("onemax", "trap", "jump", "cliff", "constant", "linear", "coverage", "mst")


@dataclass
class SweepConfig:
    problem: dict[str, Any]
    space: str = "k=1"
    p_m_c: float = 1.0
    grid: list[int] = field(default_factory=list)
    replications: int = 30
    stop: dict[str, Any] = field(default_factory=lambda: {"covered_all": True})
    output: Optional[str] = None
    master_seed: int = 1
    config_id: str = "sweep"
    workers: int = 1
    timing: bool = True

    def __post_init__(self):
        name = self.problem.get("name")
        if name not in PROBLEMS:
            raise ConfigurationError(f"unknown problem {name!r}; expected one of {PROBLEMS}")
        if not self.grid:
            raise ConfigurationError("n-grid is empty")
        if self.replications < 1:
            raise ConfigurationError(f"replications must be >= 1, got {self.replications}")
        if self.p_m_c <= 0:
            raise ConfigurationError(f"mutation constant must be positive, got {self.p_m_c}")
        k = self.granularity
        if k is not None:
            bad = [n for n in self.grid if (n + 1) % k]
            if bad:
                raise ConfigurationError(f"k={k} does not divide n+1 for n in {bad}")
        elif name != "mst":
            raise ConfigurationError("the connected-components space needs problem 'mst'")

    @property
    def granularity(self) -> Optional[int]:
        """k for number-of-ones spaces, None for connected components."""
        s = self.space.replace(" ", "")
        if s == "cc":
            return None
        if s.startswith("k="):
            return int(s[2:])
        raise ConfigurationError(f"feature space must be 'k=<int>' or 'cc', got {self.space!r}")

    def stream(self, grid_index: int, rep: int) -> int:
        return grid_index * self.replications + rep


def load_config(path) -> SweepConfig:
    data = tomllib.loads(Path(path).read_text())
    return config_from_dict(data)


def config_from_dict(data: dict) -> SweepConfig:
    known = {f for f in SweepConfig.__dataclass_fields__}
    extra = set(data) - known
    if extra:
        raise ConfigurationError(f"unknown config keys: {sorted(extra)}")
    if "problem" not in data:
        raise ConfigurationError("config needs a [problem] table")
    return SweepConfig(**data)


@dataclass
class GridPoint:
    """Everything needed to run one replication at one grid point."""

    problem: Problem
    space: FeatureSpace
    p_m: float
    stop: StopCondition


def _instance_rng(cfg: SweepConfig, grid_index: int) -> RandomSource:
    return RandomSource(cfg.master_seed, INSTANCE_STREAM_BASE + grid_index)


def build_problem(cfg: SweepConfig, n: int, grid_index: int) -> Problem:
    opts = cfg.problem
    name = opts["name"]
    if name == "onemax":
        return OneMax(n)
    if name in ("trap", "jump", "cliff"):
        return unitation_family(name, n, opts.get("gap"))
    if name == "constant":
        return Constant(n, float(opts.get("value", 0.0)))
    if name == "linear":
        if "weights" in opts:
            return LinearMonotone(opts["weights"])
        return LinearMonotone.random(n, _instance_rng(cfg, grid_index))
    if name == "coverage":
        if "instance" in opts:
            inst = load_coverage(opts["instance"])
        else:
            inst = CoverageInstance.random(
                n,
                int(opts.get("universe", 40)),
                int(opts.get("r", 3)),
                _instance_rng(cfg, grid_index),
                min_size=int(opts.get("min_size", 2)),
                max_size=opts.get("max_size"),
            )
        if inst.n != n:
            raise ConfigurationError(f"instance has {inst.n} sets but grid asks for n={n}")
        opt = exhaustive_submodular(inst)[1] if n <= 20 else greedy_submodular(inst)[1]
        return Coverage(inst, reference_opt=float(opt))
    if name == "mst":
        # for MST the grid is over node counts; genotype length is m
        if "graph" in opts:
            g = load_graph(opts["graph"])
        else:
            m = int(round(float(opts.get("m_factor", 2)) * n))
            g = random_connected_graph(n, m, _instance_rng(cfg, grid_index))
        return MinimumSpanningTree(g)
    raise ConfigurationError(f"unknown problem {name!r}")


def default_budget(problem: Problem, space: FeatureSpace, p_m: float) -> int:
    """BUDGET_FACTOR times the leading-order bound for this configuration."""
    if isinstance(space, ConnectedComponents):
        g = space.graph
        lead = bound_value("mst_opt", g.n_nodes, m=g.m) + bound_value(
            "mst_zero", g.n_nodes, m=g.m, w_max=max(g.weights)
        )
    elif isinstance(problem, Coverage):
        lead = bound_value("submod", problem.n, r=problem.inst.r)
    elif space.k == 1:
        lead = bound_value("cover_k1", problem.n)
    elif space.cells == 1:
        lead = problem.n * math.log(problem.n) / (problem.n * p_m)
    else:
        lead = bound_value("cover_k", problem.n, k=space.k, p_m=p_m)
    return max(1000, int(BUDGET_FACTOR * lead))


def build_point(cfg: SweepConfig, n: int, grid_index: int) -> GridPoint:
    problem = build_problem(cfg, n, grid_index)
    k = cfg.granularity
    space = ConnectedComponents(problem.graph) if k is None else NumberOfOnes(problem.n, k)
    p_m = cfg.p_m_c / problem.n
    stop_spec = dict(cfg.stop)
    budget = stop_spec.pop("budget", None)
    factor = stop_spec.pop("budget_factor", None)
    if budget is None:
        budget = default_budget(problem, space, p_m)
        if factor is not None:
            budget = int(budget / BUDGET_FACTOR * factor)
    unknown = set(stop_spec) - {"covered_all", "global_opt_found", "all_cells_optimal", "approx_reached"}
    if unknown:
        raise ConfigurationError(f"unknown stop keys: {sorted(unknown)}")
    stop = StopCondition(budget=int(budget), **stop_spec)
    return GridPoint(problem, space, p_m, stop)
