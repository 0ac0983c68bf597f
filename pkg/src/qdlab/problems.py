"""Fitness functions: unitation family, monotone linear, max-coverage, MST.

Every problem is oriented for maximisation; MST weight is negated here so
the archive never needs a second comparator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .bitcore import Genotype, RandomSource, weights_of
from .features import (
    Archive,
    ConfigurationError,
    ConnectedComponents,
    FeatureSpace,
    Graph,
    NumberOfOnes,
    cc_count,
)


class Problem:
    """Base class. Subclasses set ``name`` and ``n`` and implement ``value``."""

    name: str = "problem"
    n: int
    #: best attainable fitness, if known; drives the global-optimum milestone
    global_max: Optional[float] = None
    #: OPT of the constrained problem, for approximation milestones
    reference_opt: Optional[float] = None
    #: feasibility cap on |x|_1 (cardinality constraint r)
    max_feasible_ones: Optional[int] = None
    #: when set, only genotypes in this cell count towards the global optimum
    opt_cell: Optional[int] = None

    def evaluate(self, x: Genotype) -> float:
        return self.value(x.bits, x.ones)

    def value(self, bits: int, ones: int) -> float:
        """Fitness from the packed bits and their popcount."""
        raise NotImplementedError

    def __call__(self, x: Genotype) -> float:
        return self.evaluate(x)

    def is_global_opt(self, x: Genotype) -> bool:
        if self.global_max is None:
            raise ValueError(f"{self.name}: global optimum unknown")
        return self.evaluate(x) >= self.global_max

    def cell_optima(self, space: FeatureSpace) -> Optional[list[float]]:
        """Best fitness per cell when known analytically, else None."""
        return None

    def describe(self) -> str:
        return self.name


class Unitation(Problem):
    """A function of unitation given by its value table over |x|_1."""

    def __init__(self, table: Sequence[float], name: str = "unitation"):
        self.table = tuple(float(v) for v in table)
        self.n = len(self.table) - 1
        if self.n < 1:
            raise ConfigurationError("unitation table needs n+1 >= 2 entries")
        self.name = name
        self.global_max = max(self.table)

    def evaluate(self, x: Genotype) -> float:
        return self.table[x.ones]

    def value(self, bits: int, ones: int) -> float:
        return self.table[ones]

    def cell_optima(self, space: FeatureSpace) -> Optional[list[float]]:
        if not isinstance(space, NumberOfOnes) or space.n != self.n:
            return None
        return [max(self.table[j] for j in space.ones_range(i)) for i in range(space.cells)]


class OneMax(Unitation):
    def __init__(self, n: int):
        super().__init__(range(n + 1), name="onemax")

    def evaluate(self, x: Genotype) -> float:
        return x.ones

    def value(self, bits: int, ones: int) -> float:
        return ones


def onemax(x: Genotype) -> float:
    return x.ones


def jump_value(n: int, g: int, ones: int) -> float:
    if ones <= n - g or ones == n:
        return g + ones
    return n - ones


def trap_value(n: int, ones: int) -> float:
    return n + 1 if ones == 0 else ones


def cliff_value(n: int, d: int, ones: int) -> float:
    return ones if ones <= n - d else ones - d


def unitation_family(name: str, n: int, gap: Optional[int] = None) -> Unitation:
    """Build Jump(gap), Cliff or Trap over length n.

    Jump(g):  g + |x| if |x| <= n-g or |x| = n, else n - |x|
    Cliff:    |x| if |x| <= n - n//3, else |x| - n//3
    Trap:     n + 1 at 0^n, else |x|
    """
    key = name.lower()
    if key == "jump":
        g = 3 if gap is None else gap
        if not 2 <= g <= n // 2:
            raise ConfigurationError(f"jump gap must satisfy 2 <= g <= n/2, got g={g}, n={n}")
        return Unitation([jump_value(n, g, i) for i in range(n + 1)], name=f"jump{g}")
    if key == "cliff":
        d = n // 3 if gap is None else gap
        if not 1 <= d < n:
            raise ConfigurationError(f"cliff width must satisfy 1 <= d < n, got {d}")
        return Unitation([cliff_value(n, d, i) for i in range(n + 1)], name="cliff")
    if key == "trap":
        return Unitation([trap_value(n, i) for i in range(n + 1)], name="trap")
    if key == "onemax":
        return OneMax(n)
    raise ConfigurationError(f"unknown unitation function {name!r}")


class Constant(Unitation):
    def __init__(self, n: int, value: float = 0.0):
        super().__init__([value] * (n + 1), name="constant")


class LinearMonotone(Problem):
    """sum_i w_i x_i with strictly positive weights."""

    name = "linear"

    def __init__(self, weights: Sequence[float]):
        w = [float(v) for v in weights]
        if not w:
            raise ConfigurationError("need at least one weight")
        bad = [v for v in w if not v > 0]
        if bad:
            raise ConfigurationError(f"weights must be positive, got {bad[0]}")
        self.weights = tuple(w)
        self.n = len(w)
        self.global_max = sum(w)
        self._desc = sorted(w, reverse=True)

    @classmethod
    def random(cls, n: int, rng: RandomSource, low: float = 1.0, high: float = 2.0) -> "LinearMonotone":
        return cls([low + (high - low) * rng.random() for _ in range(n)])

    def value(self, bits: int, ones: int) -> float:
        return weights_of(bits, self.weights)

    def cell_optima(self, space: FeatureSpace) -> Optional[list[float]]:
        if not isinstance(space, NumberOfOnes) or space.n != self.n:
            return None
        prefix = [0.0]
        for v in self._desc:
            prefix.append(prefix[-1] + v)
        # best in a cell uses the largest allowed count of the heaviest bits
        return [prefix[max(space.ones_range(i))] for i in range(space.cells)]


def linear_monotone(weights: Sequence[float], x: Genotype) -> float:
    if any(not w > 0 for w in weights):
        raise ValueError("weights must be positive")
    return weights_of(x.bits, weights)


# --------------------------------------------------------------------------
# max-coverage (monotone submodular, cardinality constraint r)


@dataclass(frozen=True)
class CoverageInstance:
    universe_size: int
    sets: tuple[frozenset, ...]
    r: int
    masks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.r < 1:
            raise ConfigurationError(f"cardinality constraint r must be >= 1, got {self.r}")
        if not self.sets:
            raise ConfigurationError("coverage instance needs at least one set")
        for s in self.sets:
            if any(not 0 <= e < self.universe_size for e in s):
                raise ConfigurationError(f"set element outside universe of size {self.universe_size}")
        masks = tuple(sum(1 << e for e in s) for s in self.sets)
        object.__setattr__(self, "masks", masks)

    @property
    def ground_set_size(self) -> int:
        return len(self.sets)

    @property
    def n(self) -> int:
        return len(self.sets)

    def value_of_indices(self, indices) -> int:
        u = 0
        for i in indices:
            u |= self.masks[i]
        return u.bit_count()

    def value_of_bits(self, bits: int) -> int:
        masks = self.masks
        u = 0
        while bits:
            low = bits & -bits
            u |= masks[low.bit_length() - 1]
            bits ^= low
        return u.bit_count()

    @classmethod
    def random(
        cls, n: int, universe_size: int, r: int, rng: RandomSource, min_size: int = 2, max_size: Optional[int] = None
    ) -> "CoverageInstance":
        hi = max_size if max_size is not None else max(min_size, universe_size // 4)
        sets = []
        for _ in range(n):
            size = min_size + rng.below(hi - min_size + 1)
            pool = list(range(universe_size))
            chosen = []
            for _ in range(size):
                chosen.append(pool.pop(rng.below(len(pool))))
            sets.append(frozenset(chosen))
        return cls(universe_size, tuple(sets), r)


def parse_coverage(text: str) -> CoverageInstance:
    """Header ``"n |U| r"`` then n lines of space-separated element ids."""
    lines = text.splitlines()
    while lines and not lines[0].strip():
        lines.pop(0)
    if not lines:
        raise ConfigurationError("empty coverage file")
    head = lines[0].split()
    if len(head) != 3:
        raise ConfigurationError("coverage header must be 'n |U| r'")
    n, usize, r = (int(t) for t in head)
    body = lines[1 : 1 + n]
    if len(body) != n:
        raise ConfigurationError(f"header announces {n} sets, found {len(body)}")
    sets = tuple(frozenset(int(t) for t in ln.split()) for ln in body)
    return CoverageInstance(usize, sets, r)


def load_coverage(path) -> CoverageInstance:
    return parse_coverage(Path(path).read_text())


def format_coverage(inst: CoverageInstance) -> str:
    rows = [f"{inst.n} {inst.universe_size} {inst.r}"]
    rows += [" ".join(str(e) for e in sorted(s)) for s in inst.sets]
    return "\n".join(rows) + "\n"


def coverage_value(inst: CoverageInstance, x: Genotype) -> float:
    if x.n != inst.n:
        raise ValueError(f"genotype length {x.n} does not match ground set size {inst.n}")
    return float(inst.value_of_bits(x.bits))


class Coverage(Problem):
    """QD fitness for max-coverage: f itself on every cell, constraint or not."""

    name = "coverage"

    def __init__(self, inst: CoverageInstance, reference_opt: Optional[float] = None):
        self.inst = inst
        self.n = inst.n
        self.max_feasible_ones = inst.r
        self.reference_opt = reference_opt
        self.global_max = float(len(set().union(*inst.sets)))

    def value(self, bits: int, ones: int) -> float:
        return self.inst.value_of_bits(bits)


def best_feasible(archive: Archive, inst: CoverageInstance) -> Optional[tuple[Genotype, float]]:
    """Best stored elite with at most r ones (k=1 NoO archive)."""
    space = archive.space
    if not isinstance(space, NumberOfOnes) or space.k != 1:
        raise ConfigurationError("best_feasible expects a 1-NoO archive")
    best = None
    for i in range(min(inst.r, space.cells - 1) + 1):
        e = archive.elites[i]
        if e is not None and (best is None or archive.fitness[i] > best[1]):
            best = (e, archive.fitness[i])
    return best


# --------------------------------------------------------------------------
# minimum spanning trees


def check_mst_graph(g: Graph) -> Graph:
    """Reject graphs without a unique MST: disconnected or repeated weights."""
    if len(set(g.weights)) != g.m:
        raise ConfigurationError("edge weights must be pairwise distinct")
    if any(w <= 0 for w in g.weights):
        raise ConfigurationError("edge weights must be positive")
    if cc_count(g, (1 << g.m) - 1) != 1:
        raise ConfigurationError("graph is not connected")
    return g


def random_connected_graph(n_nodes: int, m: int, rng: RandomSource) -> Graph:
    """Random spanning tree plus extra distinct edges; weights permute 1..m."""
    max_edges = n_nodes * (n_nodes - 1) // 2
    if not n_nodes - 1 <= m <= max_edges:
        raise ConfigurationError(f"need {n_nodes - 1} <= m <= {max_edges}, got m={m}")
    order = list(range(n_nodes))
    for i in range(n_nodes - 1, 0, -1):
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]
    pairs = set()
    for i in range(1, n_nodes):
        a, b = order[i], order[rng.below(i)]
        pairs.add((min(a, b), max(a, b)))
    while len(pairs) < m:
        a, b = rng.below(n_nodes), rng.below(n_nodes)
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    pairs = sorted(pairs)
    for i in range(m - 1, 0, -1):
        j = rng.below(i + 1)
        pairs[i], pairs[j] = pairs[j], pairs[i]
    weights = list(range(1, m + 1))
    for i in range(m - 1, 0, -1):
        j = rng.below(i + 1)
        weights[i], weights[j] = weights[j], weights[i]
    return Graph.from_edges(n_nodes, [(a, b, w) for (a, b), w in zip(pairs, weights)])


def mst_fitness(g: Graph, x: Genotype) -> float:
    if x.n != g.m:
        raise ValueError(f"genotype length {x.n} does not match edge count {g.m}")
    return -float(weights_of(x.bits, g.weights))


class MinimumSpanningTree(Problem):
    """Negated edge-set weight, meant for the connected-components space."""

    name = "mst"

    def __init__(self, graph: Graph):
        from .oracles import kruskal

        self.graph = check_mst_graph(graph)
        self.n = graph.m
        tree, weight = kruskal(graph)
        self.mst_edges = tree
        self.mst_weight = weight
        self.global_max = -float(weight)
        # sparser forests weigh less; only a spanning tree (cell 0) is optimal
        self.opt_cell = 0
        # optimal forest with n_G - j components = first j Kruskal edges
        prefix = [0]
        for e in tree:
            prefix.append(prefix[-1] + graph.weights[e])
        self.forest_weights = prefix

    def value(self, bits: int, ones: int) -> float:
        return -weights_of(bits, self.graph.weights)

    def is_global_opt(self, x: Genotype) -> bool:
        return self.evaluate(x) >= self.global_max and cc_count(self.graph, x) == 1

    def cell_optima(self, space: FeatureSpace) -> Optional[list[float]]:
        if not isinstance(space, ConnectedComponents) or space.graph != self.graph:
            return None
        n_g = self.graph.n_nodes
        # cell c holds forests with c+1 components, i.e. n_G - c - 1 edges
        return [-float(self.forest_weights[n_g - 1 - c]) for c in range(n_g)]


# --------------------------------------------------------------------------
# bi-objective formulations for GSEMO


class BiObjective:
    """Two objectives with declared orientations.

    ``raw(x)`` returns the objectives as stated; ``evaluate`` maps them to
    maximise-both by negating minimised components.
    """

    name = "biobjective"
    orientation: tuple[str, str] = ("max", "max")
    n: int

    def raw(self, x: Genotype) -> tuple[float, float]:
        raise NotImplementedError

    def evaluate(self, x: Genotype) -> tuple[float, float]:
        a, b = self.raw(x)
        s0, s1 = (1 if o == "max" else -1 for o in self.orientation)
        return (s0 * a, s1 * b)

    def front(self) -> Optional[frozenset]:
        """Pareto front in maximise-both coordinates, when known."""
        return None

    def is_target(self, vec: tuple[float, float]) -> bool:
        """Whether a maximise-both objective vector is the goal of the run."""
        return False


class OneMinMax(BiObjective):
    name = "oneminmax"

    def __init__(self, n: int):
        self.n = n

    def raw(self, x: Genotype) -> tuple[float, float]:
        return (x.ones, self.n - x.ones)

    def evaluate(self, x: Genotype) -> tuple[float, float]:
        return (x.ones, self.n - x.ones)

    def front(self) -> frozenset:
        return frozenset((i, self.n - i) for i in range(self.n + 1))


class ConstrainedCoverage(BiObjective):
    """(z(x), |x|_0) with z = f if |x|_1 <= r else -1, both maximised."""

    name = "coverage-gsemo"

    def __init__(self, inst: CoverageInstance, reference_opt: Optional[float] = None, alpha: float = 1 - 1 / math.e):
        self.inst = inst
        self.n = inst.n
        self.reference_opt = reference_opt
        self.alpha = alpha

    def raw(self, x: Genotype) -> tuple[float, float]:
        z = self.inst.value_of_bits(x.bits) if x.ones <= self.inst.r else -1
        return (z, self.n - x.ones)

    evaluate = raw

    def is_target(self, vec) -> bool:
        return self.reference_opt is not None and vec[0] >= self.alpha * self.reference_opt


class MSTBiObjective(BiObjective):
    """(cc(x), w(x)), both minimised."""

    name = "mst-gsemo"
    orientation = ("min", "min")

    def __init__(self, graph: Graph):
        self.problem = MinimumSpanningTree(graph)
        self.graph = graph
        self.n = graph.m

    def raw(self, x: Genotype) -> tuple[float, float]:
        return (cc_count(self.graph, x.bits), weights_of(x.bits, self.graph.weights))

    def front(self) -> frozenset:
        n_g = self.graph.n_nodes
        fw = self.problem.forest_weights
        return frozenset((-(n_g - j), -fw[j]) for j in range(n_g))

    def is_target(self, vec) -> bool:
        return vec == (-1, -self.problem.mst_weight)
