"""Feature spaces (genotype -> cell index) and the MAP-Elites archive."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .bitcore import Genotype, RandomSource


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Undirected multigraph on nodes ``0..n_nodes-1`` with integer weights.

    Edge ``i`` of a genotype's bit string is ``(us[i], vs[i])``.
    """

    n_nodes: int
    us: tuple[int, ...]
    vs: tuple[int, ...]
    weights: tuple[int, ...]

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ConfigurationError(f"graph needs at least one node, got {self.n_nodes}")
        if not len(self.us) == len(self.vs) == len(self.weights):
            raise ConfigurationError("edge arrays differ in length")
        for u, v in zip(self.us, self.vs):
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise ConfigurationError(f"edge ({u}, {v}) references a missing node")

    @property
    def m(self) -> int:
        return len(self.us)

    @property
    def edges(self) -> list[tuple[int, int, int]]:
        return list(zip(self.us, self.vs, self.weights))

    @classmethod
    def from_edges(cls, n_nodes: int, edges) -> "Graph":
        edges = list(edges)
        return cls(
            n_nodes,
            tuple(int(e[0]) for e in edges),
            tuple(int(e[1]) for e in edges),
            tuple(int(e[2]) for e in edges),
        )


def parse_graph(text: str) -> Graph:
    """Parse the edge-list format: ``"n_G m"`` then m lines ``"u v w"``."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise ConfigurationError("graph header must be 'n_G m'")
    n_nodes, m = (int(t) for t in lines[0])
    body = lines[1:]
    if len(body) != m:
        raise ConfigurationError(f"header announces {m} edges, found {len(body)}")
    edges = []
    for row in body:
        if len(row) != 3:
            raise ConfigurationError(f"edge line must be 'u v w', got {' '.join(row)!r}")
        u, v, w = (int(t) for t in row)
        if w <= 0 or w >= 2**63:
            raise ConfigurationError(f"edge weight {w} is not a positive 64-bit integer")
        edges.append((u, v, w))
    return Graph.from_edges(n_nodes, edges)


def load_graph(path) -> Graph:
    return parse_graph(Path(path).read_text())


def format_graph(g: Graph) -> str:
    rows = [f"{g.n_nodes} {g.m}"]
    rows += [f"{u} {v} {w}" for u, v, w in g.edges]
    return "\n".join(rows) + "\n"


def cc_count(graph: Graph, x: Genotype | int) -> int:
    """Connected components of ``(V, {e_i : x_i = 1})`` via union-find."""
    if isinstance(x, Genotype):
        if x.n != graph.m:
            raise ValueError(f"genotype length {x.n} does not match edge count {graph.m}")
        bits = x.bits
    else:
        bits = x
    parent = list(range(graph.n_nodes))
    us, vs = graph.us, graph.vs
    comps = graph.n_nodes
    while bits:
        low = bits & -bits
        i = low.bit_length() - 1
        bits ^= low
        a = us[i]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = vs[i]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            parent[a] = b
            comps -= 1
    return comps


class FeatureSpace:
    """Maps genotypes of length ``n`` onto ``cells`` archive cells."""

    n: int
    cells: int

    def cell_index(self, x: Genotype) -> int:
        if x.n != self.n:
            self.check(x)
        return self.index_of(x.bits, x.ones)

    def index_of(self, bits: int, ones: int) -> int:
        """Cell of a genotype given as packed bits plus popcount."""
        raise NotImplementedError

    def check(self, x: Genotype) -> None:
        if x.n != self.n:
            raise ValueError(f"genotype length {x.n} incompatible with feature space over n={self.n}")

    def label(self, index: int) -> int:
        """1-based cell label used in reports."""
        return index + 1


class NumberOfOnes(FeatureSpace):
    """Cell ``i`` holds genotypes with ``|x|_1`` in ``[i*k, (i+1)*k - 1]``."""

    def __init__(self, n: int, k: int = 1):
        if n < 1:
            raise ConfigurationError(f"invalid dimension n={n}")
        if not 1 <= k <= n + 1 or (n + 1) % k:
            raise ConfigurationError(f"granularity k={k} must divide n+1={n + 1}")
        self.n = n
        self.k = k
        self.cells = (n + 1) // k

    def __repr__(self) -> str:
        return f"NumberOfOnes(n={self.n}, k={self.k})"

    def index_of(self, bits: int, ones: int) -> int:
        return ones // self.k

    def ones_range(self, index: int) -> range:
        return range(index * self.k, (index + 1) * self.k)


class ConnectedComponents(FeatureSpace):
    """Cell ``cc(x) - 1``; genotypes select edges of ``graph``."""

    def __init__(self, graph: Graph):
        if graph.m < 1:
            raise ConfigurationError("connected-components space needs at least one edge")
        self.graph = graph
        self.n = graph.m
        self.cells = graph.n_nodes

    def __repr__(self) -> str:
        return f"ConnectedComponents(n_nodes={self.graph.n_nodes}, m={self.graph.m})"

    def index_of(self, bits: int, ones: int) -> int:
        return cc_count(self.graph, bits) - 1


def cell_count(space: FeatureSpace, n: int) -> int:
    if space.n != n:
        raise ConfigurationError(f"feature space built for n={space.n}, asked about n={n}")
    return space.cells


class OfferOutcome(enum.IntEnum):
    NEW_CELL = 0
    REPLACED = 1
    REJECTED = 2


class Archive:
    """The map M: at most one elite per cell.

    ``occupied`` lists covered cell indices in order of first coverage; cells
    never empty out, so parent sampling is a uniform pick from this list.
    """

    def __init__(self, space: FeatureSpace):
        self.space = space
        self.size = space.cells
        self.elites: list[Optional[Genotype]] = [None] * self.size
        self.fitness: list[float] = [float("-inf")] * self.size
        self.occupied: list[int] = []

    @property
    def covered(self) -> int:
        return len(self.occupied)

    def __len__(self) -> int:
        return len(self.occupied)

    def __getitem__(self, index: int) -> Optional[tuple[Genotype, float]]:
        e = self.elites[index]
        return None if e is None else (e, self.fitness[index])

    def items(self):
        """(cell, genotype, fitness) for covered cells in index order."""
        for i, e in enumerate(self.elites):
            if e is not None:
                yield i, e, self.fitness[i]

    def place(self, cell: int, y: Genotype, f_y: float) -> OfferOutcome:
        """Offer ``y`` to a precomputed cell; ties go to the newcomer."""
        if self.elites[cell] is None:
            self.elites[cell] = y
            self.fitness[cell] = f_y
            self.occupied.append(cell)
            return OfferOutcome.NEW_CELL
        if f_y >= self.fitness[cell]:
            self.elites[cell] = y
            self.fitness[cell] = f_y
            return OfferOutcome.REPLACED
        return OfferOutcome.REJECTED

    def offer(self, y: Genotype, f_y: float) -> OfferOutcome:
        return self.place(self.space.cell_index(y), y, f_y)

    def sample_parent(self, rng: RandomSource) -> Genotype:
        occ = self.occupied
        if not occ:
            raise RuntimeError("cannot sample a parent from an empty archive")
        return self.elites[occ[int(rng.random() * len(occ))]]


def offer(archive: Archive, y: Genotype, f_y: float) -> OfferOutcome:
    return archive.offer(y, f_y)


def sample_parent(archive: Archive, rng: RandomSource) -> Genotype:
    return archive.sample_parent(rng)


def cell_index(space: FeatureSpace, x: Genotype) -> int:
    space.check(x)
    return space.cell_index(x)
