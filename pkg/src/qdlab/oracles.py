"""Exact and brute-force references used to check the engines.

Transition probabilities are computed in exact integer arithmetic: with
``p_m = a/b`` every term shares the denominator ``b**n``, so a table entry is
stored as its integer numerator.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Optional

from .bitcore import Genotype
from .features import ConfigurationError, FeatureSpace, Graph
from .problems import CoverageInstance, Problem

BRUTE_FORCE_MAX_N = 16


def _as_fraction(p_m) -> Fraction:
    p = Fraction(p_m)
    if not 0 < p < 1:
        raise ValueError(f"mutation probability must lie in (0, 1), got {p_m}")
    return p


def _numerator(n: int, a: int, c: int, i: int, j: int) -> int:
    """Numerator of p_{i,j} over b**n, where p_m = a/b and c = b - a."""
    d = j - i
    total = 0
    # lose ``lost`` ones and gain ``lost + d`` zeros
    for lost in range(max(0, -d), i + 1):
        gained = lost + d
        if gained > n - i:
            break
        s = lost + gained
        total += math.comb(i, lost) * math.comb(n - i, gained) * a**s * c ** (n - s)
    return total


def transition_prob(n: int, p_m, i: int, j: int) -> Fraction:
    """Exact probability that standard bit mutation maps i ones to j ones."""
    if not (0 <= i <= n and 0 <= j <= n):
        raise ValueError(f"indices out of range: i={i}, j={j}, n={n}")
    p = _as_fraction(p_m)
    a, b = p.numerator, p.denominator
    return Fraction(_numerator(n, a, b - a, i, j), b**n)


class TransitionTable:
    """All p_{i,j} for one (n, p_m), as integer numerators over ``b**n``."""

    def __init__(self, n: int, p_m):
        if n < 1:
            raise ValueError(f"invalid dimension n={n}")
        self.n = n
        self.p_m = _as_fraction(p_m)
        self.a = self.p_m.numerator
        self.b = self.p_m.denominator
        c = self.b - self.a
        self.denominator = self.b**n
        self.num = [[_numerator(n, self.a, c, i, j) for j in range(n + 1)] for i in range(n + 1)]

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return Fraction(self.num[i][j], self.denominator)

    def prob(self, i: int, j: int) -> float:
        return self.num[i][j] / self.denominator

    def row_sum_error(self, i: int) -> float:
        return abs(float(Fraction(sum(self.num[i]), self.denominator)) - 1.0)

    def max_row_sum_error(self) -> float:
        return max(self.row_sum_error(i) for i in range(self.n + 1))

    def corrupt(self, i: int, j: int, factor: int = 1000) -> None:
        """Negative-control hook: inflate one entry."""
        self.num[i][j] = self.num[i][j] * factor + 1

    def jump_decay_holds(self, i: int, j: int, k: int) -> bool:
        """Exact check of p_{i,j-k} <= (i p/(1-p))^k p_{i,j}."""
        if not (0 <= j < i <= self.n and 0 <= k <= j):
            raise ValueError(f"need 0 <= k <= j < i <= n, got i={i}, j={j}, k={k}, n={self.n}")
        c = self.b - self.a
        return self.num[i][j - k] * c**k <= (i * self.a) ** k * self.num[i][j]

    def decay_violations(self) -> list[tuple[int, int, int]]:
        bad = []
        for i in range(1, self.n + 1):
            for j in range(i):
                for k in range(j + 1):
                    if not self.jump_decay_holds(i, j, k):
                        bad.append((i, j, k))
        return bad


def check_jump_decay(n: int, p_m, i: int, j: int, k: int) -> bool:
    if not (0 <= j < i <= n and 0 <= k <= j):
        raise ValueError(f"need 0 <= k <= j < i <= n, got i={i}, j={j}, k={k}, n={n}")
    p = _as_fraction(p_m)
    lhs = transition_prob(n, p, i, j - k)
    rhs = (i * p / (1 - p)) ** k * transition_prob(n, p, i, j)
    return lhs <= rhs


# --------------------------------------------------------------------------


def greedy_submodular(inst: CoverageInstance) -> tuple[list[int], int]:
    """Nemhauser greedy: r rounds of the largest marginal gain, lowest index on ties."""
    chosen: list[int] = []
    covered = 0
    for _ in range(min(inst.r, inst.n)):
        best, best_gain = None, -1
        for i, mask in enumerate(inst.masks):
            if i in chosen:
                continue
            gain = (covered | mask).bit_count() - covered.bit_count()
            if gain > best_gain:
                best, best_gain = i, gain
        chosen.append(best)
        covered |= inst.masks[best]
    return chosen, covered.bit_count()


def exhaustive_submodular(inst: CoverageInstance) -> tuple[tuple[int, ...], int]:
    """Best set of size at most r by enumeration."""
    best: tuple[tuple[int, ...], int] = ((), 0)
    for size in range(1, min(inst.r, inst.n) + 1):
        for combo in itertools.combinations(range(inst.n), size):
            v = inst.value_of_indices(combo)
            if v > best[1]:
                best = (combo, v)
    return best


class DisconnectedGraphError(ValueError):
    pass


def kruskal(g: Graph) -> tuple[list[int], int]:
    """Edge indices of the MST (in insertion order) and its total weight."""
    parent = list(range(g.n_nodes))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    tree, total = [], 0
    for e in sorted(range(g.m), key=lambda e: (g.weights[e], e)):
        ra, rb = find(g.us[e]), find(g.vs[e])
        if ra != rb:
            parent[ra] = rb
            tree.append(e)
            total += g.weights[e]
    if len(tree) != g.n_nodes - 1:
        raise DisconnectedGraphError("graph is not connected")
    return tree, total


def exhaustive_mst(g: Graph) -> tuple[tuple[int, ...], int]:
    """Minimum-weight spanning tree by enumerating (n_G - 1)-edge subsets."""
    best = None
    for combo in itertools.combinations(range(g.m), g.n_nodes - 1):
        bits = sum(1 << e for e in combo)
        if components_bfs(g, bits) == 1:
            w = sum(g.weights[e] for e in combo)
            if best is None or w < best[1]:
                best = (combo, w)
    if best is None:
        raise DisconnectedGraphError("graph is not connected")
    return best


def components_bfs(g: Graph, bits: int) -> int:
    adj = [[] for _ in range(g.n_nodes)]
    for e in range(g.m):
        if bits >> e & 1:
            adj[g.us[e]].append(g.vs[e])
            adj[g.vs[e]].append(g.us[e])
    seen = [False] * g.n_nodes
    comps = 0
    for s in range(g.n_nodes):
        if seen[s]:
            continue
        comps += 1
        seen[s] = True
        stack = [s]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
    return comps




def cell_optima_bruteforce(problem: Problem, space: FeatureSpace) -> list[Optional[float]]:
    """Exact per-cell maximum of ``problem`` by enumerating all 2**n genotypes."""
    n = problem.n
    if n > BRUTE_FORCE_MAX_N:
        raise ConfigurationError(
            f"n={n} exceeds brute-force limit {BRUTE_FORCE_MAX_N}; disable the optimal-cover milestone"
        )
    if space.n != n:
        raise ConfigurationError(f"feature space over n={space.n} but problem has n={n}")
    best: list[Optional[float]] = [None] * space.cells
    for bits in range(1 << n):
        x = Genotype(bits, n)
        c = space.cell_index(x)
        f = problem.evaluate(x)
        if best[c] is None or f > best[c]:
            best[c] = f
    return best


# --------------------------------------------------------------------------

BOUND_IDS = ("cover_k1", "cover_k", "submod", "mst_zero", "mst_opt")


def bound_value(bound_id: str, n: int, k: int = 1, p_m: Optional[float] = None, **extras) -> float:
    """Leading-order expression of a runtime bound, without hidden constants.

    extras: ``r`` for submod; ``m`` and ``w_max`` for the MST bounds, where
    ``n`` is the node count.
    """
    if bound_id == "cover_k1":
        return n * n * math.log(n)
    if bound_id == "cover_k":
        if (n + 1) % k:
            raise ConfigurationError(f"k={k} must divide n+1={n + 1}")
        p = 1.0 / n if p_m is None else float(p_m)
        return (n + 1) / k * p ** (-k) / math.comb(2 * k - 1, k)
    if bound_id == "submod":
        return n * n * (math.log(n) + extras["r"])
    if bound_id == "mst_zero":
        return n * extras["m"] * math.log(n * extras["w_max"])
    if bound_id == "mst_opt":
        return n * n * extras["m"]
    raise ValueError(f"unknown bound id {bound_id!r}; expected one of {BOUND_IDS}")
