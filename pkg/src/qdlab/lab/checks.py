"""Oracle-equivalence and invariant checks shared by ``verify`` and the tests."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..bitcore import Genotype, RandomSource, flip_mask, new_uniform
from ..engines import GSEMO, QD
from ..features import ConnectedComponents, NumberOfOnes
from ..oracles import TransitionTable, exhaustive_mst, exhaustive_submodular, greedy_submodular, kruskal
from ..problems import (
    Coverage,
    CoverageInstance,
    LinearMonotone,
    MinimumSpanningTree,
    OneMax,
    OneMinMax,
    random_connected_graph,
    unitation_family,
)

E = 2.718281828459045
APPROX = 1 - 1 / E


def decay_violations(n: int, p_m: Fraction, corrupt: Optional[tuple[int, int]] = None) -> list:
    table = TransitionTable(n, p_m)
    if corrupt is not None:
        table.corrupt(*corrupt)
    return table.decay_violations()


def transition_row_error(n: int, p_m: Fraction) -> float:
    return TransitionTable(n, p_m).max_row_sum_error()


def kruskal_mismatches(graphs: int, seed: int, max_nodes: int = 9) -> int:
    rng = RandomSource(seed, 0)
    bad = 0
    for _ in range(graphs):
        n_g = 3 + rng.below(max_nodes - 2)
        m = min(n_g * (n_g - 1) // 2, n_g - 1 + rng.below(n_g + 2))
        g = random_connected_graph(n_g, m, rng)
        edges, w = kruskal(g)
        ex_edges, ex_w = exhaustive_mst(g)
        if w != ex_w or sorted(edges) != sorted(ex_edges):
            bad += 1
    return bad


def greedy_worst_ratio(instances: int, seed: int, max_n: int = 16, max_r: int = 4) -> float:
    rng = RandomSource(seed, 0)
    worst = 1.0
    for _ in range(instances):
        n = 5 + rng.below(max_n - 4)
        r = 1 + rng.below(max_r)
        inst = CoverageInstance.random(n, 20, r, rng, min_size=1, max_size=8)
        _, g = greedy_submodular(inst)
        _, opt = exhaustive_submodular(inst)
        worst = min(worst, g / opt)
    return worst


def coupled_trajectories(n: int, steps: int, seed: int) -> Optional[int]:
    """Drive QD(OneMax, 1-NoO) and GSEMO(OneMinMax) with shared randomness.

    Each step picks one covered one-count uniformly and one flip mask, and
    applies both to the respective engine's member with that one-count.
    Returns the first step at which covered sets or stored genotypes differ,
    or None if the trajectories agree throughout.
    """
    rng = RandomSource(seed, 0)
    x0 = new_uniform(n, rng)
    qd = QD(OneMax(n), NumberOfOnes(n, 1), rng, initial=x0)
    gs = GSEMO(OneMinMax(n), rng, initial=x0)
    for t in range(steps + 1):
        counts = sorted(qd.archive.occupied)
        by_ones = {g.ones: g for g in gs.members}
        if counts != sorted(by_ones) or any(qd.archive.elites[c] != by_ones[c] for c in counts):
            return t
        if t == steps:
            break
        c = counts[rng.below(len(counts))]
        mask = flip_mask(n, 1 / n, rng)
        qd.consider(Genotype(qd.archive.elites[c].bits ^ mask, n))
        gs.consider(Genotype(by_ones[c].bits ^ mask, n))
    return None


def _stress_engines(rng: RandomSource):
    """A rotating set of (problem, space) pairs for invariant stress runs."""
    n = 15
    yield OneMax(n), NumberOfOnes(n, 1)
    yield unitation_family("trap", n), NumberOfOnes(n, 4)
    yield unitation_family("jump", n, 3), NumberOfOnes(n, 2)
    yield LinearMonotone.random(n, rng), NumberOfOnes(n, 8)
    inst = CoverageInstance.random(n, 30, 4, rng)
    yield Coverage(inst), NumberOfOnes(n, 1)
    g = random_connected_graph(9, 16, rng)
    yield MinimumSpanningTree(g), ConnectedComponents(g)


def archive_invariant_violations(steps: int, seed: int, full_every: int = 1000) -> list[str]:
    """Run engines step by step and check archive invariants throughout."""
    rng = RandomSource(seed, 0)
    problems = list(_stress_engines(rng))
    per = steps // len(problems)
    errors: list[str] = []
    for idx, (problem, space) in enumerate(problems):
        qd = QD(problem, space, RandomSource(seed, idx + 1), p_m=min(0.5, 2.0 / problem.n))
        fit = list(qd.archive.fitness)
        covered = qd.covered
        for t in range(per):
            evals = qd.evals
            qd.step()
            if qd.evals != evals + 1:
                errors.append(f"{problem.name}: evals jumped at step {t}")
            if qd.covered < covered:
                errors.append(f"{problem.name}: coverage shrank at step {t}")
            covered = qd.covered
            new = qd.archive.fitness
            for i in range(len(new)):
                if new[i] < fit[i]:
                    errors.append(f"{problem.name}: cell {i} fitness decreased at step {t}")
            fit = list(new)
            if t % full_every == 0 or t == per - 1:
                arch = qd.archive
                if arch.covered != sum(e is not None for e in arch.elites):
                    errors.append(f"{problem.name}: covered count out of sync at step {t}")
                for i, e, f in arch.items():
                    if space.cell_index(e) != i:
                        errors.append(f"{problem.name}: elite stored in wrong cell {i} at step {t}")
                    if problem.evaluate(e) != f:
                        errors.append(f"{problem.name}: stale fitness in cell {i} at step {t}")
                    if e.ones != e.bits.bit_count():
                        errors.append(f"{problem.name}: ones cache wrong in cell {i} at step {t}")
            if len(errors) > 20:
                return errors
    return errors


def run_step_equivalence(seed: int, reps: int = 5) -> bool:
    """The inlined run loop and repeated step() produce identical archives."""
    from ..engines import StopCondition

    for s in range(reps):
        for problem, space in list(_stress_engines(RandomSource(seed, 100 + s)))[:5]:
            a = QD(problem, space, RandomSource(seed, s))
            b = QD(problem, space, RandomSource(seed, s))
            a.run(StopCondition(3000))
            while b.evals < 3000:
                b.step()
            if a.archive.elites != b.archive.elites or (a.t_cover, a.t_opt, a.t_copt) != (b.t_cover, b.t_opt, b.t_copt):
                return False
    return True
