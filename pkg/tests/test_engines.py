import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdlab.bitcore import Genotype, RandomSource
from qdlab.engines import (
    GSEMO,
    QD,
    StopCondition,
    dominates,
    gsemo_run,
    qd_init,
    qd_run,
    qd_step,
    strictly_dominates,
)
from qdlab.features import ConfigurationError, ConnectedComponents, NumberOfOnes, OfferOutcome
from qdlab.lab import checks
from qdlab.oracles import cell_optima_bruteforce
from qdlab.problems import (
    BiObjective,
    Constant,
    Coverage,
    CoverageInstance,
    MinimumSpanningTree,
    MSTBiObjective,
    OneMax,
    OneMinMax,
    random_connected_graph,
    unitation_family,
)


def test_init_stores_one_sample(rng):
    qd = qd_init(OneMax(10), NumberOfOnes(10, 1), rng)
    assert qd.evals == 1
    assert qd.covered == 1
    (cell, x, f), = qd.archive.items()
    assert cell == x.ones and f == x.ones


def test_init_deterministic():
    a = qd_init(OneMax(30), NumberOfOnes(30, 1), RandomSource(5, 2))
    b = qd_init(OneMax(30), NumberOfOnes(30, 1), RandomSource(5, 2))
    assert a.archive.elites == b.archive.elites


def test_init_rejects_mismatch(rng):
    with pytest.raises(ConfigurationError):
        qd_init(OneMax(10), NumberOfOnes(11, 1), rng)


def test_single_cell_covers_at_first_eval(rng):
    rec = qd_run(OneMax(7), NumberOfOnes(7, 8), None, StopCondition(100, covered_all=True), rng)
    assert rec.t_cover == 1
    assert not rec.truncated


def test_single_cell_is_one_plus_one_ea():
    # with one cell the parent is always the current elite: a (1+1) EA
    n = 12
    qd = QD(OneMax(n), NumberOfOnes(n, n + 1), RandomSource(3, 0))
    best = qd.archive.fitness[0]
    for _ in range(3000):
        qd.step()
        assert qd.archive.fitness[0] >= best
        best = qd.archive.fitness[0]
        assert len(qd.archive.occupied) == 1
    assert qd.t_opt is not None and best == n


def test_step_counts_one_eval(rng):
    qd = qd_init(OneMax(20), NumberOfOnes(20, 1), rng)
    for i in range(50):
        qd_step(qd)
        assert qd.evals == i + 2


def test_step_new_cell_regardless_of_fitness(rng):
    qd = QD(Constant(5, 0.0), NumberOfOnes(5, 1), rng, initial=Genotype.from_string("11000"))
    assert qd.consider(Genotype.from_string("10000")) is OfferOutcome.NEW_CELL


def test_step_equal_fitness_replaces(rng):
    qd = QD(OneMax(5), NumberOfOnes(5, 1), rng, initial=Genotype.from_string("11000"))
    y = Genotype.from_string("00011")
    assert qd.consider(y) is OfferOutcome.REPLACED
    assert qd.archive.elites[2] == y


def test_worse_offspring_rejected(rng):
    trap = unitation_family("trap", 5)
    qd = QD(trap, NumberOfOnes(5, 6), rng, initial=Genotype.zeros(5))
    assert qd.consider(Genotype.from_string("11000")) is OfferOutcome.REJECTED


def test_onemax_cover_equals_optimal_cover(rng):
    n = 15
    rec = qd_run(OneMax(n), NumberOfOnes(n, 1), None, StopCondition(10**7, covered_all=True), rng)
    assert rec.t_cover is not None and rec.t_copt == rec.t_cover
    assert rec.milestones_ordered()


def test_onemax_cells_aligned_at_cover(rng):
    n = 15
    qd = QD(OneMax(n), NumberOfOnes(n, 1), rng)
    qd.run(StopCondition(10**7, covered_all=True))
    assert qd.archive.fitness == [float(i) for i in range(n + 1)]


def test_constant_function_covers(rng):
    rec = qd_run(Constant(7), NumberOfOnes(7, 1), None, StopCondition(10**6, covered_all=True), rng)
    assert rec.t_cover is not None


def test_budget_must_be_positive():
    with pytest.raises(ValueError):
        StopCondition(0)


def test_truncation_flagged(rng):
    rec = qd_run(OneMax(60), NumberOfOnes(60, 1), None, StopCondition(50, covered_all=True), rng)
    assert rec.truncated and rec.t_cover is None and rec.evals == 50


def test_budget_only_is_not_truncated(rng):
    rec = qd_run(OneMax(10), NumberOfOnes(10, 1), None, StopCondition(200), rng)
    assert not rec.truncated and rec.evals == 200


def test_missing_optima_rejected(rng):
    inst = CoverageInstance.random(10, 20, 3, rng)
    with pytest.raises(ConfigurationError):
        qd_run(Coverage(inst), NumberOfOnes(10, 1), None, StopCondition(10, all_cells_optimal=True), rng)


def test_bruteforce_optima_drive_copt(rng):
    inst = CoverageInstance.random(10, 20, 3, rng)
    problem, space = Coverage(inst), NumberOfOnes(10, 1)
    optima = cell_optima_bruteforce(problem, space)
    stop = StopCondition(10**6, all_cells_optimal=True)
    rec = qd_run(problem, space, None, stop, rng, cell_optima=optima)
    assert rec.t_copt is not None and rec.t_copt >= rec.t_cover


def test_mst_optimum_requires_spanning_tree(rng):
    g = random_connected_graph(8, 16, rng)
    problem = MinimumSpanningTree(g)
    qd = QD(problem, ConnectedComponents(g), rng, initial=Genotype.zeros(16))
    # weight 0 beats every tree but is not a tree
    assert qd.t_opt is None
    rec = qd_run(problem, ConnectedComponents(g), None, StopCondition(10**6, global_opt_found=True), rng)
    assert rec.final_mst_weight == problem.mst_weight


def test_run_matches_step():
    assert checks.run_step_equivalence(11, reps=2)


def test_approx_tracked_without_stopping(rng):
    inst = CoverageInstance.random(12, 30, 3, rng)
    problem = Coverage(inst, reference_opt=float(inst.value_of_indices(range(12))))
    rec = qd_run(problem, NumberOfOnes(12, 1), None, StopCondition(5000), rng, alpha=0.1)
    assert rec.t_approx is not None and rec.evals == 5000


# --------------------------------------------------------------------------


def test_dominance_helpers():
    assert dominates((1, 2), (1, 2)) and not strictly_dominates((1, 2), (1, 2))
    assert strictly_dominates((2, 2), (1, 2))
    assert not dominates((0, 3), (1, 2))


def test_gsemo_onemaxmin_population_is_front(rng):
    n = 12
    g = GSEMO(OneMinMax(n), rng)
    for _ in range(5000):
        g.step()
        counts = [m.ones for m in g.members]
        assert len(set(counts)) == len(counts)
    assert g.t_cover is not None
    assert sorted(m.ones for m in g.members) == list(range(n + 1))


class _Flat(BiObjective):
    name = "flat"

    def __init__(self, n):
        self.n = n

    def raw(self, x):
        return (float(x.ones), 0.0)


def test_gsemo_single_objective_keeps_one_member(rng):
    g = GSEMO(_Flat(10), rng)
    for _ in range(2000):
        g.step()
        assert len(g) == 1
    assert g.keys[0] == 10.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gsemo_no_member_strictly_dominated(seed):
    rng = RandomSource(seed, 0)
    g = random_connected_graph(6, 10, rng)
    gs = GSEMO(MSTBiObjective(g), rng)
    for _ in range(300):
        gs.step()
    pop = gs.population
    for (_, a), (_, b) in itertools.permutations(pop, 2):
        assert not strictly_dominates(a, b)


def test_gsemo_mst_finds_tree():
    g = random_connected_graph(6, 10, RandomSource(2, 0))
    problem = MSTBiObjective(g)
    rec = gsemo_run(problem, StopCondition(10**6, global_opt_found=True), RandomSource(2, 1))
    assert rec.t_opt is not None and rec.k_or_cc == "gsemo"


def test_gsemo_pareto_cover_time_onemaxmin(rng):
    rec = gsemo_run(OneMinMax(15), StopCondition(10**7, covered_all=True), rng)
    assert rec.t_cover is not None and not rec.truncated


def test_coupled_harness_agrees():
    assert checks.coupled_trajectories(20, 1000, 3) is None
    assert checks.coupled_trajectories(9, 1000, 4) is None
