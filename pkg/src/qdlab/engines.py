"""The QD (MAP-Elites) loop and the GSEMO baseline.

Both engines are stepwise: ``step()`` performs one parent selection, one
mutation and one evaluation. ``consider(y)`` evaluates and offers an
externally produced offspring, which lets a harness drive both engines with
identical parent choices and mutation masks.
"""

from __future__ import annotations

import math
import time
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Optional

from .bitcore import Genotype, RandomSource, check_rate, flip_mask, new_uniform
from .features import Archive, ConfigurationError, FeatureSpace, NumberOfOnes, OfferOutcome
from .problems import BiObjective, MinimumSpanningTree, Problem
from .records import RunRecord


@dataclass
class StopCondition:
    """Run until every enabled milestone is hit or the budget is spent."""

    budget: int
    covered_all: bool = False
    global_opt_found: bool = False
    all_cells_optimal: bool = False
    approx_reached: Optional[float] = None

    def __post_init__(self):
        if self.budget <= 0:
            raise ConfigurationError(f"budget must be positive, got {self.budget}")

    @property
    def has_goal(self) -> bool:
        return self.covered_all or self.global_opt_found or self.all_cells_optimal or self.approx_reached is not None


class QD:
    """Algorithm state: archive, evaluation counter, milestone bookkeeping."""

    def __init__(
        self,
        problem: Problem,
        space: FeatureSpace,
        rng: RandomSource,
        p_m: Optional[float] = None,
        *,
        cell_optima: Optional[list] = None,
        alpha: Optional[float] = None,
        initial: Optional[Genotype] = None,
    ):
        if space.n != problem.n:
            raise ConfigurationError(f"feature space over n={space.n} but problem has n={problem.n}")
        self.problem = problem
        self.space = space
        self.rng = rng
        self.p_m = 1.0 / problem.n if p_m is None else p_m
        check_rate(self.p_m)
        self.archive = Archive(space)
        self.evals = 0

        self.cell_optima = cell_optima if cell_optima is not None else problem.cell_optima(space)
        self.alpha = alpha
        self.first_cover: list[Optional[int]] = [None] * space.cells
        self.first_fitness: list[Optional[float]] = [None] * space.cells
        self.t_cover: Optional[int] = None
        self.t_opt: Optional[int] = None
        self.t_copt: Optional[int] = None
        self.t_approx: Optional[int] = None
        self.best_feasible: Optional[float] = None
        self._optimal = [False] * space.cells
        self._n_optimal = 0
        self._global_max = problem.global_max
        self._opt_cell = problem.opt_cell
        self._cap = problem.max_feasible_ones
        self._target = None
        if alpha is not None and problem.reference_opt is not None:
            self._target = alpha * problem.reference_opt

        x = initial if initial is not None else new_uniform(problem.n, rng)
        self.consider(x)

    @property
    def covered(self) -> int:
        return len(self.archive.occupied)

    def consider(self, y: Genotype) -> OfferOutcome:
        """Evaluate y, offer it to the archive and update milestones."""
        f = self.problem.evaluate(y)
        self.evals += 1
        evals = self.evals
        cell = self.space.cell_index(y)
        archive = self.archive
        outcome = archive.place(cell, y, f)
        if outcome is OfferOutcome.REJECTED:
            return outcome
        if outcome is OfferOutcome.NEW_CELL:
            self.first_cover[cell] = evals
            self.first_fitness[cell] = f
            if self.t_cover is None and len(archive.occupied) == archive.size:
                self.t_cover = evals
        if (
            self.t_opt is None
            and self._global_max is not None
            and f >= self._global_max
            and (self._opt_cell is None or cell == self._opt_cell)
        ):
            self.t_opt = evals
        if self.cell_optima is not None and not self._optimal[cell] and f >= self.cell_optima[cell]:
            self._optimal[cell] = True
            self._n_optimal += 1
            if self._n_optimal == archive.size:
                self.t_copt = evals
        if self._cap is not None and y.ones <= self._cap:
            if self.best_feasible is None or f > self.best_feasible:
                self.best_feasible = f
                if self.t_approx is None and self._target is not None and f >= self._target:
                    self.t_approx = evals
        return outcome

    def step(self) -> OfferOutcome:
        parent = self.archive.sample_parent(self.rng)
        child = parent.bits ^ flip_mask(parent.n, self.p_m, self.rng)
        return self.consider(Genotype._trusted(child, parent.n, child.bit_count()))

    def done(self, stop: StopCondition) -> bool:
        if stop.covered_all and self.t_cover is None:
            return False
        if stop.global_opt_found and self.t_opt is None:
            return False
        if stop.all_cells_optimal and self.t_copt is None:
            return False
        if stop.approx_reached is not None and self.t_approx is None:
            return False
        return stop.has_goal

    def run(self, stop: StopCondition) -> bool:
        """Step until ``stop`` is satisfied; returns False if the budget ran out.

        Same semantics and random-number consumption as repeated ``step()``
        calls, with the loop body inlined and genotypes allocated only for
        accepted offspring.
        """
        if self.done(stop):
            return True
        rand = self.rng.random
        log = math.log
        log_q = math.log1p(-self.p_m)
        n = self.problem.n
        value = self.problem.value
        index = self.space.index_of
        archive = self.archive
        elites, fit, occ = archive.elites, archive.fitness, archive.occupied
        size = archive.size
        first_cover, first_fitness = self.first_cover, self.first_fitness
        optima, optimal = self.cell_optima, self._optimal
        n_optimal = self._n_optimal
        # disabled milestones start as "already hit" so the loop skips them
        t_opt = self.t_opt if self._global_max is not None else 0
        gmax = self._global_max
        opt_cell = self._opt_cell
        t_copt = self.t_copt if optima is not None else 0
        cap, target = self._cap, self._target
        t_approx = self.t_approx if target is not None else 0
        best_feasible = self.best_feasible
        make = object.__new__
        evals = self.evals
        budget = stop.budget
        finished = False
        while evals < budget:
            parent = elites[occ[int(rand() * len(occ))]]
            mask = 0
            pos = -1
            while True:
                pos += 1 + int(log(1.0 - rand()) / log_q)
                if pos >= n:
                    break
                mask |= 1 << pos
            bits = parent.bits ^ mask
            ones = bits.bit_count()
            f = value(bits, ones)
            evals += 1
            cell = index(bits, ones)
            hit = False
            if elites[cell] is None:
                occ.append(cell)
                first_cover[cell] = evals
                first_fitness[cell] = f
                if len(occ) == size:
                    self.t_cover = evals
                    hit = True
            elif f < fit[cell]:
                continue
            if mask:
                y = make(Genotype)
                y.bits = bits
                y.n = n
                y.ones = ones
            else:
                y = parent
            elites[cell] = y
            fit[cell] = f
            if t_opt is None and f >= gmax and (opt_cell is None or cell == opt_cell):
                t_opt = self.t_opt = evals
                hit = True
            if t_copt is None and not optimal[cell] and f >= optima[cell]:
                optimal[cell] = True
                n_optimal += 1
                if n_optimal == size:
                    t_copt = self.t_copt = evals
                    hit = True
            if cap is not None and ones <= cap and (best_feasible is None or f > best_feasible):
                best_feasible = f
                if t_approx is None and f >= target:
                    t_approx = self.t_approx = evals
                    hit = True
            if hit and self.done(stop):
                finished = True
                break
        self.evals = evals
        self._n_optimal = n_optimal
        self.best_feasible = best_feasible
        return finished or self.done(stop)


def qd_init(problem: Problem, space: FeatureSpace, rng: RandomSource, p_m: Optional[float] = None, **kw) -> QD:
    return QD(problem, space, rng, p_m, **kw)


def qd_step(state: QD) -> OfferOutcome:
    return state.step()


def _space_label(space: FeatureSpace) -> str:
    if isinstance(space, NumberOfOnes):
        return f"k={space.k}"
    return f"cc{space.cells}"


def qd_run(
    problem: Problem,
    space: FeatureSpace,
    p_m: Optional[float],
    stop: StopCondition,
    rng: RandomSource,
    *,
    config_id: str = "",
    cell_optima: Optional[list] = None,
    initial: Optional[Genotype] = None,
    alpha: Optional[float] = None,
) -> RunRecord:
    """Run QD from a fresh uniform sample and record first-hit times.

    ``alpha`` tracks t_approx without stopping on it; ``stop.approx_reached``
    takes precedence.
    """
    if stop.all_cells_optimal and cell_optima is None and problem.cell_optima(space) is None:
        raise ConfigurationError("all_cells_optimal requested but per-cell optima are unknown")
    if stop.global_opt_found and problem.global_max is None:
        raise ConfigurationError("global_opt_found requested but the optimum is unknown")
    if stop.approx_reached is not None:
        if problem.reference_opt is None:
            raise ConfigurationError("approx_reached requested but no reference optimum is set")
        alpha = stop.approx_reached
    t0 = time.perf_counter_ns()
    qd = QD(problem, space, rng, p_m, cell_optima=cell_optima, alpha=alpha, initial=initial)
    finished = qd.run(stop)
    wall = time.perf_counter_ns() - t0
    rec = RunRecord(
        config_id=config_id,
        problem=problem.describe(),
        n=problem.n,
        k_or_cc=_space_label(space),
        p_m=qd.p_m,
        seed=rng.seed,
        stream=rng.stream,
        t_cover=qd.t_cover,
        t_opt=qd.t_opt,
        t_copt=qd.t_copt,
        t_approx=qd.t_approx,
        alpha=alpha,
        final_best_feasible=qd.best_feasible,
        truncated=stop.has_goal and not finished,
        wall_ns=wall,
        evals=qd.evals,
        cell_first_cover=list(qd.first_cover),
        cell_first_fitness=list(qd.first_fitness),
    )
    if isinstance(problem, MinimumSpanningTree):
        best = qd.archive.fitness[0]
        rec.final_mst_weight = -best if qd.archive.elites[0] is not None else None
    return rec


# --------------------------------------------------------------------------


def dominates(a, b) -> bool:
    """Weak Pareto dominance for maximise-both vectors: a >= b componentwise."""
    return a[0] >= b[0] and a[1] >= b[1]


def strictly_dominates(a, b) -> bool:
    return dominates(a, b) and a != b


class GSEMO:
    """Global SEMO over a two-objective problem (maximise-both after orientation).

    Members are kept sorted by the first objective; because they are mutually
    incomparable the second objective then strictly decreases, so dominance
    checks and deletions are a bisection plus a contiguous slice.
    """

    def __init__(
        self,
        problem: BiObjective,
        rng: RandomSource,
        p_m: Optional[float] = None,
        *,
        initial: Optional[Genotype] = None,
    ):
        self.problem = problem
        self.rng = rng
        self.p_m = 1.0 / problem.n if p_m is None else p_m
        check_rate(self.p_m)
        self.keys: list[float] = []
        self.second: list[float] = []
        self.members: list[Genotype] = []
        self.evals = 0
        front = problem.front()
        self._front = front
        self._on_front = 0
        self.t_cover: Optional[int] = None
        self.t_opt: Optional[int] = None
        x = initial if initial is not None else new_uniform(problem.n, rng)
        self.consider(x)

    @property
    def population(self) -> list[tuple[Genotype, tuple[float, float]]]:
        return [(g, (a, b)) for g, a, b in zip(self.members, self.keys, self.second)]

    def __len__(self) -> int:
        return len(self.members)

    def consider(self, y: Genotype) -> bool:
        a, b = self.problem.evaluate(y)
        self.evals += 1
        keys, second = self.keys, self.second
        i = bisect_left(keys, a)
        if i < len(keys) and second[i] >= b and (keys[i] != a or second[i] != b):
            return False
        hi = bisect_right(keys, a)
        lo = hi
        while lo > 0 and second[lo - 1] <= b:
            lo -= 1
        front = self._front
        if front is not None:
            for j in range(lo, hi):
                if (keys[j], second[j]) in front:
                    self._on_front -= 1
            if (a, b) in front:
                self._on_front += 1
        keys[lo:hi] = [a]
        second[lo:hi] = [b]
        self.members[lo:hi] = [y]
        if self.t_opt is None and self.problem.is_target((a, b)):
            self.t_opt = self.evals
        if front is not None and self.t_cover is None and self._on_front == len(front):
            self.t_cover = self.evals
        return True

    def step(self) -> bool:
        members = self.members
        parent = members[int(self.rng.random() * len(members))]
        child = parent.bits ^ flip_mask(parent.n, self.p_m, self.rng)
        return self.consider(Genotype._trusted(child, parent.n, child.bit_count()))

    def best_first_objective(self) -> float:
        return self.keys[-1]

    def run(self, stop: StopCondition) -> bool:
        def done():
            if stop.covered_all and self.t_cover is None:
                return False
            if (stop.global_opt_found or stop.approx_reached is not None) and self.t_opt is None:
                return False
            return stop.has_goal

        while self.evals < stop.budget:
            if done():
                return True
            self.step()
        return done()


def gsemo_run(
    problem: BiObjective,
    stop: StopCondition,
    rng: RandomSource,
    *,
    p_m: Optional[float] = None,
    config_id: str = "",
    initial: Optional[Genotype] = None,
) -> RunRecord:
    """Run GSEMO; t_cover is Pareto-front cover time, t_opt the target hit."""
    if stop.covered_all and problem.front() is None:
        raise ConfigurationError("covered_all needs a known Pareto front")
    t0 = time.perf_counter_ns()
    g = GSEMO(problem, rng, p_m, initial=initial)
    finished = g.run(stop)
    rec = RunRecord(
        config_id=config_id,
        problem=problem.name,
        n=problem.n,
        k_or_cc="gsemo",
        p_m=g.p_m,
        seed=rng.seed,
        stream=rng.stream,
        t_cover=g.t_cover,
        t_opt=g.t_opt,
        t_approx=g.t_opt if stop.approx_reached is not None else None,
        alpha=stop.approx_reached,
        truncated=stop.has_goal and not finished,
        wall_ns=time.perf_counter_ns() - t0,
        evals=g.evals,
    )
    if problem.name == "coverage-gsemo":
        rec.final_best_feasible = max(0.0, g.best_first_objective())
    if problem.name == "mst-gsemo":
        # member with one component, if any, carries the tree weight
        for gen, (a, b) in g.population:
            if a == -1:
                rec.final_mst_weight = -b
    return rec
