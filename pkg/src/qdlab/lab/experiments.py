"""Acceptance experiments E1-E6 and property checks P1-P2.

Each function runs one experiment and returns a ``Verdict`` holding one
(label, passed, detail) line per criterion. The defaults are the full sizes;
``verify --level fast`` calls the same functions with smaller arguments.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ..bitcore import RandomSource
from ..engines import StopCondition, gsemo_run, qd_run
from ..features import ConnectedComponents, NumberOfOnes
from ..oracles import bound_value, exhaustive_submodular
from ..problems import Coverage, CoverageInstance, MinimumSpanningTree, OneMax, OneMinMax, random_connected_graph
from . import checks
from .config import SweepConfig
from .fitting import bootstrap_ci, cis_overlap, fit_scaling, ratio_spread
from .sweep import run_sweep

APPROX = 1 - 1 / math.e


@dataclass
class Verdict:
    name: str
    lines: list[tuple[str, bool, str]] = field(default_factory=list)
    seconds: float = 0.0
    seeds: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.lines)

    def add(self, label: str, ok: bool, detail: str = "") -> bool:
        self.lines.append((label, bool(ok), detail))
        return ok

    def report(self) -> str:
        out = [f"[{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.seconds:.1f}s, seeds={self.seeds})"]
        for label, ok, detail in self.lines:
            out.append(f"    {'pass' if ok else 'FAIL'}  {label}: {detail}")
        return "\n".join(out)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        v = fn(*args, **kwargs)
        v.seconds = time.perf_counter() - t0
        return v

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _sweep(problem: dict, space: str, grid, reps: int, seed: int, stop: dict, workers: int, cid: str):
    cfg = SweepConfig(
        problem=problem,
        space=space,
        grid=list(grid),
        replications=reps,
        stop=stop,
        master_seed=seed,
        config_id=cid,
        workers=workers,
    )
    return run_sweep(cfg)


@_timed
def e1_onemax_cover(
    grid: Sequence[int] = (31, 63, 127, 255), reps: int = 100, seed: int = 101, workers: int = 1
) -> Verdict:
    """OneMax, 1-NoO, p_m = 1/n: cover time against n^2 ln n."""
    v = Verdict("E1 OneMax cover time, k=1", seeds={"master_seed": seed})
    recs = _sweep({"name": "onemax"}, "k=1", grid, reps, seed, {"covered_all": True}, workers, "E1")
    fit = fit_scaling(recs, "cover_k1", "t_cover", min_replications=min(30, reps))
    v.data["fit"] = fit
    v.add("ratio_spread <= 2.5", fit.ratio_spread <= 2.5, f"spread={fit.ratio_spread:.3f} ratios={_fmt(fit.ratios)}")
    v.add("slope in [0.85, 1.15]", 0.85 <= fit.slope <= 1.15, f"slope={fit.slope:.3f}")
    v.add("no truncated runs beyond 5%", fit.reliable, f"truncated={_fmt(fit.truncated)}")
    return v


@_timed
def e2_k_scaling(
    grid: Sequence[int] = (31, 63, 95),
    reps: int = 100,
    k3_grid: Optional[Sequence[int]] = (29, 59),
    k3_reps: Optional[int] = None,
    seed: int = 202,
    workers: int = 1,
) -> Verdict:
    """OneMax cover time for k=2 (and k=3) against L p^-k / C(2k-1, k)."""
    v = Verdict("E2 k-scaling of cover time", seeds={"master_seed": seed})
    recs = _sweep({"name": "onemax"}, "k=2", grid, reps, seed, {"covered_all": True}, workers, "E2k2")
    fit = fit_scaling(recs, "cover_k", "t_cover", min_range=1.0, min_replications=min(30, reps))
    v.data["fit_k2"] = fit
    v.add("k=2 ratio_spread <= 2.5", fit.ratio_spread <= 2.5, f"spread={fit.ratio_spread:.3f} ratios={_fmt(fit.ratios)}")
    v.add("k=2 truncation < 5%", max(fit.truncated) < 0.05, f"truncated={_fmt(fit.truncated)}")
    if k3_grid:
        recs3 = _sweep(
            {"name": "onemax"}, "k=3", k3_grid, k3_reps or reps, seed + 1, {"covered_all": True}, workers, "E2k3"
        )
        by_n = {}
        for r in recs3:
            by_n.setdefault(r.n, []).append(r)
        means, bounds, trunc = [], [], []
        for n in sorted(by_n):
            vals = [r.t_cover for r in by_n[n] if r.t_cover is not None]
            trunc.append(1 - len(vals) / len(by_n[n]))
            means.append(float(np.mean(vals)))
            bounds.append(bound_value("cover_k", n, k=3, p_m=1 / n))
        spread = ratio_spread(means, bounds)
        v.data["k3"] = {"means": means, "bounds": bounds, "truncated": trunc}
        ratios = [m / b for m, b in zip(means, bounds)]
        v.add("k=3 ratio_spread <= 2.5", spread <= 2.5, f"spread={spread:.3f} ratios={_fmt(ratios)}")
        v.add("k=3 truncation < 5%", max(trunc) < 0.05, f"truncated={_fmt(trunc)}")
    return v


@_timed
def e3_unitation(grid: Sequence[int] = (31, 63, 127), reps: int = 100, seed: int = 303, workers: int = 1) -> Verdict:
    """Trap and Jump(3) with 1-NoO: milestone equalities and scaling of t_opt."""
    v = Verdict("E3 unitation optimisation", seeds={"master_seed": seed})
    stop = {"covered_all": True, "global_opt_found": True, "all_cells_optimal": True}
    for offset, problem in enumerate(({"name": "trap"}, {"name": "jump", "gap": 3})):
        label = problem["name"]
        recs = _sweep(problem, "k=1", grid, reps, seed + offset, stop, workers, f"E3{label}")
        copt_eq = sum(r.t_copt == r.t_cover and r.t_cover is not None for r in recs)
        opt_eq = sum(r.t_opt == r.t_cover and r.t_cover is not None for r in recs)
        opt_le = sum(r.t_opt is not None and r.t_cover is not None and r.t_opt <= r.t_cover for r in recs)
        v.add(f"{label}: t_copt = t_cover per run", copt_eq == len(recs), f"{copt_eq}/{len(recs)} runs")
        v.add(
            f"{label}: t_opt = t_copt = t_cover per run",
            opt_eq == len(recs) and copt_eq == len(recs),
            f"{opt_eq}/{len(recs)} runs with t_opt = t_cover; t_opt <= t_cover in {opt_le}/{len(recs)}",
        )
        v.data[f"{label}_opt_le_cover"] = opt_le
        fit = fit_scaling(recs, "cover_k1", "t_opt", min_range=1.0, min_replications=min(30, reps))
        v.data[f"fit_{label}"] = fit
        v.add(f"{label}: t_opt ratio_spread <= 2.5", fit.ratio_spread <= 2.5, f"spread={fit.ratio_spread:.3f} ratios={_fmt(fit.ratios)}")
        v.add(f"{label}: t_opt slope in [0.85, 1.15]", 0.85 <= fit.slope <= 1.15, f"slope={fit.slope:.3f}")
    return v


@_timed
def e4_gsemo_equivalence(
    n: int = 63, reps: int = 300, coupled_n: int = 20, coupled_steps: int = 1000, seed: int = 404
) -> Verdict:
    """QD cover time on OneMax vs GSEMO Pareto-front cover time on OneMinMax."""
    v = Verdict("E4 QD/GSEMO equivalence", seeds={"master_seed": seed})
    stop = StopCondition(budget=50 * int(bound_value("cover_k1", n)), covered_all=True)
    qd = [qd_run(OneMax(n), NumberOfOnes(n, 1), 1 / n, stop, RandomSource(seed, i)).t_cover for i in range(reps)]
    gs = [gsemo_run(OneMinMax(n), stop, RandomSource(seed + 1, i)).t_cover for i in range(reps)]
    ok = None not in qd and None not in gs
    v.add("all runs covered", ok, f"qd={sum(t is not None for t in qd)}, gsemo={sum(t is not None for t in gs)}")
    if ok:
        ci_q, ci_g = bootstrap_ci(qd, seed=1), bootstrap_ci(gs, seed=2)
        v.data.update(qd_mean=float(np.mean(qd)), gsemo_mean=float(np.mean(gs)), qd_ci=ci_q, gsemo_ci=ci_g)
        v.add(
            "bootstrap 95% CIs of the means overlap",
            cis_overlap(ci_q, ci_g),
            f"QD mean={np.mean(qd):.0f} CI=[{ci_q[0]:.0f}, {ci_q[1]:.0f}]; "
            f"GSEMO mean={np.mean(gs):.0f} CI=[{ci_g[0]:.0f}, {ci_g[1]:.0f}]",
        )
    first_diff = checks.coupled_trajectories(coupled_n, coupled_steps, seed)
    v.add(
        f"coupled trajectories identical for {coupled_steps} steps at n={coupled_n}",
        first_diff is None,
        "identical" if first_diff is None else f"diverged at step {first_diff}",
    )
    return v


@_timed
def e5_submodular(
    instances: int = 50,
    n: int = 14,
    universe: int = 40,
    rs: Sequence[int] = (3, 5),
    reps: int = 5,
    seed: int = 505,
) -> Verdict:
    """Max-coverage under |x|_1 <= r: approximation ratio and trajectory bound."""
    v = Verdict("E5 submodular approximation", seeds={"master_seed": seed})
    inst_rng = RandomSource(seed, 2**40)
    stream = 0
    for r in rs:
        budget = int(20 * bound_value("submod", n, r=r))
        finals_ok = total = 0
        t_approx = []
        traj_ok = traj_total = 0
        for _ in range(instances):
            inst = CoverageInstance.random(n, universe, r, inst_rng)
            opt = exhaustive_submodular(inst)[1]
            problem = Coverage(inst, reference_opt=float(opt))
            stop = StopCondition(budget=budget)
            for _ in range(reps):
                rec = qd_run(problem, NumberOfOnes(n, 1), 1 / n, stop, RandomSource(seed, stream), alpha=APPROX)
                hit = rec.t_approx
                stream += 1
                total += 1
                finals_ok += rec.final_best_feasible is not None and rec.final_best_feasible >= APPROX * opt - 1e-9
                t_approx.append(hit if hit is not None else budget)
                for j in range(r + 1):
                    f = rec.cell_first_fitness[j]
                    if f is None:
                        continue
                    traj_total += 1
                    traj_ok += f >= (1 - (1 - 1 / r) ** j) * opt - 1e-9
        mean_t = float(np.mean(t_approx))
        frac = traj_ok / traj_total if traj_total else 0.0
        v.data[f"r{r}"] = {"mean_t_approx": mean_t, "trajectory_fraction": frac, "budget": budget}
        v.add(f"r={r}: final best feasible >= (1-1/e) OPT in 100% of runs", finals_ok == total, f"{finals_ok}/{total}")
        v.add(f"r={r}: mean t_approx <= 20 n^2 (ln n + r)", mean_t <= budget, f"mean={mean_t:.0f} budget={budget}")
        v.add(
            f"r={r}: first-coverage fitness meets the partial greedy bound in >= 95% of (run, j)",
            frac >= 0.95,
            f"{traj_ok}/{traj_total} = {frac:.3f}",
        )
    return v


@_timed
def e6_mst(
    sizes: Sequence[int] = (8, 12, 16), graphs_per_size: int = 10, reps: int = 30, seed: int = 606
) -> Verdict:
    """Connected-components space: reaching 0^m and the MST."""
    v = Verdict("E6 minimum spanning tree", seeds={"master_seed": seed})
    inst_rng = RandomSource(seed, 2**40)
    stream = 0
    opt_means, opt_bounds, zero_means, zero_bounds = [], [], [], []
    reached = total = 0
    for n_g in sizes:
        m = 2 * n_g
        budget = 50 * n_g * n_g * m
        t_opt, t_zero = [], []
        for _ in range(graphs_per_size):
            g = random_connected_graph(n_g, m, inst_rng)
            problem = MinimumSpanningTree(g)
            space = ConnectedComponents(g)
            stop = StopCondition(budget=budget, global_opt_found=True, covered_all=True)
            for _ in range(reps):
                rec = qd_run(problem, space, 1 / m, stop, RandomSource(seed, stream))
                stream += 1
                total += 1
                if rec.t_opt is not None and rec.final_mst_weight == problem.mst_weight:
                    reached += 1
                    t_opt.append(rec.t_opt)
                zero = rec.cell_first_cover[n_g - 1]
                if zero is not None:
                    t_zero.append(zero)
        opt_means.append(float(np.mean(t_opt)))
        opt_bounds.append(bound_value("mst_opt", n_g, m=m))
        zero_means.append(float(np.mean(t_zero)))
        zero_bounds.append(bound_value("mst_zero", n_g, m=m, w_max=m))
    v.data.update(opt_means=opt_means, zero_means=zero_means)
    v.add("100% of runs reach the Kruskal weight within 50 n^2 m", reached == total, f"{reached}/{total}")
    s_opt = ratio_spread(opt_means, opt_bounds)
    s_zero = ratio_spread(zero_means, zero_bounds)
    v.add("t_opt / (n^2 m) ratio_spread <= 3", s_opt <= 3, f"spread={s_opt:.3f} ratios={_fmt([a / b for a, b in zip(opt_means, opt_bounds)])}")
    v.add(
        "t(0^m) / (n m ln(n w_max)) ratio_spread <= 3",
        s_zero <= 3,
        f"spread={s_zero:.3f} ratios={_fmt([a / b for a, b in zip(zero_means, zero_bounds)])}",
    )
    return v


@_timed
def p1_jump_decay(ns: Sequence[int] = (10, 30, 60), cs: Sequence[int] = (1, 2)) -> Verdict:
    """Exact check of the jump-length decay inequality on every admissible triple."""
    v = Verdict("P1 jump-length decay")
    for n in ns:
        for c in cs:
            bad = checks.decay_violations(n, Fraction(c, n))
            v.add(f"n={n}, p_m={c}/{n}: zero violations", not bad, f"{len(bad)} violations")
    bad = checks.decay_violations(10, Fraction(1, 10), corrupt=(6, 1))
    v.add("negative control: corrupted table is detected", bool(bad), f"{len(bad)} violations")
    return v


@_timed
def p2_oracle_suite(
    row_ns: Sequence[int] = (10, 30, 50, 60),
    graphs: int = 100,
    instances: int = 200,
    steps: int = 1_000_000,
    seed: int = 707,
) -> Verdict:
    """Transition rows, Kruskal vs exhaustive, greedy ratio, archive invariants."""
    v = Verdict("P2 oracle suite", seeds={"master_seed": seed})
    worst = max(checks.transition_row_error(n, Fraction(c, n)) for n in row_ns for c in (1, 2))
    v.add("transition rows sum to 1 +- 1e-12", worst <= 1e-12, f"max error={worst:.2e}")
    bad = checks.kruskal_mismatches(graphs, seed)
    v.add(f"Kruskal = exhaustive MST on {graphs} graphs (n_G <= 9)", bad == 0, f"{bad} mismatches")
    ratio = checks.greedy_worst_ratio(instances, seed + 1)
    v.add(f"greedy >= (1-1/e) OPT on {instances} instances", ratio >= APPROX, f"worst ratio={ratio:.4f}")
    errs = checks.archive_invariant_violations(steps, seed + 2)
    v.add(f"archive invariants over {steps} engine steps", not errs, "; ".join(errs[:3]) or "none")
    return v


def _fmt(xs) -> str:
    return "[" + ", ".join(f"{x:.4g}" for x in xs) + "]"


FULL = {
    "E1": e1_onemax_cover,
    "E2": e2_k_scaling,
    "E3": e3_unitation,
    "E4": e4_gsemo_equivalence,
    "E5": e5_submodular,
    "E6": e6_mst,
    "P1": p1_jump_decay,
    "P2": p2_oracle_suite,
}


@_timed
def engine_equivalence(coupled_n: int = 20, coupled_steps: int = 1000, seed: int = 808, reps: int = 3) -> Verdict:
    """GSEMO coupling and run-loop/step equivalence."""
    v = Verdict("engine equivalence", seeds={"master_seed": seed})
    first_diff = checks.coupled_trajectories(coupled_n, coupled_steps, seed)
    v.add(
        f"QD/GSEMO coupled for {coupled_steps} steps at n={coupled_n}",
        first_diff is None,
        "identical" if first_diff is None else f"diverged at step {first_diff}",
    )
    v.add("inlined run loop matches step()", checks.run_step_equivalence(seed, reps), f"{reps} seeds x 5 problems")
    return v


# fast level: oracle and invariant checks only, capped sizes
FAST = {
    "P1": (p1_jump_decay, {}),
    "P2": (p2_oracle_suite, dict(graphs=30, instances=50, steps=100_000)),
    "EQ": (engine_equivalence, {}),
}


@dataclass
class SuiteReport:
    level: str
    verdicts: list[Verdict]

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def summary(self) -> str:
        total = sum(v.seconds for v in self.verdicts)
        status = "PASS" if self.passed else "FAIL"
        return f"{status}: {sum(v.passed for v in self.verdicts)}/{len(self.verdicts)} checks passed ({self.level}, {total:.0f}s)"


def verify_suite(level: str = "fast", only: Optional[Sequence[str]] = None, workers: int = 1, echo=None) -> SuiteReport:
    """``fast``: oracle and invariant checks at capped sizes. ``full``: every acceptance criterion."""
    if level == "fast":
        table = {k: (fn, dict(kw)) for k, (fn, kw) in FAST.items()}
    elif level == "full":
        table = {k: (fn, {"workers": workers} if k in ("E1", "E2", "E3") else {}) for k, fn in FULL.items()}
    else:
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    names = list(only) if only else list(table)
    unknown = set(names) - set(table)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)} for level {level}; expected {list(table)}")
    verdicts = []
    for name in names:
        fn, kwargs = table[name]
        v = fn(**kwargs)
        verdicts.append(v)
        if echo is not None:
            echo(v.report())
    return SuiteReport(level, verdicts)
