"""Hitting-time statistics and ratio/slope checks against bound expressions."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from ..features import ConfigurationError
from ..oracles import bound_value
from ..records import RunRecord

MAX_SPREAD = 2.5
MIN_RANGE = 8.0
MAX_TRUNCATED = 0.05
MIN_REPLICATIONS = 30


def bootstrap_ci(values: Sequence[float], level: float = 0.95, seed: int = 0) -> tuple[float, float]:
    """Percentile bootstrap CI of the mean."""
    arr = np.asarray(values, dtype=float)
    if len(arr) < 2 or np.all(arr == arr[0]):
        return float(arr.mean()), float(arr.mean())
    res = stats.bootstrap(
        (arr,), np.mean, confidence_level=level, n_resamples=2000, method="percentile", random_state=seed
    )
    return float(res.confidence_interval.low), float(res.confidence_interval.high)


@dataclass
class FitResult:
    bound_id: str
    metric: str
    ns: list[int]
    runs: list[int]
    means: list[float]
    medians: list[float]
    ci_low: list[float]
    ci_high: list[float]
    bounds: list[float]
    ratios: list[float]
    truncated: list[float]
    ratio_spread: float
    slope: float
    n_range: float
    reliable: bool
    verdict: bool
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def table(self) -> str:
        rows = [f"{'n':>6} {'runs':>5} {'mean':>12} {'median':>12} {'95% CI':>25} {'bound':>12} {'ratio':>8}"]
        for i, n in enumerate(self.ns):
            ci = f"[{self.ci_low[i]:.0f}, {self.ci_high[i]:.0f}]"
            rows.append(
                f"{n:>6} {self.runs[i]:>5} {self.means[i]:>12.1f} {self.medians[i]:>12.1f} "
                f"{ci:>25} {self.bounds[i]:>12.1f} {self.ratios[i]:>8.4f}"
            )
        rows.append(f"ratio_spread={self.ratio_spread:.3f} slope={self.slope:.3f} verdict={'PASS' if self.verdict else 'FAIL'}")
        rows += [f"note: {n}" for n in self.notes]
        return "\n".join(rows)


def _bound_for(bound_id: str, rec: RunRecord, r: Optional[int], w_max: Optional[float]) -> float:
    if bound_id in ("mst_zero", "mst_opt"):
        if not rec.k_or_cc.startswith("cc"):
            raise ConfigurationError(f"{bound_id} needs connected-components records")
        n_nodes = int(rec.k_or_cc[2:])
        return bound_value(bound_id, n_nodes, m=rec.n, w_max=w_max if w_max is not None else rec.n)
    if bound_id == "submod":
        if r is None:
            raise ConfigurationError("submod bound needs the cardinality constraint r")
        return bound_value(bound_id, rec.n, r=r)
    if bound_id == "cover_k":
        k = int(rec.k_or_cc.split("=")[1])
        return bound_value(bound_id, rec.n, k=k, p_m=rec.p_m)
    return bound_value(bound_id, rec.n)


def fit_scaling(
    records: Sequence[RunRecord],
    bound_id: str,
    metric: str = "t_cover",
    *,
    r: Optional[int] = None,
    w_max: Optional[float] = None,
    max_spread: float = MAX_SPREAD,
    min_range: float = MIN_RANGE,
    slope_range: Optional[tuple[float, float]] = None,
    min_replications: int = MIN_REPLICATIONS,
    values: Optional[dict[int, Sequence[float]]] = None,
) -> FitResult:
    """Compare per-n mean hitting times with ``bound_value`` over the grid.

    A run without the milestone counts as truncated. Its time is unknown, so
    it is excluded from the mean; more than 5% truncation at any grid point
    marks the whole fit unreliable and failing. ``values`` overrides the
    per-n samples (e.g. a derived hitting time not stored in the CSV).
    """
    groups: dict[int, list[RunRecord]] = defaultdict(list)
    for rec in records:
        groups[rec.n].append(rec)
    if len(groups) < 3:
        raise ConfigurationError(f"need at least 3 grid points, got {len(groups)}")
    notes = []
    ns = sorted(groups)
    res = dict(runs=[], means=[], medians=[], ci_low=[], ci_high=[], bounds=[], ratios=[], truncated=[])
    reliable = True
    for n in ns:
        recs = groups[n]
        if values is not None:
            vals = [v for v in values[n] if v is not None]
            total = len(values[n])
        else:
            vals = [getattr(rec, metric) for rec in recs if getattr(rec, metric) is not None]
            total = len(recs)
        trunc = 1 - len(vals) / total
        if trunc > MAX_TRUNCATED:
            reliable = False
            notes.append(f"n={n}: {trunc:.1%} of runs truncated")
        if total < min_replications:
            reliable = False
            notes.append(f"n={n}: only {total} runs (< {min_replications})")
        if not vals:
            raise ConfigurationError(f"n={n}: no run reached {metric}")
        mean = float(np.mean(vals))
        lo, hi = bootstrap_ci(vals, seed=n)
        bound = _bound_for(bound_id, recs[0], r, w_max)
        res["runs"].append(total)
        res["means"].append(mean)
        res["medians"].append(float(np.median(vals)))
        res["ci_low"].append(lo)
        res["ci_high"].append(hi)
        res["bounds"].append(bound)
        res["ratios"].append(mean / bound)
        res["truncated"].append(trunc)
    spread = max(res["ratios"]) / min(res["ratios"])
    slope = float(np.polyfit(np.log(res["bounds"]), np.log(res["means"]), 1)[0])
    n_range = ns[-1] / ns[0]
    verdict = reliable and spread <= max_spread and n_range >= min_range
    if n_range < min_range:
        notes.append(f"grid spans {n_range:.2f}x in n, below {min_range}x")
    if slope_range is not None and not slope_range[0] <= slope <= slope_range[1]:
        verdict = False
        notes.append(f"slope {slope:.3f} outside {slope_range}")
    return FitResult(
        bound_id=bound_id,
        metric=metric,
        ns=ns,
        ratio_spread=spread,
        slope=slope,
        n_range=n_range,
        reliable=reliable,
        verdict=verdict,
        notes=notes,
        **res,
    )


def ratio_spread(means: Sequence[float], bounds: Sequence[float]) -> float:
    ratios = [m / b for m, b in zip(means, bounds)]
    return max(ratios) / min(ratios)


def cis_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


def log_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def is_finite(x) -> bool:
    return x is not None and math.isfinite(x)
