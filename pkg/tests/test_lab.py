import math

import pytest

from qdlab.features import ConfigurationError
from qdlab.lab.config import build_point, config_from_dict, load_config
from qdlab.lab.experiments import verify_suite
from qdlab.lab.fitting import bootstrap_ci, cis_overlap, fit_scaling
from qdlab.lab.sweep import read_csv, records_to_csv, run_sweep
from qdlab.records import CSV_COLUMNS, RunRecord


def _cfg(**over):
    base = dict(
        problem={"name": "onemax"},
        space="k=1",
        grid=[7],
        replications=2,
        master_seed=99,
        config_id="t",
        timing=False,
    )
    base.update(over)
    return config_from_dict(base)


def test_two_rows_deterministic():
    a = run_sweep(_cfg())
    b = run_sweep(_cfg())
    assert len(a) == 2
    assert [r.t_cover for r in a] == [r.t_cover for r in b]
    assert [(r.seed, r.stream) for r in a] == [(99, 0), (99, 1)]


def test_rerun_byte_identical(tmp_path):
    cfg = _cfg(grid=[7, 15], replications=3)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run_sweep(cfg, str(p1))
    run_sweep(cfg, str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_parallel_sweep_keeps_row_order(tmp_path):
    serial = records_to_csv(run_sweep(_cfg(grid=[7, 15], replications=4)))
    parallel = records_to_csv(run_sweep(_cfg(grid=[7, 15], replications=4, workers=2)))
    assert serial == parallel


def test_streams_follow_grid_index():
    recs = run_sweep(_cfg(grid=[7, 15], replications=3))
    assert [r.stream for r in recs] == list(range(6))


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "r.csv"
    recs = run_sweep(_cfg(problem={"name": "trap"}, grid=[7], stop={"covered_all": True, "global_opt_found": True}), str(path))
    back = read_csv(path)
    assert [r.csv_row() for r in back] == [r.csv_row() for r in recs]


def test_missing_milestone_is_empty_field():
    row = RunRecord(config_id="x", n=5, t_cover=3).csv_row()
    assert row[CSV_COLUMNS.index("t_opt")] == ""
    assert row[CSV_COLUMNS.index("t_cover")] == "3"


def test_milestone_order():
    assert RunRecord(t_cover=5, t_opt=2, t_copt=5).milestones_ordered()
    assert not RunRecord(t_cover=6, t_copt=5).milestones_ordered()


def test_monotone_mean_cover():
    recs = run_sweep(_cfg(grid=[15, 31, 63], replications=50))
    means = [sum(r.t_cover for r in recs if r.n == n) / 50 for n in (15, 31, 63)]
    assert means == sorted(means)


@pytest.mark.parametrize(
    "over",
    [
        dict(space="k=2", grid=[8]),
        dict(grid=[]),
        dict(problem={"name": "nope"}),
        dict(space="cc"),
        dict(space="q=3"),
        dict(replications=0),
    ],
)
def test_invalid_configs(over):
    with pytest.raises(ConfigurationError):
        _cfg(**over)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigurationError):
        config_from_dict({"problem": {"name": "onemax"}, "grid": [7], "colour": "red"})


def test_unknown_stop_key_rejected():
    with pytest.raises(ConfigurationError):
        build_point(_cfg(stop={"forever": True}), 7, 0)


def test_unwritable_output():
    with pytest.raises(ConfigurationError):
        run_sweep(_cfg(), "/proc/definitely/not/here.csv")


def test_load_toml(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('grid = [15]\nspace = "k=4"\n[problem]\nname = "jump"\ngap = 3\n[stop]\nbudget = 1000\n')
    cfg = load_config(path)
    point = build_point(cfg, 15, 0)
    assert point.space.cells == 4 and point.stop.budget == 1000


def test_default_budget_is_fifty_bounds():
    point = build_point(_cfg(grid=[31]), 31, 0)
    assert point.stop.budget == int(50 * 31 * 31 * math.log(31))


def test_mst_and_coverage_configs_build():
    cfg = _cfg(problem={"name": "mst", "m_factor": 2}, space="cc", grid=[6], stop={"global_opt_found": True})
    assert build_point(cfg, 6, 0).problem.n == 12
    cfg = _cfg(problem={"name": "coverage", "universe": 30, "r": 3}, grid=[10], stop={"approx_reached": 0.6})
    recs = run_sweep(cfg)
    assert all(r.t_approx is not None for r in recs)


# --------------------------------------------------------------------------


def _synthetic(fn, ns=(31, 63, 127, 255), reps=30):
    return [RunRecord(n=n, k_or_cc="k=1", p_m=1 / n, t_cover=int(fn(n))) for n in ns for _ in range(reps)]


def test_fit_exact_bound_multiple():
    ns = (31, 63, 127, 255)
    exact = {n: [3 * n * n * math.log(n)] * 30 for n in ns}
    fit = fit_scaling(_synthetic(lambda n: 0, ns), "cover_k1", values=exact)
    assert fit.ratio_spread == pytest.approx(1)
    assert fit.slope == pytest.approx(1)
    assert fit.verdict


def test_fit_cubic_fails():
    fit = fit_scaling(_synthetic(lambda n: n**3), "cover_k1")
    assert fit.slope > 1 and fit.ratio_spread > 2.5
    assert not fit.verdict


def test_fit_short_range_fails():
    fit = fit_scaling(_synthetic(lambda n: n * n * math.log(n), ns=(31, 63, 127)), "cover_k1")
    assert not fit.verdict and any("grid spans" in s for s in fit.notes)


def test_fit_truncation_marks_unreliable():
    recs = _synthetic(lambda n: n * n * math.log(n))
    for r in recs[:3]:
        r.t_cover, r.truncated = None, True
    fit = fit_scaling(recs, "cover_k1")
    assert not fit.reliable and not fit.verdict
    assert fit.truncated[0] == pytest.approx(0.1)


def test_fit_too_few_runs_unreliable():
    fit = fit_scaling(_synthetic(lambda n: n * n, reps=5), "cover_k1")
    assert not fit.reliable


def test_fit_needs_three_points():
    with pytest.raises(ConfigurationError):
        fit_scaling(_synthetic(lambda n: n, ns=(31, 63)), "cover_k1")


def test_fit_ratios_positive_and_json():
    fit = fit_scaling(_synthetic(lambda n: 2 * n * n * math.log(n)), "cover_k1")
    assert all(r > 0 for r in fit.ratios)
    assert '"bound_id": "cover_k1"' in fit.to_json()


def test_bootstrap_ci_contains_mean():
    vals = list(range(100))
    lo, hi = bootstrap_ci(vals)
    assert lo < 49.5 < hi
    assert cis_overlap((0, 1), (1, 2)) and not cis_overlap((0, 1), (1.5, 2))


def test_verify_fast_passes():
    report = verify_suite("fast")
    assert report.passed, report.summary()


def test_verify_negative_control_detected():
    from qdlab.lab.checks import decay_violations
    from fractions import Fraction

    assert decay_violations(10, Fraction(1, 10), corrupt=(6, 1))


def test_verify_reports_timing_and_seeds():
    report = verify_suite("fast", only=["P2"])
    v = report.verdicts[0]
    assert v.seconds > 0 and v.seeds
    assert "PASS" in v.report()


def test_verify_bad_level():
    with pytest.raises(ValueError):
        verify_suite("medium")
