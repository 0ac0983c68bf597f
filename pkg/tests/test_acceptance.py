"""Acceptance criteria at full size. Slow: about half an hour on one core.

Each test prints one PASS/FAIL line per criterion, then asserts them all.
"""

import pytest

from qdlab.lab import experiments as ex


def _check(capsys, verdict):
    with capsys.disabled():
        print()
        for label, ok, detail in verdict.lines:
            print(f"{'PASS' if ok else 'FAIL'} {verdict.name.split()[0]}: {label} [{detail}]")
        print(f"     ({verdict.seconds:.0f}s, seeds {verdict.seeds})")
    failed = [label for label, ok, _ in verdict.lines if not ok]
    assert not failed, f"{verdict.name}: failed {failed}"


@pytest.mark.acceptance
def test_e1_onemax_cover_scaling(capsys):
    _check(capsys, ex.e1_onemax_cover())


@pytest.mark.acceptance
def test_e2_k_scaling(capsys):
    _check(capsys, ex.e2_k_scaling())


@pytest.mark.acceptance
def test_e3_unitation(capsys):
    _check(capsys, ex.e3_unitation())


@pytest.mark.acceptance
def test_e4_gsemo_equivalence(capsys):
    _check(capsys, ex.e4_gsemo_equivalence())


@pytest.mark.acceptance
def test_e5_submodular(capsys):
    _check(capsys, ex.e5_submodular())


@pytest.mark.acceptance
def test_e6_mst(capsys):
    _check(capsys, ex.e6_mst())


@pytest.mark.acceptance
def test_p1_jump_decay(capsys):
    _check(capsys, ex.p1_jump_decay())


@pytest.mark.acceptance
def test_p2_oracle_suite(capsys):
    _check(capsys, ex.p2_oracle_suite())
