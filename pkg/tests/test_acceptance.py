"""Acceptance criteria 1-12, each printing one pass/fail line."""

import pytest

from lpwave.experiments import CRITERIA, run_criterion


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    res = run_criterion(k)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
