"""The brute-force oracle suites must pass on the shipped numerics."""

import pytest

from nles.oracles import SUITES, run_suites


@pytest.mark.parametrize("suite", sorted(SUITES))
def test_suite_passes(suite):
    results = run_suites(suite, seed=5)
    assert results
    failed = [r.line() for r in results if not r.passed]
    assert not failed, failed


def test_unknown_suite():
    with pytest.raises(ValueError, match="unknown oracle suite"):
        run_suites("spectral")


def test_result_line_format():
    result = run_suites("interpolant")[0]
    assert result.line().startswith("PASS interpolant/tail_sum: error=")
