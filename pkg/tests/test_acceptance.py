"""Acceptance suite: one test per criterion, tolerances pinned in
cagecalc.acceptance.  Prints a pass/fail line per criterion; also runnable
outside pytest via `cagecalc selftest`.
"""

import pytest

from cagecalc.acceptance import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda c: c.__name__)
def test_criterion(criterion):
    result = criterion()
    tag = "PASS" if result.passed else "FAIL"
    print(f"[{tag}] {result.name} ({result.elapsed:.1f}s): {result.detail}")
    assert result.passed, result.detail
