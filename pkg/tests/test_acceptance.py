"""Acceptance criteria, one test each, at the required tolerances.

Every test records a PASS/FAIL line; the lines are printed in the
"acceptance criteria" section of the pytest terminal summary.
"""

import time

import pytest

from framekit.verify import CHECKS, _Context, run_check

from conftest import ACCEPTANCE_LINES

CRITERIA = [(k + 1, c.name) for k, c in enumerate(CHECKS)]
TIME_LIMITS = {"near_tight_fusion_bounds": 10.0}


@pytest.fixture(scope="module")
def ctx():
    return _Context()


@pytest.mark.parametrize("number,name", CRITERIA, ids=[n for _, n in CRITERIA])
def test_criterion(number, name, ctx):
    start = time.perf_counter()
    result = run_check(name, ctx=ctx)
    elapsed = time.perf_counter() - start
    limit = TIME_LIMITS.get(name)
    in_time = limit is None or elapsed <= limit
    passed = result.passed and in_time
    timing = f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit else "")
    ACCEPTANCE_LINES.append(f"criterion {number:>2} {name:<32} {'PASS' if passed else 'FAIL'}  "
                            f"[{result.instances} instances, {timing}] {result.detail}")
    assert result.passed, result.detail
    assert in_time, f"took {elapsed:.2f}s, limit {limit}s"
