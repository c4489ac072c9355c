"""Full-size acceptance criteria; one PASS/FAIL line per criterion in the summary."""

import pytest

from moduli_tiler.acceptance import CRITERIA, run_criterion

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    r = run_criterion(k) if k == 11 else run_criterion(k, seed=0)
    line = f"{r.line()}  ({r.seconds:.1f} s) {r.details}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert r.passed, line
