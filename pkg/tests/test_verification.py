import numpy as np
import pytest

from lib.exact_solutions import catalog
from lib.types import Verdict, VerifySuite
from lib.verification import VERDICT_CASES, CheckResult, limits_match, run_suite

KERR_OUTER = np.arctan(1.0 / (1.0 + np.sqrt(0.75)))


def test_check_result_line():
    check = CheckResult("horizons", "schwarzschild-M1", True, 1e-12, "< 1e-08", "64 nodes solved")
    assert check.line() == "[PASS] horizons/schwarzschild-M1: measured 1e-12, expected < 1e-08 (64 nodes solved)"
    failed = CheckResult("penrose", "bound", False, -0.5, "> 1")
    assert failed.line() == "[FAIL] penrose/bound: measured -0.5, expected > 1"


def test_delta_star_suite_passes():
    results = run_suite("remark33")
    assert [check.name for check in results] == ["reciprocal-r", "reciprocal-r2", "gaussian", "rational"]
    assert all(check.passed for check in results)
    assert run_suite(VerifySuite.REMARK33) == results


def test_unknown_suite():
    with pytest.raises(ValueError, match="Invalid verify suite"):
        run_suite("everything")


@pytest.mark.parametrize("found, targets, expected", [
    ([0.0], [0.0], True),
    ([0.5 * np.pi], [0.0], False),
    ([0.0, 0.5 * np.pi], [0.0], False),
    ([], [0.0], False),
    ([KERR_OUTER, KERR_OUTER], [KERR_OUTER], True),
    ([0.47008, 0.46365], [KERR_OUTER], False),
    ([], [], True),
])
def test_limits_match(found, targets, expected):
    assert limits_match(found, targets) is expected


@pytest.mark.parametrize("index, verdict, targets", [
    (0, Verdict.NAKED, [0.0]),
    (1, Verdict.NOT_NAKED, []),
    (2, Verdict.NAKED, [0.5 * np.pi - np.arctan(np.e)]),
    (3, Verdict.NAKED, [0.5 * np.pi - np.arctan(np.e)]),
    (4, Verdict.NOT_NAKED, []),
    (5, Verdict.NAKED, [KERR_OUTER]),
])
def test_verdict_targets_are_fixed_locations(index, verdict, targets):
    name, params, expected, passageways = VERDICT_CASES[index]
    assert expected is verdict
    np.testing.assert_allclose(passageways(catalog(name, **params)), targets, atol=1e-12)
