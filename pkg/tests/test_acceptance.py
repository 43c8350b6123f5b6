"""One test per acceptance criterion at the default grid [-40, 40] x 4001.

Each test prints a single PASS/FAIL line; the lines are also collected into the
terminal summary.
"""

import math

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from poschl_teller.verification import CHECKS, VerifyConfig

CFG = VerifyConfig()


def run_check(name):
    result = CHECKS[name](CFG)
    line = result.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    return result


def test_01_reflectionless():
    r = run_check("reflectionless")
    assert r.value <= 1e-12 and r.details["max_abs_R"] == 0.0
    assert r.passed


def test_02_closed_form_matches_ode():
    r = run_check("closed_form_vs_ode")
    assert len(r.details) == 6 and r.value <= 1e-6
    assert r.passed


def test_03_point_spectrum_by_shooting():
    r = run_check("point_spectrum")
    assert set(r.details) == {"n=1", "n=2", "n=3"} and r.value <= 1e-6
    assert r.passed


def test_04_completeness_round_trip():
    r = run_check("completeness_round_trip")
    assert len(r.details) == 20 and r.value <= 1e-4
    assert r.passed


def test_05_kernel_decay():
    r = run_check("kernel_decay")
    for npow in (2, 3):
        assert len(r.details["C"][npow]) == 6 and len(r.details["D"][npow]) == 6
        assert np.all(np.isfinite(r.details["C"][npow])) and np.all(np.isfinite(r.details["D"][npow]))
        assert math.isfinite(r.details["low_energy_C"][npow])
    assert max(r.details["spread"].values()) <= 10.0
    assert r.passed


def test_06_maximal_inequalities():
    r = run_check("maximal_inequalities")
    assert set(r.details["derivative_constant_by_band"]) == {1, 2, 3, 4, 5}
    assert math.isfinite(r.value) and math.isfinite(r.details["hl_constant"])
    assert r.details["r"] == 0.5 and r.details["s"] == 3.0
    assert r.passed


def test_07_norm_equivalence_across_systems():
    r = run_check("norm_equivalence")
    assert len(r.details) == 9
    assert r.value <= 50.0
    for lo, hi in r.details.values():
        assert 1 / r.value <= lo <= hi <= r.value
    assert r.passed


def test_08_triebel_lizorkin_equals_lp():
    r = run_check("lp_identification")
    assert len(r.details) == 6
    for key, (lo, hi) in r.details.items():
        assert 0 < lo <= hi < math.inf
        if key.endswith("p=2.0"):
            assert 1 / math.sqrt(3) / 1.1 <= lo and hi <= math.sqrt(3) * 1.1
    assert r.passed


def test_09_besov_identification():
    r = run_check("besov_identification")
    for ratios in r.details.values():
        vals = np.array(list(ratios.values()))
        assert np.all(np.isfinite(vals)) and np.all(vals > 0)
    assert math.isfinite(r.value)
    assert r.passed


def test_10_time_decay():
    r = run_check("time_decay")
    assert r.details["p2_relative_spread"] <= 1e-3
    assert len(r.details["p1_ratio"]) == 21
    assert r.value <= 1.5
    assert r.passed


def test_11_continuous_coupling():
    r = run_check("continuous_lambda")
    assert r.details["conservation"] <= 1e-10
    assert len(r.details["phase_gap"]) == 9 and r.value <= 1e-4
    assert r.details["integer_limit_T_dev"] <= 1e-10
    assert r.passed


def test_12_covariance():
    r = run_check("covariance")
    for dev in r.details.values():
        assert dev["scale"] <= 1e-6 and dev["shift"] <= 1e-6
    assert r.passed


def test_13_orthogonality_integral():
    r = run_check("orthogonality_integral")
    assert set(r.details) == {"k=1.0,eta=1.0", "k=2.0,eta=0.7"}
    assert r.value <= 1e-8
    assert r.passed
