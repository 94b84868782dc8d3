"""Threshold dispatch, breakpoints, normalization, and reports."""

import json
import math
from fractions import Fraction

import pytest

from circulant3 import boundary, sos
from circulant3.boundary import (
    TAG_EIGEN_CNEG,
    TAG_EIGEN_CPOS,
    TAG_EQUAL_UC,
    TAG_LINEAR_CNEG,
    TAG_LINEAR_CPOS,
    TAG_NONPOS,
    TAG_UNIT_U,
)
from circulant3.eigen import SolverConfig, SolverFailure, lambda_min
from circulant3.tensor import make_tensor

# independently derived closed forms for the kink abscissas
KNOWN_BREAKPOINTS = {
    4: (Fraction(3, 4), Fraction(-2)),
    6: (Fraction(45, 16), Fraction(-70, 11)),
    8: (Fraction(483, 64), Fraction(-686, 43)),
    10: (Fraction(4665, 256), Fraction(-710, 19)),
    12: (Fraction(43263, 1024), Fraction(-58366, 683)),
}


def test_breakpoint_formulas_match_known_values():
    for m, (u0, v0) in KNOWN_BREAKPOINTS.items():
        assert boundary.breakpoint_u0_formula(m) == u0
        assert boundary.breakpoint_v0_formula(m) == v0
    with pytest.raises(ValueError):
        boundary.breakpoint_u0_formula(5)


def test_n_value_dispatch_tags_and_exact_values():
    val = boundary.n_value(6, -1, 0)
    assert (val.value, val.tag) == (62, TAG_NONPOS)
    val = boundary.n_value(6, -2, -3)
    assert (val.value, val.tag) == (664, TAG_NONPOS)
    val = boundary.n_value(6, Fraction(5, 2), Fraction(5, 2))
    assert (val.value, val.tag) == (Fraction(5, 2), TAG_EQUAL_UC)
    val = boundary.n_value(6, 3, 0)
    assert val.tag == TAG_UNIT_U
    assert abs(val.value - 3 * 1.7373484717783816) <= 1e-8
    val = boundary.n_value(6, 2, -1)
    assert (val.value, val.tag) == (56, TAG_LINEAR_CNEG)
    val = boundary.n_value(6, Fraction(45, 16), -1)  # exactly at the kink
    assert (val.value, val.tag) == (Fraction(45, 8), TAG_LINEAR_CNEG)
    val = boundary.n_value(6, 5, -1)
    assert val.tag == TAG_EIGEN_CNEG
    assert abs(val.value - 9.4254465011842588) <= 1e-6
    val = boundary.n_value(6, -10, 1)
    assert (val.value, val.tag) == (440, TAG_LINEAR_CPOS)
    val = boundary.n_value(6, Fraction(-70, 11), 1)  # exactly at the kink
    assert (val.value, val.tag) == (Fraction(2360, 11), TAG_LINEAR_CPOS)
    val = boundary.n_value(6, -5, 1)
    assert val.tag == TAG_EIGEN_CPOS
    assert val.value >= float(boundary._linear_cpos(6, -5)) - 1e-9


def test_n_value_input_validation():
    with pytest.raises(ValueError):
        boundary.n_value(6, 1, 2)  # c not normalized
    with pytest.raises(ValueError):
        boundary.n_value(5, 1, 1)
    with pytest.raises(ValueError):
        boundary.n_value(6, math.nan, 0)


def test_threshold_is_continuous_across_the_kinks():
    # the linear closed form and the eigensolver value agree where the
    # two branches meet
    u0 = float(boundary.breakpoint_u0_formula(6))
    linear = float(boundary._linear_cneg(6, u0))
    eigen = -lambda_min(make_tensor(6, 0, u0, -1)).lam
    assert abs(linear - eigen) <= 1e-6
    v0 = float(boundary.breakpoint_v0_formula(6))
    linear = float(boundary._linear_cpos(6, v0))
    eigen = -lambda_min(make_tensor(6, 0, v0, 1)).lam
    assert abs(linear - eigen) <= 1e-6 * max(1.0, abs(linear))


def test_linear_branch_is_exact_for_exact_inputs():
    u0 = boundary.breakpoint_u0_formula(6)
    for k in (1, 2, 4, 8):
        u = u0 / k
        val = boundary.n_value(6, u, -1)
        assert val.tag == TAG_LINEAR_CNEG
        assert val.value == 180 - u * 62


def test_breakpoints_verify_via_the_eigensolver():
    bp_u = boundary.breakpoint_u0(6)
    assert bp_u.kind == "u0"
    assert bp_u.value == Fraction(45, 16)
    assert bp_u.verified
    assert abs(bp_u.lambda_residual) <= 1e-7
    bp_v = boundary.breakpoint_v0(6)
    assert bp_v.value == Fraction(-70, 11)
    assert bp_v.verified
    doc = bp_v.to_json_dict()
    assert doc["value"] == "-70/11"
    assert doc["verified"] is True


def test_breakpoint_verification_survives_solver_failure():
    cfg = SolverConfig(n_starts=4, residual_tol=1e-300)
    bp = boundary.breakpoint_u0(6, cfg)
    assert bp.value == Fraction(45, 16)  # formula still exact
    assert not bp.verified


def test_normalize_rescales_c_to_unit():
    alpha, canon = boundary.normalize(make_tensor(6, 7, 3, 2))
    assert alpha == 2
    assert (canon.d, canon.u, canon.c) == (Fraction(7, 2), Fraction(3, 2), 1)
    alpha, canon = boundary.normalize(make_tensor(6, 1, 2, -4))
    assert alpha == 4
    assert (canon.d, canon.u, canon.c) == (Fraction(1, 4), Fraction(1, 2), -1)
    alpha, canon = boundary.normalize(make_tensor(6, 1.0, -3.0, 0.0))
    assert alpha == 1
    assert (canon.d, canon.u, canon.c) == (1.0, -3.0, 0.0)


def test_normalize_preserves_thresholds_up_to_scale():
    # the threshold of the raw pair equals alpha times the threshold of
    # the normalized pair; the raw value comes from the eigensolver route
    alpha, canon = boundary.normalize(make_tensor(6, 0, 3, 2))
    canonical_n = float(boundary.n_value(canon.m, canon.u, canon.c).value)
    raw_n = -lambda_min(make_tensor(6, 0, 3, 2)).lam
    assert abs(raw_n - float(alpha) * canonical_n) <= 1e-6 * max(1.0, raw_n)


def test_analyze_confirms_exact_branch_with_bundle():
    report = boundary.analyze(6, -1, -1)
    assert report.confirmed
    assert report.errors == ()
    assert report.n == 242.0
    assert report.n_tag == TAG_NONPOS
    assert report.m_val == 242.0
    assert report.m_method == "closed-form"
    assert abs(report.gap) <= 1e-9
    assert report.bundle is not None
    assert report.bundle.status == "CONFIRMED"
    assert report.breakpoint is None


def test_analyze_bisection_branch_without_certificate():
    report = boundary.analyze(6, 1, 0, with_certificate=False)
    assert report.m_method == "bisection"
    assert report.bundle is None
    assert abs(report.m_val - 1.7373484717783816) <= 1e-4
    assert report.confirmed
    doc = json.loads(report.to_json())
    assert doc == report.to_json_dict()
    assert doc["confirmed"] is True


def test_analyze_attaches_breakpoint_on_unit_c_slices():
    report = boundary.analyze(6, 2, -1, with_certificate=False)
    assert report.n_tag == TAG_LINEAR_CNEG
    assert report.breakpoint is not None
    assert report.breakpoint.value == Fraction(45, 16)


def test_analyze_reports_solver_failure_instead_of_raising():
    cfg = SolverConfig(n_starts=4, residual_tol=1e-300)
    report = boundary.analyze(6, 5, -1, cfg=cfg, with_certificate=False)
    assert report.errors
    assert not report.confirmed


def test_linear_segments_confirm_on_both_slices():
    for c in (-1, 1):
        seg = boundary.verify_linear_segment(6, c)
        assert seg.confirmed
        assert seg.flagged == ()
        assert len(seg.points) == 4
        expected_tag = TAG_LINEAR_CNEG if c == -1 else TAG_LINEAR_CPOS
        for point in seg.points:
            assert point.n_tag == expected_tag
            assert point.confirmed


def test_unit_scale_reference_is_cached_and_positive():
    first = boundary.unit_scale_reference(6)
    second = boundary.unit_scale_reference(6)
    assert first == second
    assert first > 1.7
