"""Interior-point solver for the max-min-eigenvalue problem."""

import numpy as np
import pytest

from circulant3 import sdp
from circulant3.sos import build_gram_problem
from circulant3.tensor import make_tensor


def _problem(dim, constraints):
    return sdp.SdpProblem.from_constraints(dim, constraints)


def test_scalar_problem_attains_fixed_value():
    prob = _problem(1, [([[1.0]], 5.0)])
    sol = sdp.solve(prob)
    assert sol.status == "optimal"
    assert abs(sol.t_star - 5.0) <= 1e-9
    assert abs(sol.G[0, 0] - 5.0) <= 1e-9
    assert sol.precision <= 1e-8


def test_two_by_two_problem_with_negative_optimum():
    # G is fully pinned to [[1, 2], [2, 1]] with eigenvalues {3, -1}
    prob = _problem(
        2,
        [
            ([[1.0, 0.0], [0.0, 0.0]], 1.0),
            ([[0.0, 0.0], [0.0, 1.0]], 1.0),
            ([[0.0, 1.0], [1.0, 0.0]], 4.0),
        ],
    )
    sol = sdp.solve(prob)
    assert abs(sol.t_star - (-1.0)) <= 1e-8
    assert abs(sol.t_star - (-1.0)) <= max(sol.precision, 1e-12)
    assert sol.primal_residual <= 1e-9


def test_free_entries_are_used_to_raise_the_minimum_eigenvalue():
    # only G11 = 2 is pinned; the best attainable minimum eigenvalue is 2
    prob = _problem(2, [([[1.0, 0.0], [0.0, 0.0]], 2.0)])
    sol = sdp.solve(prob)
    assert abs(sol.t_star - 2.0) <= 1e-6
    assert abs(sol.G[0, 0] - 2.0) <= 1e-9


def test_perfect_power_gram_problem_is_recognized_as_psd():
    # the form (x1+x2+x3)^6 has a rank-one Gram certificate but sits on
    # a face where strict complementarity fails; the polish step must
    # still return a feasible G with nonnegative minimum eigenvalue
    prob = build_gram_problem(make_tensor(6, 1, 1, 1).to_form())
    sol = sdp.solve(prob, tol=1e-11, max_iter=150)
    assert sol.t_star >= -1e-9
    ok, viol = sdp.check_certificate(sol.G, prob, tol=1e-7)
    assert ok, f"violation {viol:.3e}"


def test_inconsistent_constraints_are_reported():
    prob = _problem(1, [([[1.0]], 1.0), ([[1.0]], 2.0)])
    sol = sdp.solve(prob)
    assert sol.status == "infeasible"


def test_monotone_in_the_diagonal_shift():
    # raising the diagonal entry d adds d * (x1^m + x2^m + x3^m) to the
    # form, which can only raise the best attainable minimum eigenvalue
    values = []
    for d in (60.0, 62.0, 64.0):
        prob = build_gram_problem(make_tensor(6, d, -1, 0).to_form())
        values.append(sdp.solve(prob, tol=1e-11, max_iter=150).t_star)
    assert values[0] <= values[1] + 1e-9
    assert values[1] <= values[2] + 1e-9
    assert values[2] - values[0] > 1e-3
    # d = 62 is the exact threshold: the optimum is essentially zero
    assert abs(values[1]) <= 1e-6


def test_deterministic_across_repeat_solves():
    prob = build_gram_problem(make_tensor(6, 2.0, 1.0, -1.0).to_form())
    s1 = sdp.solve(prob, tol=1e-11, max_iter=150)
    s2 = sdp.solve(prob, tol=1e-11, max_iter=150)
    assert s1.status == s2.status
    assert s1.iterations == s2.iterations
    assert abs(s1.t_star - s2.t_star) <= 1e-12
    assert np.array_equal(s1.G, s2.G)


def test_problem_validation():
    with pytest.raises(ValueError):
        _problem(2, [([[0.0, 1.0], [0.5, 0.0]], 1.0)])  # asymmetric
    with pytest.raises(ValueError):
        sdp.SdpProblem(2, np.zeros((1, 2, 2)), np.zeros(2))  # rhs length
    with pytest.raises(ValueError):
        sdp.SdpProblem(0, np.zeros((1, 0, 0)), np.zeros(1))
    with pytest.raises(ValueError):
        _problem(1, [([[np.inf]], 1.0)])
    with pytest.raises(ValueError):
        sdp.SdpProblem(1, np.zeros((0, 1, 1)), np.zeros(0))  # empty


def test_check_certificate_rejects_bad_candidates():
    prob = _problem(2, [([[1.0, 0.0], [0.0, 0.0]], 1.0)])
    ok, viol = sdp.check_certificate(np.array([[2.0, 0.0], [0.0, 1.0]]), prob)
    assert not ok and abs(viol - 1.0) <= 1e-12  # constraint off by 1
    ok, viol = sdp.check_certificate(np.array([[1.0, 0.0], [0.0, -0.5]]), prob)
    assert not ok and abs(viol - 0.5) <= 1e-12  # negative eigenvalue
    ok, _ = sdp.check_certificate(np.array([[1.0, 0.0], [0.0, 3.0]]), prob)
    assert ok
    with pytest.raises(ValueError):
        sdp.check_certificate(np.array([[1.0, 0.5], [0.0, 1.0]]), prob)
    with pytest.raises(ValueError):
        sdp.check_certificate(np.eye(3), prob)


def test_precision_encloses_the_true_error_on_solved_cases():
    prob = _problem(
        2,
        [
            ([[1.0, 0.0], [0.0, 0.0]], 1.0),
            ([[0.0, 0.0], [0.0, 1.0]], 1.0),
            ([[0.0, 1.0], [1.0, 0.0]], 4.0),
        ],
    )
    sol = sdp.solve(prob)
    assert abs(sol.t_star - (-1.0)) <= sol.precision
    assert sol.gap == sol.dual_obj - sol.t_star
