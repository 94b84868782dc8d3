"""SOS membership, threshold bisection, and certificate plumbing."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from circulant3 import sdp, sos
from circulant3.eigen import lambda_min
from circulant3.tensor import dd_bound, make_tensor


def test_is_sos_accepts_known_members():
    for m, d, u, c in [(6, 1, 1, 1), (6, 242, -1, -1), (4, 14, -1, 0)]:
        ok, cert = sos.is_sos(make_tensor(m, d, u, c))
        assert ok
        assert cert is not None
        assert cert.min_eig >= 0.0
        assert cert.reconstruction_error <= 1e-6


def test_is_sos_rejects_known_non_members():
    for m, d, u, c in [(6, 1.70, 1, 0), (4, 13.9, -1, 0), (6, 0, 1, 1)]:
        ok, cert = sos.is_sos(make_tensor(m, d, u, c))
        assert not ok
        assert cert is None


def test_is_sos_rejects_odd_or_small_order():
    with pytest.raises(ValueError):
        sos.is_sos(make_tensor(3, 1, 0, 0))


def test_m_value_exact_branches_return_exact_scalars():
    assert sos.m_value(6, -1, 0) == 62
    assert sos.m_value(6, 0, -1) == 180
    assert sos.m_value(6, -1, -1) == 242
    assert sos.m_value(4, -2, -3) == 2 * 14 + 3 * 12
    got = sos.m_value(6, Fraction(1, 2), Fraction(1, 2))
    assert got == Fraction(1, 2)
    with pytest.raises(ValueError):
        sos.m_value(5, 1, 1)
    with pytest.raises(ValueError):
        sos.m_value(6, 1, 1, tol_d=0.0)


def test_m_value_bisection_matches_reference_points():
    # unit-u slice at order 6, value known to 1e-9 from an independent
    # high-precision minimization
    got = float(sos.m_value(6, 1, 0))
    assert abs(got - 1.7373484717783816) <= 1e-6
    # two eigen-branch points cross-checked against the shipped tables
    assert abs(float(sos.m_value(6, 5, -1)) - 9.4254465011842588) <= 1e-4
    assert abs(float(sos.m_value(6, 10, 1)) - 16.6347899482) <= 1e-4


def test_upward_closure_in_the_diagonal_entry():
    # verdicts along an increasing diagonal sweep never flip back down
    verdicts = []
    for d in (13.5, 13.9, 14.0, 14.5, 20.0):
        ok, _ = sos.is_sos(make_tensor(4, d, -1, 0))
        verdicts.append(ok)
    assert verdicts == sorted(verdicts)
    assert verdicts[0] is False and verdicts[-1] is True


def test_threshold_scales_linearly_with_the_off_diagonal_pair():
    assert sos.m_value(6, Fraction(-1, 10), Fraction(-1, 10)) == Fraction(121, 5)
    base = float(sos.m_value(6, 1, 0))
    scaled = float(sos.m_value(6, 10, 0))
    assert abs(scaled - 10.0 * base) <= 1e-4


def test_certificate_round_trips_through_json():
    ok, cert = sos.is_sos(make_tensor(6, 2, 1, 1))
    assert ok
    doc = cert.to_json_dict()
    text = json.dumps(doc)
    back = sos.GramCertificate.from_json_dict(json.loads(text))
    assert back.basis == cert.basis
    assert np.array_equal(back.G, cert.G)
    assert back.min_eig == cert.min_eig
    assert back.reconstruction_error == cert.reconstruction_error


def test_gram_problem_shape_and_rhs():
    form = make_tensor(4, 3, -1, 2).to_form()
    prob = sos.build_gram_problem(form)
    assert prob.dim == 6  # monomials of degree 2 in three variables
    assert prob.coeffs.shape[0] == 15  # exponent triples of degree 4
    # each rhs entry is the corresponding form coefficient
    total = float(np.sum(prob.rhs))
    assert abs(total - float(form((1.0, 1.0, 1.0)))) <= 1e-9


def test_sandwich_between_psd_threshold_and_dominance_bound():
    rng = np.random.default_rng(31)
    for _ in range(5):
        u, c = (float(v) for v in rng.uniform(-1.5, 1.5, size=2))
        psd_threshold = -lambda_min(make_tensor(4, 0.0, u, c)).lam
        got = float(sos.m_value(4, u, c, lower=psd_threshold))
        assert got >= psd_threshold - 1e-6
        assert got <= float(dd_bound(4, u, c)) + 1e-6


def test_certify_bundle_confirms_exact_point_and_reparses():
    bundle = sos.certify_pns_free(6, -1, 0)
    assert bundle.status == "CONFIRMED"
    assert bundle.critical_value == 62.0
    assert bundle.certificate is not None
    assert bundle.minimizer is not None
    assert abs(bundle.minimizer_value) <= 1e-6
    assert bundle.minimizer_residual <= 1e-7
    doc = json.loads(bundle.to_json())
    assert doc == bundle.to_json_dict()
    assert doc["status"] == "CONFIRMED"
    # the embedded certificate re-verifies against a freshly built problem
    cert = sos.GramCertificate.from_json_dict(doc["certificate"])
    prob = sos.build_gram_problem(
        make_tensor(6, 62.0 + bundle.tol_d, -1.0, 0.0).to_form()
    )
    ok, viol = sdp.check_certificate(cert.G, prob, tol=1e-5)
    assert ok, f"violation {viol:.3e}"


def test_sos_undecided_carries_solver_evidence():
    err = sos.SosUndecided("msg", None)
    assert isinstance(err, RuntimeError)
