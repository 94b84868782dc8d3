"""Backend parity and correctness of the scalar hot kernels."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from circulant3 import _pykernels, kernels

from helpers import brute_force_apply, brute_force_eval

try:
    from circulant3 import _ckernels
except ImportError:
    _ckernels = None

needs_compiled = pytest.mark.skipif(
    _ckernels is None, reason="compiled extension not built"
)


def _random_cases(seed, n=30):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        m = int(rng.choice([4, 6, 8]))
        d, u, c = (float(v) for v in rng.uniform(-3.0, 3.0, size=3))
        x1, x2, x3 = (float(v) for v in rng.uniform(-1.5, 1.5, size=3))
        yield m, d, u, c, x1, x2, x3


def test_backend_name_is_reported():
    assert kernels.BACKEND in ("python", "compiled")
    assert _pykernels.BACKEND == "python"


@needs_compiled
def test_backends_agree_on_pointwise_kernels():
    assert _ckernels.BACKEND == "compiled"
    for m, d, u, c, x1, x2, x3 in _random_cases(11):
        fp = _pykernels.eval_form(m, d, u, c, x1, x2, x3)
        fc = _ckernels.eval_form(m, d, u, c, x1, x2, x3)
        assert abs(fp - fc) <= 1e-12 * max(1.0, abs(fp))
        gp = _pykernels.apply_power(m, d, u, c, x1, x2, x3)
        gc = _ckernels.apply_power(m, d, u, c, x1, x2, x3)
        for a, b in zip(gp, gc):
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))
        jp = _pykernels.power_jacobian(m, d, u, c, x1, x2, x3)
        jc = _ckernels.power_jacobian(m, d, u, c, x1, x2, x3)
        for a, b in zip(jp, jc):
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@needs_compiled
def test_backends_agree_on_search_kernels():
    rng = np.random.default_rng(7)
    for m, d, u, c in [(4, 0.0, -1.0, 0.0), (6, 2.0, 1.0, -1.0), (6, 0.0, 0.5, 1.0)]:
        starts = [tuple(map(float, rng.standard_normal(3))) for _ in range(8)]
        rp = _pykernels.minimize_batch(m, d, u, c, starts, 400, 1e-11)
        rc = _ckernels.minimize_batch(m, d, u, c, starts, 400, 1e-11)
        assert rp[5] == rc[5] == 8
        assert abs(rp[0] - rc[0]) <= 1e-9 * max(1.0, abs(rp[0]))
        sp = _pykernels.scan_two_equal(m, d, u, c, 501, 40)
        sc = _ckernels.scan_two_equal(m, d, u, c, 501, 40)
        assert abs(sp[0] - sc[0]) <= 1e-9 * max(1.0, abs(sp[0]))


def test_environment_variable_forces_python_backend():
    code = "from circulant3 import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, CIRCULANT3_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0
    assert out.stdout.strip() == "python"


def test_eval_and_apply_match_brute_force_through_dispatch():
    for m, d, u, c, x1, x2, x3 in _random_cases(23, n=10):
        f = kernels.eval_form(m, d, u, c, x1, x2, x3)
        ref = brute_force_eval(m, d, u, c, (x1, x2, x3))
        assert abs(f - ref) <= 1e-10 * max(1.0, abs(ref))
        g = kernels.apply_power(m, d, u, c, x1, x2, x3)
        gref = brute_force_apply(m, d, u, c, (x1, x2, x3))
        for a, b in zip(g, gref):
            assert abs(a - b) <= 1e-10 * max(1.0, abs(b))


def test_power_jacobian_matches_finite_differences():
    rng = np.random.default_rng(5)
    h = 1e-6
    for _ in range(10):
        m = int(rng.choice([4, 6]))
        d, u, c = (float(v) for v in rng.uniform(-2.0, 2.0, size=3))
        x = rng.uniform(0.2, 1.2, size=3)
        j11, j22, j33, j12, j13, j23 = kernels.power_jacobian(m, d, u, c, *x)
        jac = np.array([[j11, j12, j13], [j12, j22, j23], [j13, j23, j33]])
        fd = np.zeros((3, 3))
        for col in range(3):
            xp = x.copy()
            xm = x.copy()
            xp[col] += h
            xm[col] -= h
            gp = np.array(kernels.apply_power(m, d, u, c, *xp))
            gm = np.array(kernels.apply_power(m, d, u, c, *xm))
            fd[:, col] = (gp - gm) / (2.0 * h)
        scale = max(1.0, float(np.max(np.abs(fd))))
        assert np.max(np.abs(jac - fd)) <= 1e-5 * scale


def test_solve4_agrees_with_dense_solver():
    rng = np.random.default_rng(9)
    for _ in range(20):
        a = rng.uniform(-1.0, 1.0, size=(4, 4)) + 4.0 * np.eye(4)
        b = rng.uniform(-1.0, 1.0, size=4)
        expected = np.linalg.solve(a, b)
        got = _pykernels._solve4(list(a.ravel()), list(b))
        assert got is not None
        assert np.max(np.abs(np.array(got) - expected)) <= 1e-10


def test_solve4_reports_singular_systems():
    a = [0.0] * 16
    assert _pykernels._solve4(a, [1.0, 0.0, 0.0, 0.0]) is None


def test_minimize_from_finds_known_minimum():
    # at (m, d, u, c) = (4, 0, -1, 0) the minimum over the unit m-norm
    # sphere is -(2^4 - 2) = -14, attained along the all-ones direction
    lam, x1, x2, x3, res, iters = kernels.minimize_from(
        4, 0.0, -1.0, 0.0, 0.9, 1.1, 1.05, 600, 1e-11
    )
    assert abs(lam + 14.0) <= 1e-8
    assert res <= 1e-9 * 14.0
    assert iters >= 1
    target = 3.0 ** (-1.0 / 4.0)
    assert max(abs(abs(v) - target) for v in (x1, x2, x3)) <= 1e-6


def test_kkt_newton_polishes_an_eigenpair():
    # start slightly off the known minimizer of (6, 62, -1, 0) at the
    # all-ones direction, where the smallest eigenvalue is exactly 0
    s = 3.0 ** (-1.0 / 6.0)
    lam, x1, x2, x3, res = kernels.kkt_newton(
        6, 62.0, -1.0, 0.0, s + 0.01, s - 0.02, s, 0.5, 40
    )
    assert abs(lam) <= 1e-8
    assert res <= 1e-9
    norm = sum(abs(v) ** 6 for v in (x1, x2, x3))
    assert abs(norm - 1.0) <= 1e-9


def test_scan_two_equal_covers_structured_minima():
    # the two-equal family contains the global minimizer for the
    # pure-u reference at order 4: value -14 at the all-ones direction
    lam, x1, x2, x3, res = kernels.scan_two_equal(4, 0.0, -1.0, 0.0, 2001, 40)
    assert abs(lam + 14.0) <= 1e-8
    assert res <= 1e-8 * 14.0
