import math

import numpy as np
import pytest

from fracsolve import (build_diagonal, build_laplacian_1d,
                       rational_from_gauss_jacobi, scalar_eval, spectral_oracle)
from fracsolve.analysis import (check_estimate_11, check_estimates_13_14,
                                check_theorem, evaluator_apply, sample_points,
                                scan_scalar_error)
from fracsolve.operators import oracle_apply_function


def test_sample_points_contains_endpoints_and_eigenvalues():
    pts = sample_points((1.0, 100.0), [3.0, 7.0], 50)
    for v in (1.0, 3.0, 7.0, 100.0):
        assert v in pts
    assert np.all(np.diff(pts) > 0)
    with pytest.raises(ValueError):
        sample_points((0.0, 1.0), None, 50)
    with pytest.raises(ValueError):
        sample_points((1.0, 2.0), None, 1)


def test_scan_exact_evaluator_is_zero():
    est = scan_scalar_error(lambda lam: lam**-0.5, 0.5, (1.0, 100.0))
    assert est.eps_abs == 0.0
    assert est.eps_rel == 0.0
    assert est.eps_log is None


def test_scan_constant_perturbation():
    # r = lambda^-alpha + 1e-3: eps_abs = 1e-3, eps_rel attained at Lambda
    est = scan_scalar_error(lambda lam: lam**-0.5 + 1e-3, 0.5, (1.0, 400.0))
    assert est.eps_abs == pytest.approx(1e-3, rel=1e-12)
    assert est.eps_rel == pytest.approx(1e-3 * 400.0**0.5, rel=1e-12)


def test_scan_relative_perturbation():
    # r = (1 + 1e-4) * lambda^-alpha: eps_rel = 1e-4, eps_abs attained at delta
    est = scan_scalar_error(lambda lam: (1 + 1e-4) * lam**-0.5, 0.5, (2.0, 50.0))
    assert est.eps_rel == pytest.approx(1e-4, rel=1e-12)
    assert est.eps_abs == pytest.approx(1e-4 * 2.0**-0.5, rel=1e-12)


def test_scan_log_channel():
    est = scan_scalar_error(lambda lam: lam**-0.5, 0.5, (1.0, 10.0),
                            log_evaluator=lambda lam: 0.5 * np.log(lam) + 2e-3)
    assert est.eps_log == pytest.approx(2e-3, rel=1e-12)


def test_scan_abs_rel_consistency():
    # eps_abs <= delta^-alpha * eps_rel always (worst weight at delta)
    appr = rational_from_gauss_jacobi(0.5, 6, 5.0)
    est = scan_scalar_error(lambda lam: scalar_eval(appr, lam), 0.5, (2.0, 200.0))
    assert est.eps_abs <= 2.0**-0.5 * est.eps_rel * (1 + 1e-12)


def test_evaluator_apply_diagonal():
    eig = spectral_oracle(build_diagonal([1.0, 9.0]))
    out = evaluator_apply(lambda lam: lam**-0.5, eig, np.array([2.0, 3.0]))
    np.testing.assert_allclose(out, [2.0, 1.0], rtol=1e-13)


def test_check_estimate_11_exact_evaluator():
    op = build_laplacian_1d(15)
    eig = spectral_oracle(op)
    rng = np.random.default_rng(31)
    phi = rng.standard_normal(15)
    rep = check_estimate_11(lambda lam: lam**-0.5, eig, 0.5, phi, 0.0)
    assert rep.satisfied
    assert rep.lhs <= 1e-12


def test_check_estimate_11_single_mode_tight():
    # one eigenmode makes the inequality an equality up to roundoff
    eig = spectral_oracle(build_diagonal([4.0]))
    shift = 1e-3
    rep = check_estimate_11(lambda lam: lam**-0.5 + shift, eig, 0.5,
                            np.array([1.0]), norm_power=0.0)
    assert rep.satisfied
    assert rep.lhs == pytest.approx(shift, rel=1e-10)
    assert rep.rhs == pytest.approx(shift, rel=1e-6)


def test_check_estimates_13_14_hold_for_real_approximant():
    op = build_laplacian_1d(15)
    eig = spectral_oracle(op)
    rng = np.random.default_rng(37)
    phi = rng.standard_normal(15)
    appr = rational_from_gauss_jacobi(0.5, 8, math.sqrt(eig.values[0] * eig.values[-1]))
    first, second = check_estimates_13_14(lambda lam: scalar_eval(appr, lam),
                                          eig, 0.5, phi)
    assert first.satisfied and second.satisfied
    assert first.lhs > 0  # non-vacuous


def test_check_theorem_1_arithmetic_identity():
    # manufactured run where both sides are known in closed form
    eig = spectral_oracle(build_diagonal([1.0]))
    phi = np.array([1.0])
    solution = np.array([1.0 + 5e-4])  # u* = 1, error exactly 5e-4
    rep = check_theorem(1, solution, eig, 0.5, phi, eps=4e-4, eps0=1e-4)
    # rhs = (4e-4 + 1e-4*(1 + 4e-4)) * 1
    assert rep.rhs == pytest.approx(5e-4 + 4e-8, rel=1e-12)
    assert rep.lhs == pytest.approx(5e-4, rel=1e-12)
    assert rep.satisfied


def test_check_theorem_3_formula():
    eig = spectral_oracle(build_diagonal([1.0, 4.0]))
    phi = np.array([1.0, 1.0])
    u_star = oracle_apply_function(eig, -0.5, phi)
    rep = check_theorem(3, u_star, eig, 0.5, phi, eps=1e-3, eps0=2e-4)
    w = math.sqrt(1.0 + 1.0 / 4.0)  # ||phi||_{A^-1} for alpha = 1/2
    assert rep.rhs == pytest.approx(2e-4 * math.sqrt(2.0) + math.expm1(1e-3) * w,
                                    rel=1e-12)
    assert rep.lhs <= 1e-14
    assert rep.satisfied


def test_check_theorem_validation():
    eig = spectral_oracle(build_diagonal([1.0]))
    with pytest.raises(ValueError):
        check_theorem(4, np.ones(1), eig, 0.5, np.ones(1), 1e-3, 1e-4)
    with pytest.raises(ValueError):
        check_theorem(1, np.ones(1), eig, 0.5, np.ones(1), 1e-3, None)


def test_negative_control_violated_bound_is_flagged():
    # claiming a smaller eps than the evaluator achieves must fail the check
    eig = spectral_oracle(build_diagonal([1.0, 16.0]))
    phi = np.array([1.0, 1.0])
    rep = check_estimate_11(lambda lam: lam**-0.5 + 1e-2, eig, 0.5, phi,
                            norm_power=0.0, eps_abs=1e-6)
    assert not rep.satisfied
    assert rep.lhs > rep.rhs
