import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from numphase.hilbert import apply_number, apply_phase_adjoint, inner
from numphase.specfun import g_factor, series_I
from numphase.states import (
    StateParams, TruncationError, build_shifted_state, build_state,
    hardy_limit_state, normalization,
)

GRID_W = [0.5, 1.0, 2.0, 3.0, 2j, -1.5 + 1.5j]
GRID_K = [0, 1, 2, 5]
GRID_LAM = [1.0, 1.5, 2.0, 3.7, 10.0]
TOL = 1e-14

# exact rational partial sum of sum 1/(n!)^2, terms down to 1e-15
I0_ONE = float(sum(Fraction(1, math.factorial(n) ** 2) for n in range(12)))


def eigen_residual(s, p):
    r = apply_number(s).coeffs - p.w * apply_phase_adjoint(s).coeffs - p.k * s.coeffs
    return np.linalg.norm(r)


def test_params_validation():
    with pytest.raises(ValueError):
        StateParams(1, -1, 2.0)
    with pytest.raises(ValueError):
        StateParams(1, 1.5, 2.0)
    with pytest.raises(ValueError):
        StateParams(1, 1, 0.5)
    assert StateParams(1, 2.0, 2).k == 2


def test_zero_w_is_basis_state():
    s, c = build_state(StateParams(0, 3, 2.5), 20)
    expected = np.zeros(21)
    expected[3] = 1.0
    assert np.array_equal(s.coeffs, expected)
    assert c.c_abs_sq == pytest.approx(1 / g_factor(0, 3, 2.5), rel=1e-14)


def test_hardy_w1_k0():
    s, c = build_state(StateParams(1, 0, 1.0), 40)
    assert c.c_abs_sq == pytest.approx(1 / I0_ONE, rel=1e-14)
    assert 1 / c.c_abs_sq == pytest.approx(2.2795853, abs=1e-7)
    n = np.arange(41)
    expected = math.sqrt(c.c_abs_sq) / np.array([float(math.factorial(j)) for j in n])
    assert np.allclose(s.coeffs, expected, rtol=1e-13, atol=0)


def test_structure_imaginary_w():
    s, _ = build_state(StateParams(2j, 1, 3.0), 40)
    a = np.abs(s.coeffs)
    assert a[0] == 0.0
    ratios = a[2:20] / a[1:19]
    assert np.all(np.diff(ratios) < 0) and ratios[-1] < 0.15


def test_normalization_examples():
    assert normalization(StateParams(0, 0, 4.0)).c_abs_sq == 1.0
    assert normalization(StateParams(1, 0, 7.0)).c_abs_sq == pytest.approx(1 / I0_ONE, rel=1e-14)
    vals = [normalization(StateParams(1.3, k, 1.0)).c_abs_sq for k in range(6)]
    assert max(vals) - min(vals) <= 1e-14 * vals[0]


@pytest.mark.parametrize("w", GRID_W)
@pytest.mark.parametrize("k", GRID_K)
@pytest.mark.parametrize("lam", GRID_LAM)
def test_state_norm_and_support(w, k, lam):
    p = StateParams(w, k, lam)
    for builder in (build_state, build_shifted_state):
        s, c = builder(p)
        assert np.all(s.coeffs[:k] == 0)
        assert abs(inner(s, s).real - 1) <= 1e-12
        # |c|^2 times the defining series is one
        series_k = k if builder is build_state else 0
        assert c.c_abs_sq * series_I(series_k, lam, abs(w) ** 2).value == pytest.approx(1, rel=1e-12)


@pytest.mark.parametrize("w", GRID_W)
@pytest.mark.parametrize("k", GRID_K)
@pytest.mark.parametrize("lam", GRID_LAM)
def test_shifted_family_solves_eigen_relation(w, k, lam):
    p = StateParams(w, k, lam)
    s, _ = build_shifted_state(p)
    assert eigen_residual(s, p) <= 10 * TOL


@pytest.mark.parametrize("w", GRID_W)
@pytest.mark.parametrize("k", GRID_K)
@pytest.mark.parametrize("lam", GRID_LAM)
def test_paper_family_eigen_residual(w, k, lam):
    p = StateParams(w, k, lam)
    s, c = build_state(p)
    if k == 0 or lam == 1.0:
        assert eigen_residual(s, p) <= 10 * TOL
        assert np.array_equal(s.coeffs, build_shifted_state(p)[0].coeffs)
        return
    # row n+k of N f - w Phi* f - k f is c w^n/(n-1)! (sqrt G(n,k) - sqrt G(n-1,k))
    r = apply_number(s).coeffs - p.w * apply_phase_adjoint(s).coeffs - k * s.coeffs
    for n in range(1, 12):
        expected = c.c * p.w ** n / math.factorial(n - 1) * (
            math.sqrt(g_factor(n, k, lam)) - math.sqrt(g_factor(n - 1, k, lam)))
        assert r[n + k] == pytest.approx(expected, rel=1e-9, abs=1e-15)
    assert eigen_residual(s, p) > 1e-3


def test_phase_covariance():
    rot = cmath.exp(1j * math.pi / 3)
    for lam in (1.0, 2.0, 3.7):
        a, _ = build_state(StateParams(1.2, 2, lam), 48)
        b, _ = build_state(StateParams(1.2 * rot, 2, lam), 48)
        assert np.allclose(np.abs(a.coeffs), np.abs(b.coeffs), rtol=1e-13, atol=1e-300)


def test_truncation_errors():
    with pytest.raises(TruncationError):
        build_state(StateParams(3.0, 0, 2.0), 5)
    with pytest.raises(ValueError):
        build_state(StateParams(1.0, 4, 2.0), 3)
    # a loose tolerance admits a short truncation
    s, _ = build_state(StateParams(0.5, 0, 2.0), 8, tol=1e-8)
    assert abs(inner(s, s).real - 1) <= 1e-8


def test_large_truncation_no_underflow_issue():
    s, _ = build_state(StateParams(3.0, 2, 2.0), 400)
    assert np.all(np.isfinite(s.coeffs))
    assert abs(inner(s, s).real - 1) <= 1e-12


def test_hardy_limit_examples():
    h = hardy_limit_state(0, 2, 10)
    assert np.array_equal(h.coeffs, np.eye(11)[2])
    s, _ = build_state(StateParams(1, 0, 1.0), 40)
    assert np.array_equal(hardy_limit_state(1, 0, 40).coeffs, s.coeffs)


@pytest.mark.parametrize("w,k", [(1.0, 2), (0.5 + 0.5j, 1), (2.0, 3)])
def test_hardy_limit_linear_in_eps(w, k):
    M = 40
    h = hardy_limit_state(w, k, M)
    assert np.abs(build_state(StateParams(w, k, 1.0), M)[0].coeffs - h.coeffs).max() == 0.0
    eps = np.array([1e-2, 1e-3, 1e-4])
    d = [np.abs(build_state(StateParams(w, k, 1 + e), M)[0].coeffs - h.coeffs).max() for e in eps]
    slope = np.polyfit(np.log(eps), np.log(d), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.05)
    assert max(di / e for di, e in zip(d, eps)) < 1.0
