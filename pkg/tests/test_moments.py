import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from numphase.hilbert import CoeffState, basis_state
from numphase.moments import (
    NormalizationError, consistency_residual, consistency_series, cs_bound,
    expectation, report, variance,
)
from numphase.states import StateParams, build_shifted_state, build_state

GRID = [(w, k, lam) for w in (0.5, 1.0, 2.0, 1 - 1j) for k in (0, 1, 3) for lam in (1.0, 2.0, 3.7)]


def random_state(seed, M=16, lam=2.0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(M + 1) + 1j * rng.standard_normal(M + 1)
    return CoeffState(a / np.linalg.norm(a), lam)


@st.composite
def normalized_states(draw):
    M = draw(st.integers(2, 20))
    a = draw(arrays(complex, M + 1, elements=st.complex_numbers(max_magnitude=5, allow_nan=False,
                                                                  allow_infinity=False)))
    nrm = np.linalg.norm(a)
    if nrm < 1e-3:
        a = np.eye(M + 1)[0].astype(complex)
        nrm = 1.0
    return CoeffState(a / nrm, draw(st.sampled_from([1.0, 2.0, 3.7])))


def test_expectation_examples():
    e5 = basis_state(5, 10)
    assert expectation("N", e5) == 5
    assert expectation("Phi", e5) == 0
    # oracle: sum n/(n!)^2 / sum 1/(n!)^2 with exact rationals
    num = sum(Fraction(n, math.factorial(n) ** 2) for n in range(25))
    den = sum(Fraction(1, math.factorial(n) ** 2) for n in range(25))
    ratio = float(num / den)
    assert ratio == pytest.approx(0.697775, abs=1e-6)
    for lam in (1.0, 2.0, 7.5):
        s, _ = build_state(StateParams(1, 0, lam), 40)
        assert expectation("N", s).real == pytest.approx(ratio, abs=1e-14)


def test_variance_examples():
    M = 10
    for k in range(M):
        assert variance("N", basis_state(k, M)) == 0.0
        assert variance("Phi", basis_state(k, M)) == 1.0
    a = np.zeros(M + 1)
    a[:2] = 1 / math.sqrt(2)
    assert variance("N", CoeffState(a, 2.0)) == pytest.approx(0.25, abs=1e-15)


def test_unnormalized_rejected():
    s = CoeffState(2 * basis_state(1, 5).coeffs, 2.0)
    for fn in (lambda: expectation("N", s), lambda: variance("Phi", s), lambda: report(s)):
        with pytest.raises(NormalizationError):
            fn()
    with pytest.raises(ValueError):
        expectation("X", basis_state(1, 5))


@settings(max_examples=80, deadline=None)
@given(normalized_states())
def test_cauchy_schwarz_and_hermitian_reduction(s):
    rep = report(s)
    assert rep.var_N >= 0 and rep.var_Phi >= 0
    assert rep.product == rep.var_N * rep.var_Phi
    assert rep.gap >= -1e-12 * max(1.0, rep.product)
    assert rep.cs_bound <= rep.product + 1e-12 * max(1.0, rep.product)
    n = np.arange(s.M + 1)
    p = np.abs(s.coeffs) ** 2
    second = p @ n ** 2 - (p @ n) ** 2
    assert variance("N", s) == pytest.approx(second, abs=1e-12 * max(1.0, p @ n ** 2))


def test_cs_bound_examples():
    assert cs_bound(basis_state(3, 12)) == 0.0
    gaps = [report(random_state(seed)).gap for seed in range(20)]
    assert min(gaps) > 1e-3


def test_random_state_regression_fixture():
    # recorded value, not ground truth
    rep = report(random_state(12345), StateParams(1, 0, 2.0))
    assert rep.gap == pytest.approx(15.941873120600146, rel=1e-10)
    assert rep.consistency_residual == pytest.approx(8.27658518129863 + 0.3889956624377058j, rel=1e-10)


@pytest.mark.parametrize("w,k,lam", GRID)
def test_saturation_shifted_family(w, k, lam):
    p = StateParams(w, k, lam)
    s, _ = build_shifted_state(p)
    rep = report(s, p)
    assert abs(rep.gap) <= 1e-9 * max(1.0, rep.product)
    assert abs(rep.consistency_residual) <= 1e-12


@pytest.mark.parametrize("w,k,lam", GRID)
def test_paper_family_saturates_only_when_k0_or_hardy(w, k, lam):
    p = StateParams(w, k, lam)
    s, _ = build_state(p)
    rep = report(s, p)
    if k == 0 or lam == 1.0:
        assert abs(rep.gap) <= 1e-9 * max(1.0, rep.product)
        assert abs(rep.consistency_residual) <= 1e-12
    else:
        assert rep.gap > 1e-5
        assert rep.consistency_residual.real > 1e-3


@pytest.mark.parametrize("w,k,lam", GRID)
def test_series_routes(w, k, lam):
    p = StateParams(w, k, lam)
    s, _ = build_state(p)
    series = consistency_series(p)
    mean_n = expectation("N", s).real
    w_conj_phi = p.w * expectation("Phi", s).conjugate()
    assert series.expect_N == pytest.approx(mean_n, abs=1e-12)
    assert series.phase_term_exact == pytest.approx(w_conj_phi.real, abs=1e-12)
    assert abs(w_conj_phi.imag) <= 1e-13
    # the G(n+1,k) form coincides with the exact form iff k == 0 or lambda == 1
    if k == 0 or lam == 1.0:
        assert series.phase_term == pytest.approx(series.phase_term_exact, abs=1e-13)
    else:
        assert series.phase_term - series.phase_term_exact > 1e-3


def test_consistency_residual_examples():
    for k in range(4):
        s, _ = build_state(StateParams(0, k, 2.0))
        assert consistency_residual(s, StateParams(0, k, 2.0)) == 0
    p = StateParams(1, 0, 2.0)
    s, _ = build_state(p, 40)
    assert abs(consistency_residual(s, p)) < 1e-10
    assert abs(consistency_residual(random_state(5), StateParams(0.7, 2, 2.0))) > 1e-2


def test_report_examples_and_json():
    rep = report(basis_state(0, 8))
    assert rep.var_N == 0 and rep.product == 0 and rep.gap == 0
    assert rep.consistency_residual is None
    doc = rep.to_dict()
    assert list(doc) == ["expect_N", "expect_Phi", "var_N", "var_Phi", "product", "cs_bound",
                         "gap", "consistency_residual", "truncation_overflow"]
    assert doc["consistency_residual"] is None
    json.dumps(doc)
    p = StateParams(1, 1, 2.0)
    s, _ = build_shifted_state(p, 48)
    assert report(s, p).gap < 1e-9
    assert report(random_state(99)).gap > 1e-3
    assert report(basis_state(8, 8)).truncation_overflow == 1.0
