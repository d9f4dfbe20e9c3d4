import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from tnut.geometry import MetricParams, ParameterError
from tnut.spectral import (
    S_bruteforce,
    S_function,
    S_value,
    hitchin_T,
    index_annulus,
    index_ball,
    kernel_dim,
    mode_lambda,
    modes_upto,
    spectral_flow,
    vanishing_criterion,
)
from tnut.suites import spectral_mismatches

from conftest import admissible_params

lams = st.floats(0.05, 12.0)


def test_branch_values():
    assert hitchin_T(4.0, 1, 1) == 0.0
    assert hitchin_T(2.0, 1, 1) == -1.0
    with pytest.raises(ValueError):
        hitchin_T(0.0, 1, 1)


@given(t=st.floats(0.01, 100.0), p=st.integers(1, 30))
def test_branch_diagonal(t, p):
    assert hitchin_T(t, p, p) == pytest.approx(t / 2 - 2 * p, rel=1e-14, abs=1e-12)


def test_mode_values():
    assert mode_lambda(1, 1).lambda_crit == 4.0
    assert mode_lambda(1, 2).lambda_crit == pytest.approx(math.sqrt(16 + 2 * math.sqrt(65)), rel=1e-15)
    assert mode_lambda(1, 2).lambda_crit == pytest.approx(5.6679, abs=1e-4)
    assert mode_lambda(2, 2).lambda_crit == 8.0
    assert mode_lambda(2, 3).multiplicity == 5
    with pytest.raises(ValueError):
        mode_lambda(0, 1)


def test_root_consistency():
    for p in range(1, 51):
        for q in range(1, 51):
            m = mode_lambda(p, q)
            assert abs(hitchin_T(m.lambda_crit, p, q)) <= 1e-12
            assert m.lambda_crit >= 4.0 and (m.lambda_crit > 4.0 or (p, q) == (1, 1))


def test_branches_strictly_increasing():
    t = np.linspace(0.05, 25.0, 1000)
    for m in modes_upto(20.0):
        T = np.array([hitchin_T(v, m.p, m.q) for v in t])
        assert np.all(np.diff(T) > 0)


def test_kernel_dimension():
    assert kernel_dim(4.0) == 2
    assert kernel_dim(2.0) == 0
    assert kernel_dim(mode_lambda(1, 2).lambda_crit) == 6
    assert kernel_dim(4.1) == 0
    assert kernel_dim(4.0 * (1 + 1e-10)) == 2


def test_counting_function_values():
    assert S_value(1.0) == 0
    assert S_value(5.0) == 2 == S_bruteforce(5.0)
    assert S_value(6.0) == 8 == S_bruteforce(6.0)
    assert S_value(4.0) == 2 and S_value(3.999) == 0
    _, modes = S_function(6.0)
    assert sorted((m.p, m.q) for m in modes) == [(1, 1), (1, 2), (2, 1)]


def test_closed_form_matches_root_finder_up_to_20():
    assert spectral_mismatches(20.0) == 0


def test_enumeration_bound():
    # every mode below l satisfies p q <= l^2 / 16
    for l in (5.0, 9.5, 17.0, 20.0):
        for m in modes_upto(l):
            assert m.p * m.q <= l * l / 16


@given(l=lams)
def test_counting_function_is_step_function(l):
    assert S_value(l) <= S_value(l * 1.01)
    # right-continuous: a slightly larger argument only adds modes that lie above l
    gap = [m for m in modes_upto(l * 1.001) if m.lambda_crit > l * (1 + 1e-9)]
    assert S_value(l * 1.001) - S_value(l) == sum(m.multiplicity for m in gap)


@given(a=lams, b=lams, c=lams)
def test_flow_additive_and_antisymmetric(a, b, c):
    assert spectral_flow(a, c) == spectral_flow(a, b) + spectral_flow(b, c)
    assert spectral_flow(a, b) == -spectral_flow(b, a)
    assert spectral_flow(a, a) == 0


def test_flow_values():
    assert spectral_flow(1.0, 4.5) == 2
    assert spectral_flow(4.5, 1.0) == -2


# indices ------------------------------------------------------------------


def test_ball_indices():
    assert index_ball(MetricParams(1, 1, -1.95, 1), 0.975).index == 2
    for l in (0.1, 1.0, 10.0, 100.0):
        assert index_ball(MetricParams.standard(1.0, 1.0), l).index == 0
        assert index_ball(MetricParams(1, 1, 0, 1), l).index == 0
    with pytest.raises(ValueError):
        index_ball(MetricParams(1, 1, 0, 1), 0.0)


def test_annulus_indices():
    p = MetricParams(1, 1, -1.95, 1)
    inner = index_annulus(p, 0.1, 0.975)
    assert inner.lambda_values[0] == pytest.approx(1.1, abs=0.05)
    assert inner.S_values == [0, 2] and inner.index == 2
    outer = index_annulus(p, 0.975, 10.0)
    assert outer.lambda_values[1] < 1 and outer.index == -2
    assert index_annulus(p, 2.0, 2.0).index == 0
    assert [(m.p, m.q) for m in inner.contributing_modes] == [(1, 1)]
    with pytest.raises(ValueError):
        index_annulus(p, 1.0, 0.5)


@given(p=admissible_params(), l1=st.floats(0.01, 20.0), l2=st.floats(0.01, 20.0))
def test_annulus_ball_consistency(p, l1, l2):
    l1, l2 = sorted((l1, l2))
    assert index_annulus(p, l1, l2).index == index_ball(p, l2).index - index_ball(p, l1).index


@given(p=admissible_params(), l1=st.floats(0.01, 20.0), l2=st.floats(0.01, 20.0))
def test_vanishing_criterion_forces_zero_index(p, l1, l2):
    l1, l2 = sorted((l1, l2))
    cert = vanishing_criterion(p)
    assume(cert.holds)
    assert cert.lambda_below_4
    assert index_ball(p, l2).index == 0 and index_annulus(p, l1, l2).index == 0


@given(p=admissible_params(), s=st.floats(0.1, 10.0), l=st.floats(0.01, 20.0))
def test_index_ignores_conformal_factor(p, s, l):
    scaled = MetricParams(p.a * s, p.b * s, p.c, p.d)
    assert index_ball(scaled, l).index == index_ball(p, l).index
    assert index_ball(scaled, l).lambda_values == index_ball(p, l).lambda_values


def test_vanishing_certificates():
    c0 = vanishing_criterion(MetricParams(1, 1, 0, 1))
    assert c0.holds and c0.lambda_max == 1.0
    c1 = vanishing_criterion(MetricParams(1, 1, -1.95, 1))
    assert not c1.holds and c1.lambda_max == pytest.approx(4.5, abs=1e-3)
    c2 = vanishing_criterion(MetricParams(1, 1, -1.9, 1))
    assert c2.holds and c2.lambda_max == pytest.approx(1 / math.sqrt(1 - 0.9025), rel=1e-14)
    assert c2.lambda_max == pytest.approx(3.203, abs=1e-3) and c2.lambda_below_4
    with pytest.raises(ParameterError):
        vanishing_criterion(MetricParams(1, 1, -2.5, 1))


def test_index_report_json():
    rep = index_ball(MetricParams(1, 1, -1.95, 1), 0.975)
    d = json.loads(rep.to_json())
    assert d["schema"] == "tnut/1"
    assert set(d) == {"schema", "domain", "params", "lambda_values", "S_values", "index", "modes"}
    assert d["modes"] == [{"p": 1, "q": 1, "lambda_crit": 4.0, "multiplicity": 2}]
    assert d["domain"] == {"kind": "ball", "l": 0.975}
