from __future__ import annotations

import math

import numpy as np
import pytest

from delaywave import (
    BirthFunction,
    ModelParams,
    check_corollary_conditions,
    check_gsc,
    check_oscillation_criterion,
    find_positive_fixed_point,
    rescale_nicholson,
    schwarzian,
)
from delaywave.errors import CriticalPoint, NoPositiveFixedPoint, ValidationError


@pytest.mark.parametrize("p,K,Gamma", [(math.exp(2.0), 2.0, -1.0), (math.e, 1.0, 0.0)])
def test_nicholson_fixed_point(p, K, Gamma):
    eq = find_positive_fixed_point(BirthFunction.nicholson(p))
    assert eq.K == pytest.approx(K, abs=1e-12)
    assert eq.Gamma == pytest.approx(Gamma, abs=1e-10)
    assert eq.p == pytest.approx(p)
    assert eq.hypothesis_h


def test_no_fixed_point_at_p_one():
    with pytest.raises(NoPositiveFixedPoint):
        find_positive_fixed_point(BirthFunction.nicholson(1.0))


def test_mackey_glass_fixed_point():
    g = BirthFunction.mackey_glass(4.0, 6.0)
    eq = find_positive_fixed_point(g)
    assert eq.K == pytest.approx(3.0 ** (1 / 6), rel=1e-12)
    assert abs(float(g(eq.K)) - eq.K) <= 1e-12 * max(1.0, eq.K)


@pytest.mark.parametrize("g", [BirthFunction.nicholson(math.exp(2.0)), BirthFunction.nicholson(3.0),
                               BirthFunction.mackey_glass(4.0, 6.0), BirthFunction.mackey_glass(2.0, 1.0)])
def test_derivatives_match_central_differences(g):
    u = np.linspace(0.05, 10.0, 100)
    step = 1e-5 * np.maximum(1.0, u)
    pairs = [(g.g, g.dg), (g.dg, g.d2g), (g.d2g, g.d3g)]
    for f, df in pairs:
        fd = (f(u + step) - f(u - step)) / (2 * step)
        exact = df(u)
        scale = np.maximum(np.abs(exact), 1e-3 * np.max(np.abs(exact)))
        assert np.max(np.abs(fd - exact) / scale) < 1e-6


def test_custom_needs_g0_zero():
    with pytest.raises(ValidationError):
        BirthFunction.custom(lambda u: np.asarray(u) + 1.0)


def test_custom_finite_difference_derivatives():
    g = BirthFunction.custom(lambda u: 3.0 * np.asarray(u) * np.exp(-np.asarray(u)))
    assert g.p == pytest.approx(3.0, rel=1e-6)
    assert float(g.d3g(0.5)) == pytest.approx(float(BirthFunction.nicholson(3.0).d3g(0.5)), rel=1e-3)


def test_from_dict_rejects_unknown_keys():
    assert BirthFunction.from_dict({"kind": "mackey_glass", "p": 4.0, "n": 6.0}).n == 6.0
    with pytest.raises(ValidationError):
        BirthFunction.from_dict({"kind": "nicholson", "p": 2.0, "q": 1})
    with pytest.raises(ValidationError):
        BirthFunction.from_dict({"kind": "ricker", "p": 2.0})


def test_schwarzian_values():
    g = BirthFunction.nicholson(math.exp(2.0))
    assert schwarzian(g, 1e-7) == pytest.approx(-3.0, abs=1e-5)
    with pytest.raises(CriticalPoint):
        schwarzian(g, 1.0)
    lin = BirthFunction.custom(lambda u: 2.0 * np.asarray(u), lambda u: 2.0 + 0 * np.asarray(u),
                               lambda u: 0 * np.asarray(u), lambda u: 0 * np.asarray(u))
    assert schwarzian(lin, 0.7) == 0.0


def test_gsc_examples():
    assert check_gsc(-1.0, 5.0).holds
    assert check_gsc(-2.0, 0.5).holds
    r = check_gsc(-2.0, 1.5)
    assert not r.holds
    assert r.rhs == pytest.approx(2 * math.log(1.2), rel=1e-12)
    h_star = -math.log(2 * math.log(1.2))
    assert h_star == pytest.approx(1.0089, abs=1e-4)
    assert check_gsc(-2.0, h_star - 1e-9).holds
    assert not check_gsc(-2.0, h_star + 1e-9).holds


def test_gsc_vacuous_flag():
    r = check_gsc(0.3, 1.0)
    assert r.vacuous and r.holds and math.isnan(r.rhs)


def test_oscillation_examples():
    assert check_oscillation_criterion(-1.0, 0.5)
    assert not check_oscillation_criterion(-1.0, 0.2)
    assert not check_oscillation_criterion(0.0, 3.0)


def test_corollary_nicholson_passes():
    g = BirthFunction.nicholson(math.exp(2.0))
    rep = check_corollary_conditions(g, find_positive_fixed_point(g), 0.5, 10.0)
    assert rep.unique_maximum and rep.critical_points == 1
    assert rep.x_M == pytest.approx(1.0, abs=1e-9)
    assert rep.schwarzian_negative
    assert rep.ok


def test_corollary_monotone_fails():
    g = BirthFunction.custom(lambda u: 2 * np.asarray(u) / (1 + np.asarray(u)),
                             lambda u: 2 / (1 + np.asarray(u)) ** 2)
    eq = find_positive_fixed_point(g)
    assert eq.K == pytest.approx(1.0, abs=1e-12)
    rep = check_corollary_conditions(g, eq, 1.0, 10.0)
    assert rep.critical_points == 0 and not rep.unique_maximum and not rep.ok


def test_corollary_mackey_glass_n1_fails():
    g = BirthFunction.mackey_glass(4.0, 1.0)
    rep = check_corollary_conditions(g, find_positive_fixed_point(g), 1.0, 10.0)
    assert not rep.unique_maximum


def test_corollary_needs_u_max_above_K():
    g = BirthFunction.nicholson(math.exp(2.0))
    with pytest.raises(ValidationError):
        check_corollary_conditions(g, find_positive_fixed_point(g), 0.5, 1.5)


def test_model_params_validation():
    assert ModelParams(0.5).speed == math.inf
    assert ModelParams(0.5, 1.0, 0.25).speed == 4.0
    for bad in [dict(h=-1.0), dict(h=0.5, d=-1.0), dict(h=0.5, epsilon=-0.1)]:
        with pytest.raises(ValidationError):
            ModelParams(**bad)


def test_rescale():
    r = rescale_nicholson(8.0, 0.2, 3.0, 15.0, 2.0)
    assert r["p"] == pytest.approx(40.0)
    assert r["h"] == pytest.approx(3.0)
    assert r["d"] == pytest.approx(10.0)
    with pytest.raises(ValidationError):
        rescale_nicholson(8.0, 0.0, 3.0, 15.0)


def test_max_value_nicholson():
    assert BirthFunction.nicholson(math.exp(2.0)).max_value() == pytest.approx(math.e, rel=1e-10)
