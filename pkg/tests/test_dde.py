from __future__ import annotations

import math

import numpy as np
import pytest

from delaywave import BirthFunction, ModelParams, fit_tail_exponent, heteroclinic, integrate, solve_lambda
from delaywave.dde import DdeTrajectory, History, delay_steps, hump_report, validate_envelopes
from delaywave.diagnostics import count_sign_changes, fit_log_linear
from delaywave.errors import (
    BoundsViolated,
    HypothesisNotMet,
    MisalignedStep,
    NegativeHistory,
    TrivialHistory,
    WindowTooShort,
)

ZERO = BirthFunction.custom(lambda u: 0.0 * np.asarray(u), lambda u: 0.0 * np.asarray(u))


def test_linear_decay():
    tr = integrate(ZERO, ModelParams(0.5), History.constant(1.0), 1.0, 0.005)
    assert tr.t[-1] == pytest.approx(1.0)
    assert abs(tr.values[-1] - math.exp(-1.0)) < 1e-8


def test_equilibrium_without_delay(nich_e2):
    g, _ = nich_e2
    tr = integrate(g, ModelParams(0.0), History.constant(2.0), 10.0, 0.01)
    assert np.max(np.abs(tr.values - 2.0)) < 1e-12


def test_global_attraction_and_step_agreement(nich_e2):
    g, _ = nich_e2
    a = integrate(g, ModelParams(0.5), History.constant(1e-3), 200.0, 0.005)
    b = integrate(g, ModelParams(0.5), History.constant(1e-3), 200.0, 0.0025)
    assert abs(a.values[-1] - 2.0) < 1e-4
    assert abs(a.values[-1] - b.values[-1]) < 1e-8


def test_step_halving_is_fourth_order(nich_e2):
    g, _ = nich_e2
    h = 0.5
    t_end = 10.0
    runs = [integrate(g, ModelParams(h), History.constant(0.5), t_end, h / k) for k in (10, 20, 40, 80)]
    errs = []
    for coarse, fine in zip(runs, runs[1:]):
        errs.append(np.max(np.abs(coarse.values - fine.values[::2])))
    slopes = np.diff(np.log(errs)) / np.log(0.5)
    assert np.polyfit(np.log([h / 10, h / 20, h / 40]), np.log(errs), 1)[0] >= 3.7
    assert np.all(slopes > 3.5)


def test_interpolant_reproduces_samples(het_e2_h05):
    tr = het_e2_h05
    assert np.array_equal(tr(tr.t[::97]), tr.values[::97])


def test_errors():
    g = BirthFunction.nicholson(math.exp(2.0))
    with pytest.raises(MisalignedStep):
        integrate(g, ModelParams(0.5), History.constant(1.0), 1.0, 0.03)
    with pytest.raises(MisalignedStep):
        delay_steps(0.5, 0.0)
    with pytest.raises(NegativeHistory):
        integrate(g, ModelParams(0.5), History.constant(-1.0), 1.0, 0.05)
    with pytest.raises(TrivialHistory):
        integrate(g, ModelParams(0.5), History.constant(0.0), 1.0, 0.05)
    with pytest.raises(TrivialHistory):
        heteroclinic(g, ModelParams(0.5), seed_amplitude=0.0)


def test_heteroclinic_e2(het_e2_h05, nich_e2):
    g, eq = nich_e2
    tr = het_e2_h05
    assert tr.n_clamped == 0
    assert np.all(tr.values >= 0)
    assert abs(tr.values[-1] - 2.0) < 1e-6
    assert tr.full_x[0] < 1e-4 * eq.K
    assert tr(0.0) == pytest.approx(1.0, abs=1e-9)
    rep = hump_report(tr.values, g, eq.K)
    assert rep["sign_changes_about_K"] >= 2
    assert rep["hump_bound_ok"]
    assert rep["hump_max"] <= math.e + 1e-9


def test_heteroclinic_monotone_case():
    g = BirthFunction.nicholson(2.0)
    tr = heteroclinic(g, ModelParams(0.1))
    K = math.log(2.0)
    assert abs(tr.values[-1] - K) < 1e-6
    assert count_sign_changes(tr.values - K, 1e-9 * K) == 0


def test_heteroclinic_refuses_without_attractivity():
    g = BirthFunction.nicholson(math.exp(3.0))  # Gamma = -2, gsc fails at h = 1.5
    with pytest.raises(HypothesisNotMet):
        heteroclinic(g, ModelParams(1.5))


def test_tail_fit(het_e2_h05):
    fit = fit_tail_exponent(het_e2_h05)
    lam = solve_lambda(math.exp(2.0), 0.5).value
    assert fit.accepted
    assert abs(fit.exponent / lam - 1) < 0.01


def test_tail_fit_exact_exponential():
    t = np.linspace(-60, -20, 400)
    fit = fit_log_linear(t, np.exp(0.3 * t), 1.0)
    assert fit.exponent == pytest.approx(0.3, abs=1e-10)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_tail_fit_constant_fails():
    with pytest.raises(WindowTooShort):
        fit_log_linear(np.arange(100.0), np.full(100, 2.0), 2.0)


def test_envelopes_pass(het_e2_h05, nich_e2):
    g, _ = nich_e2
    p = g.p
    rep = validate_envelopes(het_e2_h05, g, ModelParams(0.5), 0.95 * p, 1.05 * p)
    assert rep.sandwich_ok and rep.ineq12_ok and rep.ok
    assert rep.C1 > 0 and rep.C2 > 0


def test_envelopes_reject_wide_tail(het_e2_h05, nich_e2):
    g, _ = nich_e2
    with pytest.raises(BoundsViolated):
        validate_envelopes(het_e2_h05, g, ModelParams(0.5), 0.95 * g.p, 1.05 * g.p, delta_tail=1.8)


def test_envelopes_synthetic_exponential():
    p, h = 3.0, 0.5
    lam = solve_lambda(p, h).value
    lin = BirthFunction.custom(lambda u: p * np.asarray(u), lambda u: p + 0 * np.asarray(u))
    dt = 0.01
    t = np.arange(-40.0, -10.0 + dt / 2, dt)
    m = delay_steps(h, dt)
    x = np.exp(lam * t)
    tr = DdeTrajectory(t[m], dt, h, x[m:], lam * x[m:], x[:m + 1], lam * x[:m + 1], K=1.0)
    rep = validate_envelopes(tr, lin, ModelParams(h), p, p)
    assert rep.ok
    assert rep.C1 == pytest.approx(1.0, rel=1e-9)
    assert rep.C2 == pytest.approx(1.0, rel=1e-9)


def test_shifted_trajectory(het_e2_h05):
    s = het_e2_h05.shifted(3.0)
    assert s.t0 == pytest.approx(het_e2_h05.t0 + 3.0)
    assert s(3.0) == pytest.approx(het_e2_h05(0.0))
