"""Acceptance criteria, one test per criterion, at the stated tolerances."""

from __future__ import annotations

import filecmp
import math
import os
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_DETAILS, solve_standard
from delaywave import (
    BirthFunction,
    ModelParams,
    PdeState,
    apply_wave_operator,
    check_K_hyperbolicity,
    compare_with_profile,
    epsilon_continuation,
    find_positive_fixed_point,
    fit_tail_exponent,
    heteroclinic,
    integrate,
    leading_rate,
    limit_consistency,
    run_front_experiment,
    solve_lambda,
    solve_perturbed,
    verify_theorem1_structure,
)
from delaywave.charroots import char_eps, epsilon_max
from delaywave.cli import main
from delaywave.dde import History, validate_envelopes
from delaywave.errors import HypothesisNotMet
from delaywave.waveprofile import GridProfile

E2 = math.exp(2.0)


def note(num: int, text: str) -> None:
    ACCEPTANCE_DETAILS[num] = text
    print(f"criterion {num}: {text}")


def test_criterion_01_root_chain_random():
    rng = np.random.default_rng(20240601)
    start = time.perf_counter()
    worst = 0.0
    failures = []
    for _ in range(500):
        p = 1.0 + 9.0 * (1.0 - rng.random())   # (1, 10]
        h = 3.0 * rng.random()                 # [0, 3)
        eps = epsilon_max(p) * (1.0 - rng.random())
        if eps >= epsilon_max(p):
            eps = math.nextafter(epsilon_max(p), 0.0)
        r = solve_perturbed(p, h, eps)
        lam = solve_lambda(p, h)
        res = max(abs(lam.residual),
                  *(abs(float(char_eps(z, p, h, eps))) / max(1.0, (eps * z) ** 2) for z in (r.lambda1, r.lambda_inf)))
        worst = max(worst, res)
        two, e2 = 2 * (p - 1), eps ** -2
        if not (0 < lam.value < r.lambda1 < two < e2 - two < r.lambda_inf < e2 + 1):
            failures.append((p, h, eps))
    elapsed = time.perf_counter() - start
    note(1, f"500 samples, {len(failures)} chain failures, max residual {worst:.2e}, {elapsed:.2f} s")
    assert not failures
    assert worst <= 1e-10
    assert elapsed < 5.0


def test_criterion_02_limit_consistency():
    worst_ratio = 0.0
    beyond = 0
    for p in (2.0, math.e, E2):
        for h in (0.25, 0.5, 1.0):
            eps_list = [0.2, 0.1, 0.05, 0.025]
            inside = [e for e in eps_list if e < epsilon_max(p)]
            lam = solve_lambda(p, h).value
            gaps = [r[2] for r in limit_consistency(p, h, inside).rows]
            # for p = e^2 the largest epsilon lies past the bracketed range;
            # the smallest positive real root still exists and is used there
            for e in eps_list[:len(eps_list) - len(inside)]:
                z = leading_rate(p, h, e)
                assert abs(float(char_eps(z, p, h, e))) < 1e-12 and float(char_eps(z - 1e-6, p, h, e)) > 0
                gaps.insert(0, z - lam)
                beyond += 1
            assert all(g > 0 for g in gaps), (p, h, gaps)
            assert all(b < a for a, b in zip(gaps, gaps[1:])), (p, h, gaps)
            assert gaps[3] < gaps[2]
            worst_ratio = max(worst_ratio, gaps[3] / gaps[2])
    note(2, f"9 cases monotone, largest gap(0.025)/gap(0.05) = {worst_ratio:.3f}, "
            f"{beyond} points past the bracketed range")


def test_criterion_03_heteroclinic_tail_law():
    worst = 0.0
    for p in (2.0, math.e, E2):
        g = BirthFunction.nicholson(p)
        eq = find_positive_fixed_point(g)
        for h in (0.25, 0.5, 1.0):
            params = ModelParams(h)
            tr = heteroclinic(g, params, eq=eq)
            fit = fit_tail_exponent(tr)
            lam = solve_lambda(p, h).value
            rel = abs(fit.exponent / lam - 1)
            worst = max(worst, rel)
            assert fit.accepted, (p, h, fit.r_squared)
            assert rel < 0.01, (p, h, fit.exponent, lam)
            env = validate_envelopes(tr, g, params, 0.95 * p, 1.05 * p)
            assert env.sandwich_ok and env.ineq12_ok, (p, h, env)
    note(3, f"9 cases, worst relative tail-exponent error {worst:.2e}, envelopes pass")


def test_criterion_04_wave_operator_identities():
    g = BirthFunction.nicholson(E2)
    worst_const = 0.0
    for eps in (0.01, 0.05, 0.1):
        params = ModelParams(0.5, 1.0, eps)
        for value in (0.0, 2.0):
            prof = GridProfile.constant(value, -20.0, 20.0, 1601)
            out = apply_wave_operator(prof, g, params)
            worst_const = max(worst_const, float(np.max(np.abs(out.values - value))))
    p, h = 2.0, 1.0
    lin = BirthFunction.custom(lambda u: p * np.asarray(u), lambda u: p + 0 * np.asarray(u))
    worst_eig = 0.0
    for eps in (0.01, 0.05, 0.1):
        lam1 = solve_perturbed(p, h, eps).lambda1
        sp = 0.005
        t = np.arange(-40.0, sp / 2, sp)
        x = np.exp(lam1 * t)
        out = apply_wave_operator(GridProfile(t[0], sp, x, 0.0, x[-1]), lin, ModelParams(h, 1.0, eps),
                                  check_tails=False)
        inner = (t > -20) & (t < -1)
        worst_eig = max(worst_eig, float(np.max(np.abs(out.values[inner] - x[inner]))))
    note(4, f"constant identities {worst_const:.1e}, eigenfunction error {worst_eig:.1e}")
    assert worst_const <= 1e-10
    assert worst_eig <= 1e-6


def test_criterion_05_profile_structure():
    g = BirthFunction.nicholson(E2)
    eq = find_positive_fixed_point(g)
    out = []
    for h in (0.5, 0.15):
        start = time.perf_counter()
        prof, diag, params = solve_standard(g, eq, h, 0.05)
        rep = verify_theorem1_structure(prof, diag, g, params, eq)
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0
        assert diag.converged
        assert np.all(prof.values > 0) and rep.positive
        assert rep.tail_ok and rep.left_derivative_positive
        assert abs(rep.tail_exponent / rep.lambda1 - 1) < 0.01
        assert rep.hump_max <= math.e + 1e-6
        if h == 0.5:
            assert rep.oscillation_criterion
            assert rep.right_quarter_sign_changes >= 2
        else:
            assert not rep.oscillation_criterion and rep.oscillation_ok is None
        out.append(f"h={h}: tail {rep.tail_exponent:.5f} vs {rep.lambda1:.5f}, "
                   f"sign changes {rep.right_quarter_sign_changes}, hump {rep.hump_max:.4f}, {elapsed:.2f} s")
    note(5, "; ".join(out))


def test_criterion_06_continuation():
    g = BirthFunction.nicholson(E2)
    rep = epsilon_continuation(g, ModelParams(0.5), [0.01, 0.02, 0.05, 0.1])
    d = rep.distances_to_base
    note(6, "distances to psi0 " + ", ".join(f"{x:.2e}" for x in d))
    assert d[0] <= 2e-2 * 2.0
    assert all(b > a for a, b in zip(d, d[1:]))


def test_criterion_07_pde_cross_validation():
    g = BirthFunction.nicholson(E2)
    eq = find_positive_fixed_point(g)
    start = time.perf_counter()
    coarse = run_front_experiment(g, ModelParams(0.5), (0.0, 400.0), dx=0.2, t_end=150.0, eq=eq)
    fine = run_front_experiment(g, ModelParams(0.5), (0.0, 400.0), dx=0.1, t_end=150.0, eq=eq)
    c1, c2 = coarse.track.speed_estimate, fine.track.speed_estimate
    cmp = compare_with_profile(coarse.profile, c1, g, 0.5, eq=eq)
    low = run_front_experiment(g, ModelParams(0.1), (0.0, 400.0), dx=0.2, t_end=100.0, eq=eq)
    high = run_front_experiment(g, ModelParams(1.0), (0.0, 400.0), dx=0.2, t_end=150.0, eq=eq)
    elapsed = time.perf_counter() - start
    note(7, f"speed {c1:.4f} / {c2:.4f} (change {abs(c2 / c1 - 1):.2%}), profile sup {cmp.sup_rel:.2%} K, "
            f"sign changes h=0.1: {low.sign_changes_behind}, h=1.0: {high.sign_changes_behind}, {elapsed:.1f} s")
    assert cmp.sup_rel < 0.05
    assert abs(c2 / c1 - 1) <= 0.02
    assert low.sign_changes_behind == 0
    assert high.sign_changes_behind >= 2
    assert max(coarse.max_value, high.max_value) <= math.e + 1e-9
    assert elapsed < 600.0


def test_criterion_08_zero_diffusion():
    g = BirthFunction.nicholson(E2)
    h, dt = 0.5, 0.005
    levels = np.array([1e-3, 0.3, 1.0, 2.0, 2.6])
    u0 = np.repeat(levels, 4)
    st = PdeState.create(u0, 0.0, float(u0.size - 1), dt, ModelParams(h, 0.0), "neumann")
    nsteps = int(round(20.0 / dt))
    field = np.empty((nsteps + 1, u0.size))
    field[0] = u0
    for k in range(1, nsteps + 1):
        st.advance(g, 1)
        field[k] = st.u
    worst = 0.0
    for j, v in enumerate(levels):
        tr = integrate(g, ModelParams(h), History.constant(float(v)), 20.0, dt, scheme="euler")
        assert tr.values.size == nsteps + 1
        worst = max(worst, float(np.max(np.abs(field[:, 4 * j:4 * j + 4] - tr.values[:, None]))))
    note(8, f"max pointwise difference {worst:.1e} over t in [0, 20]")
    assert worst <= 1e-6


def test_criterion_09_hyperbolicity():
    for h in (0.5, 1.0, 2.0):
        for eps in (0.0, 0.01, 0.05):
            r = check_K_hyperbolicity(-1.0, h, eps)
            assert r.no_negative_real_roots and r.no_imaginary_roots, (h, eps, r)
    with pytest.raises(HypothesisNotMet):
        check_K_hyperbolicity(-1.0, 0.2, 0.05)
    note(9, "9 scans clean, h = 0.2 rejected")


COMMANDS = [
    ["analyze"],
    ["roots"],
    ["hetero"],
    ["wave"],
    ["pde"],
    ["sweep"],
    ["continuation"],
    ["rescale", "--p", "8", "--delta", "0.2", "--b", "3", "--h", "15"],
]


def test_criterion_10_determinism(tmp_path):
    same = 0
    for cmd in COMMANDS:
        dirs = []
        for rep in range(2):
            out = tmp_path / f"{cmd[0]}_{rep}"
            threads = ["--threads", "2"] if cmd[0] == "sweep" else []
            assert main(["--out", str(out), "--seed", "17", *threads, *cmd]) == 0
            dirs.append(out)
        names = sorted(os.listdir(dirs[0]))
        assert names == sorted(os.listdir(dirs[1])) and names
        match, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
        assert not mismatch and not errors, (cmd, mismatch)
        same += len(match)
    note(10, f"{len(COMMANDS)} commands, {same} output files byte-identical")
