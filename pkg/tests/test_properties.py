from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delaywave import (
    BirthFunction,
    GridProfile,
    ModelParams,
    RegionClass,
    apply_wave_operator,
    check_gsc,
    check_oscillation_criterion,
    classify_region,
    count_roots_in_strip,
    find_positive_fixed_point,
    solve_lambda,
    solve_perturbed,
)
from delaywave.charroots import char_eps, epsilon_max
from delaywave.diagnostics import count_sign_changes
from delaywave.io import dumps

finite = dict(allow_nan=False, allow_infinity=False)


@given(st.floats(1.05, 50.0, **finite))
def test_nicholson_equilibrium_closed_form(p):
    g = BirthFunction.nicholson(p)
    eq = find_positive_fixed_point(g)
    assert eq.K == pytest.approx(math.log(p), abs=1e-10)
    assert eq.Gamma == pytest.approx(1 - math.log(p), abs=1e-10)
    assert abs(float(g(eq.K)) - eq.K) <= 1e-12 * max(1.0, eq.K)


@given(st.floats(1.05, 20.0, **finite), st.floats(1.0, 12.0, **finite))
def test_mackey_glass_fixed_point_round_trip(p, n):
    g = BirthFunction.mackey_glass(p, n)
    eq = find_positive_fixed_point(g)
    assert eq.K == pytest.approx((p - 1) ** (1 / n), rel=1e-10)
    assert abs(float(g(eq.K)) - eq.K) <= 1e-12 * max(1.0, eq.K)


@given(st.floats(-5.0, -1.0001, **finite), st.floats(0.0, 5.0, **finite), st.floats(0.0, 5.0, **finite))
def test_gsc_monotone_in_delay(Gamma, h1, h2):
    lo, hi = sorted((h1, h2))
    if check_gsc(Gamma, hi).holds:
        assert check_gsc(Gamma, lo).holds


@given(st.floats(-10.0, -1e-3, **finite), st.floats(0.0, 5.0, **finite), st.floats(0.0, 5.0, **finite))
def test_oscillation_monotone_in_delay(Gamma, h1, h2):
    lo, hi = sorted((h1, h2))
    if check_oscillation_criterion(Gamma, lo):
        assert check_oscillation_criterion(Gamma, hi)


@given(st.floats(1.01, 10.0, **finite), st.floats(0.0, 3.0, **finite), st.floats(0.0, 3.0, **finite))
def test_lambda_decreasing_in_delay(p, h1, h2):
    lo, hi = sorted((h1, h2))
    a, b = solve_lambda(p, lo).value, solve_lambda(p, hi).value
    assert b <= a
    # strictness is only resolvable once p e^(-zh) differs from p in double precision
    if hi > 1e-6:
        assert b < p - 1
    r = solve_lambda(p, hi)
    assert abs(r.residual) <= 1e-12 * max(1.0, r.value)


# The gaps in the chain shrink like eps^2, p - 1 and (at h = 0) like the
# distance of eps to its upper limit, where lambda1 meets 2(p-1) in a double
# root; the sampled range keeps every gap above double-precision resolution.
@settings(max_examples=300)
@given(st.floats(1.001, 10.0, **finite), st.floats(0.0, 3.0, **finite),
       st.floats(1e-3, 0.999, **finite))
def test_root_ordering_chain(p, h, frac):
    eps = frac * epsilon_max(p)
    r = solve_perturbed(p, h, eps)
    assert r.bounds_ok
    for z in (r.lambda1, r.lambda_inf):
        scale = max(1.0, z * z * eps * eps)
        assert abs(float(char_eps(z, p, h, eps))) / scale <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 0.5, **finite), st.floats(0.0, 2.0, **finite), st.floats(1.5, 30.0, **finite))
def test_constant_profiles_fixed(eps, h, p):
    g = BirthFunction.nicholson(p)
    K = math.log(p)
    params = ModelParams(h, 1.0, eps)
    for value in (0.0, K):
        out = apply_wave_operator(GridProfile.constant(value, -5.0, 5.0, 201), g, params)
        assert np.max(np.abs(out.values - value)) <= 1e-10 * max(1.0, K)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 0.5, **finite), st.floats(0.0, 2.0, **finite),
       st.lists(st.floats(0.0, 3.0, **finite), min_size=16, max_size=60))
def test_operator_preserves_nonnegativity(eps, h, vals):
    g = BirthFunction.nicholson(math.exp(2.0))
    prof = GridProfile(-1.0, 0.05, np.asarray(vals), 0.0, 2.0)
    out = apply_wave_operator(prof, g, ModelParams(h, 1.0, eps), check_tails=False)
    assert np.all(out.values >= 0)


@given(st.floats(0.0, 30.0, **finite), st.floats(0.0, 4.0, **finite), st.sampled_from(["nicholson", "mackey_glass"]))
def test_classification_is_pure(p, h, family):
    a = classify_region(p, h, family, 6.0) if p > 0 else None
    if p > 0:
        assert a is classify_region(p, h, family, 6.0)
        if p <= 1:
            assert a is RegionClass.NO_POSITIVE_EQUILIBRIUM


@given(st.lists(st.floats(-1e3, 1e3, **finite), min_size=2, max_size=50), st.floats(0.1, 100.0, **finite))
def test_sign_changes_scale_invariant(vals, c):
    y = np.asarray(vals)
    assert count_sign_changes(y) == count_sign_changes(c * y)
    assert count_sign_changes(y) <= y.size - 1


@given(st.dictionaries(st.text(min_size=1, max_size=5),
                       st.one_of(st.floats(), st.integers(-10, 10), st.booleans(), st.none()), max_size=6))
def test_json_dump_is_strict_and_stable(d):
    text = dumps(d)
    back = json.loads(text)
    assert back["schema_version"] == "1"
    assert text == dumps(d)


@pytest.mark.parametrize("eps", [0.02, 0.05, 0.1])
def test_strip_counts_stable_in_epsilon(eps):
    p, h = 2.0, 1.0
    xi = -0.3
    ib = 3 * p * math.exp(-xi * h)
    left = count_roots_in_strip(p, h, eps, (xi, 2 * (p - 1), ib)).count
    right = count_roots_in_strip(p, h, eps, (2 * (p - 1), eps ** -2 + 2, (math.sqrt(p + 2) + 1) / eps)).count
    base = count_roots_in_strip(p, h, 0.02, (xi, 2 * (p - 1), ib)).count
    assert right == 1
    assert left == base >= 1
