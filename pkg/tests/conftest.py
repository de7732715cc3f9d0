from __future__ import annotations

import math

import pytest

from delaywave import BirthFunction, ModelParams, find_positive_fixed_point, heteroclinic


# criterion number -> short text with the measured quantities
ACCEPTANCE_DETAILS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    rows = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid or rep.when not in ("call", "setup"):
                continue
            name = nodeid.split("::")[-1]
            if not name.startswith("test_criterion_"):
                continue
            num = int(name.split("_")[2])
            ok = key == "passed"
            rows[num] = (rows.get(num, (True, name))[0] and ok, name)
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(rows):
        ok, name = rows[num]
        detail = ACCEPTANCE_DETAILS.get(num, "")
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())


@pytest.fixture(scope="session")
def nich_e2():
    g = BirthFunction.nicholson(math.exp(2.0))
    return g, find_positive_fixed_point(g)


@pytest.fixture(scope="session")
def het_e2_h05(nich_e2):
    g, eq = nich_e2
    return heteroclinic(g, ModelParams(0.5), eq=eq)


def solve_standard(g, eq, h, eps, m=20, het=None):
    """Profile on the default grid started from the delay-ODE heteroclinic."""
    from delaywave.waveprofile import default_grid, profile_from_trajectory, solve_profile

    params = ModelParams(h, 1.0, eps)
    het = het or heteroclinic(g, ModelParams(h), eq=eq)
    a, b, s = default_grid(g, params, eq, m, het)
    init = profile_from_trajectory(het, a, b, s, eq.K)
    prof, diag = solve_profile(g, params, init, K=eq.K, reference=het)
    return prof, diag, params


@pytest.fixture(scope="session")
def wave_e2_h05(nich_e2, het_e2_h05):
    g, eq = nich_e2
    return solve_standard(g, eq, 0.5, 0.05, het=het_e2_h05)
