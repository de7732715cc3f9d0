"""Method-of-steps integration of ``x'(t) = -x(t) + g(x(t - h))``, the
heteroclinic connection from 0 to ``K``, and its tail diagnostics.

The delay is an integer multiple ``m`` of the step. Classical RK4 needs
the delayed value at half steps, which falls exactly at cell midpoints of
the stored past and is taken from the cubic Hermite interpolant built on
stored values and right-hand sides.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.interpolate import CubicHermiteSpline

from . import _kernels
from .birth import BirthFunction, Equilibria, ModelParams, check_corollary_conditions, find_positive_fixed_point
from .charroots import solve_lambda
from .diagnostics import TailFit, count_sign_changes, first_upward_crossing, fit_log_linear, local_maxima
from .errors import (
    BlowUp,
    BoundsViolated,
    HypothesisNotMet,
    MisalignedStep,
    NegativeHistory,
    NoConvergenceToK,
    TrivialHistory,
    ValidationError,
)

log = logging.getLogger(__name__)

__all__ = [
    "History",
    "DdeTrajectory",
    "EnvelopeReport",
    "delay_steps",
    "integrate",
    "heteroclinic",
    "fit_tail_exponent",
    "validate_envelopes",
    "hump_report",
]


@dataclass(frozen=True)
class History:
    """Initial function on ``[t0 - h, t0]`` as a function of ``s = t - t0``."""

    kind: str
    amplitude: float = 0.0
    rate: float = 0.0
    func: Optional[Callable] = field(default=None, compare=False)
    deriv: Optional[Callable] = field(default=None, compare=False)

    @classmethod
    def constant(cls, value: float) -> "History":
        return cls("constant", float(value))

    @classmethod
    def exponential(cls, amplitude: float, rate: float) -> "History":
        return cls("exponential", float(amplitude), float(rate))

    @classmethod
    def from_callable(cls, func, deriv=None) -> "History":
        return cls("callable", func=func, deriv=deriv)

    def value(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            return np.full_like(s, self.amplitude)
        if self.kind == "exponential":
            return self.amplitude * np.exp(self.rate * s)
        return np.asarray(self.func(s), dtype=float)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(s)
        if self.kind == "exponential":
            return self.rate * self.amplitude * np.exp(self.rate * s)
        if self.deriv is not None:
            return np.asarray(self.deriv(s), dtype=float)
        step = 1e-6
        return (self.value(s + step) - self.value(s - step)) / (2 * step)


@dataclass
class DdeTrajectory:
    """Solution samples on ``t0 + k dt`` together with the history samples
    on ``[t0 - h, t0]``."""

    t0: float
    dt: float
    h: float
    values: np.ndarray
    derivative_samples: np.ndarray
    history_values: np.ndarray
    history_derivatives: np.ndarray
    n_clamped: int = 0
    K: float = math.nan
    lam: float = math.nan
    seed: float = math.nan
    scheme: str = "rk4"

    @property
    def m(self) -> int:
        return len(self.history_values) - 1

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    @property
    def full_t(self) -> np.ndarray:
        """History and solution times, ``t0`` counted once."""
        return self.t0 + self.dt * np.arange(-self.m, len(self.values))

    @property
    def full_x(self) -> np.ndarray:
        return np.concatenate([self.history_values[:-1], self.values])

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (len(self.values) - 1)

    def interpolant(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.t, self.values, self.derivative_samples)

    def __call__(self, t):
        return self.interpolant()(t)

    def shifted(self, offset: float) -> "DdeTrajectory":
        """Same samples with every time increased by ``offset``."""
        out = DdeTrajectory(**{**self.__dict__})
        out.t0 = self.t0 + offset
        return out


def delay_steps(h: float, dt: float) -> int:
    """``h/dt`` as an exact integer, else :class:`MisalignedStep`."""
    if not dt > 0:
        raise MisalignedStep(f"dt must be positive, got {dt}")
    m = int(round(h / dt))
    if abs(m * dt - h) > 1e-12 * max(1.0, h):
        raise MisalignedStep(f"h/dt = {h / dt!r} is not an integer")
    return m


def _march(g: BirthFunction, m, dt, past_x, past_xp, nsteps, scheme):
    x, xp, nclamp, blow = _kernels.dde_run(g.kind_code, g.p, g.n, past_x, past_xp, m, dt,
                                           nsteps, scheme, g._g if g.kind == "custom" else None)
    if blow >= 0:
        raise BlowUp(f"|x| exceeded 1e6 after {blow} steps")
    if nclamp:
        log.warning("clamped %d negative values to 0; consider a smaller step", nclamp)
    return x, xp, nclamp


def integrate(g: BirthFunction, params: ModelParams, history: History, t_end: float,
              dt: float, t0: float = 0.0, scheme: str = "rk4") -> DdeTrajectory:
    """Integrate from ``t0`` to (at least) ``t_end`` with fixed step ``dt``.

    ``scheme`` is ``"rk4"`` (default) or ``"euler"``; the latter matches the
    explicit PDE stepper step for step.
    """
    if scheme not in ("rk4", "euler"):
        raise ValidationError(f"unknown scheme {scheme!r}")
    h = params.h
    m = delay_steps(h, dt)
    s = -h + dt * np.arange(m + 1) if m else np.zeros(1)
    hx = history.value(s)
    hxp = history.derivative(s)
    if np.any(hx < 0):
        raise NegativeHistory(f"history takes negative value {hx.min()}")
    if not np.any(hx > 0):
        raise TrivialHistory("history is identically zero (trivial equilibrium)")
    nsteps = max(0, int(math.ceil((t_end - t0) / dt - 1e-9)))
    x, xp, nclamp = _march(g, m, dt, hx, hxp, nsteps, scheme)
    return DdeTrajectory(t0, dt, h, x, xp, hx, hxp, nclamp, scheme=scheme)


def _hermite_crossing(t0, dt, x0, x1, d0, d1, level) -> float:
    """Root in ``[t0, t0 + dt]`` of the cubic Hermite interpolant minus ``level``."""
    spl = CubicHermiteSpline([0.0, dt], [x0 - level, x1 - level], [d0, d1])
    lo, hi = 0.0, dt
    flo = float(spl(lo))
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        fm = float(spl(mid))
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return t0 + 0.5 * (lo + hi)


def heteroclinic(g: BirthFunction, params: ModelParams, seed_amplitude: float | None = None,
                 t_span: float = 600.0, dt: float | None = None, tol: float = 1e-6,
                 override: bool = False, eq: Equilibria | None = None,
                 chunk: float = 50.0) -> DdeTrajectory:
    """Numerical connection from 0 to ``K`` of the delay equation.

    Starts from ``seed * exp(lam s)`` on ``[-h, 0]`` (the leading unstable
    direction at zero) and integrates until ``|x - K| < tol`` over the last
    delay interval. The result is shifted so that the first upward crossing
    of ``K/2`` sits at ``t = 0``.
    """
    eq = eq or find_positive_fixed_point(g)
    if not eq.p > 1:
        raise HypothesisNotMet(f"g'(0) = {eq.p} <= 1")
    if not override:
        rep = check_corollary_conditions(g, eq, params.h, u_max=max(10.0, 5.0 * eq.K))
        if not rep.ok:
            raise HypothesisNotMet("global attractivity of K not established; pass override=True to proceed")
    K = eq.K
    if seed_amplitude is None:
        seed_amplitude = 1e-6 * K
    if not seed_amplitude > 0:
        raise TrivialHistory(f"seed amplitude must be positive, got {seed_amplitude}")
    h = params.h
    if dt is None:
        dt = h / 100.0 if h > 0 else 0.01
    m = delay_steps(h, dt)
    lam = solve_lambda(eq.p, h).value
    hist = History.exponential(seed_amplitude, lam)
    s = -h + dt * np.arange(m + 1) if m else np.zeros(1)
    hx, hxp = hist.value(s), hist.derivative(s)

    xs, xps = [], []
    past_x, past_xp = hx, hxp
    total_clamped = 0
    window = max(m, int(round(1.0 / dt))) + 1
    nchunk = int(round(chunk / dt))
    steps_done = 0
    converged = False
    while steps_done * dt < t_span:
        x, xp, nclamp = _march(g, m, dt, past_x, past_xp, nchunk, "rk4")
        total_clamped += nclamp
        xs.append(x if not xs else x[1:])
        xps.append(xp if not xps else xp[1:])
        steps_done += nchunk
        past_x = x[-(m + 1):]
        past_xp = xp[-(m + 1):]
        tail = x[-window:]
        if np.all(np.abs(tail - K) < tol):
            converged = True
            break
    values = np.concatenate(xs)
    derivs = np.concatenate(xps)
    if not converged:
        raise NoConvergenceToK(
            f"|x - K| still {abs(values[-1] - K):.3e} after t = {steps_done * dt}", float(values[-1]))

    full = np.concatenate([hx[:-1], values])
    i = first_upward_crossing(full, 0.5 * K)
    if i is None:
        raise NoConvergenceToK("trajectory never crosses K/2", float(values[-1]))
    j = i - m  # index into solution samples
    if j < 0:
        raise ValidationError("seed amplitude too large: history already above K/2")
    t_cross = _hermite_crossing(j * dt, dt, values[j], values[j + 1], derivs[j], derivs[j + 1], 0.5 * K)
    return DdeTrajectory(-t_cross, dt, h, values, derivs, hx, hxp, total_clamped,
                         K=K, lam=lam, seed=seed_amplitude)


def fit_tail_exponent(traj: DdeTrajectory, K: float | None = None) -> TailFit:
    """Log-linear fit over the left tail where ``1e-10 < x < 0.01 K``."""
    K = traj.K if K is None else K
    return fit_log_linear(traj.full_t, traj.full_x, K)


@dataclass
class EnvelopeReport:
    p1: float
    p2: float
    delta_tail: float
    lambda_lower: float
    lambda_upper: float
    C1: float
    C2: float
    tau: float
    n_tail: int
    sandwich_ok: bool
    ineq12_ok: bool
    ineq12_min_ratio: float
    first_violation: Optional[int]

    @property
    def ok(self) -> bool:
        return self.sandwich_ok and self.ineq12_ok

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return d


def validate_envelopes(traj: DdeTrajectory, g: BirthFunction, params: ModelParams,
                       p1: float, p2: float, delta_tail: float | None = None,
                       K: float | None = None) -> EnvelopeReport:
    """Check the exponential sandwich ``C1 e^(l2 t) <= x <= C2 e^(l1 t)`` and
    the window inequality ``min x >= e^(-h)/p2 * max x`` over every
    delay-length window in the tail ``x < delta_tail``.

    ``l1``, ``l2`` are the positive roots of ``z = -1 + p_i e^(-z h)``.
    """
    K = traj.K if K is None else K
    if delta_tail is None:
        delta_tail = 0.01 * K
    p = g.p
    if not (1.0 < p1 <= p <= p2):
        raise ValidationError(f"need 1 < p1 <= p <= p2, got p1={p1}, p={p}, p2={p2}")
    t, x = traj.full_t, traj.full_x
    above = np.flatnonzero(x >= delta_tail)
    stop = above[0] if above.size else len(x)
    tt, xx = t[:stop], x[:stop]
    if tt.size < 2:
        raise ValidationError("no tail samples below delta_tail")

    # linear bounds on the sampled tail range
    probe = np.concatenate([xx, np.linspace(0.0, delta_tail, 201)[1:]])
    gp = g.g(probe)
    slack = 1e-12 * np.maximum(1.0, np.abs(gp))
    bad = np.flatnonzero((gp < p1 * probe - slack) | (gp > p2 * probe + slack))
    if bad.size:
        k = int(bad[0])
        raise BoundsViolated(
            f"p1 x <= g(x) <= p2 x fails at x = {probe[k]:.6g} (g = {gp[k]:.6g})", index=k, value=float(probe[k]))

    h = params.h
    l1 = solve_lambda(p1, h).value
    l2 = solve_lambda(p2, h).value
    C1 = float(np.min(xx / np.exp(l2 * tt)))
    C2 = float(np.max(xx / np.exp(l1 * tt)))
    sandwich = bool(np.all(xx > 0) and C1 > 0 and math.isfinite(C2)
                    and np.all(C1 * np.exp(l2 * tt) <= xx * (1 + 1e-12))
                    and np.all(xx <= C2 * np.exp(l1 * tt) * (1 + 1e-12)))

    m = traj.m
    first = None
    min_ratio = math.inf
    ok12 = True
    if m > 0 and tt.size > m:
        win = sliding_window_view(xx, m + 1)
        lo, hi = win.min(axis=1), win.max(axis=1)
        bound = math.exp(-h) / p2
        ratio = lo / hi
        min_ratio = float(ratio.min())
        viol = np.flatnonzero(ratio < bound)
        if viol.size:
            ok12 = False
            first = int(viol[0] + m)
    return EnvelopeReport(p1, p2, delta_tail, l1, l2, C1, C2, float(tt[-1]), int(tt.size),
                          sandwich, ok12, min_ratio, first)


def hump_report(x, g: BirthFunction, K: float, floor: float = 1e-9) -> dict:
    """Local maxima against ``max g`` and sign changes of ``x - K``."""
    x = np.asarray(x, dtype=float)
    idx = local_maxima(x)
    gmax = g.max_value()
    hump = float(x[idx].max()) if idx.size else float(x.max())
    return {
        "hump_max": hump,
        "g_max": gmax,
        "hump_bound_ok": bool(hump <= gmax + 1e-9),
        "sign_changes_about_K": count_sign_changes(x - K, floor * K),
    }
