"""Explicit finite-difference simulation of ``u_t = d u_xx - u + g(u(t-h, x))``
on an interval, with front tracking and comparison against the
travelling-wave profile solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .birth import BirthFunction, Equilibria, ModelParams, find_positive_fixed_point
from .charroots import solve_lambda
from .dde import delay_steps, heteroclinic
from .diagnostics import count_sign_changes
from .errors import CflViolation, FrontExitedDomain, ValidationError
from .waveprofile import GridProfile, default_grid, profile_from_trajectory, solve_profile

__all__ = [
    "BOUNDARIES",
    "PdeState",
    "FrontTrack",
    "FrontExperiment",
    "ComparisonReport",
    "stable_dt",
    "step",
    "run_front_experiment",
    "solve_wave_for_speed",
    "compare_with_profile",
]

# "dirichlet": u = K at the left end, u = 0 at the right end
# "neumann": zero flux at both ends
BOUNDARIES = ("dirichlet", "neumann")
CFL = 0.4


def stable_dt(dx: float, d: float, h: float) -> float:
    """Largest step with ``dt <= 0.4 dx^2/d`` that divides ``h`` exactly."""
    limit = CFL * dx * dx / d if d > 0 else 0.01
    if h == 0:
        return limit
    return h / math.ceil(h / limit - 1e-12)


@dataclass
class PdeState:
    """Field history on a uniform grid.

    ``ring`` holds the last ``m + 1`` fields (``m = h/dt``); ``ring[head]``
    is the current one and ``ring[(head + 1) % (m + 1)]`` the one a delay
    ago.
    """

    x_min: float
    x_max: float
    dt: float
    h: float
    d: float
    ring: np.ndarray
    head: int = 0
    t: float = 0.0
    boundary: str = "dirichlet"
    left_value: float = 0.0
    right_value: float = 0.0
    n_clamped: int = 0

    def __post_init__(self):
        if self.boundary not in BOUNDARIES:
            raise ValidationError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        m = delay_steps(self.h, self.dt)
        if self.ring.shape[0] != m + 1:
            raise ValidationError(f"ring needs {m + 1} slots, has {self.ring.shape[0]}")
        if self.nx < 3:
            raise ValidationError("need at least 3 grid points")
        if self.d > 0 and self.dt > CFL * self.dx ** 2 / self.d * (1 + 1e-12):
            raise CflViolation(f"dt = {self.dt} exceeds {CFL} dx^2/d = {CFL * self.dx ** 2 / self.d}")
        if np.any(self.ring < 0):
            raise ValidationError("field values must be nonnegative")

    @classmethod
    def create(cls, u0, x_min: float, x_max: float, dt: float, params: ModelParams,
               boundary: str = "dirichlet", K: float | None = None) -> "PdeState":
        """Initial state with the history on ``[-h, 0]`` held at ``u0``."""
        u0 = np.asarray(u0, dtype=float)
        m = delay_steps(params.h, dt)
        ring = np.tile(u0, (m + 1, 1))
        left, right = (u0[0], u0[-1]) if K is None else (K, 0.0)
        return cls(x_min, x_max, dt, params.h, params.d, ring, 0, 0.0, boundary, float(left), float(right))

    @property
    def nx(self) -> int:
        return self.ring.shape[1]

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def u(self) -> np.ndarray:
        return self.ring[self.head]

    @property
    def m(self) -> int:
        return self.ring.shape[0] - 1

    def copy(self) -> "PdeState":
        return PdeState(self.x_min, self.x_max, self.dt, self.h, self.d, self.ring.copy(), self.head,
                        self.t, self.boundary, self.left_value, self.right_value, self.n_clamped)

    def advance(self, g: BirthFunction, nsteps: int, level: float = math.nan) -> np.ndarray:
        """Take ``nsteps`` explicit Euler steps in place; returns the front
        positions (``x`` where ``u`` last crosses ``level``) after each step."""
        bc = 0 if self.boundary == "dirichlet" else 1
        head, ncl, fr = _kernels.pde_advance(
            g.kind_code, g.p, g.n, self.ring, self.head, self.d, self.dt, self.dx, int(nsteps), bc,
            self.left_value, self.right_value, level, g._g if g.kind == "custom" else None)
        self.head = int(head)
        self.n_clamped += int(ncl)
        self.t += nsteps * self.dt
        return self.x_min + self.dx * np.asarray(fr)


def step(state: PdeState, g: BirthFunction) -> PdeState:
    """One explicit Euler step, returning a new state."""
    new = state.copy()
    new.advance(g, 1)
    return new


@dataclass
class FrontTrack:
    times: np.ndarray
    positions: np.ndarray
    speed_estimate: float
    speed_stderr: float
    speed_defined: bool
    fit_residual_rms: float
    monotone_after_transient: bool

    def to_dict(self) -> dict:
        return {"speed_estimate": self.speed_estimate, "speed_stderr": self.speed_stderr,
                "speed_defined": self.speed_defined, "fit_residual_rms": self.fit_residual_rms,
                "monotone_after_transient": self.monotone_after_transient, "n_samples": int(self.times.size)}


@dataclass
class FrontExperiment:
    track: FrontTrack
    profile: Optional[GridProfile]
    state: PdeState = field(repr=False)
    max_value: float = math.nan
    sign_changes_behind: int = 0
    snapshots: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        d = self.track.to_dict()
        d.update({"max_value": self.max_value, "sign_changes_behind": self.sign_changes_behind,
                  "n_clamped": self.state.n_clamped, "t_end": self.state.t})
        return d


def _fit_speed(times: np.ndarray, pos: np.ndarray) -> tuple[float, float, float, bool]:
    half = times >= 0.5 * times[-1] if times.size else times
    tt, pp = times[half], pos[half]
    if tt.size < 3:
        return math.nan, math.nan, math.nan, False
    A = np.vstack([tt, np.ones_like(tt)]).T
    coef, *_ = np.linalg.lstsq(A, pp, rcond=None)
    res = pp - A @ coef
    dof = tt.size - 2
    s2 = float(res @ res) / dof if dof > 0 else math.nan
    var = s2 / float(np.sum((tt - tt.mean()) ** 2))
    return float(coef[0]), math.sqrt(var), float(np.sqrt(np.mean(res ** 2))), True


def run_front_experiment(g: BirthFunction, params: ModelParams, domain: tuple[float, float] = (0.0, 400.0),
                         dx: float = 0.2, t_end: float = 150.0, dt: float | None = None,
                         x0: float = 20.0, boundary: str = "dirichlet", snapshot_times: Sequence[float] = (),
                         eq: Equilibria | None = None, noise_floor: float = 1e-6) -> FrontExperiment:
    """Rightward invasion of 0 by ``K`` from ``u0 = K`` (``x <= x0``) with an
    exponential foot ``K exp(-lam (x - x0))``, ``lam`` the positive root of
    ``z = -1 + p exp(-z h)``.

    The ``K/2`` level set is tracked every step; the speed is the
    least-squares slope over the second half of the run.
    """
    if not t_end >= 0:
        raise ValidationError(f"t_end must be >= 0, got {t_end}")
    eq = eq or find_positive_fixed_point(g)
    K = eq.K
    x_min, x_max = map(float, domain)
    if not x_max > x_min:
        raise ValidationError("empty domain")
    nx = int(round((x_max - x_min) / dx)) + 1
    dx = (x_max - x_min) / (nx - 1)
    if dt is None:
        dt = stable_dt(dx, params.d, params.h)
    lam = solve_lambda(eq.p, params.h).value
    x = np.linspace(x_min, x_max, nx)
    u0 = np.where(x <= x0, K, K * np.exp(-lam * (x - x0)))
    state = PdeState.create(u0, x_min, x_max, dt, params, boundary, K if boundary == "dirichlet" else None)
    nsteps = int(round(t_end / dt))
    level = 0.5 * K

    times = [0.0]
    first = np.flatnonzero(u0 >= level)[-1]
    positions = [x[first] + (u0[first] - level) / (u0[first] - u0[first + 1]) * dx]
    umax = float(u0.max())
    snaps = {}
    pending = sorted(float(s) for s in snapshot_times if 0 <= s <= t_end)
    if pending and pending[0] == 0.0:
        snaps[0.0] = u0.copy()
        pending.pop(0)
    chunk = max(1, int(round(1.0 / dt)))
    done = 0
    while done < nsteps:
        k = min(chunk, nsteps - done)
        if pending:
            k = min(k, max(1, int(round(pending[0] / dt)) - done))
        fr = state.advance(g, k, level)
        done += k
        times.extend((np.arange(done - k + 1, done + 1) * dt).tolist())
        positions.extend(fr.tolist())
        umax = max(umax, float(state.u.max()))
        if pending and done >= int(round(pending[0] / dt)):
            snaps[pending.pop(0)] = state.u.copy()
        last = positions[-1]
        if not math.isfinite(last) or last > x_max - 0.05 * (x_max - x_min):
            raise FrontExitedDomain(f"front at {last} reached the right end by t = {done * dt:.4g}")
    times = np.asarray(times)
    positions = np.asarray(positions)
    speed, stderr, rms, ok = _fit_speed(times, positions)
    late = positions[times >= 0.5 * times[-1]] if times.size > 1 else positions
    track = FrontTrack(times, positions, speed, stderr, ok, rms, bool(np.all(np.diff(late) >= -1e-9)))

    u = state.u
    xf = positions[-1]
    behind = u[x < xf]
    sc = count_sign_changes(behind - K, noise_floor * K)
    profile = None
    if ok and speed > 0:
        # u(t_end, x) = psi(tau) with tau = -(x - x_front)/c, increasing in tau
        vals = u[::-1].copy()
        t_min = -(x_max - xf) / speed
        profile = GridProfile(t_min, dx / speed, vals, 0.0, K)
    return FrontExperiment(track, profile, state, umax, sc, snaps)


def solve_wave_for_speed(g: BirthFunction, h: float, c: float, d: float = 1.0, m: int = 20,
                         eq: Equilibria | None = None):
    """Profile of the integral equation at ``epsilon = sqrt(d)/c`` on the
    default grid. The bracketing range of the real characteristic roots is
    not enforced, so speeds near the minimal one are allowed."""
    if not c > 0:
        raise ValidationError(f"speed must be positive, got {c}")
    eq = eq or find_positive_fixed_point(g)
    params = ModelParams(h, d, math.sqrt(d) / c)
    het = heteroclinic(g, ModelParams(h, d, 0.0), eq=eq, override=True)
    a, b, s = default_grid(g, params, eq, m, het)
    init = profile_from_trajectory(het, a, b, s, eq.K)
    return solve_profile(g, params, init, K=eq.K, check_range=False)


@dataclass
class ComparisonReport:
    epsilon: float
    speed: float
    sup: float
    sup_rel: float
    l2: float
    n_points: int
    window: tuple

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["window"] = list(self.window)
        return d


def compare_with_profile(co_moving: GridProfile, measured_c: float, g: BirthFunction, h: float,
                         d: float = 1.0, m: int = 20, eq: Equilibria | None = None) -> ComparisonReport:
    """Solve the profile equation at ``epsilon = sqrt(d)/c``, align both
    curves at their upward ``K/2`` crossings and measure the discrepancy
    where both lie in ``[1e-3 K, max g]``."""
    eq = eq or find_positive_fixed_point(g)
    K = eq.K
    ref, _ = solve_wave_for_speed(g, h, measured_c, d, m, eq)
    tc_ref = _crossing(ref.t, ref.values, 0.5 * K)
    tc_co = _crossing(co_moving.t, co_moving.values, 0.5 * K)
    if tc_ref is None or tc_co is None:
        raise ValidationError("profile without an upward K/2 crossing")
    t = ref.t
    a = ref.values
    b = co_moving(t - tc_ref + tc_co)
    top = g.max_value()
    mask = (a >= 1e-3 * K) & (b >= 1e-3 * K) & (a <= top) & (b <= top)
    # restrict to the span actually covered by the co-moving samples
    lo, hi = co_moving.t_min, co_moving.t_max
    mask &= (t - tc_ref + tc_co >= lo) & (t - tc_ref + tc_co <= hi)
    if not np.any(mask):
        raise ValidationError("profiles have no overlap above 1e-3 K")
    diff = np.abs(a[mask] - b[mask])
    sup = float(diff.max())
    l2 = float(math.sqrt(np.sum(diff ** 2) * ref.spacing))
    tm = t[mask]
    return ComparisonReport(math.sqrt(d) / measured_c, measured_c, sup, sup / K, l2, int(mask.sum()),
                            (float(tm[0]), float(tm[-1])))


def _crossing(t, x, level):
    idx = np.flatnonzero((x[:-1] < level) & (x[1:] >= level))
    if not idx.size:
        return None
    i = idx[0]
    return float(t[i] + (level - x[i]) / (x[i + 1] - x[i]) * (t[i + 1] - t[i]))
