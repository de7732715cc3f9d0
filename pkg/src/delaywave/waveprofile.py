"""Travelling-wave profiles at finite speed ``c = 1/epsilon``.

A profile ``x(t)`` with ``u(t, z) = x(t - z/c)`` solves

    x = T x,   (T x)(t) = [ int_{-inf}^t e^{-a(t-s)} f(s) ds
                           + int_t^{inf} e^{-b(s-t)} f(s) ds ] / sigma,

with ``f(s) = g(x(s - h))``, ``sigma = sqrt(1 + 4 eps^2)``,
``a = 2/(1 + sigma)`` and ``b = (1 + sigma)/(2 eps^2)``. Both kernels are
integrated exactly against the piecewise-linear interpolant of ``f``, which
keeps the very fast right kernel (``b ~ eps^-2``) stable at small ``eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.integrate import trapezoid
from scipy.linalg import toeplitz
from scipy.sparse.linalg import spsolve

from . import _kernels
from .birth import BirthFunction, Equilibria, ModelParams, check_oscillation_criterion, find_positive_fixed_point
from .charroots import epsilon_max, leading_rate, solve_perturbed
from .dde import DdeTrajectory, heteroclinic
from .diagnostics import count_sign_changes, first_upward_crossing, fit_log_linear
from .errors import DomainTooShort, EpsilonOutOfRange, EpsilonZero, NoConvergence, ValidationError, WindowTooShort

__all__ = [
    "GridProfile",
    "WaveDiagnostics",
    "StructureReport",
    "ContinuationReport",
    "kernel_rates",
    "apply_wave_operator",
    "default_grid",
    "profile_from_trajectory",
    "solve_profile",
    "verify_theorem1_structure",
    "epsilon_continuation",
]

SIGN_FLOOR = 1e-9  # relative to K, for sign-change counts about K


@dataclass(frozen=True)
class GridProfile:
    """Samples of a profile on ``t_min + k*spacing``, ``k = 0..n-1``.

    ``left_tail_value``/``right_tail_value`` are the values assumed outside
    the grid (normally 0 and K).
    """

    t_min: float
    spacing: float
    values: np.ndarray
    left_tail_value: float = 0.0
    right_tail_value: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.size < 16:
            raise ValidationError(f"profile needs at least 16 samples, got {v.size}")
        if not self.spacing > 0:
            raise ValidationError("grid spacing must be positive")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def t_max(self) -> float:
        return self.t_min + self.spacing * (self.n - 1)

    @property
    def t(self) -> np.ndarray:
        return self.t_min + self.spacing * np.arange(self.n)

    def with_values(self, values) -> "GridProfile":
        return replace(self, values=np.asarray(values, dtype=float))

    def __call__(self, s):
        return np.interp(s, self.t, self.values, left=self.left_tail_value, right=self.right_tail_value)

    def scale(self) -> float:
        for v in (self.right_tail_value, float(np.max(np.abs(self.values))), 1.0):
            if v != 0:
                return abs(v)
        return 1.0

    def check_tails(self, rel: float = 1e-3) -> None:
        s = self.scale()
        if abs(self.values[0] - self.left_tail_value) >= rel * s:
            raise DomainTooShort(f"left end {self.values[0]:.3e} differs from tail value {self.left_tail_value}")
        if abs(self.values[-1] - self.right_tail_value) >= rel * s:
            raise DomainTooShort(f"right end {self.values[-1]:.6g} differs from tail value {self.right_tail_value}")

    @classmethod
    def constant(cls, value: float, t_min: float = -10.0, t_max: float = 10.0, n: int = 401) -> "GridProfile":
        return cls(t_min, (t_max - t_min) / (n - 1), np.full(n, float(value)), float(value), float(value))


@dataclass
class WaveDiagnostics:
    residual_sup: float
    min_value: float
    sign_changes_about_K: int
    hump_max: float
    tail_exponent: float
    phase_anchor: float
    iterations: int = 0
    converged: bool = True
    positive: bool = True
    reference_integral: float = math.nan
    tail_r_squared: float = math.nan

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def kernel_rates(epsilon: float) -> tuple[float, float, float]:
    """``(sigma, a, b)`` for the two exponential kernels."""
    if not epsilon > 0:
        raise EpsilonZero("epsilon = 0 is the delay-ODE limit; use the dde module")
    sigma = math.sqrt(1.0 + 4.0 * epsilon * epsilon)
    return sigma, 2.0 / (1.0 + sigma), (1.0 + sigma) / (2.0 * epsilon * epsilon)


def _phi1(y: float) -> float:
    """``(1 - e^-y)/y``."""
    return 1.0 - 0.5 * y if y < 1e-8 else -math.expm1(-y) / y


def _phi2(y: float) -> float:
    """``(1 - e^-y (1 + y))/y^2`` with a series near 0."""
    if y < 0.5:
        term, total, fact = 1.0, 0.0, 2.0
        for k in range(25):
            total += term * (k + 1) / fact
            term *= -y
            fact *= k + 3
        return total
    return (1.0 - math.exp(-y) * (1.0 + y)) / (y * y)


def _weights(rate: float, dx: float) -> tuple[float, float, float]:
    """Decay ``e^{-rate dx}`` and the weights of the near/far end values of a
    linear function integrated against ``e^{-rate u}``, ``u`` in ``[0, dx]``
    measured from the near end."""
    y = rate * dx
    i0 = dx * _phi1(y)
    i1 = dx * _phi2(y)
    return math.exp(-y), i0 - i1, i1


class _Operator:
    """Precomputed weights for repeated applications on a fixed grid."""

    def __init__(self, g: BirthFunction, h: float, epsilon: float, t_min: float, spacing: float,
                 n: int, left: float, right: float):
        self.g = g
        self.h = h
        self.sigma, self.a, self.b = kernel_rates(epsilon)
        self.spacing = spacing
        self.t = t_min + spacing * np.arange(n)
        self.left, self.right = left, right
        self.g_left = float(g.g(np.array([left]))[0])
        self.g_right = float(g.g(np.array([right]))[0])
        m = h / spacing
        self.shift = int(round(m)) if abs(m - round(m)) <= 1e-9 * max(1.0, m) else None
        el, near_l, far_l = _weights(self.a, spacing)
        # left sweep runs forward: the cell's older end is the far end of the kernel
        self.left_w = (el, far_l, near_l)
        self.right_w = _weights(self.b, spacing)

    def delayed(self, x: np.ndarray) -> np.ndarray:
        s = self.shift
        if s is None:
            return np.interp(self.t - self.h, self.t, x, left=self.left, right=self.right)
        if s == 0:
            return x
        out = np.empty_like(x)
        out[:s] = self.left
        out[s:] = x[:-s] if s < x.size else self.left
        return out

    def delay_matrix(self) -> sparse.csr_matrix:
        """Linear part of :meth:`delayed` (tail fill values excluded)."""
        n = self.t.size
        if self.shift is not None:
            s = self.shift
            idx = np.arange(s, n)
            return sparse.csr_matrix((np.ones(idx.size), (idx, idx - s)), shape=(n, n))
        q = (self.t - self.h - self.t[0]) / self.spacing
        j = np.floor(q).astype(int)
        w = q - j
        inside = (j >= 0) & (j < n - 1)
        rows = np.flatnonzero(inside)
        r = np.concatenate([rows, rows])
        c = np.concatenate([j[inside], j[inside] + 1])
        v = np.concatenate([1.0 - w[inside], w[inside]])
        last = np.flatnonzero((j == n - 1) & (q == j))
        r, c, v = np.concatenate([r, last]), np.concatenate([c, j[last]]), np.concatenate([v, np.ones(last.size)])
        return sparse.csr_matrix((v, (r, c)), shape=(n, n))

    def kernel_matrix(self) -> np.ndarray:
        """Dense ``W`` with ``T x = W f + (tail terms)`` for grid values ``f``."""
        n = self.t.size
        el, wl_old, wl_new = self.left_w
        er, wr_near, wr_far = self.right_w
        k = np.arange(n, dtype=float)
        col = np.empty(n)
        col[0] = wl_new
        col[1:] = wl_old * el ** (k[1:] - 1) + wl_new * el ** k[1:]
        L = toeplitz(col, np.zeros(n))
        L[0, 0] = 0.0
        L[1:, 0] = wl_old * el ** (k[1:] - 1)
        row = np.empty(n)
        row[0] = wr_near
        row[1:] = wr_near * er ** k[1:] + wr_far * er ** (k[1:] - 1)
        R = toeplitz(np.r_[row[0], np.zeros(n - 1)], row)
        R[-1, -1] = 0.0
        R[:-1, -1] = wr_far * er ** (n - 2 - k[:-1])
        return (L + R) / self.sigma

    def left_factor(self) -> sparse.csr_matrix:
        """Bidiagonal ``B`` that turns the left sweep into a two-term relation."""
        n = self.t.size
        el = self.left_w[0]
        return sparse.diags([np.ones(n), np.full(n - 1, -el)], [0, -1], format="csr")

    def banded_kernel(self) -> sparse.csr_matrix:
        """``B W`` as a sparse matrix; the right kernel is cut where its
        weights fall below ``1e-18`` of the leading one."""
        n = self.t.size
        el, wl_old, wl_new = self.left_w
        er, wr_near, wr_far = self.right_w
        left = sparse.diags([np.r_[0.0, np.full(n - 1, wl_new)], np.full(n - 1, wl_old)], [0, -1], format="csr")
        width = 1
        while width < n - 1 and er ** width > 1e-18:
            width += 1
        offs = np.arange(width + 1)
        diag_vals = []
        for k in offs:
            v = np.full(n - k, wr_near * er ** k + (wr_far * er ** (k - 1) if k else 0.0))
            # the last column only receives the far-end weight, the last row is empty
            if k:
                v[-1] = wr_far * er ** (k - 1)
            else:
                v[-1] = 0.0
            diag_vals.append(v)
        right = sparse.diags(diag_vals, offs, shape=(n, n), format="csr")
        return (left + self.left_factor() @ right) / self.sigma

    def __call__(self, x: np.ndarray) -> np.ndarray:
        f = self.g.g(self.delayed(x))
        el, wl_old, wl_new = self.left_w
        er, wr_near, wr_far = self.right_w
        L, R = _kernels.wave_sweeps(f, el, wl_old, wl_new, self.g_left / self.a,
                                    er, wr_near, wr_far, self.g_right / self.b)
        return (L + R) / self.sigma


def _make_operator(g, params: ModelParams, x: GridProfile) -> _Operator:
    return _Operator(g, params.h, params.epsilon, x.t_min, x.spacing, x.n, x.left_tail_value, x.right_tail_value)


def apply_wave_operator(x: GridProfile, g: BirthFunction, params: ModelParams,
                        check_tails: bool = True) -> GridProfile:
    """``T_eps x`` on the grid of ``x``."""
    kernel_rates(params.epsilon)
    if check_tails:
        x.check_tails()
    return x.with_values(_make_operator(g, params, x)(x.values))


def _crossing_time(t: np.ndarray, x: np.ndarray, level: float) -> float | None:
    i = first_upward_crossing(x, level)
    if i is None:
        return None
    return float(t[i] + (level - x[i]) / (x[i + 1] - x[i]) * (t[i + 1] - t[i]))


def _pin(t, x, level, left, right) -> tuple[np.ndarray, float]:
    tc = _crossing_time(t, x, level)
    if tc is None or tc == 0.0:
        return x, 0.0 if tc is None else tc
    return np.interp(t + tc, t, x, left=left, right=right), tc


def default_grid(g: BirthFunction, params: ModelParams, eq: Equilibria | None = None,
                 m: int = 20, hetero: DdeTrajectory | None = None,
                 right_floor: float = 10.0) -> tuple[float, float, float]:
    """``(t_min, t_max, spacing)`` with ``t = 0`` on the grid.

    The spacing is ``h/m`` (0.025 without delay). The left end sits at
    ``-40/lambda1``; the right end where the heteroclinic has settled to
    ``1e-6 K`` (at least ``right_floor``).
    """
    eq = eq or find_positive_fixed_point(g)
    spacing = params.h / m if params.h > 0 else 0.025
    rate = leading_rate(eq.p, params.h, params.epsilon)
    t_min = -spacing * math.ceil(40.0 / rate / spacing)
    t_max = right_floor
    if hetero is not None:
        away = np.flatnonzero(np.abs(hetero.values - eq.K) >= 1e-6 * eq.K)
        if away.size:
            t_max = max(t_max, float(hetero.t[away[-1]]) + 1.0)
    t_max = spacing * math.ceil(t_max / spacing)
    return t_min, t_max, spacing


def profile_from_trajectory(traj: DdeTrajectory, t_min: float, t_max: float, spacing: float,
                            K: float | None = None) -> GridProfile:
    """Resample a heteroclinic on a grid, extending it exponentially to the
    left (at its own tail rate) and by ``K`` to the right."""
    K = traj.K if K is None else K
    n = int(round((t_max - t_min) / spacing)) + 1
    t = t_min + spacing * np.arange(n)
    ft, fx = traj.full_t, traj.full_x
    x = np.interp(t, ft, fx)
    inside = (t >= traj.t0) & (t <= traj.t_end)
    if np.any(inside):
        x[inside] = traj(t[inside])
    left = t < ft[0]
    if np.any(left):
        rate = traj.lam if math.isfinite(traj.lam) else 1.0
        x[left] = fx[0] * np.exp(rate * (t[left] - ft[0]))
    x[t > ft[-1]] = K
    return GridProfile(t_min, spacing, x, 0.0, K)


def _diagnostics(x: GridProfile, op: _Operator, K: float, g: BirthFunction, anchor: float,
                 iterations: int, converged: bool, reference: DdeTrajectory | None) -> WaveDiagnostics:
    v = x.values
    tx = op(v)
    res = float(np.max(np.abs(v[1:-1] - tx[1:-1])))
    hump = float(v.max())
    try:
        fit = fit_log_linear(x.t, v, K)
        tail, r2 = fit.exponent, fit.r_squared
    except WindowTooShort:
        tail, r2 = math.nan, math.nan
    ref = math.nan
    if reference is not None:
        t = x.t
        keep = (t <= 0) & (t >= reference.t0)
        if np.count_nonzero(keep) > 2:
            dpsi = reference.interpolant().derivative()(t[keep])
            psi0 = float(reference(0.0))
            ref = float(trapezoid(v[keep] * dpsi, t[keep])) - 0.5 * psi0 * psi0
    return WaveDiagnostics(
        residual_sup=res,
        min_value=float(v.min()),
        sign_changes_about_K=count_sign_changes(v - K, SIGN_FLOOR * K),
        hump_max=hump,
        tail_exponent=tail,
        phase_anchor=anchor,
        iterations=iterations,
        converged=converged,
        positive=bool(v.min() > 0),
        reference_integral=ref,
        tail_r_squared=r2,
    )


def solve_profile(g: BirthFunction, params: ModelParams, init: GridProfile, omega: float | None = None,
                  max_iter: int | None = None, tol: float = 1e-10, K: float | None = None,
                  reference: DdeTrajectory | None = None, method: str = "newton",
                  check_range: bool = True) -> tuple[GridProfile, WaveDiagnostics]:
    """Solve ``x = T x`` with the upward ``K/2`` crossing fixed at ``t = 0``.

    ``method="newton"`` (default) applies damped Newton steps to the
    bordered system

        x - T x + mu e_0 = 0,   x(0) = K/2,

    in the unknowns ``(x, mu)``. The scalar ``mu`` absorbs the mismatch at
    the first grid point caused by cutting the left tail off at ``t_min``
    (the truncated problem otherwise has a free tail amplitude and a
    singular Jacobian); it converges to a value of the size of the
    truncated tail. ``method="picard"`` is the relaxation
    ``x <- (1-omega) x + omega T x`` with the crossing re-pinned after every
    update. It is kept for comparison: the zero tail is unstable under it,
    so it stalls on most non-trivial problems.

    Stops when the sup-norm update falls below ``tol``. A profile that is
    not everywhere positive is returned with ``positive = False`` rather
    than raising; failure to converge raises :class:`NoConvergence` carrying
    the last iterate and its diagnostics.
    """
    if method not in ("newton", "picard"):
        raise ValidationError(f"unknown method {method!r}")
    if omega is None:
        omega = 1.0 if method == "newton" else 0.5
    if max_iter is None:
        max_iter = 50 if method == "newton" else 20000
    if not 0 < omega <= 1:
        raise ValidationError(f"damping must lie in (0, 1], got {omega}")
    if K is None:
        K = find_positive_fixed_point(g).K
    eps = params.epsilon
    kernel_rates(eps)
    if check_range and not eps < epsilon_max(g.p):
        raise EpsilonOutOfRange(f"epsilon = {eps} >= {epsilon_max(g.p)}")
    init.check_tails()
    op = _make_operator(g, params, init)
    t = init.t
    x = init.values.copy()
    lt, rt = init.left_tail_value, init.right_tail_value
    anchor = _crossing_time(t, x, 0.5 * K)
    anchor = 0.0 if anchor is None else anchor
    # pin at the grid point nearest t = 0 when the profile crosses K/2
    i0 = min(max(int(round(-init.t_min / init.spacing)), 0), x.size - 1)
    pinned = _crossing_time(t, x, 0.5 * K) is not None
    if method == "newton":
        # B (x - T x) = B x - (B W) G(D x) - tail terms, with B W banded
        B = op.left_factor()
        BW = op.banded_kernel()
        D = op.delay_matrix()
    converged = False
    step = np.zeros_like(x)
    mu = 0.0
    it = 0
    for it in range(max_iter + 1):
        r = x - op(x)
        if method == "picard":
            step = -omega * r
        else:
            # scale unknowns and equations by |x| so the exponentially small
            # left tail is resolved in relative rather than absolute terms
            n = x.size
            sc = np.maximum(np.abs(x), 1e-300)
            J = B - BW @ sparse.diags(g.dg(op.delayed(x))) @ D
            J = sparse.diags(1.0 / sc) @ J @ sparse.diags(sc)
            border = sparse.csr_matrix(([1.0, -op.left_w[0] * sc[0] / sc[1]], ([0, 1], [0, 0])), shape=(n, 1))
            if pinned:
                last = sparse.csr_matrix(([sc[i0]], ([0], [i0])), shape=(1, n + 1))
            else:
                last = sparse.csr_matrix(([1.0], ([0], [n])), shape=(1, n + 1))
            A = sparse.vstack([sparse.hstack([J, border]), last], format="csc")
            res = r.copy()
            res[0] += mu
            rhs = np.empty(n + 1)
            rhs[:n] = -(B @ res) / sc
            rhs[n] = 0.5 * K - x[i0] if pinned else 0.0
            sol = omega * spsolve(A, rhs)
            step = sol[:n] * sc
            mu += sol[n] * sc[0]
        if float(np.max(np.abs(step))) < tol:
            converged = True
            break
        if it == max_iter:
            break
        x = x + step
        if method == "picard":
            x, anchor = _pin(t, x, 0.5 * K, lt, rt)
    if converged and x.min() < 0:
        # rounding can leave values of order 1e-40 slightly negative deep in
        # the left tail; T maps nonnegative profiles to positive ones, so one
        # application to the positive part removes them when it changes the
        # profile by no more than the tolerance allows
        polished = op(np.maximum(x, 0.0))
        if float(np.max(np.abs(polished - x))) <= 10 * tol:
            x = polished
    if method == "newton":
        found = _crossing_time(t, x, 0.5 * K)
        anchor = 0.0 if found is None else found
    prof = init.with_values(x)
    diag = _diagnostics(prof, op, K, g, anchor, it, converged, reference)
    if not converged:
        raise NoConvergence(f"no convergence in {max_iter} iterations (last update {np.max(np.abs(step)):.3e})",
                            profile=(prof, diag))
    return prof, diag


@dataclass
class StructureReport:
    tail_exponent: float
    lambda1: float
    tail_ok: Optional[bool]
    left_derivative_positive: Optional[bool]
    oscillation_criterion: bool
    right_quarter_sign_changes: int
    oscillation_ok: Optional[bool]
    hump_max: float
    g_max: float
    hump_ok: bool
    positive: bool

    @property
    def ok(self) -> bool:
        return all(v is not False for v in (self.tail_ok, self.left_derivative_positive,
                                            self.oscillation_ok, self.hump_ok, self.positive))

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return d


def verify_theorem1_structure(profile: GridProfile, diagnostics: WaveDiagnostics, g: BirthFunction,
                              params: ModelParams, eq: Equilibria | None = None,
                              hump_tol: float = 1e-6) -> StructureReport:
    """Tail rate against ``lambda1(eps)``, monotone rise on the far left,
    persistent oscillation about ``K`` in the last quarter of the window
    when ``Gamma h e^(h+1) < -1``, and humps bounded by ``max g``.
    """
    eq = eq or find_positive_fixed_point(g)
    K = eq.K
    v, t = profile.values, profile.t
    try:
        lam1 = solve_perturbed(eq.p, params.h, params.epsilon).lambda1
    except EpsilonOutOfRange:
        lam1 = leading_rate(eq.p, params.h, params.epsilon)
    has_tail = bool(v[0] < 0.01 * K)
    tail_ok = None
    left_pos = None
    if has_tail and math.isfinite(diagnostics.tail_exponent):
        tail_ok = bool(abs(diagnostics.tail_exponent - lam1) <= 0.01 * lam1)
        # rise on the resolved part of the tail, 1e-10 K < x < 0.01 K
        above = np.flatnonzero(v >= 0.01 * K)
        stop = above[0] if above.size else v.size
        w = v[:stop]
        w = w[w > 1e-10 * K]
        left_pos = bool(np.all(np.diff(w) > 0)) if w.size > 1 else None
    crit = check_oscillation_criterion(eq, params.h)
    q = v[3 * v.size // 4:]
    sc = count_sign_changes(q - K, SIGN_FLOOR * K)
    osc_ok = bool(sc >= 2) if (crit and has_tail) else None
    gmax = g.max_value()
    hump = float(v.max())
    return StructureReport(
        tail_exponent=diagnostics.tail_exponent,
        lambda1=lam1,
        tail_ok=tail_ok,
        left_derivative_positive=left_pos,
        oscillation_criterion=bool(crit),
        right_quarter_sign_changes=sc,
        oscillation_ok=osc_ok,
        hump_max=hump,
        g_max=gmax,
        hump_ok=bool(hump <= gmax + hump_tol),
        positive=bool(v.min() > 0) if has_tail else bool(v.min() >= 0),
    )


@dataclass
class ContinuationReport:
    epsilons: list
    distances_to_base: list
    consecutive_distances: list
    profiles: list = field(repr=False, default_factory=list)
    diagnostics: list = field(repr=False, default_factory=list)

    @property
    def monotone(self) -> bool:
        d = self.distances_to_base
        return all(b > a for a, b in zip(d, d[1:]))

    def to_dict(self) -> dict:
        return {"epsilons": self.epsilons, "distances_to_base": self.distances_to_base,
                "consecutive_distances": self.consecutive_distances, "monotone": self.monotone,
                "diagnostics": [d.to_dict() for d in self.diagnostics]}


def epsilon_continuation(g: BirthFunction, params_base: ModelParams, epsilons: Sequence[float],
                         m: int = 20, omega: float | None = None, tol: float = 1e-10,
                         max_iter: int | None = None) -> ContinuationReport:
    """Profiles for increasing ``epsilon``, each started from the previous
    one (the first from the delay-ODE heteroclinic). Distances are sup-norms
    after pinning the ``K/2`` crossing at ``t = 0``.
    """
    eps = [float(e) for e in epsilons]
    if not eps:
        raise ValidationError("empty epsilon list")
    if any(b <= a for a, b in zip(eps, eps[1:])):
        raise ValidationError("epsilons must be strictly increasing")
    emax = epsilon_max(g.p)
    bad = [e for e in eps if not 0 < e < emax]
    if bad:
        raise EpsilonOutOfRange(f"epsilons {bad} outside (0, {emax})")
    eq = find_positive_fixed_point(g)
    base = heteroclinic(g, ModelParams(params_base.h, params_base.d, 0.0), eq=eq)
    t_min, t_max, spacing = default_grid(g, replace(params_base, epsilon=eps[0]), eq, m, base)
    cur = profile_from_trajectory(base, t_min, t_max, spacing, eq.K)
    psi0 = cur.values.copy()
    dist, cons, profs, diags = [], [], [], []
    prev = None
    for e in eps:
        prof, diag = solve_profile(g, replace(params_base, epsilon=e), cur, omega=omega, tol=tol,
                                   max_iter=max_iter, K=eq.K, reference=base)
        dist.append(float(np.max(np.abs(prof.values - psi0))))
        if prev is not None:
            cons.append(float(np.max(np.abs(prof.values - prev))))
        prev = prof.values
        profs.append(prof)
        diags.append(diag)
        cur = prof
    return ContinuationReport(eps, dist, cons, profs, diags)
