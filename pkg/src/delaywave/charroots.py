"""Real roots of the characteristic equations at the zero equilibrium,
root counting in rectangles, and the hyperbolicity scan at ``K``.

At zero the exponential solutions ``exp(z t)`` of the travelling-wave
equation satisfy ``eps^2 z^2 - z - 1 + p exp(-z h) = 0``; ``eps = 0`` gives
the delay-ODE equation ``z = -1 + p exp(-z h)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (
    BracketFailure,
    ContourThroughRoot,
    EpsilonOutOfRange,
    HypothesisNotMet,
    ValidationError,
)

__all__ = [
    "RealRootResult",
    "PerturbedRoots",
    "StripCount",
    "LimitTable",
    "HyperbolicityReport",
    "char0",
    "char_eps",
    "bisect",
    "solve_lambda",
    "epsilon_max",
    "solve_perturbed",
    "leading_rate",
    "multiplicity_threshold",
    "limit_consistency",
    "check_K_hyperbolicity",
    "count_roots_in_strip",
    "winding_by_phase",
]

MAX_BISECT = 100


def char0(z, p: float, h: float):
    """``z + 1 - p exp(-z h)`` (increasing in real ``z``)."""
    return z + 1.0 - p * np.exp(-z * h)


def char_eps(z, p: float, h: float, eps: float):
    """``eps^2 z^2 - z - 1 + p exp(-z h)``; also valid for complex ``z``."""
    return eps * eps * z * z - z - 1.0 + p * np.exp(-z * h)


def _char_eps_prime(z, p, h, eps):
    return 2.0 * eps * eps * z - 1.0 - p * h * np.exp(-z * h)


def bisect(f: Callable[[float], float], lo: float, hi: float,
           maxiter: int = MAX_BISECT) -> tuple[float, int]:
    """Bisection on a sign-changing bracket. Returns ``(root, iterations)``.

    Stops after ``maxiter`` halvings or when the midpoint is no longer
    representable strictly inside the bracket.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo, 0
    if fhi == 0.0:
        return hi, 0
    if (flo > 0) == (fhi > 0):
        raise BracketFailure(f"no sign change on [{lo!r}, {hi!r}]: f(lo)={flo!r}, f(hi)={fhi!r}")
    it = 0
    for it in range(1, maxiter + 1):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid, it
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return (lo if abs(flo) <= abs(fhi) else hi), it


@dataclass(frozen=True)
class RealRootResult:
    value: float
    residual: float
    bracket: tuple[float, float]
    iterations: int

    def to_dict(self) -> dict:
        return {"value": self.value, "residual": self.residual,
                "bracket": list(self.bracket), "iterations": self.iterations}


def solve_lambda(p: float, h: float) -> RealRootResult:
    """Unique positive root of ``z = -1 + p exp(-z h)``, bracketed by ``(0, p-1]``."""
    if not p > 1:
        raise BracketFailure(f"p = {p} <= 1: no positive characteristic root")
    if h < 0:
        raise ValidationError(f"h must be >= 0, got {h}")
    f = lambda z: float(char0(z, p, h))
    bracket = (0.0, p - 1.0)
    z, it = bisect(f, *bracket)
    return RealRootResult(z, f(z), bracket, it)


def epsilon_max(p: float) -> float:
    """Upper end ``1/(2 sqrt(p-1))`` of the range where the two real roots are bracketed."""
    return 1.0 / (2.0 * math.sqrt(p - 1.0))


@dataclass(frozen=True)
class PerturbedRoots:
    lambda1: float
    lambda_inf: float
    epsilon: float
    residuals: tuple[float, float]
    lam: float
    p: float
    iterations: tuple[int, int] = (0, 0)

    @property
    def bounds_ok(self) -> bool:
        """The full ordering ``0 < lam < lambda1 < 2(p-1) < eps^-2 - 2(p-1) < lambda_inf < eps^-2 + 1``."""
        e2 = self.epsilon ** -2
        two = 2.0 * (self.p - 1.0)
        return (0.0 < self.lam < self.lambda1 < two < e2 - two < self.lambda_inf < e2 + 1.0)

    def to_dict(self) -> dict:
        return {"lambda1": self.lambda1, "lambda_inf": self.lambda_inf, "epsilon": self.epsilon,
                "residuals": list(self.residuals), "lambda": self.lam, "bounds_ok": self.bounds_ok}


def solve_perturbed(p: float, h: float, epsilon: float,
                    lam: RealRootResult | None = None) -> PerturbedRoots:
    """Both positive real roots of ``eps^2 z^2 - z - 1 + p exp(-z h) = 0``."""
    if not p > 1:
        raise BracketFailure(f"p = {p} <= 1")
    emax = epsilon_max(p)
    if not 0.0 < epsilon < emax:
        raise EpsilonOutOfRange(f"epsilon = {epsilon} outside (0, {emax})")
    if epsilon < 1e-150:
        raise EpsilonOutOfRange(f"epsilon = {epsilon} too small: epsilon^-2 is not representable")
    lam = lam or solve_lambda(p, h)
    f = lambda z: float(char_eps(z, p, h, epsilon))
    two = 2.0 * (p - 1.0)
    e2 = epsilon ** -2
    l1, it1 = bisect(f, lam.value, two)
    linf, it2 = bisect(f, e2 - two, e2 + 1.0)
    return PerturbedRoots(l1, linf, epsilon, (f(l1), f(linf)), lam.value, p, (it1, it2))


def leading_rate(p: float, h: float, epsilon: float) -> float:
    """Smallest positive real root of the perturbed equation when it exists.

    Inside the bracketed range this is ``lambda1``; beyond it the first sign
    change of the characteristic function is searched, and if there is none
    (speed below the critical one) the location of its minimum, where the
    two real roots have merged, is returned as the decay-rate estimate.
    """
    if epsilon == 0.0:
        return solve_lambda(p, h).value
    if epsilon < epsilon_max(p):
        return solve_perturbed(p, h, epsilon).lambda1
    f = lambda z: float(char_eps(z, p, h, epsilon))
    # the minimiser solves 2 eps^2 z = 1 + h p exp(-z h), so it lies in
    # [1/(2 eps^2), (1 + h p)/(2 eps^2)] and every positive root precedes it
    zs = np.linspace(0.0, (1.0 + h * p) / (2.0 * epsilon ** 2), 8001)
    vals = char_eps(zs, p, h, epsilon)
    neg = np.flatnonzero(vals < 0)
    if neg.size:
        return bisect(f, zs[neg[0] - 1], zs[neg[0]])[0]
    res = minimize_scalar(f, bounds=(zs[0], zs[-1]), method="bounded", options={"xatol": 1e-12})
    return float(res.x)


def multiplicity_threshold(p: float, h: float) -> dict:
    """``a(p, h) = 1/sqrt(2 zeta0)``, with ``zeta0`` the positive root of
    ``p exp(-z h) = (2 + z)/(2 + h z)``; below it all roots are simple.

    The left side times ``2 + h z`` is decreasing and the right side is
    increasing, so the root is unique and lies in ``(0, 2(p-1)]``.
    """
    f = lambda z: p * math.exp(-z * h) * (2.0 + h * z) - (2.0 + z)
    zeta0, _ = bisect(f, 0.0, 2.0 * (p - 1.0))
    return {"zeta0": zeta0, "a": 1.0 / math.sqrt(2.0 * zeta0)}


@dataclass
class LimitTable:
    lam: float
    rows: list = field(default_factory=list)  # (epsilon, lambda1, gap)

    @property
    def gaps_positive(self) -> bool:
        return all(r[2] > 0 for r in self.rows)

    @property
    def monotone(self) -> bool:
        """Gaps shrink strictly as epsilon decreases."""
        rs = sorted(self.rows, key=lambda r: -r[0])
        return all(b[2] < a[2] for a, b in zip(rs, rs[1:]))

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "rows": [list(r) for r in self.rows],
                "gaps_positive": self.gaps_positive, "monotone": self.monotone}


def limit_consistency(p: float, h: float, epsilons: Sequence[float]) -> LimitTable:
    lam = solve_lambda(p, h)
    table = LimitTable(lam.value)
    for eps in epsilons:
        r = solve_perturbed(p, h, eps, lam)
        table.rows.append((float(eps), r.lambda1, r.lambda1 - lam.value))
    return table


@dataclass
class HyperbolicityReport:
    Gamma: float
    h: float
    epsilon: float
    z_max: float
    real_axis_max: float
    real_axis_min_abs: float
    no_negative_real_roots: bool
    im_bound: float
    imag_axis_min_abs: float
    no_imaginary_roots: bool

    @property
    def ok(self) -> bool:
        return self.no_negative_real_roots and self.no_imaginary_roots

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return d


def check_K_hyperbolicity(Gamma: float, h: float, epsilon: float = 0.0,
                          im_bound: float | None = None, resolution: float = 1e-3,
                          floor: float = 1e-8) -> HyperbolicityReport:
    """Scan ``eps^2 z^2 - z - 1 + Gamma exp(-z h)`` on the non-positive real
    axis and on a segment of the imaginary axis.
    """
    if not Gamma < 0:
        raise HypothesisNotMet(f"Gamma = {Gamma} must be negative")
    osc = abs(Gamma) * h * math.exp(h + 1.0)
    if not osc > 1.0:
        raise HypothesisNotMet(f"|Gamma| h e^(h+1) = {osc} <= 1")
    if im_bound is None:
        im_bound = 2.0 * abs(Gamma)
    delta = lambda z: char_eps(z, Gamma, h, epsilon)

    # Far enough left the exponential term dominates every polynomial term.
    z_max = 10.0
    while True:
        zz = -z_max
        if abs(Gamma) * math.exp(z_max * h) > 4.0 * (epsilon ** 2 * zz * zz + z_max + 1.0):
            break
        z_max *= 1.5
    z = np.linspace(-z_max, 0.0, int(math.ceil(z_max / resolution)) + 1)
    vals = delta(z)
    real_max = float(vals.max())
    # refine every interior local maximum
    loc = np.flatnonzero((vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:])) + 1
    for i in loc:
        res = minimize_scalar(lambda s: -float(delta(s)), bounds=(z[i - 1], z[i + 1]),
                              method="bounded", options={"xatol": 1e-12})
        real_max = max(real_max, -float(res.fun))
    real_min_abs = float(np.abs(vals).min())
    no_neg = real_max < 0 and real_min_abs > floor

    b = np.linspace(-im_bound, im_bound, int(math.ceil(2 * im_bound / resolution)) + 1)
    mags = np.abs(delta(1j * b))
    imag_min = float(mags.min())
    j = int(np.argmin(mags))
    lo, hi = b[max(j - 1, 0)], b[min(j + 1, len(b) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda s: float(abs(delta(1j * s))), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12})
        imag_min = min(imag_min, float(res.fun))
    return HyperbolicityReport(Gamma, h, epsilon, z_max, real_max, real_min_abs, bool(no_neg),
                               float(im_bound), imag_min, bool(imag_min > floor))


@dataclass(frozen=True)
class StripCount:
    strip: tuple[float, float, float]
    count: int
    raw: float
    points_per_side: int
    phase_count: int

    def to_dict(self) -> dict:
        return {"strip": list(self.strip), "count": self.count, "raw": self.raw,
                "points_per_side": self.points_per_side, "phase_count": self.phase_count}


def _rectangle(xlo, xhi, ib, n):
    """Counter-clockwise boundary split into its four sides, ``n`` intervals each."""
    s = np.linspace(0.0, 1.0, n + 1)
    return [
        xlo + (xhi - xlo) * s - 1j * ib,
        xhi + 1j * (-ib + 2 * ib * s),
        xhi + (xlo - xhi) * s + 1j * ib,
        xlo + 1j * (ib - 2 * ib * s),
    ]


def _trapezoid_winding(f, fp, sides) -> float:
    total = 0.0 + 0.0j
    for zs in sides:
        w = fp(zs) / f(zs)
        dz = np.diff(zs)
        total += np.sum(0.5 * (w[1:] + w[:-1]) * dz)
    return (total / (2j * math.pi)).real


def winding_by_phase(f, sides) -> int:
    """Winding number from accumulated phase increments along the sampled
    boundary; exact as long as consecutive samples differ by less than pi
    in argument."""
    zs = np.concatenate([s[:-1] for s in sides] + [sides[0][:1]])
    ang = np.angle(f(zs))
    d = np.diff(ang)
    d = (d + math.pi) % (2 * math.pi) - math.pi
    return int(round(d.sum() / (2 * math.pi)))


def count_roots_in_strip(p: float, h: float, epsilon: float,
                         strip: tuple[float, float, float], snap_tol: float = 1e-6,
                         n_start: int = 512, n_max: int = 2 ** 16,
                         retries: int = 5, perturb: float = 1e-3) -> StripCount:
    """Number of zeros of ``eps^2 z^2 - z - 1 + p exp(-z h)`` inside the
    rectangle ``[xi_lo, xi_hi] x [-im_bound, im_bound]``.

    The logarithmic derivative is integrated around the boundary with the
    trapezoidal rule; the point count per side is doubled until the
    Richardson-extrapolated value lies within ``snap_tol`` of an integer.
    """
    xlo, xhi, ib = map(float, strip)
    if not (xhi > xlo and ib > 0):
        return StripCount((xlo, xhi, ib), 0, 0.0, 0, 0)
    f = lambda z: char_eps(z, p, h, epsilon)
    fp = lambda z: _char_eps_prime(z, p, h, epsilon)
    scale = max(1.0, p, epsilon ** 2 * max(abs(xlo), abs(xhi), ib) ** 2)
    for attempt in range(retries + 1):
        probe = np.concatenate(_rectangle(xlo, xhi, ib, 4096))
        if np.abs(f(probe)).min() > 1e-9 * scale:
            break
        xlo, xhi, ib = xlo - perturb, xhi + perturb, ib + perturb
    else:
        raise ContourThroughRoot(f"rectangle boundary passes through a root after {retries} perturbations")

    n = n_start
    prev = _trapezoid_winding(f, fp, _rectangle(xlo, xhi, ib, n))
    while True:
        n *= 2
        cur = _trapezoid_winding(f, fp, _rectangle(xlo, xhi, ib, n))
        extrap = cur + (cur - prev) / 3.0
        k = round(extrap)
        if abs(extrap - k) < snap_tol and abs(cur - k) < 1e-2:
            break
        if n >= n_max:
            raise ContourThroughRoot(
                f"winding number {extrap} not within {snap_tol} of an integer at {n} points per side")
        prev = cur
    phase = winding_by_phase(f, _rectangle(xlo, xhi, ib, n))
    return StripCount((xlo, xhi, ib), int(k), float(extrap), n, phase)
