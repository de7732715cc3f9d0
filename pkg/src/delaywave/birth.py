"""Birth functions, equilibria and the scalar stability/oscillation criteria."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (
    CriticalPoint,
    MultiplePositiveFixedPoints,
    NoPositiveFixedPoint,
    ValidationError,
)

__all__ = [
    "BirthFunction",
    "Equilibria",
    "ModelParams",
    "GscResult",
    "CorollaryReport",
    "find_positive_fixed_point",
    "schwarzian",
    "check_gsc",
    "check_oscillation_criterion",
    "oscillation_lhs",
    "check_corollary_conditions",
    "rescale_nicholson",
]

KIND_CODES = {"nicholson": 0, "mackey_glass": 1}

ArrayFn = Callable[[np.ndarray], np.ndarray]


def _fd_step(u):
    return 1e-4 * np.maximum(1.0, np.abs(u))


@dataclass(frozen=True)
class BirthFunction:
    """Reproduction nonlinearity ``g`` with its first three derivatives.

    Use the :meth:`nicholson`, :meth:`mackey_glass` and :meth:`custom`
    constructors. All evaluation methods accept scalars or arrays.
    """

    kind: str
    p: float
    n: float = 1.0
    _g: Optional[ArrayFn] = field(default=None, repr=False, compare=False)
    _dg: Optional[ArrayFn] = field(default=None, repr=False, compare=False)
    _d2g: Optional[ArrayFn] = field(default=None, repr=False, compare=False)
    _d3g: Optional[ArrayFn] = field(default=None, repr=False, compare=False)
    name: str = ""

    @classmethod
    def nicholson(cls, p: float) -> "BirthFunction":
        """``g(u) = p u exp(-u)`` (blowflies model in rescaled variables)."""
        if not p > 0:
            raise ValidationError(f"nicholson requires p > 0, got {p}")
        return cls("nicholson", float(p))

    @classmethod
    def mackey_glass(cls, p: float, n: float) -> "BirthFunction":
        """``g(u) = p u / (1 + u**n)``."""
        if not p > 0:
            raise ValidationError(f"mackey_glass requires p > 0, got {p}")
        if not n >= 1:
            raise ValidationError(f"mackey_glass requires n >= 1, got {n}")
        return cls("mackey_glass", float(p), float(n))

    @classmethod
    def custom(cls, g: ArrayFn, dg: ArrayFn | None = None, d2g: ArrayFn | None = None,
               d3g: ArrayFn | None = None, name: str = "custom") -> "BirthFunction":
        """Wrap user callables. Missing derivatives fall back to central
        differences with step ``1e-4 * max(1, |u|)``; a differenced third
        derivative is only good to roughly 1e-4 relative.
        """
        g0 = float(np.asarray(g(np.array([0.0])))[0])
        if g0 != 0.0:
            raise ValidationError(f"custom birth function must satisfy g(0) = 0, got {g0}")
        bf = cls("custom", 0.0, 1.0, g, dg, d2g, d3g, name)
        object.__setattr__(bf, "p", float(bf.dg(0.0)))
        return bf

    @classmethod
    def from_dict(cls, spec: dict) -> "BirthFunction":
        spec = dict(spec)
        kind = spec.pop("kind", None)
        if kind == "nicholson":
            allowed = {"p"}
        elif kind == "mackey_glass":
            allowed = {"p", "n"}
        else:
            raise ValidationError(f"unknown birth function kind {kind!r}")
        extra = set(spec) - allowed
        if extra:
            raise ValidationError(f"unknown keys in birth spec: {sorted(extra)}")
        missing = allowed - set(spec)
        if missing:
            raise ValidationError(f"missing keys in birth spec: {sorted(missing)}")
        if kind == "nicholson":
            return cls.nicholson(float(spec["p"]))
        return cls.mackey_glass(float(spec["p"]), float(spec["n"]))

    def to_dict(self) -> dict:
        if self.kind == "nicholson":
            return {"kind": "nicholson", "p": self.p}
        if self.kind == "mackey_glass":
            return {"kind": "mackey_glass", "p": self.p, "n": self.n}
        return {"kind": "custom", "name": self.name, "p": self.p}

    @property
    def kind_code(self) -> int:
        """Integer tag used by the compiled kernels (-1 for custom)."""
        return KIND_CODES.get(self.kind, -1)

    # evaluation -------------------------------------------------------
    def __call__(self, u):
        return self.g(u)

    def g(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "nicholson":
            return self.p * u * np.exp(-u)
        if self.kind == "mackey_glass":
            return self.p * u / (1.0 + u ** self.n)
        return np.asarray(self._g(u), dtype=float)

    def dg(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "nicholson":
            return self.p * np.exp(-u) * (1.0 - u)
        if self.kind == "mackey_glass":
            w = u ** self.n
            return self.p * (1.0 + (1.0 - self.n) * w) / (1.0 + w) ** 2
        if self._dg is not None:
            return np.asarray(self._dg(u), dtype=float)
        s = _fd_step(u)
        return (self.g(u + s) - self.g(u - s)) / (2 * s)

    def d2g(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "nicholson":
            return self.p * np.exp(-u) * (u - 2.0)
        if self.kind == "mackey_glass":
            n, w = self.n, u ** self.n
            # n p u^(n-1) (n w - n - w - 1) / (1 + w)^3, written without w/u
            return n * self.p * u ** (n - 1) * (n * w - n - w - 1.0) / (1.0 + w) ** 3
        if self._d2g is not None:
            return np.asarray(self._d2g(u), dtype=float)
        s = _fd_step(u)
        return (self.g(u + s) - 2 * self.g(u) + self.g(u - s)) / s ** 2

    def d3g(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "nicholson":
            return self.p * np.exp(-u) * (3.0 - u)
        if self.kind == "mackey_glass":
            n, w = self.n, u ** self.n
            poly = n * n * w * w - 4 * n * n * w + n * n - (w + 1.0) ** 2
            return -n * self.p * u ** (n - 2) * poly / (1.0 + w) ** 4
        if self._d3g is not None:
            return np.asarray(self._d3g(u), dtype=float)
        s = _fd_step(u)
        if self._d2g is not None:
            return (self.d2g(u + s) - self.d2g(u - s)) / (2 * s)
        return (self.g(u + 2 * s) - 2 * self.g(u + s) + 2 * self.g(u - s) - self.g(u - 2 * s)) / (2 * s ** 3)

    def max_value(self, u_max: float | None = None) -> float:
        """Supremum of ``g`` over ``u >= 0`` (over ``[0, u_max]`` for custom kinds)."""
        if self.kind == "nicholson":
            return self.p / math.e
        if self.kind == "mackey_glass":
            if self.n == 1.0:
                return self.p  # increasing, approached as u -> inf
            xm = (1.0 / (self.n - 1.0)) ** (1.0 / self.n)
            return float(self.g(xm))
        u_max = u_max or 50.0 * max(1.0, self.p)
        u = np.linspace(0.0, u_max, 20001)
        vals = self.g(u)
        i = int(np.argmax(vals))
        lo, hi = u[max(i - 1, 0)], u[min(i + 1, len(u) - 1)]
        if hi > lo:
            res = minimize_scalar(lambda x: -float(self.g(x)), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12})
            return max(float(vals[i]), -float(res.fun))
        return float(vals[i])


@dataclass(frozen=True)
class Equilibria:
    K: float
    p: float
    Gamma: float

    @property
    def hypothesis_h(self) -> bool:
        return self.p > 1.0

    def to_dict(self) -> dict:
        return {"K": self.K, "p": self.p, "Gamma": self.Gamma}


@dataclass(frozen=True)
class ModelParams:
    """Delay ``h``, diffusion ``d`` and inverse wave speed ``epsilon``.

    ``epsilon = 0`` is the delay-ODE limit (infinite speed).
    """

    h: float
    d: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not (self.h >= 0 and math.isfinite(self.h)):
            raise ValidationError(f"delay h must be >= 0, got {self.h}")
        if not (self.d >= 0 and math.isfinite(self.d)):
            raise ValidationError(f"diffusion d must be >= 0, got {self.d}")
        if not self.epsilon >= 0:
            raise ValidationError(f"epsilon must be >= 0, got {self.epsilon}")

    @property
    def speed(self) -> float:
        return math.inf if self.epsilon == 0 else 1.0 / self.epsilon


def find_positive_fixed_point(g: BirthFunction, u_max: float | None = None,
                              n_scan: int = 4000) -> Equilibria:
    """Locate the unique positive fixed point ``K`` of ``g``.

    A logarithmic scan of ``g(u) - u`` on ``(1e-8, u_max]`` brackets the
    root, which is then refined by bisection. Exactly one sign change is
    required.
    """
    p = float(g.dg(0.0))
    if u_max is None:
        u_max = 50.0 * max(1.0, p)
    u = np.geomspace(1e-8, u_max, n_scan)
    diff = g.g(u) - u
    s = np.sign(diff)
    nz = np.flatnonzero(s != 0)
    exact_roots = np.flatnonzero(s == 0)
    changes = [(nz[k], nz[k + 1]) for k in range(len(nz) - 1) if s[nz[k]] != s[nz[k + 1]]]
    n_roots = len(changes) + len(exact_roots)
    if n_roots == 0:
        raise NoPositiveFixedPoint(f"g(u) - u has no sign change on (1e-8, {u_max}]; p = g'(0) = {p}")
    if n_roots > 1:
        raise MultiplePositiveFixedPoints(
            f"g(u) - u changes sign {n_roots} times on (1e-8, {u_max}]")
    if exact_roots.size:
        K = float(u[exact_roots[0]])
    else:
        i, j = changes[0]
        lo, hi = float(u[i]), float(u[j])
        flo = float(diff[i])
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi or hi - lo <= 1e-14 * max(1.0, lo):
                break
            fm = float(g.g(mid)) - mid
            if fm == 0.0:
                lo = hi = mid
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        # pick the endpoint with the smaller residual
        K = min((lo, hi), key=lambda x: abs(float(g.g(x)) - x))
    return Equilibria(K=K, p=p, Gamma=float(g.dg(K)))


def schwarzian(g: BirthFunction, u: float, tol: float = 1e-12) -> float:
    """Schwarzian derivative ``g'''/g' - 1.5 (g''/g')**2`` at ``u``."""
    d1 = float(g.dg(u))
    if abs(d1) < tol * max(1.0, abs(g.p)):
        raise CriticalPoint(f"g'({u}) = {d1}: Schwarzian undefined at a critical point")
    r2 = float(g.d2g(u)) / d1
    return float(g.d3g(u)) / d1 - 1.5 * r2 * r2


def _gamma_of(eq) -> float:
    return float(eq.Gamma if isinstance(eq, Equilibria) else eq)


@dataclass(frozen=True)
class GscResult:
    """Outcome of ``exp(-h) > -Gamma * ln((Gamma^2 - Gamma)/(Gamma^2 + 1))``.

    ``vacuous`` marks ``Gamma`` in ``[0, 1)`` where the logarithm argument
    is non-positive; ``holds`` is then reported as True.
    """

    holds: bool
    vacuous: bool
    lhs: float
    rhs: float
    Gamma: float
    h: float

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        return {"holds": self.holds, "vacuous": self.vacuous, "lhs": self.lhs,
                "rhs": self.rhs, "Gamma": self.Gamma, "h": self.h}


def gsc_rhs(Gamma: float) -> float:
    arg = (Gamma * Gamma - Gamma) / (Gamma * Gamma + 1.0)
    if arg <= 0.0:
        return math.inf if Gamma >= 1.0 else math.nan
    return -Gamma * math.log(arg)


def check_gsc(eq, h: float) -> GscResult:
    Gamma = _gamma_of(eq)
    lhs = math.exp(-h)
    if 0.0 <= Gamma < 1.0:
        return GscResult(True, True, lhs, math.nan, Gamma, h)
    rhs = gsc_rhs(Gamma)
    return GscResult(bool(lhs > rhs), False, lhs, rhs, Gamma, h)


def oscillation_lhs(Gamma: float, h: float) -> float:
    return Gamma * h * math.exp(h + 1.0)


def check_oscillation_criterion(eq, h: float) -> bool:
    """True iff ``Gamma * h * e^(h+1) < -1`` (strict)."""
    return oscillation_lhs(_gamma_of(eq), h) < -1.0


@dataclass
class CorollaryReport:
    critical_points: int
    x_M: float
    unique_maximum: bool
    schwarzian_max: float
    schwarzian_negative: bool
    gsc: GscResult
    u_max: float

    @property
    def ok(self) -> bool:
        return self.unique_maximum and self.schwarzian_negative and self.gsc.holds

    def to_dict(self) -> dict:
        return {
            "critical_points": self.critical_points,
            "x_M": self.x_M,
            "unique_maximum": self.unique_maximum,
            "schwarzian_max": self.schwarzian_max,
            "schwarzian_negative": self.schwarzian_negative,
            "gsc": self.gsc.to_dict(),
            "u_max": self.u_max,
            "ok": self.ok,
        }


def check_corollary_conditions(g: BirthFunction, eq: Equilibria, h: float,
                               u_max: float, n_samples: int = 4000) -> CorollaryReport:
    """Sampled check of the global-attractivity hypotheses: a single
    interior maximum of ``g``, negative Schwarzian away from it, and the
    delay condition on ``Gamma``.
    """
    if not u_max > eq.K:
        raise ValidationError(f"u_max = {u_max} must exceed K = {eq.K}")
    u = np.union1d(np.geomspace(1e-6, u_max, n_samples), np.linspace(u_max / n_samples, u_max, n_samples))
    d1 = g.dg(u)
    s = np.sign(d1)
    nz = np.flatnonzero(s != 0)
    idx = [k for k in range(len(nz) - 1) if s[nz[k]] != s[nz[k + 1]]]
    # exact zeros of g' between opposite-sign neighbours are already counted
    # as a sign change; zeros between same-sign neighbours are touch points
    touch = sum(1 for k in range(len(nz) - 1)
                if nz[k + 1] > nz[k] + 1 and s[nz[k]] == s[nz[k + 1]])
    n_crit = len(idx) + touch
    unique_max = False
    x_M = math.nan
    if len(idx) == 1 and n_crit == 1 and s[nz[idx[0]]] > 0:
        lo, hi = float(u[nz[idx[0]]]), float(u[nz[idx[0] + 1]])
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if float(g.dg(mid)) > 0:
                lo = mid
            else:
                hi = mid
        x_M = 0.5 * (lo + hi)
        unique_max = True

    keep = d1 != 0.0
    if math.isfinite(x_M):
        keep &= np.abs(u - x_M) > 1e-3 * max(1.0, x_M)
    with np.errstate(all="ignore"):
        r2 = g.d2g(u[keep]) / d1[keep]
        sg = g.d3g(u[keep]) / d1[keep] - 1.5 * r2 * r2
    sg = sg[np.isfinite(sg)]
    sg_max = float(sg.max()) if sg.size else math.nan
    return CorollaryReport(
        critical_points=n_crit,
        x_M=x_M,
        unique_maximum=unique_max,
        schwarzian_max=sg_max,
        schwarzian_negative=bool(sg.size and sg_max < 0),
        gsc=check_gsc(eq, h),
        u_max=float(u_max),
    )


def rescale_nicholson(p: float, delta: float, b: float, h: float, d: float = 1.0) -> dict:
    """Map raw blowflies parameters to the rescaled form with unit death
    rate and unit crowding coefficient.

    Time is scaled by ``delta`` and density by ``b``, so the rescaled
    equation has birth rate ``p/delta``, delay ``delta*h`` and diffusion
    ``d/delta``.
    """
    if not (p > 0 and delta > 0 and b > 0 and h >= 0 and d > 0):
        raise ValidationError("rescale requires p, delta, b, d > 0 and h >= 0")
    return {"p": p / delta, "h": delta * h, "d": d / delta, "density_scale": b, "time_scale": delta}
