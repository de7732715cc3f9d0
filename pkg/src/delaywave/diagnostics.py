"""Small array diagnostics shared by the trajectory, profile and PDE code."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WindowTooShort

__all__ = [
    "TailFit",
    "fit_log_linear",
    "count_sign_changes",
    "local_maxima",
    "first_upward_crossing",
]


@dataclass(frozen=True)
class TailFit:
    exponent: float
    amplitude: float
    fit_window: tuple[float, float]
    r_squared: float
    n_samples: int

    @property
    def accepted(self) -> bool:
        return self.r_squared >= 0.999

    def to_dict(self) -> dict:
        return {"exponent": self.exponent, "amplitude": self.amplitude,
                "fit_window": list(self.fit_window), "r_squared": self.r_squared,
                "n_samples": self.n_samples, "accepted": self.accepted}


def fit_log_linear(t, x, K: float, lower: float = 1e-10, upper_frac: float = 0.01,
                   min_samples: int = 50) -> TailFit:
    """Least-squares slope of ``ln x`` against ``t`` over the leading run of
    samples that stay below ``upper_frac * K`` (and above ``lower``).
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    above = np.flatnonzero(x >= upper_frac * K)
    stop = above[0] if above.size else len(x)
    tt, xx = t[:stop], x[:stop]
    keep = xx > lower
    tt, xx = tt[keep], xx[keep]
    if tt.size < min_samples:
        raise WindowTooShort(f"only {tt.size} samples with {lower} < x < {upper_frac}*K (need {min_samples})")
    y = np.log(xx)
    slope, icpt = np.polyfit(tt, y, 1)
    resid = y - (slope * tt + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0
    return TailFit(float(slope), float(np.exp(icpt)), (float(tt[0]), float(tt[-1])), r2, int(tt.size))


def count_sign_changes(y, floor: float = 0.0) -> int:
    """Sign changes of ``y`` ignoring entries with ``|y| <= floor``."""
    y = np.asarray(y, dtype=float)
    s = np.sign(y[np.abs(y) > floor])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def local_maxima(x) -> np.ndarray:
    """Indices of interior samples not smaller than either neighbour and
    strictly larger than at least one."""
    x = np.asarray(x, dtype=float)
    if x.size < 3:
        return np.array([], dtype=int)
    mid = x[1:-1]
    is_max = (mid >= x[:-2]) & (mid >= x[2:]) & ((mid > x[:-2]) | (mid > x[2:]))
    return np.flatnonzero(is_max) + 1


def first_upward_crossing(x, level: float) -> int | None:
    """Index ``i`` of the first cell with ``x[i] < level <= x[i+1]``."""
    x = np.asarray(x, dtype=float)
    idx = np.flatnonzero((x[:-1] < level) & (x[1:] >= level))
    return int(idx[0]) if idx.size else None
