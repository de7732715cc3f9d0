"""Classification of the (p, h) plane by the scalar criteria."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .birth import BirthFunction, find_positive_fixed_point, gsc_rhs, oscillation_lhs
from .errors import ValidationError

__all__ = ["RegionClass", "RegionCell", "RegionMap", "classify_region", "sweep", "CSV_HEADER"]

CSV_HEADER = ("p", "h", "class", "Gamma", "gsc_lhs", "gsc_rhs", "osc_lhs")


class RegionClass(str, Enum):
    NO_POSITIVE_EQUILIBRIUM = "NoPositiveEquilibrium"
    MONOTONE = "MonotoneRegime"
    GSC_HOLDS_NO_OSCILLATION = "GscHolds_NoOscillation"
    GSC_HOLDS_OSCILLATORY = "GscHolds_Oscillatory"
    GSC_FAILS = "GscFails"


@dataclass(frozen=True)
class RegionCell:
    p: float
    h: float
    cls: RegionClass
    Gamma: float
    gsc_lhs: float
    gsc_rhs: float
    osc_lhs: float

    def row(self) -> tuple:
        return (self.p, self.h, self.cls.value, self.Gamma, self.gsc_lhs, self.gsc_rhs, self.osc_lhs)


def _gamma(p: float, family: str, n: float) -> float:
    if p <= 1:
        return math.nan
    if family == "nicholson":
        return 1.0 - math.log(p)
    if family == "mackey_glass":
        return find_positive_fixed_point(BirthFunction.mackey_glass(p, n)).Gamma
    raise ValidationError(f"unknown family {family!r}")


def _cell(p: float, h: float, family: str, n: float, Gamma: float | None = None) -> RegionCell:
    if not p > 0 or not h >= 0:
        raise ValidationError(f"need p > 0 and h >= 0, got p={p}, h={h}")
    lhs = math.exp(-h)
    if p <= 1:
        return RegionCell(p, h, RegionClass.NO_POSITIVE_EQUILIBRIUM, math.nan, lhs, math.nan, math.nan)
    G = _gamma(p, family, n) if Gamma is None else Gamma
    osc = oscillation_lhs(G, h)
    if (family == "nicholson" and p <= math.e) or G >= 0:
        return RegionCell(p, h, RegionClass.MONOTONE, G, lhs, math.nan, osc)
    rhs = gsc_rhs(G)
    if not lhs > rhs:
        cls = RegionClass.GSC_FAILS
    elif osc < -1:
        cls = RegionClass.GSC_HOLDS_OSCILLATORY
    else:
        cls = RegionClass.GSC_HOLDS_NO_OSCILLATION
    return RegionCell(p, h, cls, G, lhs, rhs, osc)


def classify_region(p: float, h: float, family: str = "nicholson", n: float = 1.0) -> RegionClass:
    """First matching class in the order: no positive equilibrium (p <= 1),
    monotone birth function near K (Nicholson p <= e, otherwise
    ``Gamma >= 0``), delay condition fails, oscillatory, non-oscillatory."""
    return _cell(float(p), float(h), family, float(n)).cls


@dataclass
class RegionMap:
    p_axis: np.ndarray
    h_axis: np.ndarray
    cells: list

    def rows(self):
        return [c.row() for c in self.cells]

    def counts(self) -> dict:
        out = {c.value: 0 for c in RegionClass}
        for c in self.cells:
            out[c.cls.value] += 1
        return out

    def grid(self) -> np.ndarray:
        """Class labels shaped ``(len(p_axis), len(h_axis))``."""
        return np.array([c.cls.value for c in self.cells], dtype=object).reshape(self.p_axis.size, self.h_axis.size)


def _column(args) -> list:
    p, hs, family, n = args
    G = _gamma(p, family, n) if p > 1 else None
    return [_cell(p, float(h), family, n, G) for h in hs]


def sweep(p_axis: Sequence[float], h_axis: Sequence[float], family: str = "nicholson", n: float = 1.0,
          threads: int = 1) -> RegionMap:
    """Classify every ``(p, h)`` pair; rows are ordered by ``p`` then ``h``
    regardless of the number of worker processes."""
    ps = np.asarray(p_axis, dtype=float).ravel()
    hs = np.asarray(h_axis, dtype=float).ravel()
    if ps.size == 0 or hs.size == 0:
        raise ValidationError("sweep axes must be non-empty")
    if np.any(ps <= 0) or np.any(hs < 0):
        raise ValidationError("sweep needs p > 0 and h >= 0")
    jobs = [(float(p), hs.tolist(), family, float(n)) for p in ps]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(_column, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        cols = [_column(j) for j in jobs]
    return RegionMap(ps, hs, [c for col in cols for c in col])
