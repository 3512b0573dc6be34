"""Invariant spectral (ICSE) and power (ICPE) efficiency criteria.

Cover and investment efficiency are not implemented: they need a cell
radius model R_c(m, g, B_s) and a CAPEX function F_I(w) that have no
closed form here. :func:`icpe` is the quantity both would be built on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import InvariantPoint, SerModel, mary_capacity
from .errors import DomainError, UndefinedEfficiencyError

DEFAULT_SER = SerModel()


def icse_grid(m: int, g, B_s, ser_model: SerModel = DEFAULT_SER):
    """Vectorized ICSE c_F = C_m(p_m(h^2)) / (B_s / 2) on broadcast arrays."""
    g = np.asarray(g, dtype=float)
    B_s = np.asarray(B_s, dtype=float)
    h2 = g ** 2 * B_s / 2
    p = ser_model.evaluate(m, h2)
    return mary_capacity(m, p) / (B_s / 2)


def icpe_grid(m: int, g, B_s, ser_model: SerModel = DEFAULT_SER):
    """Vectorized ICPE w = g^2 / c_F; +inf where the capacity vanishes."""
    c = np.asarray(icse_grid(m, g, B_s, ser_model))
    g2 = np.asarray(g, dtype=float) ** 2
    with np.errstate(divide="ignore"):
        return np.where(c > 0, g2 / np.where(c > 0, c, 1.0), np.inf)


def icse(point: InvariantPoint, ser_model: SerModel = DEFAULT_SER) -> float:
    """Digital-channel capacity per Hertz, in (bit/s)/Hz."""
    return float(icse_grid(point.m, point.g, point.B_s, ser_model))


def icpe(point: InvariantPoint, ser_model: SerModel = DEFAULT_SER) -> float:
    """SINR spent per unit of spectral efficiency, SINR / ((bit/s)/Hz)."""
    c = icse(point, ser_model)
    if c <= 0:
        raise UndefinedEfficiencyError(
            f"ICSE is zero at m={point.m}, g={point.g}, B_s={point.B_s}"
        )
    return point.g ** 2 / c


def to_joule_per_se(w_min: float, noise_density: float, B_s: float) -> float:
    """Convert an ICPE value into Joule per (bit/s)/Hz."""
    if min(w_min, noise_density, B_s) <= 0:
        raise DomainError("all inputs must be positive")
    return w_min * noise_density * B_s / 2


def to_joule_per_bit(w_jc: float, B_s: float) -> float:
    if min(w_jc, B_s) <= 0:
        raise DomainError("all inputs must be positive")
    return w_jc * B_s / 2


@dataclass(frozen=True)
class EfficiencyReport:
    point: InvariantPoint
    c_F: float
    w: float
    w_joule_per_se: Optional[float] = None
    w_joule_per_bit: Optional[float] = None

    @property
    def ceiling(self) -> float:
        """Error-free spectral efficiency log2(m) / (B_s / 2)."""
        return math.log2(self.point.m) / (self.point.B_s / 2)


def report(point: InvariantPoint, ser_model: SerModel = DEFAULT_SER,
           noise_density: Optional[float] = None) -> EfficiencyReport:
    c = icse(point, ser_model)
    w = point.g ** 2 / c if c > 0 else math.inf
    jse = jb = None
    if noise_density is not None and math.isfinite(w):
        jse = to_joule_per_se(w, noise_density, point.B_s)
        jb = to_joule_per_bit(jse, point.B_s)
    return EfficiencyReport(point, c, w, jse, jb)
