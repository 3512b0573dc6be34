"""Invariant channel variables, symbol error models and m-ary capacity.

All quantities are expressed through the invariant triple (m, g, B_s):
alphabet size, SINR amplitude (g**2 is the SINR) and the signal base
B_s = 2 * dF * T_s. The symbol-energy SINR is h**2 = g**2 * B_s / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import ConfigError, DomainError

ORTHOGONAL = "orthogonal-coherent"
QAM = "square-QAM"
UNION_BOUND = "union-bound-orthogonal"
SER_KINDS = (ORTHOGONAL, QAM, UNION_BOUND)


@dataclass(frozen=True)
class InvariantPoint:
    m: int
    g: float
    B_s: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ConfigError(f"alphabet size must be an integer >= 2, got {self.m}")
        if not self.g > 0:
            raise ConfigError(f"g must be positive, got {self.g}")
        if not self.B_s > 0:
            raise ConfigError(f"signal base must be positive, got {self.B_s}")

    @property
    def h_squared(self) -> float:
        return esinr(self)


def esinr(point: InvariantPoint) -> float:
    """Symbol-energy SINR h**2 = g**2 * B_s / 2."""
    return point.g ** 2 * point.B_s / 2


def qfunc(x):
    """Gaussian tail probability Q(x) = 1 - Phi(x)."""
    return ndtr(-np.asarray(x, dtype=float))


def is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class SerModel:
    """Symbol error probability as a function of (m, h**2).

    ``nodes`` and ``width`` control the trapezoid quadrature used by the
    orthogonal-coherent model (integration over +/- width standard
    deviations). The Gaussian integrand is smooth and decays fast, so the
    trapezoid rule converges geometrically here.
    """

    kind: str = ORTHOGONAL
    nodes: int = 801
    width: float = 10.0

    def __post_init__(self):
        if self.kind not in SER_KINDS:
            raise ConfigError(f"unknown SER model {self.kind!r}; expected one of {SER_KINDS}")
        if self.nodes < 201:
            raise ConfigError("quadrature needs at least 201 nodes")
        if self.width < 10:
            raise ConfigError("quadrature truncation narrower than 10 sigma")

    def check_alphabet(self, m: int) -> None:
        if int(m) != m or m < 2:
            raise ConfigError(f"alphabet size must be an integer >= 2, got {m}")
        if self.kind == QAM:
            root = math.isqrt(m)
            if root * root != m or not is_power_of_two(m):
                raise ConfigError(f"square QAM needs m = 4**k, got {m}")

    def evaluate(self, m: int, h_squared):
        self.check_alphabet(m)
        h2 = np.asarray(h_squared, dtype=float)
        if np.any(h2 < 0) or np.any(np.isnan(h2)):
            raise DomainError("h_squared must be >= 0")
        if self.kind == ORTHOGONAL:
            p = _orthogonal_ser(m, h2, self.nodes, self.width)
        elif self.kind == QAM:
            p = _qam_ser(m, h2)
        else:
            p = np.minimum((m - 1) * qfunc(np.sqrt(h2)), 1 - 1 / m)
        p = np.clip(p, 0.0, 1 - 1 / m)
        return float(p) if p.ndim == 0 else p

    __call__ = evaluate


def _orthogonal_ser(m, h2, nodes, width):
    # P_e = int phi(x) * [1 - Phi(x + sqrt(2 h^2))**(m-1)] dx, written with
    # expm1/log_ndtr so small error rates keep their relative accuracy.
    x = np.linspace(-width, width, nodes)
    wts = np.full(nodes, x[1] - x[0])
    wts[[0, -1]] *= 0.5
    pdf = np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    shift = np.sqrt(2.0 * h2)[..., None]
    miss = -np.expm1((m - 1) * log_ndtr(x + shift))
    return np.sum(wts * pdf * miss, axis=-1)


def _qam_ser(m, h2):
    # h^2 is the average symbol energy over noise density
    per_rail = 2 * (1 - 1 / math.sqrt(m)) * qfunc(np.sqrt(3 * h2 / (m - 1)))
    return 2 * per_rail - per_rail ** 2


def ser(model: SerModel, m: int, h_squared):
    """Symbol error probability of ``model`` at alphabet ``m`` and ESINR ``h_squared``."""
    return model.evaluate(m, h_squared)


def _xlog2(a, b):
    # a * log2(b) with the 0 * log 0 = 0 convention
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a * np.log2(b)
    return np.where(a == 0, 0.0, out)


def mary_capacity(m: int, p):
    """Capacity in bits per symbol of the m-ary symmetric channel with SER ``p``.

    C = log2 m + (1 - p) log2(1 - p) + p log2(p / (m - 1)).
    """
    if int(m) != m or m < 2:
        raise DomainError(f"alphabet size must be an integer >= 2, got {m}")
    p = np.asarray(p, dtype=float)
    top = 1 - 1 / m
    if np.any(np.isnan(p)) or np.any(p < 0) or np.any(p > top * (1 + 1e-12)):
        raise DomainError(f"SER must lie in [0, {top}]")
    p = np.minimum(p, top)
    q = 1 - p
    c = math.log2(m) + _xlog2(q, q) + _xlog2(p, p / (m - 1))
    c = np.clip(c, 0.0, math.log2(m))
    return float(c) if c.ndim == 0 else c


def continuous_se(snr):
    """Shannon spectral efficiency log2(1 + snr) of the continuous AWGN channel."""
    snr = np.asarray(snr, dtype=float)
    if np.any(snr < 0):
        raise DomainError("snr must be >= 0")
    out = np.log2(1 + snr)
    return float(out) if out.ndim == 0 else out
