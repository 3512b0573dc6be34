"""Extremal problems over the invariant variables.

Two problems are solved on a SearchDomain:

* power minimization: ICPE -> min subject to ICSE >= floor;
* spectral maximization at fixed g: ICSE -> max subject to the power
  criterion staying within a relative slack of its per-m infimum.

Every problem runs an exhaustive grid (m enumerated, B_s log-spaced, g
linear or log) and then polishes the best grid cell by golden-section
search in log coordinates of the continuous free variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .channel import InvariantPoint, SerModel
from .efficiency import DEFAULT_SER, icpe_grid, icse_grid
from .errors import ConfigError, InfeasibleError

POWER_MIN = "power-min"
SPECTRAL_MAX = "spectral-max"

DEFAULT_M_SET = tuple(2 ** k for k in range(1, 11))
DEFAULT_SLACK = 0.02
_INVPHI = (math.sqrt(5) - 1) / 2
_TIE = 1e-12


@dataclass(frozen=True)
class SearchDomain:
    """Grid over (m, g, B_s). A fixed variable takes the low end of its range."""

    m_set: tuple = DEFAULT_M_SET
    g_range: tuple = (0.1, 10.0)
    B_range: tuple = (2.0, 2.0 ** 16)
    g_points: int = 64
    B_points: int = 129
    g_free: bool = True
    B_free: bool = True
    g_log: bool = True

    def __post_init__(self):
        object.__setattr__(self, "m_set", tuple(sorted(int(m) for m in self.m_set)))
        if not self.m_set or min(self.m_set) < 2:
            raise ConfigError("m_set must hold alphabet sizes >= 2")
        if not (self.g_free or self.B_free):
            raise ConfigError("at least one of g, B_s must be free")
        for name, (lo, hi), free, n in (("g", self.g_range, self.g_free, self.g_points),
                                        ("B_s", self.B_range, self.B_free, self.B_points)):
            if not lo > 0:
                raise ConfigError(f"{name} range must be positive")
            if free and not hi > lo:
                raise ConfigError(f"{name} range is degenerate: {(lo, hi)}")
            if free and n < 16:
                raise ConfigError(f"{name} grid needs >= 16 points, got {n}")

    @classmethod
    def fixed_g(cls, g: float, **kw) -> "SearchDomain":
        return cls(g_range=(g, g), g_free=False, **kw)

    def refined(self, factor: int = 2) -> "SearchDomain":
        """Same domain with the grid resolution multiplied by ``factor``."""
        return replace(self, g_points=(self.g_points - 1) * factor + 1,
                       B_points=(self.B_points - 1) * factor + 1)

    def g_grid(self) -> np.ndarray:
        lo, hi = self.g_range
        if not self.g_free:
            return np.array([float(lo)])
        if self.g_log:
            return np.geomspace(lo, hi, self.g_points)
        return np.linspace(lo, hi, self.g_points)

    def B_grid(self) -> np.ndarray:
        lo, hi = self.B_range
        if not self.B_free:
            return np.array([float(lo)])
        return np.geomspace(lo, hi, self.B_points)


@dataclass(frozen=True)
class ExtremumResult:
    arg: InvariantPoint
    value: float
    kind: str
    constraint_active: bool
    refinement_tolerance: float
    icse: float = math.nan
    icpe: float = math.nan
    candidates: tuple = field(default=(), compare=False)


def golden_section(f: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-10, max_iter: int = 200):
    """Minimize ``f`` on [a, b] by golden-section search.

    Returns (x, f(x)). ``f`` may return +inf on infeasible points; the
    search then shrinks toward the finite side.
    """
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _better(cand, best):
    # (value, B_s, m) with value to minimize; ties prefer smaller B_s, then m
    if best is None:
        return True
    v, B, m = cand
    bv, bB, bm = best
    if v < bv - _TIE * max(1.0, abs(bv)):
        return True
    if v > bv + _TIE * max(1.0, abs(bv)):
        return False
    return (B, m) < (bB, bm)


def _neighbors(grid: np.ndarray, i: int):
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    return lo, hi


def _polish(objective, g0, B0, domain: SearchDomain, gi, Bi, tol, sweeps=3):
    """Coordinate-wise golden refinement inside the grid cell around (g0, B0)."""
    g, B = g0, B0
    best = objective(g, B)
    g_lo, g_hi = _neighbors(domain.g_grid(), gi)
    B_lo, B_hi = _neighbors(domain.B_grid(), Bi)
    for _ in range(sweeps):
        start = best
        if domain.B_free:
            x, v = golden_section(lambda u: objective(g, math.exp(u)),
                                  math.log(B_lo), math.log(B_hi), tol)
            if v < best:
                B, best = math.exp(x), v
        if domain.g_free:
            x, v = golden_section(lambda u: objective(math.exp(u), B),
                                  math.log(g_lo), math.log(g_hi), tol)
            if v < best:
                g, best = math.exp(x), v
        if not best < start - tol * abs(start):
            break
    return g, B, best


def _scalar(fn, m, ser_model):
    return lambda g, B: float(fn(m, g, B, ser_model))


def minimize_power(domain: SearchDomain = SearchDomain(), c_F_floor: float = 0.0,
                   ser_model: SerModel = DEFAULT_SER, tol: float = 1e-9) -> ExtremumResult:
    """Minimize ICPE over the domain subject to ICSE >= ``c_F_floor``.

    Raises InfeasibleError (carrying the highest-ICSE point seen) when no
    grid point meets the floor.
    """
    if c_F_floor < 0:
        raise ConfigError("c_F_floor must be >= 0")
    G = domain.g_grid()[:, None]
    B = domain.B_grid()[None, :]
    best = None
    best_key = None
    fallback = None
    candidates = []
    for m in domain.m_set:
        C = np.broadcast_to(icse_grid(m, G, B, ser_model), (G.size, B.size))
        W = np.broadcast_to(icpe_grid(m, G, B, ser_model), C.shape)
        imax = np.unravel_index(np.argmax(C), C.shape)
        if fallback is None or C[imax] > fallback[0]:
            fallback = (float(C[imax]), m, float(G[imax[0], 0]), float(B[0, imax[1]]))
        feasible = C >= c_F_floor
        if not feasible.any():
            continue
        Wf = np.where(feasible, W, np.inf)
        gi, Bi = np.unravel_index(np.argmin(Wf), Wf.shape)
        active = not feasible[np.unravel_index(np.argmin(W), W.shape)]

        w_fn = _scalar(icpe_grid, m, ser_model)
        c_fn = _scalar(icse_grid, m, ser_model)

        def objective(g, b, w_fn=w_fn, c_fn=c_fn):
            return w_fn(g, b) if c_fn(g, b) >= c_F_floor else math.inf

        g_opt, B_opt, w_opt = _polish(objective, float(G[gi, 0]), float(B[0, Bi]),
                                      domain, gi, Bi, tol)
        cand = ExtremumResult(InvariantPoint(m, g_opt, B_opt), w_opt, POWER_MIN,
                              active, tol, c_fn(g_opt, B_opt), w_opt)
        candidates.append(cand)
        key = (w_opt, B_opt, m)
        if _better(key, best_key):
            best, best_key = cand, key
    if best is None:
        c, m, g, b = fallback
        raise InfeasibleError(
            f"no point reaches ICSE >= {c_F_floor}; best attainable is {c:.6g} "
            f"at m={m}, g={g:.6g}, B_s={b:.6g}",
            best_infeasible=InvariantPoint(m, g, b),
            constraint=f"icse >= {c_F_floor}",
        )
    return replace(best, candidates=tuple(candidates))


def power_infimum(m: int, g: float, domain: SearchDomain,
                  ser_model: SerModel = DEFAULT_SER, tol: float = 1e-9) -> ExtremumResult:
    """Minimum ICPE over B_s for a single alphabet at a fixed g."""
    sub = replace(domain, m_set=(m,), g_range=(g, g), g_free=False, B_free=True)
    return minimize_power(sub, 0.0, ser_model, tol)


def constrained_icse_curve(m: int, g: float, B_grid, ser_model: SerModel = DEFAULT_SER,
                           power_slack: float = DEFAULT_SLACK, w_inf: Optional[float] = None):
    """ICSE along B_s at fixed (m, g) plus the near-minimal-power feasibility mask.

    Returns a dict with arrays ``B_s``, ``icse``, ``icpe``, ``feasible`` and
    the scalar ``w_inf`` used for the constraint.
    """
    B_grid = np.asarray(B_grid, dtype=float)
    C = np.asarray(icse_grid(m, g, B_grid, ser_model), dtype=float)
    W = np.asarray(icpe_grid(m, g, B_grid, ser_model), dtype=float)
    if w_inf is None:
        w_inf = float(np.min(W))
    feasible = W <= (1 + power_slack) * w_inf * (1 + 1e-12)
    return {"B_s": B_grid, "icse": C, "icpe": W, "feasible": feasible, "w_inf": w_inf}


def has_interior_maximum(curve) -> bool:
    """True when the feasible ICSE maximum strictly beats both ends of the
    feasible B_s stretch and does not sit on either end of the grid."""
    idx = np.flatnonzero(curve["feasible"])
    if idx.size < 3:
        return False
    C = curve["icse"]
    k = idx[np.argmax(C[idx])]
    first, last = idx[0], idx[-1]
    n = len(C)
    return bool(0 < k < n - 1 and C[k] > C[first] and C[k] > C[last])


def maximize_spectral(domain: SearchDomain, ser_model: SerModel = DEFAULT_SER,
                      power_slack: float = DEFAULT_SLACK, tol: float = 1e-9) -> ExtremumResult:
    """Maximize ICSE over (m, B_s) at fixed g, keeping ICPE near its infimum.

    For each m the feasible set is ``icpe <= (1 + power_slack) * w_inf(m)``
    with ``w_inf(m)`` the minimum ICPE over the B_s range at this g.
    ``power_slack=math.inf`` drops the power constraint.
    """
    if domain.g_free or not domain.B_free:
        raise ConfigError("spectral maximization needs g fixed and B_s free")
    if not power_slack > 0:
        raise ConfigError("power_slack must be > 0")
    g = float(domain.g_range[0])
    Bg = domain.B_grid()
    best = None
    best_key = None
    candidates = []
    for m in domain.m_set:
        w_inf = power_infimum(m, g, domain, ser_model, tol).value
        w_bound = (1 + power_slack) * w_inf
        curve = constrained_icse_curve(m, g, Bg, ser_model, power_slack, w_inf)
        feas = curve["feasible"]
        if not feas.any():
            continue
        C = np.where(feas, curve["icse"], -np.inf)
        Bi = int(np.argmax(C))
        unconstrained_argmax_ok = bool(feas[int(np.argmax(curve["icse"]))])

        w_fn = _scalar(icpe_grid, m, ser_model)
        c_fn = _scalar(icse_grid, m, ser_model)

        def objective(gg, b, w_fn=w_fn, c_fn=c_fn):
            if w_fn(gg, b) > w_bound * (1 + 1e-12):
                return math.inf
            return -c_fn(gg, b)

        _, B_opt, neg = _polish(objective, g, float(Bg[Bi]), domain, 0, Bi, tol)
        cand = ExtremumResult(InvariantPoint(m, g, B_opt), -neg, SPECTRAL_MAX,
                              not unconstrained_argmax_ok, tol, -neg, w_fn(g, B_opt))
        candidates.append(cand)
        key = (neg, B_opt, m)
        if _better(key, best_key):
            best, best_key = cand, key
    if best is None:
        raise InfeasibleError("no (m, B_s) satisfies the near-minimal-power constraint",
                              constraint=f"icpe <= (1 + {power_slack}) * w_inf(m)")
    return replace(best, candidates=tuple(candidates))


@dataclass(frozen=True)
class PowerConstantReport:
    m: int
    g: tuple
    w_min: tuple
    B_star: tuple
    spread: float
    spans_decade: bool

    @property
    def constant(self) -> float:
        return min(self.w_min)


def verify_power_constant(m: int, g_samples: Sequence[float], ser_model: SerModel = DEFAULT_SER,
                          B_range=(2.0 ** -12, 2.0 ** 20), B_points: int = 257,
                          tol: float = 1e-9) -> PowerConstantReport:
    """Minimum ICPE over B_s at each g; the spread measures g-independence.

    The B_s range defaults much wider than the optimizer's so the ICPE
    infimum is reachable at every g: the minimizing h**2 is fixed by m, and
    B_s* = 2 h*^2 / g^2 moves with g.
    """
    g_samples = [float(g) for g in g_samples]
    if len(g_samples) < 3:
        raise ConfigError("need at least 3 g samples")
    domain = SearchDomain(m_set=(m,), B_range=tuple(B_range), B_points=B_points)
    mins, Bs = [], []
    for g in g_samples:
        r = power_infimum(m, g, domain, ser_model, tol)
        mins.append(r.value)
        Bs.append(r.arg.B_s)
    spread = (max(mins) - min(mins)) / min(mins)
    spans = max(g_samples) / min(g_samples) >= 10
    return PowerConstantReport(m, tuple(g_samples), tuple(mins), tuple(Bs), spread, spans)


@dataclass(frozen=True)
class TrendReport:
    rows: tuple  # (g, m*, B_s*, icse*)
    trend: str   # increasing | non-decreasing | degenerate | non-monotone

    @property
    def is_trend(self) -> bool:
        """Base grows (somewhere strictly, never shrinking) as the channel worsens."""
        return self.trend in ("increasing", "non-decreasing")


def classify_trend(values: Sequence[float], rel_tol: float = 1e-9) -> str:
    diffs = np.diff(np.asarray(values, dtype=float))
    scale = rel_tol * np.maximum(1.0, np.abs(np.asarray(values[:-1], dtype=float)))
    up = diffs > scale
    down = diffs < -scale
    if down.any():
        return "non-monotone"
    if up.all():
        return "increasing"
    if up.any():
        return "non-decreasing"
    return "degenerate"


def optimal_complexity_trend(g_series: Sequence[float], m_set: Sequence[int] = DEFAULT_M_SET,
                             ser_model: SerModel = DEFAULT_SER,
                             power_slack: float = DEFAULT_SLACK,
                             B_range=(2.0, 2.0 ** 16), B_points: int = 129) -> TrendReport:
    g_series = [float(g) for g in g_series]
    if any(b >= a for a, b in zip(g_series, g_series[1:])):
        raise ConfigError("g_series must be strictly decreasing")
    if len(set(m_set)) < 3:
        raise ConfigError("m_set needs at least 3 alphabet sizes")
    rows = []
    for g in g_series:
        dom = SearchDomain.fixed_g(g, m_set=tuple(m_set), B_range=tuple(B_range),
                                   B_points=B_points)
        r = maximize_spectral(dom, ser_model, power_slack)
        rows.append((g, r.arg.m, r.arg.B_s, r.value))
    return TrendReport(tuple(rows), classify_trend([row[2] for row in rows]))
