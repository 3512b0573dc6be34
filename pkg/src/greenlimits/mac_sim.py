"""Slotted reservation-TDMA simulator.

Protocol: every packet needs one reservation request of
``reservation_overhead`` bits before its data is scheduled. A station
that already holds a reservation piggybacks the request for its next
packet on the end of its data transmission (collision free). Stations
without a reservation contend in request minislots with binary
exponential backoff; collided requests still consume channel bits.
Reserved packets are served FIFO from a single schedule, the equivalent
centralized queue. Payload bits are hit by independent bit errors; an
erroneous packet is rescheduled (no FEC) under the same reservation.

Channel time is counted in bits on a fixed slot clock (``slot_size``
bits per slot). Poisson arrivals enter at slot boundaries.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import ConfigError
from .mac_bounds import DETERMINISTIC, GEOMETRIC, PacketLaw, mac_bound

CATEGORIES = ("delivered", "wasted", "overhead", "idle")


@dataclass(frozen=True)
class SimConfig:
    stations: int = 16
    offered_load: float = 0.5          # packets per slot, aggregate
    packet_law: PacketLaw = PacketLaw(GEOMETRIC, 2.0)
    reservation_overhead: int = 4      # bits per request
    slot_size: int = 128               # bits per slot
    ser: float = 0.0                   # per-bit error probability
    duration: int = 10_000             # slots
    seed: int = 0
    warmup_fraction: float = 0.1
    backlog_limit: int = 200_000
    max_backoff_exponent: int = 10

    def __post_init__(self):
        if self.stations < 1 or self.slot_size < 1 or self.duration < 1:
            raise ConfigError("stations, slot_size and duration must be >= 1")
        if not self.offered_load > 0:
            raise ConfigError("offered load must be positive")
        if self.reservation_overhead < 0 or int(self.reservation_overhead) != self.reservation_overhead:
            raise ConfigError("reservation overhead must be a non-negative integer of bits")
        if not 0 <= self.ser < 1:
            raise ConfigError("bit error probability must lie in [0, 1)")
        if not 0 <= self.warmup_fraction < 1:
            raise ConfigError("warm-up fraction must lie in [0, 1)")

    @property
    def mean_payload_bits(self) -> float:
        return self.packet_law.mean_slots * self.slot_size


@dataclass
class SimResult:
    config: SimConfig
    throughput: float
    bits: dict
    measured_bits: dict
    delivered_packets: int = 0
    transmissions: int = 0
    collisions: int = 0
    dropped: int = 0
    saturated: bool = False

    @property
    def total_bits(self) -> int:
        return self.config.duration * self.config.slot_size


def _packet_sizes(cfg: SimConfig, rng, n):
    law = cfg.packet_law
    if law.law == DETERMINISTIC:
        return np.full(n, int(round(law.mean_slots * cfg.slot_size)), dtype=np.int64)
    return rng.geometric(1.0 / law.mean_slots, n).astype(np.int64) * cfg.slot_size


def run_sim(cfg: SimConfig) -> SimResult:
    """Simulate one configuration; S = measured delivered payload bits per channel bit."""
    arr_rng, ch_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(2))
    slot = cfg.slot_size
    horizon = cfg.duration * slot
    warm = int(cfg.warmup_fraction * cfg.duration) * slot
    counts = arr_rng.poisson(cfg.offered_load, cfg.duration)
    n_arr = int(counts.sum())
    arr_time = (np.repeat(np.arange(cfg.duration, dtype=np.int64), counts) * slot).tolist()
    arr_station = arr_rng.integers(0, cfg.stations, n_arr).tolist()
    arr_bits = _packet_sizes(cfg, arr_rng, n_arr).tolist()

    r = int(cfg.reservation_overhead)
    p = cfg.ser
    log_ok = math.log1p(-p) if p > 0 else 0.0
    kmax = cfg.max_backoff_exponent

    queues = [deque() for _ in range(cfg.stations)]
    reserved = [0] * cfg.stations
    contenders = {}                     # station -> [backoff, collisions]
    schedule = deque()
    totals = dict.fromkeys(CATEGORIES, 0)
    measured = dict.fromkeys(CATEGORIES, 0)
    backlog = 0
    dropped = delivered = transmissions = collisions = 0
    saturated = False
    ai = 0
    t = 0

    def charge(cat, start, n):
        totals[cat] += n
        lo = start if start > warm else warm
        hi = start + n
        if hi > lo:
            measured[cat] += hi - lo

    while t < horizon:
        while ai < n_arr and arr_time[ai] <= t:
            s = arr_station[ai]
            if backlog >= cfg.backlog_limit:
                dropped += 1
                saturated = True
            else:
                queues[s].append(arr_bits[ai])
                backlog += 1
                if reserved[s] == 0 and s not in contenders:
                    contenders[s] = [0, 0]
            ai += 1

        if contenders:
            if r == 0:
                for s in contenders:
                    schedule.append(s)
                    reserved[s] += 1
                contenders.clear()
            else:
                ready = [s for s, st in contenders.items() if st[0] == 0]
                for s, st in contenders.items():
                    if st[0] > 0:
                        st[0] -= 1
                if ready or not schedule:
                    if t + r > horizon:
                        break
                    if len(ready) == 1:
                        s = ready[0]
                        del contenders[s]
                        schedule.append(s)
                        reserved[s] += 1
                        charge("overhead", t, r)
                    elif ready:
                        collisions += 1
                        for s in ready:
                            st = contenders[s]
                            st[1] += 1
                            st[0] = int(ch_rng.integers(0, 1 << min(st[1], kmax)))
                        charge("overhead", t, r)
                    else:
                        charge("idle", t, r)
                    t += r
                    continue

        if schedule:
            s = schedule.popleft()
            L = queues[s][0]
            if t + L > horizon:
                schedule.appendleft(s)
                break
            ok = p == 0 or ch_rng.random() < math.exp(L * log_ok)
            charge("delivered" if ok else "wasted", t, L)
            transmissions += 1
            t += L
            while ai < n_arr and arr_time[ai] <= t:
                s2 = arr_station[ai]
                if backlog >= cfg.backlog_limit:
                    dropped += 1
                    saturated = True
                else:
                    queues[s2].append(arr_bits[ai])
                    backlog += 1
                    if reserved[s2] == 0 and s2 not in contenders:
                        contenders[s2] = [0, 0]
                ai += 1
            if len(queues[s]) > reserved[s] and t + r <= horizon:
                schedule.append(s)
                reserved[s] += 1
                charge("overhead", t, r)
                t += r
            if ok:
                queues[s].popleft()
                reserved[s] -= 1
                backlog -= 1
                delivered += 1
            else:
                schedule.append(s)
            if reserved[s] == 0 and queues[s] and s not in contenders:
                contenders[s] = [0, 0]
        elif not contenders:
            nxt = arr_time[ai] if ai < n_arr else horizon
            nxt = min(max(nxt, t), horizon)
            if nxt == t:
                nxt = min(t + slot, horizon)
            charge("idle", t, nxt - t)
            t = nxt

    if t < horizon:
        charge("idle", t, horizon - t)
    S = measured["delivered"] / (horizon - warm)
    return SimResult(cfg, S, totals, measured, delivered, transmissions, collisions,
                     dropped, saturated)


@dataclass(frozen=True)
class CurvePoint:
    G: float
    S: float
    std_error: float
    ci_low: float
    ci_high: float
    seed_count: int
    saturated: bool = False


@dataclass(frozen=True)
class ThroughputCurve:
    points: tuple
    measured_capacity: float = field(init=False)
    argmax: int = field(init=False)

    def __post_init__(self):
        i = int(np.argmax([pt.S for pt in self.points])) if self.points else -1
        object.__setattr__(self, "argmax", i)
        object.__setattr__(self, "measured_capacity", self.points[i].S if self.points else 0.0)

    @property
    def capacity_std_error(self) -> float:
        return self.points[self.argmax].std_error


def _run_throughput(cfg):
    res = run_sim(cfg)
    return res.throughput, res.saturated


def run_point(cfg: SimConfig, seeds: Sequence[int], pool=None) -> CurvePoint:
    cfgs = [replace(cfg, seed=int(sd)) for sd in seeds]
    out = list(pool.map(_run_throughput, cfgs)) if pool else [_run_throughput(c) for c in cfgs]
    S = np.array([o[0] for o in out])
    n = S.size
    mean = float(S.mean())
    se = float(S.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    half = float(stats.t.ppf(0.975, n - 1)) * se if n > 1 else 0.0
    return CurvePoint(cfg.offered_load, mean, se, mean - half, mean + half, n,
                      any(o[1] for o in out))


def sweep_load(cfg: SimConfig, G_grid: Sequence[float], seeds: Sequence[int] = range(10),
               workers: int = 1) -> ThroughputCurve:
    """One averaged point per offered load; the curve maximum is the measured capacity."""
    if len(G_grid) < 5:
        raise ConfigError("load sweep needs at least 5 offered-load points")
    seeds = list(seeds)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            pts = [run_point(replace(cfg, offered_load=float(G)), seeds, pool) for G in G_grid]
    else:
        pts = [run_point(replace(cfg, offered_load=float(G)), seeds) for G in G_grid]
    return ThroughputCurve(tuple(pts))


def default_load_grid(cfg: SimConfig, points: int = 6):
    """Offered loads from 20% to 200% of the error-free slot capacity."""
    full = 1.0 / cfg.packet_law.mean_slots
    return [full * f for f in np.linspace(0.2, 2.0, points)]


@dataclass(frozen=True)
class DominanceCheck:
    measured_capacity: float
    std_error: float
    supremum: float
    overhead_infimum: float
    comparable: bool

    @property
    def passed(self) -> bool:
        return self.measured_capacity <= self.supremum + 3 * self.std_error


def check_dominance(cfg: SimConfig, curve: ThroughputCurve) -> DominanceCheck:
    """Compare a measured curve maximum with the MAC capacity supremum."""
    bound = mac_bound(cfg.packet_law, cfg.mean_payload_bits, cfg.ser, m=2)
    return DominanceCheck(curve.measured_capacity, curve.capacity_std_error,
                          bound.capacity_supremum, bound.overhead_infimum,
                          cfg.reservation_overhead >= bound.overhead_infimum)


CURVE_COLUMNS = ("G", "S", "ci_low", "ci_high", "seed_count")
