"""Closed-form Shannon bounds for distributed MAC protocols.

The per-packet overhead infimum is the entropy (in bits) of the access
state of the equivalent centralized queue plus the entropy of the packet
duration law. Overheads are carried in bits; dividing by the mean packet
size in bits B * M[tau] gives the normalized overhead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import mary_capacity
from .errors import ConfigError, DomainError, UndefinedEfficiencyError

MM1 = "M/M/1"
MM1N = "M/M/1/n"
MD1 = "M/D/1"
FAMILIES = (MM1, MM1N, MD1)
MD1_STATE_ENTROPY = 1.854

GEOMETRIC = "geometric"
DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class QueueModel:
    family: str = MM1
    n: int = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown queue family {self.family!r}")
        if self.family == MM1N and (self.n is None or int(self.n) != self.n or self.n < 1):
            raise ConfigError("M/M/1/n needs an integer buffer size n >= 1")


@dataclass(frozen=True)
class PacketLaw:
    law: str = GEOMETRIC
    mean_slots: float = 1.0

    def __post_init__(self):
        if self.law not in (GEOMETRIC, DETERMINISTIC):
            raise ConfigError(f"unknown packet law {self.law!r}")
        if not self.mean_slots > 0:
            raise ConfigError("mean packet duration must be positive")
        if self.law == GEOMETRIC and self.mean_slots < 1:
            raise ConfigError("geometric law needs mean_slots >= 1")

    @property
    def entropy(self) -> float:
        if self.law == DETERMINISTIC:
            return 0.0
        return geometric_entropy(self.mean_slots)

    def queue_model(self) -> QueueModel:
        """The equivalent queue whose service law matches this packet law."""
        return QueueModel(MD1) if self.law == DETERMINISTIC else QueueModel(MM1)


def _h2(p: float) -> float:
    return sum(-x * math.log2(x) for x in (p, 1 - p) if x > 0)


def geometric_entropy(mean_slots: float) -> float:
    """Entropy in bits of a geometric duration law with the given mean (>= 1 slot)."""
    if not mean_slots >= 1:
        raise DomainError("geometric law needs mean_slots >= 1")
    p = 1.0 / mean_slots
    return _h2(p) / p


def mm1n_state_entropy(n: int) -> float:
    return 2 * (n + 2.0 ** (-n - 1)) / (n + 1)


def overhead_infimum(model: QueueModel, h_tau: float) -> float:
    """Minimum per-packet MAC overhead in bits for the queue family."""
    if h_tau < 0:
        raise DomainError("packet-duration entropy must be >= 0")
    if model.family == MM1:
        return 2.0 + h_tau
    if model.family == MM1N:
        return mm1n_state_entropy(model.n) + h_tau
    return MD1_STATE_ENTROPY + h_tau


def capacity_supremum_errorfree(delta_normalized: float) -> float:
    if delta_normalized < 0:
        raise DomainError("normalized overhead must be >= 0")
    return 1.0 / (1.0 + delta_normalized)


def capacity_supremum_with_errors(s_m: float, delta_bits: float, bit_rate: float,
                                  mean_packet_duration: float) -> float:
    """Potential MAC capacity s / (1 + delta / (B * M[tau] * s)) in presence of errors.

    ``bit_rate * mean_packet_duration`` is the mean packet size in bits.
    """
    if s_m == 0:
        raise UndefinedEfficiencyError("throughput efficiency is zero")
    if not 0 < s_m <= 1:
        raise DomainError("throughput efficiency must lie in (0, 1]")
    if delta_bits < 0 or bit_rate <= 0 or mean_packet_duration <= 0:
        raise DomainError("overhead must be >= 0, bit rate and packet duration > 0")
    return s_m / (1.0 + delta_bits / (bit_rate * mean_packet_duration * s_m))


def shannon_throughput_efficiency(m: int, p_m: float) -> float:
    """m-ary capacity normalized by the Hartley capacity log2(m)."""
    return mary_capacity(m, p_m) / math.log2(m)


@dataclass(frozen=True)
class MacBound:
    overhead_infimum: float
    capacity_supremum: float
    ser: float
    throughput_efficiency: float
    bit_rate: float
    mean_packet_duration: float


def mac_bound(law: PacketLaw, packet_bits: float, ser: float = 0.0, m: int = 2,
              model: QueueModel = None) -> MacBound:
    """Bound for packets of mean size ``packet_bits`` sent at unit bit rate."""
    model = model or law.queue_model()
    delta = overhead_infimum(model, law.entropy)
    s = shannon_throughput_efficiency(m, ser)
    cap = capacity_supremum_with_errors(s, delta, 1.0, packet_bits)
    return MacBound(delta, cap, ser, s, 1.0, packet_bits)


FIG6_COLUMNS = ("family", "n", "mean_slots", "H", "delta_inf", "delta_norm", "C_sup")


def fig6_rows(mean_slots=tuple(range(1, 65)), buffer_sizes=(1, 4, 16, 64),
              slot_bits: float = 1.0):
    """Overhead infimum and error-free capacity supremum per family vs. mean packet length.

    M/M/1 and M/M/1/n rows use the geometric entropy of the mean duration;
    M/D/1 rows the deterministic law (zero entropy). ``slot_bits`` converts
    the mean duration into packet bits for the normalized overhead.
    """
    rows = []
    for ms in mean_slots:
        h_geo = geometric_entropy(ms)
        bits = ms * slot_bits
        for fam, n, h in ([(MM1, "", h_geo)] + [(MM1N, k, h_geo) for k in buffer_sizes]
                          + [(MD1, "", 0.0)]):
            model = QueueModel(fam, n if fam == MM1N else None)
            d = overhead_infimum(model, h)
            rows.append((fam, n, ms, h, d, d / bits, capacity_supremum_errorfree(d / bits)))
    return rows
