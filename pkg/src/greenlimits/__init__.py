"""Invariant efficiency limits of m-ary links, orthogonal-signal interference and MAC capacity bounds."""

__version__ = "0.1.0"

from .channel import InvariantPoint, SerModel, esinr, mary_capacity, ser
from .efficiency import icpe, icse, report
from .errors import (ConfigError, DomainError, GreenLimitsError, InfeasibleError,
                     NumericalError, UndefinedEfficiencyError)
from .extremal import SearchDomain, maximize_spectral, minimize_power, verify_power_constant
from .mac_bounds import PacketLaw, QueueModel, mac_bound, overhead_infimum
from .mac_sim import SimConfig, run_sim, sweep_load
