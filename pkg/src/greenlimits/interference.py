"""Monte-Carlo intra- and inter-cell interference of orthogonal ensembles.

Powers are relative to a unit-energy desired signal. Each interfering
signal contributes sqrt(E[|K|^2]) where K is its normalized correlation
with the receiver template; the desired term uses the in-phase part
sqrt(E[Re(K_xx)^2]) because the receiver is coherent with its own signal.
Error vectors are drawn independently per signal and per trial; a fixed
seed gives common random numbers across sweep points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError
from .signals import (SignalEnsemble, apply_errors_batch, correlate_batch,
                      mseq_ensemble, walsh_ensemble)

FIG5_THERMAL_DB = -113.101
_CHUNK = 1 << 22  # samples per batch


@dataclass(frozen=True)
class ErrorDistribution:
    """Zero-mean Gaussian standard deviations per error component."""

    amplitude: float = 0.0
    delay: float = 0.0
    duration: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if any(v < 0 or not math.isfinite(v) for v in self.sigmas):
            raise ConfigError("standard deviations must be finite and >= 0")

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([self.amplitude, self.delay, self.duration, self.frequency, self.phase])

    def scaled(self, k: float) -> "ErrorDistribution":
        return ErrorDistribution(*(k * self.sigmas))

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # standard normals are always drawn so scaled copies share draws
        z = rng.standard_normal((size, 5))
        e = z * self.sigmas
        # a stretch of |eps_T| >= 1 has no meaning; clamp the far tail
        np.clip(e[:, 2], -0.5, 0.5, out=e[:, 2])
        return e


DEFAULT_ERRORS = ErrorDistribution(amplitude=0.05, delay=0.05, duration=0.002,
                                   frequency=0.005, phase=0.05)


@dataclass(frozen=True)
class CellLayout:
    """Reference cell plus interfering cells with amplitude attenuation factors."""

    attenuations: tuple = ()
    actives: int = 4
    asynchronous: bool = True
    distances: tuple = ()
    reference_distance: float = 1.0
    path_loss_exponent: float = 3.5

    def __post_init__(self):
        a = tuple(float(v) for v in self.attenuations)
        object.__setattr__(self, "attenuations", a)
        if any(not 0 < v <= 1 for v in a):
            raise ConfigError("attenuation factors must lie in (0, 1]")
        if self.actives < 1:
            raise ConfigError("need at least one active signal per cell")

    @classmethod
    def from_distances(cls, distances, reference_distance=1.0, path_loss_exponent=3.5, **kw):
        d = tuple(float(x) for x in distances)
        if any(x < reference_distance for x in d):
            raise ConfigError("interfering cells must lie beyond the reference distance")
        att = tuple((x / reference_distance) ** (-path_loss_exponent / 2) for x in d)
        return cls(attenuations=att, distances=d, reference_distance=reference_distance,
                   path_loss_exponent=path_loss_exponent, **kw)

    @classmethod
    def hexagonal_ring(cls, distance=2.0, cells=6, **kw):
        return cls.from_distances([distance] * cells, **kw)

    @property
    def mean_attenuation(self) -> float:
        return float(np.mean(self.attenuations)) if self.attenuations else 0.0

    def scaled(self, k: float) -> "CellLayout":
        return replace(self, attenuations=tuple(k * a for a in self.attenuations))


class PowerEstimate(NamedTuple):
    value: float
    std_error: float


@dataclass(frozen=True)
class SinrEstimate:
    signal_power: float
    intra_power: float
    inter_power: float
    thermal_power: float
    trials: int
    std_error: float
    intra_se: float = 0.0
    inter_se: float = 0.0
    g_squared: float = field(init=False)

    def __post_init__(self):
        den = self.intra_power + self.inter_power + self.thermal_power
        object.__setattr__(self, "g_squared", self.signal_power / den if den > 0 else math.inf)


def _rms(samples: np.ndarray) -> PowerEstimate:
    """sqrt(mean(samples)) with a delta-method standard error."""
    n = samples.size
    mean = float(np.mean(samples))
    if mean <= 0:
        return PowerEstimate(0.0, 0.0)
    se_mean = float(np.std(samples, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return PowerEstimate(math.sqrt(mean), se_mean / (2 * math.sqrt(mean)))


def _correlations(template, waveform, errors, oversampling, prev=None):
    """Complex correlations of the template with the distorted waveform per error row.

    ``prev`` optionally holds per-row data signs of a preceding symbol of
    the same waveform (asynchronous streams), shifted one symbol earlier.
    """
    T = waveform.size
    rows = max(1, _CHUNK // T)
    out = np.empty(errors.shape[0], dtype=complex)
    chip_len = T / oversampling
    for lo in range(0, errors.shape[0], rows):
        e = errors[lo:lo + rows]
        k = correlate_batch(template, apply_errors_batch(waveform, e, oversampling))
        if prev is not None:
            e_prev = e.copy()
            e_prev[:, 1] -= chip_len
            k = k + prev[lo:lo + rows] * correlate_batch(
                template, apply_errors_batch(waveform, e_prev, oversampling))
        out[lo:lo + rows] = k
    return out


def _check_trials(trials):
    if trials < 1:
        raise ConfigError("trials must be >= 1")


def signal_power(ensemble: SignalEnsemble, dist: ErrorDistribution, x: int = 0,
                 trials: int = 1000, seed=0, own_error: bool = True) -> PowerEstimate:
    """sqrt(E[Re(K_xx)^2]) of the desired signal against its own template."""
    _check_trials(trials)
    s = ensemble[x]
    if not own_error:
        return PowerEstimate(correlate_batch(s, s[None, :])[0].real, 0.0)
    rng = np.random.default_rng(seed)
    k = _correlations(s, s, dist.draw(rng, trials), ensemble.oversampling)
    return _rms(k.real ** 2)


def intra_cell_power(ensemble: SignalEnsemble, dist: ErrorDistribution, x: int = 0,
                     trials: int = 1000, seed=0) -> PowerEstimate:
    """Sum over j != x of sqrt(E[|K_jx(E_j)|^2]) inside the reference cell."""
    _check_trials(trials)
    if not 0 <= x < ensemble.m:
        raise ConfigError(f"symbol index {x} outside ensemble of size {ensemble.m}")
    rng = np.random.default_rng(seed)
    template = ensemble[x]
    total, var = 0.0, 0.0
    for j in range(ensemble.m):
        if j == x:
            continue
        errs = dist.draw(rng, trials)
        k = _correlations(template, ensemble[j], errs, ensemble.oversampling)
        est = _rms(np.abs(k) ** 2)
        total += est.value
        var += est.std_error ** 2
    return PowerEstimate(total, math.sqrt(var))


def inter_cell_power(layout: CellLayout, reference: SignalEnsemble,
                     cell_ensembles: Sequence[SignalEnsemble], dist: ErrorDistribution,
                     x: int = 0, trials: int = 1000, seed=0) -> PowerEstimate:
    """Attenuation-weighted sum of sqrt(E[|K|^2]) over other cells' active signals.

    With ``layout.asynchronous`` each interfering stream gets a uniform
    random timing offset over one symbol and random data signs on the
    current and preceding symbols, on top of its orthogonality errors.
    """
    _check_trials(trials)
    if len(cell_ensembles) != len(layout.attenuations):
        raise ConfigError("need one ensemble per interfering cell")
    if not layout.attenuations:
        return PowerEstimate(0.0, 0.0)
    rng = np.random.default_rng(seed)
    template = reference[x]
    total, var = 0.0, 0.0
    for a, ens in zip(layout.attenuations, cell_ensembles):
        if ens.T != reference.T or ens.oversampling != reference.oversampling:
            raise ConfigError("cell ensembles must share the reference sample grid")
        if layout.actives > ens.m:
            raise ConfigError(f"cell ensemble has only {ens.m} signals")
        chips = ens.T / ens.oversampling
        for j in range(layout.actives):
            errs = dist.draw(rng, trials)
            prev = None
            if layout.asynchronous:
                errs[:, 1] += rng.uniform(0.0, chips, trials)
                # data sign of the preceding symbol relative to the current one
                prev = rng.choice((-1.0, 1.0), size=trials)
            k = _correlations(template, ens[j], errs, ens.oversampling, prev)
            est = _rms(np.abs(k) ** 2)
            total += a * est.value
            var += (a * est.std_error) ** 2
    return PowerEstimate(total, math.sqrt(var))


def db(x: float) -> float:
    return 10 * math.log10(x) if x > 0 else -math.inf


def from_db(x: float) -> float:
    return 10 ** (x / 10)


@dataclass(frozen=True)
class InterferenceConfig:
    """Everything needed to build ensembles and run the estimators."""

    kind: str = "walsh"        # reference-cell ensemble: walsh | m-sequence
    m: int = 8
    degree: int = 7            # M-sequence degree for m-sequence cells
    oversampling: int = 8
    layout: CellLayout = field(default_factory=CellLayout.hexagonal_ring)
    errors: ErrorDistribution = DEFAULT_ERRORS
    thermal_db: float = FIG5_THERMAL_DB
    trials: int = 1000
    seed: int = 0
    x: int = 0
    own_error: bool = True

    def reference(self) -> SignalEnsemble:
        if self.kind == "walsh":
            return walsh_ensemble(self.m, self.oversampling)
        if self.kind == "m-sequence":
            return mseq_ensemble(self.degree, m=self.m, oversampling=self.oversampling)
        raise ConfigError(f"unknown ensemble kind {self.kind!r}")

    def cells(self, reference: SignalEnsemble):
        """Per-cell ensembles on the reference sample grid.

        Walsh reference cells reuse the Walsh set in every cell (only the
        asynchronous offsets and errors separate them); M-sequence cells use
        disjoint blocks of shifts of the same sequence.
        """
        n_cells = len(self.layout.attenuations)
        if self.kind == "walsh":
            return [reference] * n_cells
        N = reference.chips_per_symbol
        stride = max(self.m, N // (n_cells + 1))
        return [mseq_ensemble(self.degree, m=self.layout.actives, oversampling=self.oversampling,
                              offset=(c + 1) * stride) for c in range(n_cells)]

    @property
    def thermal_power(self) -> float:
        return from_db(self.thermal_db)


def sinr(layout: CellLayout, reference: SignalEnsemble, cell_ensembles, dist: ErrorDistribution,
         thermal_power: float, trials: int = 1000, seed=0, x: int = 0,
         own_error: bool = True) -> SinrEstimate:
    """SINR g^2 = desired / (intra + inter + thermal) with its components."""
    if thermal_power < 0:
        raise ConfigError("thermal power must be >= 0")
    ss = np.random.SeedSequence(seed)
    s_seed, a_seed, e_seed = ss.spawn(3)
    sig = signal_power(reference, dist, x, trials, s_seed, own_error)
    intra = intra_cell_power(reference, dist, x, trials, a_seed)
    inter = inter_cell_power(layout, reference, cell_ensembles, dist, x, trials, e_seed)
    den = intra.value + inter.value + thermal_power
    if den > 0 and sig.value > 0:
        rel = math.hypot(sig.std_error / sig.value,
                         math.hypot(intra.std_error, inter.std_error) / den)
    else:
        rel = 0.0
    g2 = sig.value / den if den > 0 else math.inf
    return SinrEstimate(sig.value, intra.value, inter.value, thermal_power, trials, rel * g2,
                        intra.std_error, inter.std_error)


def run(config: InterferenceConfig, errors: ErrorDistribution = None,
        layout: CellLayout = None) -> SinrEstimate:
    ref = config.reference()
    cfg = config if layout is None else replace(config, layout=layout)
    return sinr(cfg.layout, ref, cfg.cells(ref), errors or cfg.errors, cfg.thermal_power,
                cfg.trials, cfg.seed, cfg.x, cfg.own_error)


class SweepRow(NamedTuple):
    scale: float
    intra: float
    inter: float
    g_squared: float
    intra_se: float
    inter_se: float


def asymptotic_sweep(scales: Sequence[float], config: InterferenceConfig = InterferenceConfig()):
    """Intra, inter and g^2 as the error distribution is scaled toward zero."""
    scales = [float(s) for s in scales]
    pos = [s for s in scales if s > 0]
    if len(scales) < 4 or not pos or max(pos) / min(pos) < 100:
        raise ConfigError("need >= 4 scales spanning >= 2 decades")
    if any(s < 0 for s in scales):
        raise ConfigError("scales must be >= 0")
    rows = []
    for s in scales:
        est = run(config, config.errors.scaled(s))
        rows.append(SweepRow(s, est.intra_power, est.inter_power, est.g_squared,
                             est.intra_se, est.inter_se))
    return rows


FIG5_COLUMNS = ("sigma_sync", "sigma_phase", "g2_db", "intra_db", "inter_db",
                "thermal_db", "trials", "std_err")


def fig5_surface(config: InterferenceConfig, sync_sigmas: Sequence[float],
                 phase_sigmas: Sequence[float]):
    """SINR and interference levels over a (sync, phase) standard-deviation grid."""
    rows = []
    base = config.errors
    for ss in sync_sigmas:
        for sp in phase_sigmas:
            dist = replace(base, delay=float(ss), phase=float(sp))
            est = run(config, dist)
            rows.append((float(ss), float(sp), db(est.g_squared), db(est.intra_power),
                         db(est.inter_power), db(est.thermal_power), est.trials,
                         est.std_error))
    return rows
