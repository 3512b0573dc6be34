import math
from dataclasses import replace

import numpy as np
import pytest

from greenlimits.errors import ConfigError
from greenlimits.interference import (DEFAULT_ERRORS, FIG5_THERMAL_DB, CellLayout,
                                      ErrorDistribution, InterferenceConfig, asymptotic_sweep,
                                      db, fig5_surface, from_db, inter_cell_power,
                                      intra_cell_power, run, signal_power, sinr)
from greenlimits.signals import walsh_ensemble

NONE = ErrorDistribution()


def test_zero_errors_walsh_no_leakage():
    ens = walsh_ensemble(8)
    assert intra_cell_power(ens, NONE, trials=50).value <= 1e-12
    assert signal_power(ens, NONE, trials=50).value == pytest.approx(1.0, abs=1e-12)


def test_halving_sigmas_shrinks_intra():
    ens = walsh_ensemble(8)
    small = DEFAULT_ERRORS.scaled(0.1)
    full = intra_cell_power(ens, small, trials=2000, seed=3).value
    half = intra_cell_power(ens, small.scaled(0.5), trials=2000, seed=3).value
    assert full / half >= 1.8


def test_phase_only_binary_walsh():
    # a common rotation keeps orthogonality; the in-phase part of the
    # desired correlation is cos(phi), so E[Re K^2] = (1 + exp(-2 s^2)) / 2
    sigma = 0.1
    ens = walsh_ensemble(2)
    dist = ErrorDistribution(phase=sigma)
    assert intra_cell_power(ens, dist, trials=4000, seed=1).value <= 1e-12
    est = signal_power(ens, dist, trials=4000, seed=1)
    ref = math.sqrt((1 + math.exp(-2 * sigma ** 2)) / 2)
    assert abs(est.value - ref) <= 3 * est.std_error
    assert est.std_error > 0


def test_no_interfering_cells():
    ens = walsh_ensemble(8)
    assert inter_cell_power(CellLayout(), ens, [], DEFAULT_ERRORS).value == 0.0


def test_inter_cell_linear_in_attenuation():
    cfg = InterferenceConfig(trials=300)
    base = run(cfg)
    half = run(cfg, layout=cfg.layout.scaled(0.5))
    tiny = run(cfg, layout=cfg.layout.scaled(1e-9))
    assert half.inter_power / base.inter_power == pytest.approx(0.5, rel=1e-12)
    assert tiny.inter_power <= 1e-8


def test_thermal_only():
    ens = walsh_ensemble(4)
    est = sinr(CellLayout(), ens, [], NONE, thermal_power=0.25, trials=10)
    assert est.g_squared == pytest.approx(4.0, rel=1e-12)


def test_sinr_identity_and_determinism():
    cfg = InterferenceConfig(trials=200, seed=5)
    a, b = run(cfg), run(cfg)
    assert a == b
    assert a.g_squared == a.signal_power / (a.intra_power + a.inter_power + a.thermal_power)
    assert a.thermal_power == pytest.approx(from_db(FIG5_THERMAL_DB))


def test_sweep_decreasing_and_exact_zero():
    rows = asymptotic_sweep([1, 0.1, 0.01, 0.001, 0], InterferenceConfig(trials=300))
    intra = [r.intra for r in rows]
    assert all(x > y for x, y in zip(intra[:-2], intra[1:-1]))
    assert intra[-1] == 0.0


def test_sweep_needs_two_decades():
    with pytest.raises(ConfigError):
        asymptotic_sweep([1, 0.5, 0.2, 0.1], InterferenceConfig(trials=10))


def test_inter_cell_scales_as_inverse_root_length():
    # inter-cell power against M-sequence length N = 2^n - 1
    vals, lengths = [], []
    for n in (5, 7, 9):
        cfg = InterferenceConfig(kind="m-sequence", m=4, degree=n, oversampling=2, trials=200)
        vals.append(run(cfg).inter_power)
        lengths.append(2 ** n - 1)
    slope = np.polyfit(np.log(lengths), np.log(vals), 1)[0]
    assert -0.7 <= slope <= -0.3


def test_sinr_monotone_on_error_grid():
    cfg = InterferenceConfig(trials=100)
    sig = [0.0, 0.05, 0.1, 0.2, 0.4]
    rows = fig5_surface(cfg, sig, sig)
    g2 = np.array([r[2] for r in rows]).reshape(5, 5)
    assert np.all(np.diff(g2, axis=0) <= 1e-12)
    assert np.all(np.diff(g2, axis=1) <= 1e-12)
    assert all(r[5] == pytest.approx(FIG5_THERMAL_DB) for r in rows)


def test_layout_validation():
    with pytest.raises(ConfigError):
        CellLayout(attenuations=(1.5,))
    with pytest.raises(ConfigError):
        CellLayout.from_distances([0.5])
    with pytest.raises(ConfigError):
        ErrorDistribution(delay=-1.0)
    lay = CellLayout.hexagonal_ring(distance=2.0)
    assert lay.mean_attenuation == pytest.approx(2 ** -1.75)


def test_config_validation():
    with pytest.raises(ConfigError):
        run(replace(InterferenceConfig(), kind="gold"))
    with pytest.raises(ConfigError):
        intra_cell_power(walsh_ensemble(4), NONE, trials=0)
    assert db(100.0) == 20.0 and db(0.0) == -math.inf
