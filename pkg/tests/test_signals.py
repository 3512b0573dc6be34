import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from greenlimits.errors import ConfigError, DomainError
from greenlimits.signals import (ErrorVector, apply_errors, apply_errors_batch, correlation,
                                 ensemble_to_csv, lfsr_bits, max_offdiagonal, mseq_chips,
                                 mseq_crosscorrelation_bound, mseq_ensemble, sequence_period,
                                 walsh_ensemble)


def test_walsh_order_two_patterns():
    ens = walsh_ensemble(2, oversampling=1)
    np.testing.assert_array_equal(ens.sequences.real, [[1, 1], [1, -1]])
    assert correlation(ens[0], ens[1]).value == 0.0


@pytest.mark.parametrize("m", [4, 64, 1024])
def test_walsh_gram_identity(m):
    ens = walsh_ensemble(m, oversampling=1 if m == 1024 else 8)
    G = ens.gram()
    assert np.max(np.abs(G - np.eye(m))) <= 1e-12


def test_walsh_64_all_pairs():
    ens = walsh_ensemble(64)
    G = ens.gram()
    off = np.abs(G[~np.eye(64, dtype=bool)])
    assert off.size == 64 * 63 and np.all(off <= 1e-12)


@pytest.mark.parametrize("m", [3, 6, 2048])
def test_walsh_rejects(m):
    with pytest.raises(ConfigError):
        walsh_ensemble(m)


@pytest.mark.parametrize("ens", [walsh_ensemble(16), mseq_ensemble(5, m=8, oversampling=4)])
def test_unit_energy(ens):
    energy = np.sum(np.abs(ens.sequences) ** 2, axis=1) / ens.T
    np.testing.assert_allclose(energy, 1.0, atol=1e-12)


def test_degree_three_sequence():
    chips = mseq_chips(3, (3, 1, 0))
    assert chips.size == 7
    bits = lfsr_bits((3, 1, 0), 21)
    assert sequence_period(bits, 7) == 7
    # balance property: one more -1 (bit 1) than +1 chips
    assert np.sum(chips == -1) == 4


@pytest.mark.parametrize("n", range(2, 13))
def test_default_polynomials_are_primitive(n):
    assert mseq_chips(n).size == 2 ** n - 1


def test_reducible_polynomial_rejected():
    with pytest.raises(ConfigError):
        mseq_chips(3, (3, 2, 1, 0))


@pytest.mark.parametrize("n", [3, 5, 7])
def test_mseq_shift_crosscorrelation_two_valued(n):
    ens = mseq_ensemble(n, oversampling=1)
    N = 2 ** n - 1
    G = ens.gram().real
    off = G[~np.eye(N, dtype=bool)]
    np.testing.assert_allclose(off, -1.0 / N, atol=1e-12)
    assert max_offdiagonal(ens) <= mseq_crosscorrelation_bound(n) + 1e-12


def test_zero_error_is_bit_identical():
    s = walsh_ensemble(8)[3]
    out = apply_errors(s, ErrorVector(), 8)
    assert np.array_equal(out, s)


def test_phase_flip_negates():
    s = walsh_ensemble(4)[1]
    out = apply_errors(s, ErrorVector(phase=math.pi), 8)
    np.testing.assert_allclose(out, -s, atol=1e-15)
    assert correlation(s, out).value == pytest.approx(-1.0, abs=1e-12)


def test_amplitude_scales_correlation():
    s = walsh_ensemble(4)[2]
    assert correlation(s, apply_errors(s, ErrorVector(amplitude=0.5))).value == pytest.approx(1.5)


def test_half_chip_delay_overlap():
    # s0 = (+1, +1), s1 = (+1, -1) delayed half a chip: overlap (0.5 * 1 - 0.5 * 1) / 2 + 0.5 / 2
    ens = walsh_ensemble(2, oversampling=8)
    k = correlation(ens[0], apply_errors(ens[1], ErrorVector(delay=0.5), 8))
    assert k.value == pytest.approx(0.25, abs=1e-12)
    assert k.magnitude == pytest.approx(0.25, abs=1e-12)


def test_fractional_delay_interpolates():
    s = np.ones(8, dtype=complex)
    out = apply_errors(s, ErrorVector(delay=0.25), oversampling=2)
    # half a sample of shift: the first sample blends the zero padding
    assert out[0] == pytest.approx(0.5)
    np.testing.assert_allclose(out[1:], 1.0)


def test_duration_error_domain():
    s = walsh_ensemble(2)[0]
    with pytest.raises(DomainError):
        apply_errors(s, ErrorVector(duration=1.0))
    with pytest.raises(DomainError):
        apply_errors(s, ErrorVector(delay=math.nan))


def test_phase_then_amplitude_composes():
    s = walsh_ensemble(8)[5]
    both = apply_errors(s, ErrorVector(amplitude=0.25, phase=0.3))
    step = apply_errors(apply_errors(s, ErrorVector(phase=0.3)), ErrorVector(amplitude=0.25))
    np.testing.assert_allclose(both, step, rtol=0, atol=4e-16)


def test_batch_matches_single():
    s = walsh_ensemble(8)[2]
    E = np.array([[0.1, 0.2, 0.01, 0.02, 0.3], [0, -0.4, 0, 0, 0], [0, 0, 0, 0, 0]])
    batch = apply_errors_batch(s, E, 8)
    for row, e in zip(batch, E):
        np.testing.assert_array_equal(row, apply_errors(s, ErrorVector(*e), 8))


def test_correlation_pads_short_waveform():
    s = np.ones(4, dtype=complex)
    assert correlation(s, s[:2]).value == 0.5


errs = st.tuples(*(st.floats(-0.02, 0.02) for _ in range(5)))


@given(st.sampled_from([2, 8, 64]), errs)
def test_acf_bounded_by_amplitude(m, e):
    e = ErrorVector(*e)
    s = walsh_ensemble(m, oversampling=4)[m - 1]
    k = correlation(s, apply_errors(s, e, 4))
    assert k.magnitude <= 1 + e.amplitude + 1e-12


def _leak_ratio(m, e):
    ens = walsh_ensemble(m, oversampling=4)
    s0, s1 = ens[0], ens[m - 1]
    full = correlation(s0, apply_errors(s1, e, 4)).magnitude
    half = correlation(s0, apply_errors(s1, e.scaled(0.5), 4)).magnitude
    return half / full


@pytest.mark.parametrize("m", [2, 8, 64])
def test_halving_errors_halves_leakage(m):
    # first-order scaling on generic small error vectors; second-order
    # terms leave an excess of about 0.2% at this magnitude
    rng = np.random.default_rng(12)
    ratios = [_leak_ratio(m, ErrorVector(*e)) for e in rng.normal(0, 1e-3, (100, 5))]
    assert max(ratios) <= 0.5 * 1.01


def test_halving_fails_when_first_order_terms_cancel():
    # stretch and frequency ramp of opposite sign cancel to first order
    e = ErrorVector(duration=-0.015625, frequency=0.015625)
    assert _leak_ratio(64, e) > 0.5


@given(st.floats(1e-6, 1e-2))
def test_leakage_vanishes_with_errors(eps):
    ens = walsh_ensemble(8)
    k = correlation(ens[0], apply_errors(ens[3], ErrorVector(eps, eps, eps, eps, eps)))
    assert k.magnitude <= 20 * eps


def test_ensemble_csv(tmp_path):
    p = tmp_path / "w.csv"
    ensemble_to_csv(walsh_ensemble(2, oversampling=1), p)
    lines = p.read_text().splitlines()
    assert lines[0] == "index,re_0,re_1,im_0,im_1"
    assert lines[2] == "1,1.0,-1.0,0.0,0.0"
