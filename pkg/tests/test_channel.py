import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from greenlimits.channel import (ORTHOGONAL, QAM, UNION_BOUND, InvariantPoint, SerModel,
                                 continuous_se, esinr, mary_capacity, qfunc, ser)
from greenlimits.errors import ConfigError, DomainError

# reference values from 30-digit adaptive quadrature
ORTH_REF = [
    (2, 1.0, 0.158655253931457051),
    (4, 1.0, 0.322220467029591237),
    (4, 4.0, 0.0574665485054713310),
    (16, 9.0, 0.0152505933993170735),
    (1024, 20.0, 0.00211298002450492083),
    (8, 0.01, 0.848071295778786326),
]


def _hb(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_esinr():
    assert esinr(InvariantPoint(4, 2.0, 3.0)) == pytest.approx(6.0)
    assert InvariantPoint(2, 1.0, 2.0).h_squared == 1.0


@pytest.mark.parametrize("args", [(1, 1, 1), (2.5, 1, 1), (2, 0, 1), (2, 1, -1)])
def test_invariant_point_rejects(args):
    with pytest.raises(ConfigError):
        InvariantPoint(*args)


def test_binary_capacity_matches_entropy():
    assert abs(mary_capacity(2, 0.11) - (1 - _hb(0.11))) < 1e-12
    assert mary_capacity(2, 0.11) == pytest.approx(0.500084041835472, abs=1e-12)


@pytest.mark.parametrize("m", [2, 3, 4, 16, 1024])
def test_capacity_endpoints(m):
    assert mary_capacity(m, 0.0) == math.log2(m)
    assert mary_capacity(m, 1 - 1 / m) == 0.0


def test_capacity_domain():
    with pytest.raises(DomainError):
        mary_capacity(4, 0.8)
    with pytest.raises(DomainError):
        mary_capacity(2, -0.1)
    with pytest.raises(DomainError):
        mary_capacity(1, 0.0)


@given(st.sampled_from([2, 4, 8, 64]), st.floats(0, 1), st.floats(0, 1))
def test_capacity_decreasing_in_p(m, a, b):
    top = 1 - 1 / m
    p1, p2 = sorted((a * top, b * top))
    assert mary_capacity(m, p1) >= mary_capacity(m, p2) - 1e-12


@given(st.sampled_from([2, 4, 8, 64, 1000]), st.floats(0, 1))
def test_capacity_bounds(m, u):
    c = mary_capacity(m, u * (1 - 1 / m))
    assert 0 <= c <= math.log2(m)


@pytest.mark.parametrize("m,h2,ref", ORTH_REF)
def test_orthogonal_ser_reference(m, h2, ref):
    assert ser(SerModel(ORTHOGONAL), m, h2) == pytest.approx(ref, rel=1e-9)


def test_binary_orthogonal_closed_form():
    h2 = np.linspace(0, 30, 31)
    np.testing.assert_allclose(SerModel()(2, h2), qfunc(np.sqrt(h2)), rtol=1e-9, atol=1e-300)


def test_ser_zero_energy_is_chance():
    for kind, m in ((ORTHOGONAL, 8), (QAM, 16), (UNION_BOUND, 8)):
        assert SerModel(kind)(m, 0.0) == pytest.approx(1 - 1 / m, abs=1e-12)


def test_qam_reference():
    pl = 2 * 0.75 * qfunc(math.sqrt(3 * 10 / 15))
    assert SerModel(QAM)(16, 10.0) == pytest.approx(0.222030850272437931, rel=1e-12)
    assert SerModel(QAM)(16, 10.0) == pytest.approx(2 * pl - pl * pl, rel=1e-12)


def test_qam_needs_square_power_of_four():
    with pytest.raises(ConfigError):
        SerModel(QAM)(8, 1.0)
    with pytest.raises(ConfigError):
        SerModel(QAM)(9, 1.0)


def test_union_bound_dominates_exact():
    h2 = np.geomspace(1, 50, 20)
    for m in (4, 16, 64):
        assert np.all(SerModel(UNION_BOUND)(m, h2) >= SerModel()(m, h2) - 1e-15)


@given(st.sampled_from([2, 4, 16, 256]), st.floats(0, 40), st.floats(0, 40))
def test_ser_monotone_in_h2(m, a, b):
    lo, hi = sorted((a, b))
    model = SerModel()
    assert model(m, lo) >= model(m, hi) - 1e-15


def test_ser_rejects_bad_input():
    with pytest.raises(DomainError):
        SerModel()(4, -1.0)
    with pytest.raises(ConfigError):
        SerModel("nonsense")


def test_continuous_se():
    assert continuous_se(1.0) == 1.0
    assert continuous_se(0.0) == 0.0
    with pytest.raises(DomainError):
        continuous_se(-1.0)
