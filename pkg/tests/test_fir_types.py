import numpy as np
import pytest
from hypothesis import given, strategies as st

from daceq.fir_types import (
    FirFilter,
    LinearPhaseType,
    compatible,
    delay_K,
    expansion_to_impulse,
    frequency_response,
    impulse_to_expansion,
    multiplier_count,
    structural_zeros,
    zero_phase_response,
)

I, II, III, IV = LinearPhaseType


def orders(t):
    start = t.min_order
    return st.integers(0, 30).map(lambda k: start + 2 * k)


@st.composite
def filters(draw):
    t = draw(st.sampled_from(list(LinearPhaseType)))
    n = draw(orders(t))
    m = multiplier_count(t, n)
    exp = draw(st.lists(st.floats(-1, 1), min_size=m, max_size=m))
    return FirFilter(t, n, np.array(exp))


def test_direct_sum_type1():
    assert frequency_response([0.25, 0.5, 0.25], 0.0) == pytest.approx(1.0)


def test_identity_filter():
    for w in (0.0, 0.3, 2.0, 7.0):
        assert frequency_response([1.0], w) == pytest.approx(1.0)


def test_type4_half_difference_at_pi():
    assert frequency_response([0.5, -0.5], np.pi) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("t, n, m", [(I, 12, 7), (III, 38, 19), (II, 37, 19), (IV, 37, 19), (I, 0, 1)])
def test_multipliers(t, n, m):
    assert multiplier_count(t, n) == m


def test_structural_zero_lists():
    assert structural_zeros("I") == []
    assert structural_zeros("II") == [np.pi]
    assert structural_zeros("III") == [0.0, np.pi]
    assert structural_zeros("IV") == [0.0]


@pytest.mark.parametrize(
    "t, n, kind, K",
    [("I", 12, "rtz", 6.25), ("II", 37, "nrtz", 19), ("III", 38, "rtcz", 19.25), ("I", 12, "nrtz", 6.5),
     ("II", 37, "rtz", 18.75), ("IV", 37, "rtcz", 18.75), ("III", 38, "rtc", 19.5), ("IV", 37, "rtc", 19)],
)
def test_delay(t, n, kind, K):
    assert delay_K(t, n, kind).K == K


def test_compatibility():
    assert compatible("nrtz", "I")
    assert not compatible("rtc", "II")
    assert compatible("rtcz", "IV")
    assert not compatible("rtz", "III")


def test_parity_rejected():
    with pytest.raises(ValueError):
        FirFilter(II, 4, np.ones(2))
    with pytest.raises(ValueError):
        delay_K("I", 3, "nrtz")


def test_parse_forms():
    assert LinearPhaseType.parse("iii") is III
    assert LinearPhaseType.parse(4) is IV
    assert LinearPhaseType.parse("2") is II


@given(filters())
def test_symmetry(f):
    h = f.coefficients
    if f.filter_type.symmetric:
        np.testing.assert_array_equal(h, h[::-1])
    else:
        np.testing.assert_array_equal(h, -h[::-1])


@given(filters())
def test_structural_zeros_hold(f):
    z = structural_zeros(f.filter_type)
    if z:
        assert np.max(np.abs(frequency_response(f.coefficients, np.array(z)))) < 1e-12


@given(filters())
def test_expansion_round_trip(f):
    h = expansion_to_impulse(f.filter_type, f.order, f.expansion)
    np.testing.assert_allclose(impulse_to_expansion(f.filter_type, h), f.expansion, atol=1e-15)
    g = FirFilter.from_impulse(f.filter_type, h)
    np.testing.assert_allclose(g.expansion, f.expansion, atol=1e-15)


@given(filters(), st.floats(0, 6 * np.pi))
def test_zero_phase_factorisation(f, w):
    # H = e^{-jwN/2} H_R for symmetric types, j e^{-jwN/2} H_R for antisymmetric ones
    H = frequency_response(f.coefficients, w)
    lin = np.exp(-1j * w * f.order / 2) * (1 if f.filter_type.symmetric else 1j)
    assert H == pytest.approx(lin * zero_phase_response(f, w), abs=1e-12)


def test_from_impulse_rejects_asymmetric():
    with pytest.raises(ValueError):
        FirFilter.from_impulse(I, [1.0, 0.5, 0.9])
