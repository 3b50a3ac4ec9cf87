import math
import warnings

import numpy as np
import pytest

import fdrelay.design as design
from fdrelay import AdcModel, approx_rate, half_duplex_rate, linear_to_db
from fdrelay.design import (
    DesignError,
    MultimodalWarning,
    NoInteriorMaximum,
    NoSignChange,
    SearchBracket,
    TargetUnreachable,
    duplex_crossover_antennas,
    duplex_crossover_loop_interference,
    optimal_relay_power_homogeneous,
    optimize_relay_power,
    required_antennas,
    required_source_power,
)
from tests.conftest import db, make_config


def dB(x):
    return float(linear_to_db(x))


def fig7(li_db, alpha=0.6366):
    return make_config(M=64, p_S=0.1, p_p=0.1, alpha=alpha, theta=0.8825, sigma_LI2=db(li_db))


@pytest.mark.parametrize("li,linear,decibel", [(-20, 5.641, 7.51), (-10, 1.784, 2.51)])
def test_closed_form_relay_power(li, linear, decibel):
    p = optimal_relay_power_homogeneous(fig7(li))
    assert p == pytest.approx(linear, abs=1e-3)
    assert dB(p) == pytest.approx(decibel, abs=5e-3)


def test_one_bit_power_reduction():
    p1 = optimal_relay_power_homogeneous(fig7(-20))
    pp = optimal_relay_power_homogeneous(fig7(-20, alpha=1.0))
    assert 1 - p1 / pp == pytest.approx(1 - math.sqrt(0.6366), rel=1e-12)
    assert round(1 - p1 / pp, 3) == 0.202


def test_closed_form_rejections():
    with pytest.raises(DesignError, match="sigma_LI2 = 0"):
        optimal_relay_power_homogeneous(make_config(sigma_LI2=0.0))
    with pytest.raises(DesignError, match="homogeneous"):
        optimal_relay_power_homogeneous(make_config(beta_SR=[1, 2, 1, 1, 1]))


@pytest.mark.parametrize("alpha", [0.6366, 0.8825, 1.0])
@pytest.mark.parametrize("K", [2, 5, 10])
@pytest.mark.parametrize("li", [0.01, 0.1, 1.0])
def test_search_matches_closed_form(alpha, K, li):
    c = make_config(M=64, K=K, p_S=0.1, p_p=0.1, alpha=alpha, theta=0.8825, sigma_LI2=li)
    assert abs(dB(optimize_relay_power(c)) - dB(optimal_relay_power_homogeneous(c))) < 0.05


def test_optimum_independent_of_M_theta_pp():
    c = fig7(-20)
    ref = optimal_relay_power_homogeneous(c)
    for other in (c.replace(M=256), c.replace(theta=0.6366), c.replace(p_p=10.0)):
        assert optimal_relay_power_homogeneous(other) == ref
    drift = dB(optimize_relay_power(c.replace(M=256))) - dB(optimize_relay_power(c))
    assert abs(drift) < 0.1


def test_heterogeneous_search_beats_random_points():
    rng = np.random.default_rng(3)
    c = make_config(M=64, p_S=0.1, p_p=0.1, alpha=0.8825, theta=0.8825, sigma_LI2=0.1,
                    beta_SR=rng.uniform(0.5, 2, 5), beta_RD=rng.uniform(0.5, 2, 5))
    best = approx_rate(c.replace(p_R=optimize_relay_power(c))).sum_rate
    for p in 10 ** rng.uniform(-4, 4, 100):
        assert approx_rate(c.replace(p_R=p)).sum_rate <= best + 1e-9


def test_no_interior_maximum_without_loop_interference():
    with pytest.raises(NoInteriorMaximum, match="upper end"):
        optimize_relay_power(make_config(sigma_LI2=0.0))


def test_low_edge_never_selected():
    c = fig7(-10)
    p = optimize_relay_power(c, SearchBracket(1e-8, 1e4))
    assert p > 1e-2


def test_multimodal_objective_warns(monkeypatch):
    def bumpy(cfg, objective="approx"):
        x = math.log10(cfg.p_R)
        return math.exp(-((x + 2) ** 2)) + 2 * math.exp(-((x - 2) ** 2))

    monkeypatch.setattr(design, "_sum_rate", bumpy)
    with pytest.warns(MultimodalWarning):
        p = optimize_relay_power(make_config())
    assert math.log10(p) == pytest.approx(2.0, abs=1e-3)


def fig6(M):
    return make_config(M=M, p_S=0.1, p_R=0.1, p_p=0.1, alpha=0.8825, theta=0.8825)


@pytest.mark.parametrize("M,target", [(100, 13.5), (200, 15.5)])
def test_loop_interference_crossover(M, target):
    li = duplex_crossover_loop_interference(fig6(M))
    assert abs(dB(li) - target) <= 0.5
    c = fig6(M).replace(sigma_LI2=li)
    assert approx_rate(c).sum_rate == pytest.approx(half_duplex_rate(c).sum(), abs=1e-3)


def test_crossover_requires_sign_change():
    with pytest.raises(NoSignChange):
        duplex_crossover_loop_interference(fig6(100), SearchBracket(1e-4, 1e-2))


def fig9(bits):
    adc = AdcModel.perfect() if bits is None else AdcModel.from_bits(bits)
    return make_config(sigma_LI2=db(16), relay_adc=adc, dest_adc=adc)


def test_antenna_crossover_minimal_and_ordered():
    M0 = duplex_crossover_antennas(fig9(2), SearchBracket(2, 5000))
    c = fig9(2)

    def gap(M):
        return approx_rate(c.replace(M=M)).sum_rate - half_duplex_rate(c.replace(M=M)).sum()

    assert gap(M0) >= 0 > gap(M0 - 1)
    assert M0 < 185
    assert duplex_crossover_antennas(fig9(None), SearchBracket(2, 5000)) > M0


def test_antenna_crossover_grows_with_loop_interference():
    M0 = [duplex_crossover_antennas(fig9(2).replace(sigma_LI2=db(x)), SearchBracket(2, 20000))
          for x in (12, 16, 20)]
    assert M0[0] < M0[1] < M0[2]
    with pytest.raises(NoSignChange):
        duplex_crossover_antennas(fig9(2), SearchBracket(2, 10))


def fig8(bits, li_db, M=200):
    adc = AdcModel.perfect() if bits is None else AdcModel.from_bits(bits)
    return make_config(M=M, sigma_LI2=db(li_db), relay_adc=adc, dest_adc=adc)


@pytest.mark.parametrize("li,target", [(-20, -6.25), (0, -1.25)])
def test_required_source_power_one_bit(li, target):
    assert abs(dB(required_source_power(fig8(1, li), 5.0)) - target) <= 0.5


def test_required_source_power_meets_target_and_shrinks_with_M():
    c = fig8(2, -20)
    p = required_source_power(c, 5.0)
    assert approx_rate(c.replace(p_S=p, p_R=5 * p)).sum_rate >= 5.0
    assert required_source_power(c.replace(M=400), 5.0) < p
    custom = required_source_power(c, 5.0, coupling=lambda ps: 1.0)
    assert custom != p


def test_required_source_power_errors_and_edges():
    with pytest.raises(TargetUnreachable):
        required_source_power(fig8(1, 0), 500.0)
    lo = required_source_power(fig8(None, -20), 0.001, SearchBracket(1e-2, 1e2))
    assert lo == 1e-2


@pytest.mark.parametrize("bits,expected,tol", [(None, 158, 5), (1, 305, 8), (3, 167, 5)])
def test_required_antennas(bits, expected, tol):
    adc = AdcModel.perfect() if bits is None else AdcModel.from_bits(bits)
    c = make_config(relay_adc=adc, sigma_LI2=0.1)
    M = required_antennas(c, 15.0, 2000)
    assert abs(M - expected) <= tol
    from fdrelay import exact_rate

    assert exact_rate(c.replace(M=M)).sum_rate >= 15.0 > exact_rate(c.replace(M=M - 1)).sum_rate


def test_required_antennas_unreachable():
    with pytest.raises(TargetUnreachable):
        required_antennas(make_config(theta=0.6366), 50.0, 5000)


def test_bracket_validation():
    with pytest.raises(ValueError):
        SearchBracket(2.0, 1.0)
    with pytest.raises(ValueError):
        SearchBracket(1.0, 2.0, tol=0.0)
