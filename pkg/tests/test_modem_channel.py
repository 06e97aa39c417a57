import math

import numpy as np
import pytest

from src.gf import field_new
from src.interleaver import InterleaverPattern, identity_pattern
from src.modem_channel import (
    MODULATIONS,
    bitwise_marginalize,
    constellation_for,
    ebn0_to_esn0,
    ebn0_to_sigma2,
    gray_to_index,
    modulate,
    qam_constellation,
    rayleigh_awgn,
    regroup_bits_to_symbols,
    symbol_likelihoods,
)


@pytest.mark.parametrize("name", sorted(MODULATIONS))
def test_constellations_have_unit_energy_and_distinct_points(name):
    constellation = constellation_for(name)
    assert constellation.size == 2 ** constellation.m
    assert np.mean(np.abs(constellation.points) ** 2) == pytest.approx(1.0, abs=1e-12)
    assert np.unique(np.round(constellation.points, 12)).size == constellation.size


@pytest.mark.parametrize("m", [2, 4, 6, 8])
def test_axis_neighbors_differ_in_one_bit(m):
    constellation = qam_constellation(m)
    points = constellation.points
    spacing = 2.0 / math.sqrt(2.0 * ((1 << (m // 2)) ** 2 - 1) / 3.0)
    for a in range(constellation.size):
        for step in (spacing, 1j * spacing):
            match = np.flatnonzero(np.abs(points - (points[a] + step)) < 1e-9)
            for b in match.tolist():
                assert bin(a ^ b).count("1") == 1


def test_gray_to_index_inverts_binary_reflected_gray():
    indices = np.arange(64)
    assert np.array_equal(gray_to_index(indices ^ (indices >> 1)), indices)


def test_qam4_canonical_point():
    constellation = constellation_for("qam4")
    assert modulate(np.array([0, 0]), constellation)[0] == pytest.approx((1 + 1j) / math.sqrt(2))


def test_qam64_grid_scaling():
    points = constellation_for("qam64").points * math.sqrt(42)
    levels = {-7, -5, -3, -1, 1, 3, 5, 7}
    assert set(np.round(points.real).astype(int).tolist()) == levels
    assert set(np.round(points.imag).astype(int).tolist()) == levels
    assert np.allclose(points, np.round(points.real) + 1j * np.round(points.imag))


def test_all_zero_frame_is_constant():
    symbols = modulate(np.zeros(60, dtype=int), constellation_for("qam64"))
    assert symbols.size == 10
    assert np.all(symbols == symbols[0])


def test_modulate_rejects_partial_symbol():
    with pytest.raises(ValueError):
        modulate(np.zeros(5, dtype=int), constellation_for("qam4"))


def test_unknown_modulation():
    with pytest.raises(ValueError):
        constellation_for("qam32")


def test_noiseless_channel_keeps_faded_points():
    x = constellation_for("qam16").points
    received = rayleigh_awgn(x, 0.0, np.random.default_rng(0))
    assert np.all(received.h >= 0)
    assert np.allclose(received.rho, received.h * x)


def test_fixed_fading_overrides_draw():
    x = constellation_for("qam4").points
    received = rayleigh_awgn(x, 0.0, np.random.default_rng(0), fading=np.full(4, 0.5))
    assert np.allclose(received.rho, 0.5 * x)


def test_rayleigh_moments():
    received = rayleigh_awgn(np.zeros(1_000_000, dtype=complex), 0.25, np.random.default_rng(7))
    assert np.median(received.h) == pytest.approx(math.sqrt(math.log(2)), abs=0.005)
    assert np.mean(received.h**2) == pytest.approx(1.0, rel=0.005)
    assert np.var(received.rho.real) == pytest.approx(0.25, rel=0.01)
    assert np.var(received.rho.imag) == pytest.approx(0.25, rel=0.01)


def test_sigma2_conversion():
    assert ebn0_to_sigma2(10.0, 2 / 3, 6) == pytest.approx(1 / 80)
    assert ebn0_to_esn0(10.0, 2 / 3, 6) == pytest.approx(10.0 + 10 * math.log10(4))


def test_symbol_likelihoods_match_gaussian_kernel():
    constellation = constellation_for("qam4")
    field = field_new(2)
    rhos = np.array([0.3 - 0.8j, -1.1 + 0.2j])
    hs = np.array([0.9, 1.4])
    sigma2 = 0.35
    gammas = symbol_likelihoods(rhos, hs, sigma2, constellation, field)
    for row, (rho, h) in enumerate(zip(rhos, hs)):
        kernel = [math.exp(-abs(rho - h * constellation.points[a]) ** 2 / (2 * sigma2)) for a in range(4)]
        assert gammas[row] == pytest.approx(np.array(kernel) / sum(kernel), abs=1e-12)


def test_symbol_likelihoods_limits():
    constellation = constellation_for("qam16")
    field = field_new(4)
    point = constellation.points[11]
    certain = symbol_likelihoods(np.array([point]), np.array([1.0]), 1e-6, constellation, field)
    assert np.argmax(certain[0]) == 11
    assert certain[0, 11] == pytest.approx(1.0)
    erased = symbol_likelihoods(np.array([0.4 + 0.1j]), np.array([0.0]), 0.2, constellation, field)
    assert np.allclose(erased, 1 / 16)
    with pytest.raises(ValueError):
        symbol_likelihoods(np.array([point]), np.array([1.0]), 0.1, constellation, field_new(6))


def test_qam4_bit_marginal_is_pam_posterior():
    constellation = constellation_for("qam4")
    rho, h, sigma2 = np.array([0.2 - 0.6j]), np.array([0.8]), 0.3
    probs = bitwise_marginalize(rho, h, sigma2, constellation)
    a = 1 / math.sqrt(2)
    plus = math.exp(-((rho[0].real - h[0] * a) ** 2) / (2 * sigma2))
    minus = math.exp(-((rho[0].real + h[0] * a) ** 2) / (2 * sigma2))
    assert probs[0, 0] == pytest.approx(plus / (plus + minus), abs=1e-12)
    assert probs.sum(axis=1) == pytest.approx(np.ones(2))


def test_zero_fading_gives_half_bits():
    probs = bitwise_marginalize(np.array([0.7 + 0.7j]), np.array([0.0]), 0.1, constellation_for("qam64"))
    assert np.allclose(probs, 0.5)


def test_qam4_paths_agree():
    constellation = constellation_for("qam4")
    field = field_new(2)
    rng = np.random.default_rng(3)
    rhos = rng.normal(size=50) + 1j * rng.normal(size=50)
    hs = rng.rayleigh(scale=math.sqrt(0.5), size=50)
    direct = symbol_likelihoods(rhos, hs, 0.4, constellation, field)
    pattern = identity_pattern(50, 2, 2)
    regrouped = regroup_bits_to_symbols(bitwise_marginalize(rhos, hs, 0.4, constellation), pattern, field)
    assert np.max(np.abs(direct - regrouped)) < 1e-9


def test_qam16_marginalization_loses_information():
    constellation = constellation_for("qam16")
    field = field_new(4)
    rhos = np.array([0.3 + 0.3j])
    hs = np.array([1.0])
    direct = symbol_likelihoods(rhos, hs, 0.5, constellation, field)
    pattern = identity_pattern(1, 4, 4)
    regrouped = regroup_bits_to_symbols(bitwise_marginalize(rhos, hs, 0.5, constellation), pattern, field)
    assert np.max(np.abs(direct - regrouped)) > 1e-3


def test_regroup_p2_products():
    field = field_new(2)
    pattern = identity_pattern(1, 2, 2)
    bit_probs = np.array([[0.9, 0.1], [0.3, 0.7]])
    gammas = regroup_bits_to_symbols(bit_probs, pattern, field)
    expected = [0.9 * 0.3, 0.1 * 0.3, 0.9 * 0.7, 0.1 * 0.7]
    assert gammas[0] == pytest.approx(np.array(expected))


def test_regroup_follows_the_pattern():
    field = field_new(2)
    # coded bit 0 sits at modulation bit 1 and vice versa
    pattern = InterleaverPattern(perm=np.array([1, 0]), p=2, m=2, kind="random")
    bit_probs = np.array([[1.0, 0.0], [0.0, 1.0]])
    gammas = regroup_bits_to_symbols(bit_probs, pattern, field)
    assert gammas[0].tolist() == [0.0, 1.0, 0.0, 0.0]


def test_regroup_certain_and_uncertain_bits():
    field = field_new(3)
    pattern = identity_pattern(2, 3, 3)
    certain = np.array([[0.0, 1.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    gammas = regroup_bits_to_symbols(certain, pattern, field)
    assert np.argmax(gammas, axis=1).tolist() == [5, 0]
    assert np.allclose(gammas.max(axis=1), 1.0)
    uniform = regroup_bits_to_symbols(np.full((6, 2), 0.5), pattern, field)
    assert np.allclose(uniform, 1 / 8)
