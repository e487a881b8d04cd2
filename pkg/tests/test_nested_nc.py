from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from latnc import nested_nc as nc
from latnc.errors import IndexOutOfRange, OddL
from latnc.lattice_core import awgn_figures, lattice_mod

ONE_D = nc.one_dim_pair()
HEX = nc.hexagonal_pair()


def point(pair, user, value):
    return next(c for c in pair.codebook(user) if np.allclose(c.coordinates, np.atleast_1d(value)))


def dither(*values):
    return nc.DitherVector(np.asarray(values, dtype=float))


def test_codebook_sizes():
    assert [len(ONE_D.codebook("A")), len(ONE_D.codebook("B"))] == [8, 4]
    assert [len(HEX.codebook("A")), len(HEX.codebook("B"))] == [16, 4]


def test_map_message():
    assert nc.map_message(ONE_D, "A", 0).coordinates.tolist() == [-4.0]
    assert nc.map_message(ONE_D, "B", 3).coordinates.tolist() == [2.0]
    with pytest.raises(IndexOutOfRange):
        nc.map_message(ONE_D, "A", 8)


@pytest.mark.parametrize("c, d, want", [(3, 2, 1), (-4, 3, 1), (0, 0, 0)])
def test_encode_single(c, d, want):
    assert nc.encode_single(ONE_D, "A", point(ONE_D, "A", c), dither(d))[0] == pytest.approx(want)


def test_decode_single_noiseless():
    c = point(ONE_D, "A", 3)
    x = nc.encode_single(ONE_D, "A", c, dither(2))
    assert nc.decode_single(ONE_D, "A", x, 1.0, 1.0, dither(2)) == c
    assert nc.decode_single(ONE_D, "A", 2 * x, 2.0, 1.0, dither(2)) == c


def test_mmse_alpha():
    assert awgn_figures(3)[1] == pytest.approx(0.75)


def test_encode_network_examples():
    assert nc.encode_network(ONE_D, point(ONE_D, "A", 3), point(ONE_D, "B", 2), dither(0))[0] == pytest.approx(-3)
    assert nc.encode_network(ONE_D, point(ONE_D, "A", 1), point(ONE_D, "B", 0), dither(0))[0] == pytest.approx(1)


def test_side_info_noiseless():
    c_a, c_b = point(ONE_D, "A", 3), point(ONE_D, "B", 2)
    y = nc.encode_network(ONE_D, c_a, c_b, dither(1))
    assert nc.decode_with_side_info(ONE_D, "A", y, 1.0, 1.0, dither(1), c_b) == c_a


def test_wrong_side_info_shifts():
    c_a, c_b, wrong = point(ONE_D, "A", 3), point(ONE_D, "B", 2), point(ONE_D, "B", -2)
    y = nc.encode_network(ONE_D, c_a, c_b, dither(0.3))
    got = nc.decode_with_side_info(ONE_D, "A", y, 1.0, 1.0, dither(0.3), wrong)
    want = lattice_mod(ONE_D.coarse, c_a.coordinates + c_b.coordinates - wrong.coordinates)
    assert np.allclose(got.coordinates, want)


@pytest.mark.parametrize("L, gain", [(4, 10 * np.log10(6 / 5)), (2, 10 * np.log10(4 / 3))])
def test_shaping_gain_values(L, gain):
    res = nc.shaping_gain_1d(L)
    assert res.gain_db == pytest.approx(gain)
    if L == 4:
        assert (res.p_a, res.p_b) == (Fraction(20, 3), Fraction(8))


def test_shaping_gain_monotone():
    gains = [nc.shaping_gain_1d(L).gain_db for L in range(2, 200, 2)]
    assert all(a > b for a, b in zip(gains, gains[1:])) and gains[-1] < 0.05


def test_shaping_gain_odd_rejected():
    with pytest.raises(OddL):
        nc.shaping_gain_1d(3)


@pytest.mark.parametrize("L", range(2, 65, 2))
def test_codebook_powers_match_closed_form(L):
    res = nc.shaping_gain_1d(L)
    assert nc.codebook_power_1d(L, 1) == res.p_a
    assert nc.codebook_power_1d(L, 2) == res.p_b


def test_dither_uniformity():
    rng = np.random.default_rng(5)
    c = point(ONE_D, "A", 3)
    d = rng.uniform(-4, 4, 100_000)
    x = lattice_mod(ONE_D.coarse, (c.coordinates - d[:, None]))[:, 0]
    counts, _ = np.histogram(x, bins=16, range=(-4, 4))
    assert chisquare(counts).pvalue > 0.001


def test_two_step_matches_combined():
    rng = np.random.default_rng(3)
    for _ in range(200):
        c_a = HEX.codebook("A")[rng.integers(16)]
        c_b = HEX.codebook("B")[rng.integers(4)]
        d = nc.make_dither(HEX, int(rng.integers(1 << 30)))
        assert np.allclose(nc.encode_network(HEX, c_a, c_b, d), nc.encode_network_two_step(HEX, c_a, c_b, d))


# --- properties ---------------------------------------------------------------


@given(st.sampled_from(["1d", "hex"]), st.sampled_from(["A", "B"]), st.integers(0, 15), st.integers(0, 15),
       st.integers(0, 2**31), st.floats(0.01, 4.0), st.floats(0.3, 3.0))
def test_virtual_single_user_exact(kind, user, i, j, seed, sigma, beta):
    pair = ONE_D if kind == "1d" else HEX
    own, oth = pair.codebook(user), pair.codebook(nc.other(user))
    c_u, c_o = own[i % len(own)], oth[j % len(oth)]
    d = nc.make_dither(pair, seed)
    noise = np.random.default_rng(seed).normal(0, sigma, pair.dimension)
    c_a, c_b = (c_u, c_o) if user == "A" else (c_o, c_u)
    y_nc = beta * nc.encode_network(pair, c_a, c_b, d) + noise
    y_su = beta * nc.encode_single(pair, user, c_u, d) + noise
    assert nc.decode_with_side_info(pair, user, y_nc, beta, 1.0, d, c_o) == nc.decode_single(pair, user, y_su, beta, 1.0, d)


@given(st.integers(0, 15), st.integers(0, 3), st.integers(0, 2**31))
def test_user_relabeling(i, j, seed):
    # swapping which user owns which fine lattice swaps the decoded roles
    swapped = nc.build_nested_pair(HEX.coarse, HEX.fine_b, HEX.fine_a)
    d = nc.make_dither(HEX, seed)
    c_a, c_b = HEX.codebook("A")[i], HEX.codebook("B")[j]
    y = nc.encode_network(HEX, c_a, c_b, d) + np.random.default_rng(seed).normal(0, 0.2, 2)
    y_swapped = nc.encode_network(swapped, c_b, c_a, d) + np.random.default_rng(seed).normal(0, 0.2, 2)
    assert np.allclose(y, y_swapped)
    assert nc.decode_with_side_info(HEX, "A", y, 1, 1, d, c_b) == nc.decode_with_side_info(swapped, "B", y_swapped, 1, 1, d, c_b)
    assert nc.decode_with_side_info(HEX, "B", y, 1, 1, d, c_a) == nc.decode_with_side_info(swapped, "A", y_swapped, 1, 1, d, c_a)


def test_batch_identity_checker():
    for pair in (ONE_D, HEX):
        for user in "AB":
            assert nc.coupled_identity_mismatches(pair, user, 2000, 1.3, 0.5, 1.0, seed=4) == 0
