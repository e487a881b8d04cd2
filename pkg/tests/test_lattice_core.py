import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latnc.errors import NegativeSnr, RankDeficient
from latnc.lattice_core import (
    BoxSampler,
    Lattice,
    awgn_figures,
    build_lattice,
    check_nested,
    integer_lattice,
    lattice_mod,
    quantize_coefficients,
    quantize_nearest,
    shaping_stats,
    snr_for_capacity,
    vnr,
)

HEX = [[1.0, -0.5], [0.0, math.sqrt(3) / 2]]


def test_identity_volume():
    assert build_lattice(np.eye(2)).volume == pytest.approx(1.0)


def test_hex_volume():
    assert build_lattice(HEX).volume == pytest.approx(math.sqrt(3) / 2)


def test_dependent_columns_rejected():
    with pytest.raises(RankDeficient):
        build_lattice([[1, 2], [2, 4]])


@pytest.mark.parametrize(
    "x, want",
    [((0.4, -1.6), (0, -2)), ((2.5, 0.0), (2, 0))],
)
def test_quantize_integer_grid(x, want):
    assert quantize_nearest(integer_lattice(2), x).coefficients.tolist() == list(want)


def test_quantize_hex():
    assert quantize_nearest(build_lattice(HEX), (0.9, 0.1)).coefficients.tolist() == [1, 0]


@pytest.mark.parametrize("x, want", [(9, 1), (-5, 3), (4, 4)])
def test_mod_scalar(x, want):
    assert lattice_mod(build_lattice([[8.0]]), [x])[0] == pytest.approx(want)


@pytest.mark.parametrize("coarse, fine, want", [(8, 1, True), (8, 2, True), (3, 2, False)])
def test_check_nested(coarse, fine, want):
    assert check_nested(build_lattice([[coarse]]), build_lattice([[fine]]), trials=50) is want


def test_unit_interval_nsm():
    st_ = shaping_stats(BoxSampler(np.array([-0.5]), np.array([0.5])), 100_000, seed=1)
    assert abs(st_.normalized_second_moment - 1 / 12) <= 3 * st_.standard_error


def test_scaled_interval_second_moment():
    st_ = shaping_stats(BoxSampler(np.array([-4.0]), np.array([4.0])), 100_000, seed=2)
    assert abs(st_.second_moment - 16 / 3) <= 3 * st_.standard_error * 64


@pytest.mark.parametrize("snr, cap, alpha", [(3, 1.0, 0.75), (1, 0.5, 0.5), (0, 0.0, 0.0)])
def test_awgn_figures(snr, cap, alpha):
    assert awgn_figures(snr) == pytest.approx((cap, alpha))


def test_awgn_negative():
    with pytest.raises(NegativeSnr):
        awgn_figures(-1.0)


def test_json_round_trip():
    lat = build_lattice(HEX)
    assert np.array_equal(Lattice.from_json(lat.to_json()).generator, lat.generator)


def test_vnr_integer_lattice():
    assert vnr(integer_lattice(3), 0.25) == pytest.approx(4.0)


# --- properties ---------------------------------------------------------------

finite = st.floats(-50, 50, allow_nan=False)
lattices = st.sampled_from([build_lattice(HEX), build_lattice([[8.0]]), integer_lattice(2, 3.0), build_lattice([[2.0, 1.0], [0.0, 1.5]])])


@given(lattices, st.lists(finite, min_size=2, max_size=2))
def test_mod_idempotent(lat, x):
    v = np.asarray(x[: lat.dimension])
    once = lattice_mod(lat, v)
    assert np.allclose(lattice_mod(lat, once), once, atol=1e-12)


@given(lattices, st.lists(finite, min_size=2, max_size=2), st.lists(st.integers(-20, 20), min_size=2, max_size=2))
def test_mod_shift_invariant(lat, x, b):
    v = np.asarray(x[: lat.dimension])
    shift = lat.generator @ np.asarray(b[: lat.rank])
    base = lattice_mod(lat, v)
    shifted = lattice_mod(lat, v + shift)
    # off tie boundaries the residues coincide; on a boundary they differ by a lattice vector
    diff = np.linalg.lstsq(lat.generator, shifted - base, rcond=None)[0]
    assert np.allclose(diff, np.rint(diff), atol=1e-8)
    q = quantize_coefficients(lat, v)[0]
    d_best = np.sum((v - lat.generator @ q) ** 2)
    d_next = min(
        np.sum((v - lat.generator @ (q + np.asarray(o))) ** 2)
        for o in itertools.product((-1, 0, 1), repeat=lat.rank)
        if any(o)
    )
    if d_next - d_best > 1e-9:
        assert np.allclose(shifted, base, atol=1e-9)


@given(st.sampled_from([build_lattice(HEX), build_lattice([[2.0, 1.0], [0.0, 1.5]]), build_lattice([[1.3]])]),
       st.lists(st.floats(-6, 6, allow_nan=False), min_size=2, max_size=2))
def test_quantizer_matches_brute_force(lat, x):
    v = np.asarray(x[: lat.dimension])
    cand = np.array(list(itertools.product(range(-10, 11), repeat=lat.rank)))
    d2 = np.sum((v - cand @ lat.generator.T) ** 2, axis=1)
    got = quantize_coefficients(lat, v)[0]
    assert np.sum((v - lat.generator @ got) ** 2) == pytest.approx(d2.min(), abs=1e-9)


@given(st.floats(0, 1e6, allow_nan=False), st.floats(0, 1e6, allow_nan=False))
def test_capacity_monotone(a, b):
    lo, hi = sorted((a, b))
    assert awgn_figures(lo)[0] <= awgn_figures(hi)[0]


@given(st.floats(0, 20, allow_nan=False))
def test_capacity_round_trip(c):
    assert awgn_figures(snr_for_capacity(c))[0] == pytest.approx(c, abs=1e-12)
