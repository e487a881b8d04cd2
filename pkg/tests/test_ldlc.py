import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latnc.errors import ConstructionFailed, NonDivisible
from latnc.ldlc import (
    SAMPLE_PARITY,
    SAMPLE_SEQUENCE,
    DiscretizedDensity,
    LdlcBpDecoder,
    bp_decode,
    build_mapping,
    build_parity,
    cancel_side_info,
    degree7_sequence,
    exhaustive_shaping,
    from_parity,
    is_latin_square,
    ldlc_encode,
    m_algorithm,
    network_encode_shape,
    recover_message,
    recover_symbols,
    single_user_shape,
    unshaped,
)
from latnc.ldlc.mapping import CheckConstellation

SMALL = build_parity(SAMPLE_SEQUENCE, 6, seed=0)


def test_sample_matrix_is_latin():
    assert is_latin_square(SAMPLE_PARITY, SAMPLE_SEQUENCE, scale=1.0)


def test_built_matrix_is_latin_and_normalized():
    assert is_latin_square(SMALL.parity, SAMPLE_SEQUENCE)
    assert abs(np.linalg.det(SMALL.parity)) == pytest.approx(1.0)


def test_degree7_code():
    code = build_parity(degree7_sequence(), 100, seed=1)
    assert code.degree == 7
    assert np.all(np.count_nonzero(code.parity, axis=0) == 7)
    assert is_latin_square(code.parity, degree7_sequence())


def test_degree_exceeds_dimension():
    with pytest.raises(ConstructionFailed):
        build_parity([1, 0.5, 0.4], 2)


def test_encode_zero_and_unit():
    assert np.allclose(ldlc_encode(SMALL, np.zeros(6, int)), 0)
    e1 = np.eye(6, dtype=int)[0]
    assert np.allclose(ldlc_encode(SMALL, e1), SMALL.generator[:, 0])


@pytest.mark.parametrize("la, lb, m, ma, mb", [(4, 2, 8, 1, 2), (2, 2, 4, 1, 1), (3, 2, 12, 2, 3)])
def test_mapping_arithmetic(la, lb, m, ma, mb):
    mp = build_mapping(la, lb, n=3)
    assert (mp.M.tolist(), mp.M_A.tolist(), mp.M_B.tolist()) == ([m] * 3, [ma] * 3, [mb] * 3)


def test_mapping_rates():
    mp = build_mapping(4, 2, n=5)
    assert (mp.rate("A"), mp.rate("B")) == (3.0, 2.0)


def test_shaping_zero_message():
    mp = build_mapping(4, 2, n=6)
    res = network_encode_shape(SMALL, mp, np.zeros(6, int), np.zeros(6, int))
    assert not res.k.any() and res.power == 0.0


def test_shaping_inside_region_picks_zero():
    mp = build_mapping(4, 2, n=6)
    b = np.array([1, 0, 0, 0, 0, 0])
    assert not m_algorithm(SMALL, mp, b, None).k.any()


def test_cancel_side_info_scalar():
    code = from_parity([[1.0]])
    mp = build_mapping(4, 2, n=1)
    y = np.array([2.0 * (3 + 2 * 1 - 8 * 1)])
    assert cancel_side_info(y, 2.0, code, mp, "A", np.array([1]))[0] == pytest.approx(-5.0)


def test_cancel_side_info_identity_cases():
    mp = build_mapping(4, 2, n=6)
    y = np.linspace(-1, 1, 6)
    assert np.allclose(cancel_side_info(y, 2.0, SMALL, mp, "A", np.zeros(6, int)), y / 2)
    b_a, b_b = np.array([3, -4, 0, 1, 2, -1]), np.array([1, -2, 0, 1, -1, 0])
    res = network_encode_shape(SMALL, mp, b_a, b_b)
    got = cancel_side_info(3.0 * res.x, 3.0, SMALL, mp, "A", b_b)
    assert np.allclose(got, SMALL.generator @ (mp.M_A * b_a - mp.M * res.k))


@pytest.mark.parametrize("b, user, want", [(11, "A", 3), (-12, "B", -2)])
def test_recover_message(b, user, want):
    assert recover_message(np.array([b]), build_mapping(4, 2, n=1), user).tolist() == [want]


def test_recover_message_not_divisible():
    with pytest.raises(NonDivisible):
        recover_message(np.array([5]), build_mapping(4, 2, n=1), "B")


def test_triangular_factorization():
    t, q = SMALL.triangular
    x = np.random.default_rng(0).normal(size=(50, 6))
    assert np.allclose(x @ (t @ q).T, x @ SMALL.parity.T, atol=1e-9)
    assert np.allclose(np.triu(t, 1), 0)


def test_bp_noiseless_small_code():
    mp = build_mapping(4, 2, n=6)
    cons = CheckConstellation.integer_range(6, -2, 2)
    dec = LdlcBpDecoder(SMALL, cons)
    rng = np.random.default_rng(7)
    for _ in range(10):
        b = rng.integers(-2, 3, 6)
        assert dec.decode(ldlc_encode(SMALL, b), 1e-4, iterations=10).tolist() == b.tolist()
    assert mp.n == 6


def test_bp_all_zero_codeword():
    code = build_parity(degree7_sequence(), 100, seed=1)
    cons = build_mapping(4, 2, n=100).decoder_constellation("A")
    got = bp_decode(code, cons, np.random.default_rng(0).normal(0, 0.02, 100), 4e-4, iterations=20)
    assert not got.any()


def test_bp_messages_normalized():
    code = build_parity(degree7_sequence(), 100, seed=1)
    cons = build_mapping(4, 2, n=100).decoder_constellation("B")
    dec = LdlcBpDecoder(code, cons)
    b = np.random.default_rng(2).integers(-4, 4, 100) * 2
    y = ldlc_encode(code, b) + np.random.default_rng(3).normal(0, 0.12, 100)
    masses = []

    def check(it, v2c, c2v):
        masses.append((v2c.sum(axis=-1) * dec.step, c2v.sum(axis=-1) * dec.step))

    dec.decode(y, 0.12**2, iterations=3, callback=check)
    for v, c in masses:
        assert np.allclose(v, 1.0) and np.allclose(c, 1.0)


def test_discretized_density():
    d = DiscretizedDensity.gaussian(0.3, 0.01)
    assert d.mass == pytest.approx(1.0)
    assert d.peak() == pytest.approx(0.3)


def test_shaped_power_below_unshaped():
    code = build_parity(degree7_sequence(), 100, seed=1)
    mp = build_mapping(4, 2, n=100)
    rng = np.random.default_rng(0)
    shaped, plain = [], []
    for _ in range(20):
        b_a, b_b = rng.integers(-4, 4, 100), rng.integers(-2, 2, 100)
        shaped.append(network_encode_shape(code, mp, b_a, b_b).power)
        plain.append(unshaped(code, mp, mp.M_A * b_a + mp.M_B * b_b).power)
    assert np.mean(shaped) < np.mean(plain)


# --- properties ---------------------------------------------------------------

TOYS = [build_parity(SAMPLE_SEQUENCE, n, seed=s) for n, s in ((3, 0), (4, 1), (4, 2))]


@given(st.sampled_from(TOYS), st.integers(0, 2**31))
def test_m_algorithm_unbounded_matches_exhaustive(code, seed):
    mp = build_mapping(4, 2, n=code.n)
    rng = np.random.default_rng(seed)
    b = mp.M_A * rng.integers(-4, 4, code.n) + mp.M_B * rng.integers(-2, 2, code.n)
    assert m_algorithm(code, mp, b, None).power == pytest.approx(exhaustive_shaping(code, mp, b).power, abs=1e-9)


@given(st.sampled_from(TOYS + [SMALL]), st.integers(0, 2**31), st.sampled_from([None, 4, 64]))
def test_shaping_is_undone_by_recovery(code, seed, width):
    mp = build_mapping(4, 2, n=code.n)
    rng = np.random.default_rng(seed)
    b_a, b_b = rng.integers(-4, 4, code.n), rng.integers(-2, 2, code.n)
    res = network_encode_shape(code, mp, b_a, b_b, width)
    got_a = recover_message(res.b_prime - mp.M_B * b_b, mp, "A")
    got_b = recover_message(res.b_prime - mp.M_A * b_a, mp, "B")
    assert got_a.tolist() == b_a.tolist() and got_b.tolist() == b_b.tolist()
    su = single_user_shape(code, mp, "B", b_b, width)
    assert recover_symbols(su.b_prime, mp, "B")[0].tolist() == b_b.tolist()


@given(st.integers(3, 40), st.integers(0, 10_000))
def test_constructed_parity_is_latin(n, seed):
    seq = SAMPLE_SEQUENCE if n < 7 else degree7_sequence()
    code = build_parity(seq, n, seed)
    assert is_latin_square(code.parity, seq)
