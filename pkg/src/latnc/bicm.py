"""BICM network coding: RA codes, XOR network coding, Gray QPSK/16QAM and bit metrics.

LLRs follow ln(p(bit=0) / p(bit=1)); a zero LLR decides 0. Bit metrics are
kept in the log domain as pairs (log metric0, log metric1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numba as nb
import numpy as np
from scipy.special import logsumexp

from .channel_sim import BroadcastChannel, gaussian_noise, noise_stream
from .errors import CodedLengthMismatch, LengthMismatch, LengthNotMultiple

DEFAULT_RA_ITERATIONS = 20
LLR_CLIP = 500.0
# noise variance used for the noiseless path, where the metrics are just hard decisions
NOISELESS_VAR = 1e-9


# --- interleavers -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Interleaver:
    perm: np.ndarray
    seed: int | None = None

    @cached_property
    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return inv

    def __len__(self) -> int:
        return self.perm.size

    def interleave(self, x):
        """out[..., j] = x[..., perm[j]]."""
        return np.asarray(x)[..., self.perm]

    def deinterleave(self, x):
        return np.asarray(x)[..., self.inverse]


def make_interleaver(length: int, seed: int) -> Interleaver:
    if length < 1:
        raise ValueError("interleaver length must be >= 1")
    return Interleaver(np.random.default_rng(seed).permutation(length), seed)


# --- repeat-accumulate codes --------------------------------------------------


@dataclass(frozen=True, eq=False)
class RaCode:
    """Non-systematic regular RA code: repeat q times, permute, accumulate."""

    repetition: int
    info_length: int
    repeat_interleaver: Interleaver

    def __post_init__(self):
        if self.repetition < 2:
            raise ValueError("repetition must be >= 2")
        if len(self.repeat_interleaver) != self.coded_length:
            raise LengthMismatch("interleaver length must equal q * K")

    @property
    def coded_length(self) -> int:
        return self.repetition * self.info_length

    @property
    def rate(self) -> float:
        return 1.0 / self.repetition


def make_ra_code(info_length: int, repetition: int, seed: int = 0) -> RaCode:
    if info_length < 1:
        raise ValueError("info_length must be >= 1")
    return RaCode(repetition, info_length, make_interleaver(repetition * info_length, seed))


def ra_encode(code: RaCode, info_bits) -> np.ndarray:
    """Encode the last axis; leading axes are independent packets."""
    bits = np.asarray(info_bits, dtype=np.uint8)
    if bits.shape[-1] != code.info_length:
        raise LengthMismatch(f"expected {code.info_length} info bits, got {bits.shape[-1]}")
    rep = np.repeat(bits, code.repetition, axis=-1)
    return np.bitwise_xor.accumulate(code.repeat_interleaver.interleave(rep), axis=-1)


@nb.njit(inline="always")
def _boxplus(a, b):
    """LLR of the XOR of two bits with LLRs a and b (exact, max-star form)."""
    s = 1.0 if (a >= 0.0) == (b >= 0.0) else -1.0
    m = min(abs(a), abs(b))
    return s * m + math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b)))


@nb.njit(cache=True)
def _ra_decode_kernel(llr, perm, q, iterations, clip):
    packets, n = llr.shape
    k = n // q
    out = np.zeros((packets, k), dtype=np.uint8)
    ext_rep = np.empty(n)
    ls = np.empty(n)
    fwd = np.empty(n)
    bwd = np.empty(n)
    from_acc = np.empty(n)
    total = np.empty(k)
    for p in range(packets):
        lc = llr[p]
        ext_rep[:] = 0.0
        for _ in range(iterations):
            for j in range(n):
                ls[j] = ext_rep[perm[j]]
            # accumulator chain: c_j = c_{j-1} xor s_j, c_0 known to be 0
            fwd[0] = lc[0] + ls[0]
            for j in range(1, n):
                fwd[j] = lc[j] + _boxplus(fwd[j - 1], ls[j])
            bwd[n - 1] = 0.0
            for j in range(n - 1, 0, -1):
                bwd[j - 1] = _boxplus(lc[j] + bwd[j], ls[j])
            from_acc[perm[0]] = lc[0] + bwd[0]
            for j in range(1, n):
                from_acc[perm[j]] = _boxplus(fwd[j - 1], lc[j] + bwd[j])
            # repetition nodes: copies i*q .. i*q+q-1 belong to info bit i
            for i in range(k):
                t = 0.0
                for r in range(i * q, i * q + q):
                    t += from_acc[r]
                total[i] = t
                for r in range(i * q, i * q + q):
                    ext_rep[r] = max(-clip, min(clip, t - from_acc[r]))
        for i in range(k):
            out[p, i] = 1 if total[i] < 0.0 else 0
    return out


def ra_decode(code: RaCode, bit_metrics, iterations: int = DEFAULT_RA_ITERATIONS) -> np.ndarray:
    """Sum-product decoding over the accumulator chain and repetition nodes.

    ``bit_metrics`` is a :class:`BitMetrics` or an LLR array whose last axis
    has length q K. Returns hard decisions on the info bits.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    llr = bit_metrics.llr if isinstance(bit_metrics, BitMetrics) else np.asarray(bit_metrics, dtype=float)
    if llr.shape[-1] != code.coded_length:
        raise LengthMismatch(f"expected {code.coded_length} metrics, got {llr.shape[-1]}")
    lead = llr.shape[:-1]
    flat = np.clip(llr.reshape(-1, code.coded_length), -LLR_CLIP, LLR_CLIP)
    out = _ra_decode_kernel(np.ascontiguousarray(flat), code.repeat_interleaver.perm, code.repetition, iterations, LLR_CLIP)
    return out.reshape(*lead, code.info_length)


# --- constellations -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Constellation:
    """Unit-energy constellation; ``points[i]`` carries the label ``labels[i]`` (MSB first)."""

    name: str
    points: np.ndarray
    labels: np.ndarray

    @property
    def bits_per_symbol(self) -> int:
        return self.labels.shape[1]

    @cached_property
    def subsets(self) -> np.ndarray:
        """(m, 2, 2^(m-1)) point indices whose label bit j equals b."""
        m = self.bits_per_symbol
        return np.stack([np.stack([np.flatnonzero(self.labels[:, j] == b) for b in (0, 1)]) for j in range(m)])


def _labels(m: int) -> np.ndarray:
    idx = np.arange(2**m)
    return ((idx[:, None] >> np.arange(m - 1, -1, -1)) & 1).astype(np.uint8)


def qpsk() -> Constellation:
    """Bit 0 on the in-phase axis, bit 1 on quadrature; 0 -> +1, 1 -> -1, scaled by 1/sqrt(2)."""
    lab = _labels(2)
    sign = 1 - 2 * lab.astype(np.int64)
    pts = (sign[:, 0] + 1j * sign[:, 1]) / math.sqrt(2)
    return Constellation("qpsk", pts, lab)


_QAM16_AXIS = {(0, 0): -3, (0, 1): -1, (1, 1): 1, (1, 0): 3}


def qam16() -> Constellation:
    """Bits (0, 1) pick the in-phase level, bits (2, 3) the quadrature level: 00 -3, 01 -1, 11 +1, 10 +3."""
    lab = _labels(4)
    re = np.array([_QAM16_AXIS[(a, b)] for a, b in lab[:, :2]])
    im = np.array([_QAM16_AXIS[(a, b)] for a, b in lab[:, 2:]])
    return Constellation("16qam", (re + 1j * im) / math.sqrt(10), lab)


def constellation(name: str) -> Constellation:
    table = {"qpsk": qpsk, "16qam": qam16}
    try:
        return table[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown constellation {name!r}; expected one of {sorted(table)}") from None


def gray_modulate(const: Constellation, bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    m = const.bits_per_symbol
    if bits.shape[-1] % m:
        raise LengthNotMultiple(f"{bits.shape[-1]} bits is not a multiple of {m}")
    groups = bits.reshape(*bits.shape[:-1], -1, m)
    idx = groups @ (1 << np.arange(m - 1, -1, -1))
    return const.points[idx]


# --- bit metrics --------------------------------------------------------------


@dataclass(frozen=True)
class BitMetricPair:
    metric0: float
    metric1: float

    def __post_init__(self):
        for v in (self.metric0, self.metric1):
            if not (math.isfinite(v) and v >= 0):
                raise ValueError("bit metrics must be finite and non-negative")
        if self.metric0 == 0 and self.metric1 == 0:
            raise ValueError("bit metrics cannot both be zero")

    @property
    def llr(self) -> float:
        return math.log(self.metric0 / self.metric1)


@dataclass(frozen=True, eq=False)
class BitMetrics:
    """Log bit metrics ``log0[..., k]``, ``log1[..., k]`` for every coded bit position k."""

    log0: np.ndarray
    log1: np.ndarray

    @property
    def llr(self) -> np.ndarray:
        return self.log0 - self.log1

    @property
    def metric0(self) -> np.ndarray:
        return np.exp(self.log0)

    @property
    def metric1(self) -> np.ndarray:
        return np.exp(self.log1)

    def __len__(self) -> int:
        return self.log0.shape[-1]

    def pair(self, k: int) -> BitMetricPair:
        return BitMetricPair(float(np.exp(self.log0[..., k])), float(np.exp(self.log1[..., k])))

    def permute(self, index) -> "BitMetrics":
        return BitMetrics(self.log0[..., index], self.log1[..., index])


def demod_bit_metrics(const: Constellation, y, beta: float, noise_var: float) -> BitMetrics:
    """Per-bit metrics (1 / 2^(m-1)) sum over X_j^(b) of p(y | x), in the log domain.

    ``y`` may be a scalar or any array of received symbols; bits of each
    symbol are laid out consecutively on the last axis.
    """
    if not noise_var > 0:
        raise ValueError("noise_var must be positive")
    y = np.asarray(y, dtype=complex)
    d2 = np.abs(y[..., None] - beta * const.points) ** 2
    loglik = -d2 / noise_var - math.log(math.pi * noise_var)  # (..., 2^m)
    m = const.bits_per_symbol
    sub = loglik[..., const.subsets]  # (..., m, 2, 2^(m-1))
    lm = logsumexp(sub, axis=-1) - (m - 1) * math.log(2)
    flat_shape = (*y.shape[:-1], -1) if y.ndim else (m,)
    return BitMetrics(lm[..., 0].reshape(flat_shape), lm[..., 1].reshape(flat_shape))


def apply_side_info(metrics: BitMetrics, side_coded_bits) -> BitMetrics:
    """Swap (metric0, metric1) wherever the known bit is 1."""
    side = np.asarray(side_coded_bits).astype(bool)
    if side.shape[-1] != len(metrics) or side.shape != np.broadcast_shapes(side.shape, metrics.log0.shape):
        raise LengthMismatch("side information and metrics differ in length")
    return BitMetrics(np.where(side, metrics.log1, metrics.log0), np.where(side, metrics.log0, metrics.log1))


# --- end-to-end trials --------------------------------------------------------


def _receive(code, const, interleaver, y, beta, noise_var, side_bits=None, iterations=DEFAULT_RA_ITERATIONS):
    metrics = demod_bit_metrics(const, y, beta, max(noise_var, NOISELESS_VAR)).permute(interleaver.inverse)
    if side_bits is not None:
        metrics = apply_side_info(metrics, side_bits)
    return ra_decode(code, metrics, iterations)


def bicm_nc_trial(
    code_a: RaCode,
    code_b: RaCode,
    const: Constellation,
    interleaver_seed: int,
    msgs,
    channel: BroadcastChannel,
    noise_seed: int,
    coupled: bool = False,
    iterations: int = DEFAULT_RA_ITERATIONS,
) -> tuple[np.ndarray, np.ndarray]:
    """XOR network-coded BICM broadcast of one batch of packets.

    ``msgs`` is (bits_A, bits_B) with packets along leading axes. Noise for
    user u comes from ``noise_stream(noise_seed, 0 or 1)``; with ``coupled``
    both users get stream 0.
    """
    bits_a, bits_b = (np.asarray(m, dtype=np.uint8) for m in msgs)
    if code_a.coded_length != code_b.coded_length:
        raise CodedLengthMismatch(f"coded lengths differ: {code_a.coded_length} vs {code_b.coded_length}")
    if code_a.coded_length % const.bits_per_symbol:
        raise LengthNotMultiple("coded length is not a multiple of the bits per symbol")
    inter = make_interleaver(code_a.coded_length, interleaver_seed)
    c_a = ra_encode(code_a, bits_a)
    c_b = ra_encode(code_b, bits_b)
    x = gray_modulate(const, inter.interleave(c_a ^ c_b))
    out = []
    for user, code, side in (("A", code_a, c_b), ("B", code_b, c_a)):
        stream = 0 if (coupled or user == "A") else 1
        y = channel.beta(user) * x + gaussian_noise(noise_stream(noise_seed, stream), x.shape, channel.noise_var, "complex")
        out.append(_receive(code, const, inter, y, channel.beta(user), channel.noise_var, side, iterations))
    return out[0], out[1]


def bicm_p2p_trial(
    code: RaCode,
    const: Constellation,
    interleaver_seed: int,
    bits,
    beta: float,
    noise_var: float,
    noise_seed: int,
    stream: int = 0,
    iterations: int = DEFAULT_RA_ITERATIONS,
) -> np.ndarray:
    """Single-user BICM link; ``(noise_seed, stream)`` matches the broadcast noise for coupling."""
    bits = np.asarray(bits, dtype=np.uint8)
    if code.coded_length % const.bits_per_symbol:
        raise LengthNotMultiple("coded length is not a multiple of the bits per symbol")
    inter = make_interleaver(code.coded_length, interleaver_seed)
    x = gray_modulate(const, inter.interleave(ra_encode(code, bits)))
    y = beta * x + gaussian_noise(noise_stream(noise_seed, stream), x.shape, noise_var, "complex")
    return _receive(code, const, inter, y, beta, noise_var, None, iterations)


# the two joint-modulation baselines compared against: minimum distance 1.85 vs 2 for QPSK
JOINT_MODULATION_MIN_DISTANCE = 1.85
QPSK_MIN_DISTANCE = 2.0


def modulation_gain_db(d_ref: float = JOINT_MODULATION_MIN_DISTANCE, d_qpsk: float = QPSK_MIN_DISTANCE) -> float:
    """10 log10(d_qpsk^2 / d_ref^2): power advantage from the larger minimum distance."""
    return 10 * math.log10(d_qpsk**2 / d_ref**2)
