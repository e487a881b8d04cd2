"""Nested lattice codes for the two-user broadcast channel with side information.

One coarse (shaping) lattice is shared by both users; each user has its own
fine (coding) lattice. The transmitter sends ``[c_A + c_B - d] mod coarse``,
and each receiver subtracts the codeword it already knows before running
an ordinary single-user nested-lattice decoder.

Everything here is exact enumeration, meant for dimensions up to about 4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .errors import CodewordNotInCodebook, DimensionMismatch, IndexOutOfRange, OddL
from .lattice_core import (
    INTEGRALITY_TOL,
    Lattice,
    LatticePoint,
    VoronoiSampler,
    build_lattice,
    check_nested,
    lattice_mod,
    quantize_coefficients,
)

User = Literal["A", "B"]


def other(user: User) -> User:
    return "B" if user == "A" else "A"


@dataclass(frozen=True, eq=False)
class NestedCodePair:
    coarse: Lattice
    fine_a: Lattice
    fine_b: Lattice
    codebook_a: tuple[LatticePoint, ...]
    codebook_b: tuple[LatticePoint, ...]
    search_radius: int = 2

    @property
    def dimension(self) -> int:
        return self.coarse.dimension

    def fine(self, user: User) -> Lattice:
        return self.fine_a if user == "A" else self.fine_b

    def codebook(self, user: User) -> tuple[LatticePoint, ...]:
        return self.codebook_a if user == "A" else self.codebook_b

    def codebook_matrix(self, user: User) -> np.ndarray:
        return np.array([c.coordinates for c in self.codebook(user)])

    def rate(self, user: User) -> float:
        """Bits per real dimension, (1/N) log2 |codebook|."""
        return math.log2(len(self.codebook(user))) / self.dimension


@dataclass(frozen=True, eq=False)
class DitherVector:
    values: np.ndarray
    seed: int | None = None


def zero_dither(pair: NestedCodePair) -> DitherVector:
    return DitherVector(np.zeros(pair.dimension), None)


def make_dither(pair: NestedCodePair, seed: int) -> DitherVector:
    """Dither drawn uniformly over the coarse Voronoi region."""
    rng = np.random.default_rng(seed)
    vals = VoronoiSampler(pair.coarse, pair.search_radius).sample(rng, 1)[0]
    return DitherVector(vals, seed)


def _coset_index(coarse: Lattice, points: np.ndarray, reps: np.ndarray) -> np.ndarray:
    """For each row of ``points``, the index of the row of ``reps`` in the same coarse coset (-1 if none)."""
    diff = points[:, None, :] - reps[None, :, :]
    c = diff @ coarse.pinv.T
    ok = np.all(np.abs(c - np.rint(c)) <= 1e-7, axis=-1)
    idx = np.argmax(ok, axis=1)
    return np.where(ok.any(axis=1), idx, -1)


def enumerate_codebook(coarse: Lattice, fine: Lattice, search_radius: int = 2) -> tuple[LatticePoint, ...]:
    """Fine-lattice points in the coarse Voronoi region, one per coarse coset.

    Boundary points that are congruent modulo the coarse lattice are
    deduplicated, keeping the lexicographically smallest coefficient vector.
    The result is sorted lexicographically by fine coefficients.
    """
    if coarse.dimension != fine.dimension:
        raise DimensionMismatch("lattices have different dimensions")
    if not check_nested(coarse, fine):
        raise ValueError("coarse lattice is not a sublattice of the fine lattice")
    radius = 0.5 * float(np.sum(np.linalg.norm(coarse.generator, axis=0))) + 1e-9
    bound = np.ceil(np.linalg.norm(fine.pinv, axis=1) * radius).astype(int)
    axes = [np.arange(-b, b + 1) for b in bound]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, fine.rank)
    pts = grid @ fine.generator.T
    keep = np.linalg.norm(pts, axis=1) <= radius
    grid, pts = grid[keep], pts[keep]
    red = lattice_mod(coarse, pts, search_radius)
    inside = np.max(np.abs(red - pts), axis=1) <= INTEGRALITY_TOL
    grid, pts = grid[inside], pts[inside]
    order = np.lexsort(grid.T[::-1])
    grid, pts = grid[order], pts[order]
    kept: list[int] = []
    for i in range(len(pts)):
        if kept and _coset_index(coarse, pts[i : i + 1], pts[kept])[0] >= 0:
            continue
        kept.append(i)
    return tuple(LatticePoint(grid[i].astype(np.int64), pts[i]) for i in kept)


def build_nested_pair(coarse, fine_a, fine_b, search_radius: int = 2) -> NestedCodePair:
    coarse, fine_a, fine_b = (x if isinstance(x, Lattice) else build_lattice(x) for x in (coarse, fine_a, fine_b))
    cb_a = enumerate_codebook(coarse, fine_a, search_radius)
    cb_b = enumerate_codebook(coarse, fine_b, search_radius)
    for fine, cb in ((fine_a, cb_a), (fine_b, cb_b)):
        expected = coarse.volume / fine.volume
        if abs(len(cb) - expected) > 1e-6 * expected:
            raise ValueError(f"enumerated {len(cb)} codewords, expected {expected:g}; increase search_radius")
    return NestedCodePair(coarse, fine_a, fine_b, cb_a, cb_b, search_radius)


def one_dim_pair(fine_a: float = 1.0, fine_b: float = 2.0, coarse: float = 8.0) -> NestedCodePair:
    """Scalar nested pair, e.g. Z and 2Z inside 8Z."""
    return build_nested_pair([[coarse]], [[fine_a]], [[fine_b]])


HEX_GENERATOR = np.array([[1.0, -0.5], [0.0, math.sqrt(3) / 2]])


def hexagonal_pair(fine_b_scale: int = 2, coarse_scale: int = 4) -> NestedCodePair:
    """Hexagonal lattice A2 with fine_B = 2*A2 and coarse = 4*A2 by default."""
    return build_nested_pair(HEX_GENERATOR * coarse_scale, HEX_GENERATOR, HEX_GENERATOR * fine_b_scale)


# --- encoding ------------------------------------------------------------


def map_message(pair: NestedCodePair, user: User, message_index: int) -> LatticePoint:
    cb = pair.codebook(user)
    if not 0 <= message_index < len(cb):
        raise IndexOutOfRange(f"message index {message_index} outside [0, {len(cb)})")
    return cb[message_index]


def codebook_index(pair: NestedCodePair, user: User, c: LatticePoint) -> int:
    for i, p in enumerate(pair.codebook(user)):
        if np.allclose(p.coordinates, c.coordinates, atol=1e-9, rtol=0):
            return i
    raise CodewordNotInCodebook(f"{c!r} is not a codeword of user {user}")


def encode_single(pair: NestedCodePair, user: User, c: LatticePoint, d: DitherVector) -> np.ndarray:
    codebook_index(pair, user, c)
    return lattice_mod(pair.coarse, c.coordinates - d.values, pair.search_radius)


def encode_network_two_step(pair: NestedCodePair, c_a: LatticePoint, c_b: LatticePoint, d: DitherVector) -> np.ndarray:
    """Network-code first, then dither, reducing modulo the coarse lattice after each step."""
    codebook_index(pair, "A", c_a)
    codebook_index(pair, "B", c_b)
    c_nc = lattice_mod(pair.coarse, c_a.coordinates + c_b.coordinates, pair.search_radius)
    return lattice_mod(pair.coarse, c_nc - d.values, pair.search_radius)


def encode_network(pair: NestedCodePair, c_a: LatticePoint, c_b: LatticePoint, d: DitherVector) -> np.ndarray:
    codebook_index(pair, "A", c_a)
    codebook_index(pair, "B", c_b)
    return lattice_mod(pair.coarse, c_a.coordinates + c_b.coordinates - d.values, pair.search_radius)


# --- decoding ------------------------------------------------------------


def decode_indices(pair: NestedCodePair, user: User, z) -> np.ndarray:
    """Quantize each row of ``z`` to the user's fine lattice and reduce into the codebook.

    Returns codebook indices. Batch entry point shared by the decoders.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    fine = pair.fine(user)
    b = quantize_coefficients(fine, z, pair.search_radius)
    pts = b @ fine.generator.T
    idx = _coset_index(pair.coarse, pts, pair.codebook_matrix(user))
    assert np.all(idx >= 0), "fine lattice point outside every coarse coset"
    return idx


def decode_single(
    pair: NestedCodePair, user: User, y, beta: float, alpha: float, d: DitherVector
) -> LatticePoint:
    """Q_fine(alpha * y / beta + d) mod coarse."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    z = alpha * np.asarray(y, dtype=float) / beta + d.values
    return pair.codebook(user)[int(decode_indices(pair, user, z)[0])]


def decode_with_side_info(
    pair: NestedCodePair,
    user: User,
    y,
    beta: float,
    alpha: float,
    d: DitherVector,
    side_codeword: LatticePoint,
) -> LatticePoint:
    """Subtract the known codeword, scale, de-dither, quantize, reduce.

    Q_fine(alpha * (y / beta - c_other) + d) mod coarse.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    codebook_index(pair, other(user), side_codeword)
    z = alpha * (np.asarray(y, dtype=float) / beta - side_codeword.coordinates) + d.values
    return pair.codebook(user)[int(decode_indices(pair, user, z)[0])]


# --- one-dimensional shaping gain ------------------------------------------


@dataclass(frozen=True)
class ShapingGain1D:
    L: int
    p_a: Fraction
    p_b: Fraction
    p_nc: Fraction
    gain_db: float
    p_nc_enumerated: Fraction

    @property
    def enumeration_matches(self) -> bool:
        return self.p_nc_enumerated == self.p_nc


def _centered_mod(v: np.ndarray, period: int) -> np.ndarray:
    """Reduce into [-period/2, period/2); the tie at +period/2 goes to -period/2."""
    half = period // 2
    return (v + half) % period - half


def enumerate_nc_power_1d(L: int, endpoints: bool = True) -> Fraction:
    """Exact mean of x_NC^2 over all codeword pairs of Z and 2Z in [-L, L].

    With ``endpoints`` the codebooks are {-L..L} and {-L, -L+2, .., L}
    (both boundary points kept); otherwise one point per coset,
    {-L..L-1} and {-L, .., L-2}.
    """
    top = L + 1 if endpoints else L
    ca = np.arange(-L, top)
    cb = np.arange(-L, top, 2)
    x = _centered_mod(ca[:, None] + cb[None, :], 2 * L)
    return Fraction(int(np.sum(x.astype(np.int64) ** 2)), x.size)


def codebook_power_1d(L: int, step: int, endpoints: bool = True) -> Fraction:
    c = np.arange(-L, L + 1 if endpoints else L, step)
    return Fraction(int(np.sum(c**2)), c.size)


def shaping_gain_1d(L: int) -> ShapingGain1D:
    """Closed-form powers of the scalar Z / 2Z example and the extra gain of the low-rate user.

    ``p_nc_enumerated`` is the brute-force mean over all codeword pairs; it is
    reported next to the closed form rather than substituted for it.
    """
    if L < 2 or L % 2:
        raise OddL(f"L must be an even integer >= 2, got {L}")
    p_a = Fraction(L * (L + 1), 3)
    p_b = Fraction(L * (L + 2), 3)
    gain = 10 * math.log10((L + 2) / (L + 1))
    return ShapingGain1D(L, p_a, p_b, p_a, gain, enumerate_nc_power_1d(L))


# --- batch identity check ------------------------------------------------------


def coupled_identity_mismatches(
    pair: NestedCodePair, user: User, draws: int, beta: float, noise_var: float, alpha: float, seed: int
) -> int:
    """Count draws where side-information decoding and single-user decoding disagree.

    Each draw picks both messages and a dither at random; the broadcast and
    the single-user transmission see the same noise. Vectorized form of
    :func:`decode_with_side_info` vs :func:`decode_single`.
    """
    rng = np.random.default_rng(seed)
    n = pair.dimension
    own = pair.codebook_matrix(user)
    oth = pair.codebook_matrix(other(user))
    c_u = own[rng.integers(0, len(own), draws)]
    c_o = oth[rng.integers(0, len(oth), draws)]
    d = VoronoiSampler(pair.coarse, pair.search_radius).sample(rng, draws)
    noise = rng.normal(0.0, math.sqrt(noise_var), (draws, n))
    r = pair.search_radius
    x_nc = lattice_mod(pair.coarse, c_u + c_o - d, r)
    x_su = lattice_mod(pair.coarse, c_u - d, r)
    z_nc = alpha * ((beta * x_nc + noise) / beta - c_o) + d
    z_su = alpha * (beta * x_su + noise) / beta + d
    return int(np.sum(decode_indices(pair, user, z_nc) != decode_indices(pair, user, z_su)))
