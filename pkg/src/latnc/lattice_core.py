"""Real lattices: construction, nearest-point quantization, modulo reduction.

Quantization is an exhaustive search over a box of coefficient vectors
around the rounded pseudo-inverse solution. That is exact for the small,
reasonably conditioned lattices used here (K <= 4) and is cross-checked
against a wider brute-force search in the tests.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Protocol

import numpy as np

from .errors import DimensionMismatch, NegativeSnr, NonFinite, RankDeficient

INTEGRALITY_TOL = 1e-9
# relative slack for declaring two squared distances equal
TIE_TOL = 1e-12

SPHERE_NSM_LIMIT = 1.0 / (2.0 * math.pi * math.e)
CUBE_NSM = 1.0 / 12.0


@dataclass(frozen=True, eq=False)
class Lattice:
    """Lattice {G b : b integer} for an N x K generator ``G`` (K <= N)."""

    generator: np.ndarray

    @property
    def dimension(self) -> int:
        return self.generator.shape[0]

    @property
    def rank(self) -> int:
        return self.generator.shape[1]

    @cached_property
    def pinv(self) -> np.ndarray:
        return np.linalg.pinv(self.generator)

    @cached_property
    def volume(self) -> float:
        """Volume of the fundamental region, sqrt(det(G^T G))."""
        g = self.generator
        return float(math.sqrt(abs(np.linalg.det(g.T @ g))))

    def point(self, coefficients) -> "LatticePoint":
        b = np.asarray(coefficients, dtype=np.int64).reshape(-1)
        if b.shape[0] != self.rank:
            raise DimensionMismatch(f"expected {self.rank} coefficients, got {b.shape[0]}")
        return LatticePoint(b, self.generator @ b)

    def scaled(self, factor: float) -> "Lattice":
        return build_lattice(self.generator * factor)

    def to_json(self) -> str:
        return json.dumps({"generator": self.generator.tolist(), "dimension": self.dimension})

    @classmethod
    def from_json(cls, text: str) -> "Lattice":
        obj = json.loads(text)
        lat = build_lattice(obj["generator"])
        if "dimension" in obj and int(obj["dimension"]) != lat.dimension:
            raise DimensionMismatch("dimension field disagrees with generator shape")
        return lat


@dataclass(frozen=True, eq=False)
class LatticePoint:
    coefficients: np.ndarray
    coordinates: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, LatticePoint):
            return NotImplemented
        return bool(np.array_equal(self.coefficients, other.coefficients))

    def __hash__(self):
        return hash(tuple(self.coefficients.tolist()))

    def __repr__(self):
        return f"LatticePoint(b={self.coefficients.tolist()}, x={np.round(self.coordinates, 6).tolist()})"


def build_lattice(generator) -> Lattice:
    """Validate a generator matrix and wrap it in a :class:`Lattice`.

    A 1-D array or a scalar is read as a single column / a 1x1 matrix.
    """
    g = np.array(generator, dtype=float)
    if g.ndim == 0:
        g = g.reshape(1, 1)
    elif g.ndim == 1:
        g = g.reshape(-1, 1)
    if g.ndim != 2 or g.size == 0:
        raise DimensionMismatch("generator must be a nonempty matrix")
    if not np.all(np.isfinite(g)):
        raise NonFinite("generator contains NaN or Inf")
    n, k = g.shape
    if k > n:
        raise RankDeficient(f"{k} columns cannot be independent in dimension {n}")
    s = np.linalg.svd(g, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise RankDeficient("generator columns are linearly dependent")
    return Lattice(g)


def integer_lattice(n: int, scale: float = 1.0) -> Lattice:
    return build_lattice(np.eye(n) * scale)


def _as_batch(lattice: Lattice, x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim <= 1
    arr = np.atleast_2d(arr.reshape(1, -1) if arr.ndim == 0 else arr)
    if arr.shape[-1] != lattice.dimension:
        raise DimensionMismatch(f"vector length {arr.shape[-1]} != lattice dimension {lattice.dimension}")
    return arr, single


def _offsets(rank: int, radius: int) -> np.ndarray:
    rng = range(-radius, radius + 1)
    return np.array(list(itertools.product(rng, repeat=rank)), dtype=np.int64)


def quantize_coefficients(lattice: Lattice, x, search_radius: int = 2) -> np.ndarray:
    """Nearest-point coefficient vectors for a batch ``x`` of shape (B, N).

    Ties (equal distance within ``TIE_TOL``) go to the point of smallest
    norm, then to the lexicographically smallest coefficient vector.
    """
    if search_radius < 1:
        raise ValueError("search_radius must be >= 1")
    xb, _ = _as_batch(lattice, x)
    g = lattice.generator
    base = np.rint(xb @ lattice.pinv.T).astype(np.int64)  # (B, K)
    offs = _offsets(lattice.rank, search_radius)  # (C, K), lexicographic
    cand = base[:, None, :] + offs[None, :, :]  # (B, C, K)
    pts = cand @ g.T  # (B, C, N)
    d2 = np.sum((xb[:, None, :] - pts) ** 2, axis=-1)
    dmin = d2.min(axis=1, keepdims=True)
    tied = d2 <= dmin + TIE_TOL * np.maximum(1.0, dmin)
    norms = np.where(tied, np.sum(pts**2, axis=-1), np.inf)
    nmin = norms.min(axis=1, keepdims=True)
    best = norms <= nmin + TIE_TOL * np.maximum(1.0, nmin)
    idx = np.argmax(best, axis=1)  # first in lexicographic order
    return cand[np.arange(cand.shape[0]), idx]


def quantize_nearest(lattice: Lattice, x, search_radius: int = 2) -> LatticePoint:
    """Nearest lattice point to a single vector ``x``."""
    b = quantize_coefficients(lattice, x, search_radius)
    if b.shape[0] != 1:
        raise DimensionMismatch("quantize_nearest takes a single vector; use quantize_coefficients")
    return lattice.point(b[0])


def lattice_mod(lattice: Lattice, x, search_radius: int = 2) -> np.ndarray:
    """``x - Q(x)``; accepts a single vector or a (B, N) batch."""
    xb, single = _as_batch(lattice, x)
    b = quantize_coefficients(lattice, xb, search_radius)
    r = xb - b @ lattice.generator.T
    return r[0] if single else r


def check_nested(coarse: Lattice, fine: Lattice, trials: int = 0, seed: int = 0) -> bool:
    """True iff every coarse generator column is an integer combination of the fine basis.

    With ``trials > 0`` random coarse points are additionally checked for
    membership in the fine lattice.
    """
    if coarse.dimension != fine.dimension:
        raise DimensionMismatch("lattices have different dimensions")
    coeffs = fine.pinv @ coarse.generator
    if not np.allclose(fine.generator @ coeffs, coarse.generator, atol=1e-9, rtol=0):
        return False  # coarse columns outside the span of the fine basis
    if np.max(np.abs(coeffs - np.rint(coeffs))) > INTEGRALITY_TOL:
        return False
    if trials:
        rng = np.random.default_rng(seed)
        b = rng.integers(-20, 21, size=(trials, coarse.rank))
        c = (b @ coarse.generator.T) @ fine.pinv.T
        if np.max(np.abs(c - np.rint(c))) > INTEGRALITY_TOL * max(1.0, np.max(np.abs(c))):
            return False
    return True


def vnr(lattice: Lattice, noise_var: float) -> float:
    """Volume-to-noise ratio Vol^(2/N) / noise_var (full-rank lattices)."""
    return lattice.volume ** (2.0 / lattice.dimension) / noise_var


# --- shaping diagnostics -------------------------------------------------


class RegionSampler(Protocol):
    dimension: int
    volume: float

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray: ...


@dataclass(frozen=True)
class BoxSampler:
    """Uniform samples from the box [lo, hi]^dimension."""

    lo: float
    hi: float
    dimension: int = 1

    @property
    def volume(self) -> float:
        return (self.hi - self.lo) ** self.dimension

    def sample(self, rng, n):
        return rng.uniform(self.lo, self.hi, size=(n, self.dimension))


@dataclass(frozen=True)
class VoronoiSampler:
    """Uniform samples from the fundamental Voronoi region of a full-rank lattice.

    Draws uniformly from the fundamental parallelepiped and reduces mod the
    lattice; the reduction is volume preserving.
    """

    lattice: Lattice
    search_radius: int = 2

    @property
    def dimension(self) -> int:
        return self.lattice.dimension

    @property
    def volume(self) -> float:
        return self.lattice.volume

    def sample(self, rng, n):
        u = rng.uniform(0.0, 1.0, size=(n, self.lattice.rank))
        return lattice_mod(self.lattice, u @ self.lattice.generator.T, self.search_radius)


@dataclass(frozen=True)
class RegionStats:
    second_moment: float
    normalized_second_moment: float
    sample_count: int
    standard_error: float = field(default=0.0)

    @property
    def shaping_loss_db(self) -> float:
        """Loss relative to the infinite-dimensional sphere."""
        return 10 * math.log10(self.normalized_second_moment / SPHERE_NSM_LIMIT)


def shaping_stats(region_sampler: RegionSampler, samples: int = 100_000, seed: int = 0) -> RegionStats:
    """Monte Carlo second moment (per dimension) and normalized second moment."""
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    rng = np.random.default_rng(seed)
    pts = np.asarray(region_sampler.sample(rng, samples), dtype=float).reshape(samples, -1)
    n = pts.shape[1]
    per = np.sum(pts**2, axis=1) / n
    sigma2 = float(per.mean())
    scale = region_sampler.volume ** (2.0 / n)
    se = float(per.std(ddof=1) / math.sqrt(samples)) / scale
    return RegionStats(sigma2, sigma2 / scale, samples, se)


def awgn_figures(snr_linear: float) -> tuple[float, float]:
    """(capacity in bits per real channel use, MMSE scaling coefficient)."""
    if snr_linear < 0 or math.isnan(snr_linear):
        raise NegativeSnr(f"SNR must be >= 0, got {snr_linear}")
    return 0.5 * math.log2(1.0 + snr_linear), snr_linear / (1.0 + snr_linear)


def snr_for_capacity(capacity: float) -> float:
    return 2.0 ** (2.0 * capacity) - 1.0


__all__ = [
    "Lattice",
    "LatticePoint",
    "RegionStats",
    "BoxSampler",
    "VoronoiSampler",
    "build_lattice",
    "integer_lattice",
    "quantize_coefficients",
    "quantize_nearest",
    "lattice_mod",
    "check_nested",
    "vnr",
    "shaping_stats",
    "awgn_figures",
    "snr_for_capacity",
    "SPHERE_NSM_LIMIT",
    "CUBE_NSM",
]
