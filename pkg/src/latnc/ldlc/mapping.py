"""Rate-diverse integer mappings on top of one basic LDLC generator.

The shaping lattice is G M and the coding lattice of user u is G M_u, with
M_i = lcm(2 L_A,i, 2 L_B,i) and M_u,i = M_i / (2 L_u,i), so both coding
lattices contain the shaping lattice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConstellationViolation, DimensionMismatch, NonDivisible
from .construction import LdlcCode


@dataclass(frozen=True)
class CheckConstellation:
    """Allowed values of each parity-check output: ``lo + t * step`` for ``0 <= t < count``."""

    lo: np.ndarray
    step: np.ndarray
    count: np.ndarray

    @property
    def n(self) -> int:
        return self.lo.shape[0]

    @classmethod
    def integer_range(cls, n: int, lo: int, hi: int) -> "CheckConstellation":
        """All integers in [lo, hi] at every position."""
        return cls(np.full(n, lo, dtype=np.int64), np.ones(n, dtype=np.int64), np.full(n, hi - lo + 1, dtype=np.int64))

    @property
    def hi(self) -> np.ndarray:
        return self.lo + (self.count - 1) * self.step

    def project(self, v) -> np.ndarray:
        """Nearest allowed value, elementwise."""
        t = np.clip(np.rint((np.asarray(v, dtype=float) - self.lo) / self.step), 0, self.count - 1)
        return (self.lo + t.astype(np.int64) * self.step).astype(np.int64)

    def contains(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64)
        t, r = np.divmod(v - self.lo, self.step)
        return (r == 0) & (t >= 0) & (t < self.count)


@dataclass(frozen=True)
class RateDiverseMapping:
    L_A: np.ndarray
    L_B: np.ndarray
    M: np.ndarray
    M_A: np.ndarray
    M_B: np.ndarray
    epsilon: int = 2

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def L(self, user: str) -> np.ndarray:
        return self.L_A if user == "A" else self.L_B

    def M_u(self, user: str) -> np.ndarray:
        return self.M_A if user == "A" else self.M_B

    def rate(self, user: str) -> float:
        """Bits per real channel use."""
        return float(np.mean(np.log2(2 * self.L(user))))

    def k_range(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-index shaping offsets, inclusive: -ceil(M/2) .. floor(M/2) - 1."""
        return -((self.M + 1) // 2), self.M // 2 - 1

    def decoder_constellation(self, user: str, epsilon: int | None = None) -> CheckConstellation:
        """Values b'_u,i = M_u,i * l - M_i * k with l in L_u,i and |k| <= epsilon.

        This is an arithmetic progression with spacing M_u,i spanning
        [-M_u L_u - eps M, M_u L_u + eps M - M_u].
        """
        eps = self.epsilon if epsilon is None else epsilon
        mu, lu = self.M_u(user), self.L(user)
        lo = -mu * lu - eps * self.M
        count = 2 * lu * (1 + 2 * eps)
        return CheckConstellation(lo.astype(np.int64), mu.astype(np.int64), count.astype(np.int64))

    def check_message(self, user: str, b) -> np.ndarray:
        b = np.asarray(b)
        if b.shape[-1] != self.n:
            raise DimensionMismatch(f"message length {b.shape[-1]} != {self.n}")
        lu = self.L(user)
        if not np.issubdtype(b.dtype, np.integer) or np.any(b < -lu) or np.any(b >= lu):
            raise ConstellationViolation(f"user {user} message outside its constellation")
        return b.astype(np.int64)


def build_mapping(L_A, L_B, epsilon: int = 2, n: int | None = None) -> RateDiverseMapping:
    """Scalar ``L_A``/``L_B`` are broadcast to length ``n``."""
    la = np.atleast_1d(np.asarray(L_A, dtype=np.int64))
    lb = np.atleast_1d(np.asarray(L_B, dtype=np.int64))
    if n is not None:
        la = np.broadcast_to(la, (n,)).copy()
        lb = np.broadcast_to(lb, (n,)).copy()
    if la.shape != lb.shape:
        raise DimensionMismatch("L_A and L_B differ in length")
    if np.any(la < 1) or np.any(lb < 1):
        raise ValueError("all L values must be >= 1")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    m = np.array([math.lcm(2 * int(a), 2 * int(b)) for a, b in zip(la, lb)], dtype=np.int64)
    return RateDiverseMapping(la, lb, m, m // (2 * la), m // (2 * lb), int(epsilon))


def mapping_lattices(code: LdlcCode, mapping: RateDiverseMapping):
    """(shaping, coding_A, coding_B) generator matrices G M, G M_A, G M_B."""
    g = code.generator
    return g * mapping.M, g * mapping.M_A, g * mapping.M_B


def cancel_side_info(y, beta: float, code: LdlcCode, mapping: RateDiverseMapping, user: str, b_other) -> np.ndarray:
    """Gain-normalized received vector with the other user's codeword removed.

    Returns ``y / beta - G M_other b_other``.
    """
    y = np.asarray(y, dtype=float)
    other = "B" if user == "A" else "A"
    b_other = np.asarray(b_other)
    if y.shape[-1] != code.n or b_other.shape[-1] != code.n:
        raise DimensionMismatch("vector length differs from code length")
    return y / beta - (mapping.M_u(other) * b_other) @ code.generator.T


def centered_residue(v, modulus) -> np.ndarray:
    """v mod modulus in [-modulus/2, modulus/2)."""
    v = np.asarray(v, dtype=np.int64)
    half = np.asarray(modulus) // 2
    return (v + half) % modulus - half


def recover_symbols(b_prime, mapping: RateDiverseMapping, user: str) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise M_u^-1 (b' mod M); returns (symbols, divisible mask).

    Non-divisible positions are returned as 0 with mask False.
    """
    r = centered_residue(b_prime, mapping.M)
    mu = mapping.M_u(user)
    q, rem = np.divmod(r, mu)
    ok = rem == 0
    return np.where(ok, q, 0), ok


def recover_message(b_prime, mapping: RateDiverseMapping, user: str) -> np.ndarray:
    sym, ok = recover_symbols(b_prime, mapping, user)
    if not np.all(ok):
        bad = np.flatnonzero(~np.asarray(ok).reshape(-1))
        raise NonDivisible(f"residues at positions {bad.tolist()} are not multiples of M_{user}")
    return sym
