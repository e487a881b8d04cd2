"""Nested-lattice shaping for LDLC by M-algorithm tree search.

Find integer k minimizing ||G (b_NC - M k)||^2. With H = T Q (T lower
triangular, Q orthogonal) the transformed codeword x~ = Q x satisfies
T x~ = b_NC - M k, so x~ can be solved one coordinate at a time and the
squared norm accumulates along a tree over k_1, k_2, ...
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .construction import LdlcCode
from .mapping import RateDiverseMapping


@dataclass(frozen=True)
class ShapingResult:
    k: np.ndarray
    b_prime: np.ndarray
    x: np.ndarray
    power: float


def _result(code: LdlcCode, mapping: RateDiverseMapping, b_nc: np.ndarray, k: np.ndarray) -> ShapingResult:
    bp = b_nc - mapping.M * k
    x = code.generator @ bp
    return ShapingResult(k.astype(np.int64), bp.astype(np.int64), x, float(x @ x / code.n))


def m_algorithm(code: LdlcCode, mapping: RateDiverseMapping, b_nc, m_width: int | None = 64) -> ShapingResult:
    """Breadth-limited search keeping the ``m_width`` best partial paths per level.

    ``m_width=None`` keeps every path (exhaustive). Ties in the metric go to
    the lexicographically smallest k.
    """
    b_nc = np.asarray(b_nc, dtype=np.int64)
    t, _ = code.triangular
    n = code.n
    k_lo, k_hi = mapping.k_range()
    m = mapping.M.astype(float)

    # survivors are kept in lexicographic order of their k prefix
    paths = np.zeros((1, 0), dtype=np.int64)
    xt = np.zeros((1, 0))
    metric = np.zeros(1)
    for i in range(n):
        ks = np.arange(k_lo[i], k_hi[i] + 1)
        partial = xt @ t[i, :i]
        xi = (b_nc[i] - partial[:, None] - m[i] * ks[None, :]) / t[i, i]  # (S, C)
        cand = (metric[:, None] + xi**2).reshape(-1)
        s_count, c_count = xi.shape
        if m_width is not None and cand.size > m_width:
            keep = np.sort(np.argsort(cand, kind="stable")[:m_width])
        else:
            keep = np.arange(cand.size)
        parent, child = np.divmod(keep, c_count)
        paths = np.concatenate([paths[parent], ks[child][:, None]], axis=1)
        xt = np.concatenate([xt[parent], xi.reshape(-1)[keep][:, None]], axis=1)
        metric = cand[keep]
    # near-equal metrics are ties; survivors are in lexicographic order, so take the first
    mmin = metric.min()
    best = int(np.argmax(metric <= mmin + 1e-12 * max(1.0, mmin)))
    return _result(code, mapping, b_nc, paths[best])


def exhaustive_shaping(code: LdlcCode, mapping: RateDiverseMapping, b_nc) -> ShapingResult:
    """Brute-force minimization of ||G (b_NC - M k)||^2 over the full k box.

    Works directly on G (no QR). Only for tiny n.
    """
    b_nc = np.asarray(b_nc, dtype=np.int64)
    k_lo, k_hi = mapping.k_range()
    ranges = [range(lo, hi + 1) for lo, hi in zip(k_lo, k_hi)]
    ks = np.array(list(itertools.product(*ranges)), dtype=np.int64)  # lexicographic
    x = (b_nc[None, :] - ks * mapping.M[None, :]) @ code.generator.T
    p = np.sum(x * x, axis=1)
    pmin = p.min()
    best = int(np.argmax(p <= pmin + 1e-12 * max(1.0, pmin)))
    return _result(code, mapping, b_nc, ks[best])


def network_encode_shape(
    code: LdlcCode, mapping: RateDiverseMapping, b_a, b_b, m_width: int | None = 64
) -> ShapingResult:
    """Shape b_NC = M_A b_A + M_B b_B into the Voronoi region of G M."""
    if m_width is not None and m_width < 1:
        raise ValueError("m_width must be >= 1")
    b_a = mapping.check_message("A", b_a)
    b_b = mapping.check_message("B", b_b)
    return m_algorithm(code, mapping, mapping.M_A * b_a + mapping.M_B * b_b, m_width)


def single_user_shape(
    code: LdlcCode, mapping: RateDiverseMapping, user: str, b_u, m_width: int | None = 64
) -> ShapingResult:
    """Point-to-point baseline: shape M_u b_u alone with the same shaping lattice."""
    b_u = mapping.check_message(user, b_u)
    return m_algorithm(code, mapping, mapping.M_u(user) * b_u, m_width)


def unshaped(code: LdlcCode, mapping: RateDiverseMapping, b_nc) -> ShapingResult:
    b_nc = np.asarray(b_nc, dtype=np.int64)
    return _result(code, mapping, b_nc, np.zeros(code.n, dtype=np.int64))
