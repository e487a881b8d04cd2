"""Belief propagation for LDLC with sampled (discretized) messages.

Every message is a density sampled on a uniform grid of ``span / step``
points centered at the channel observation of its variable node. A check
node with coefficients h_t computes, for each neighbour l, the density of
x_l implied by sum_t h_t x_t = b with b restricted to that check's
constellation:

1. stretch each incoming density to the density of h_t x_t,
2. convolve all but one (FFT, shared prefix/suffix products),
3. sum shifted copies over the allowed b values and resample at h_l x_l.

Variable nodes multiply the channel density by all-but-one incoming check
messages. Decisions are the peaks of the full beliefs, mapped through H and
projected onto the constellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from ..errors import DimensionMismatch
from . import _kernels
from .construction import LdlcCode
from .mapping import CheckConstellation

DEFAULT_STEP = 1.0 / 128.0
DEFAULT_SPAN = 8.0
# coefficient magnitudes up to this compress (or barely stretch) the grid
SPLAT_LIMIT = 1.05


@dataclass
class DiscretizedDensity:
    """A density on ``center + (i - len/2) * step`` for i in [0, span/step)."""

    center: float
    step: float = DEFAULT_STEP
    span: float = DEFAULT_SPAN
    weights: np.ndarray | None = None

    def __post_init__(self):
        n = int(round(self.span / self.step))
        if self.weights is None:
            self.weights = np.full(n, 1.0 / self.span)
        elif self.weights.shape != (n,):
            raise DimensionMismatch(f"expected {n} weights, got {self.weights.shape}")

    @property
    def grid(self) -> np.ndarray:
        n = self.weights.shape[0]
        return self.center + (np.arange(n) - n // 2) * self.step

    @property
    def mass(self) -> float:
        return float(self.weights.sum() * self.step)

    def normalize(self) -> "DiscretizedDensity":
        self.weights = _normalize(self.weights, self.step)
        return self

    def peak(self) -> float:
        return float(self.grid[np.argmax(self.weights)])

    @classmethod
    def gaussian(cls, center: float, noise_var: float, step: float = DEFAULT_STEP, span: float = DEFAULT_SPAN):
        d = cls(center, step, span)
        off = d.grid - center
        d.weights = np.exp(-(off**2) / (2 * noise_var))
        return d.normalize()


def _normalize(w: np.ndarray, step: float, fallback: np.ndarray | None = None) -> np.ndarray:
    """Scale the last axis to unit mass; all-zero rows become ``fallback`` (or uniform)."""
    s = w.sum(axis=-1, keepdims=True) * step
    bad = ~(s > 0)
    if np.any(bad):
        fb = np.ones(w.shape[-1]) if fallback is None else fallback
        w = np.where(bad, fb, w)
        s = w.sum(axis=-1, keepdims=True) * step
    return w / s


class LdlcBpDecoder:
    """Per-instance BP state for one code/constellation pair. Not thread safe."""

    def __init__(
        self,
        code: LdlcCode,
        constellation: CheckConstellation,
        step: float = DEFAULT_STEP,
        span: float = DEFAULT_SPAN,
        max_batch_elements: int = 4_000_000,
        tail_tol: float | None = 1e-20,
    ):
        h = code.parity
        n = code.n
        if constellation.n != n:
            raise DimensionMismatch("constellation length differs from code length")
        self.code = code
        self.constellation = constellation
        self.step = float(step)
        self.span = float(span)
        self.ng = int(round(span / step))
        if self.ng % 2 or abs(self.ng * step - span) > 1e-9:
            raise ValueError("span must be an even multiple of step")
        inv = 1.0 / step
        if abs(inv - round(inv)) > 1e-9:
            raise ValueError("1/step must be an integer so integer shifts land on the grid")
        self.periods = np.rint(constellation.step * inv).astype(np.int64)

        degs = np.count_nonzero(h, axis=1)
        if np.any(degs != degs[0]) or np.any(np.count_nonzero(h, axis=0) != degs[0]):
            raise ValueError("BP decoder requires a regular parity matrix")
        d = int(degs[0])
        self.d = d
        col = np.empty((d, n), dtype=np.int64)
        coef = np.empty((d, n))
        for j in range(n):
            nz = np.flatnonzero(h[j])
            order = np.lexsort((nz, -np.abs(h[j, nz])))
            col[:, j] = nz[order]
            coef[:, j] = h[j, nz[order]]
        self.col, self.coef = col, coef
        # flat edge id s * n + j, grouped by variable
        flat_col = col.reshape(-1)
        self.var_edges = np.argsort(flat_col, kind="stable").reshape(n, d)
        self.full_ng = self.ng
        self.tail_tol = tail_tol
        self.max_batch_elements = max_batch_elements
        self._set_window(self.full_ng)

    def _set_window(self, ng: int) -> None:
        """Work on the central ``ng`` points of the full grid."""
        self.ng = ng
        d, n = self.d, self.code.n
        self.lens = [int(math.ceil(np.max(np.abs(self.coef[s])) * ng)) + 3 for s in range(d)]
        self.fft_len = scipy.fft.next_fast_len(sum(self.lens), real=True)
        self.offsets = (np.arange(ng) - ng // 2) * self.step
        per_item = d * n * (ng * 3 + self.fft_len * 4)
        self.chunk = max(1, self.max_batch_elements // per_item)

    def window_points(self, noise_var: float) -> int:
        """Grid points kept for a given noise level.

        Points where the channel density has dropped below ``tail_tol`` of
        its peak carry no mass after the first variable update, since every
        variable message is multiplied by the channel density.
        """
        if self.tail_tol is None:
            return self.full_ng
        half = math.sqrt(2 * noise_var * math.log(1 / self.tail_tol)) / self.step
        return int(min(self.full_ng, 2 * math.ceil(half) + 2))

    # -- message updates ---------------------------------------------------

    def _check_update(self, v2c: np.ndarray, y: np.ndarray) -> np.ndarray:
        """v2c, result: (B, d, n, ng) indexed by (slot, check row)."""
        bsz = v2c.shape[0]
        d, n, ng, step = self.d, self.code.n, self.ng, self.step
        yk = y[:, self.col]  # (B, d, n)
        spectra = np.empty((d, bsz, n, self.fft_len // 2 + 1), dtype=complex)
        starts = np.empty((d, bsz, n), dtype=np.int64)
        for s in range(d):
            splat = bool(np.max(np.abs(self.coef[s])) <= SPLAT_LIMIT)
            stretched, zs = _kernels.stretch(
                np.ascontiguousarray(v2c[:, s]), np.ascontiguousarray(yk[:, s]), self.coef[s], step, self.lens[s], splat
            )
            spectra[s] = scipy.fft.rfft(stretched, n=self.fft_len, axis=-1)
            starts[s] = zs
        excl = _kernels.exclusive_products(spectra.reshape(d, -1)).reshape(spectra.shape)
        conv = scipy.fft.irfft(excl, n=self.fft_len, axis=-1)
        total_start = starts.sum(axis=0)
        total_len = sum(self.lens) - (d - 1)

        out = np.empty_like(v2c)
        cons = self.constellation
        for s in range(d):
            out[:, s] = _kernels.check_outputs(
                conv[s],
                total_len - self.lens[s] + 1,
                total_start - starts[s],
                cons.lo.astype(float),
                self.periods,
                cons.count.astype(np.int64),
                self.coef[s],
                np.ascontiguousarray(y[:, self.col[s]]),
                self.offsets,
                step,
            )
        return out

    def _variable_update(self, c2v: np.ndarray, channel: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        bsz = c2v.shape[0]
        flat = np.ascontiguousarray(c2v.reshape(bsz, self.d * self.code.n, self.ng))
        out, belief = _kernels.variable_update(flat, self.var_edges, channel, self.step)
        return out.reshape(c2v.shape), belief

    def _decide(self, y: np.ndarray, belief: np.ndarray) -> np.ndarray:
        xhat = y + self.offsets[np.argmax(belief, axis=-1)]
        return self.constellation.project(xhat @ self.code.parity.T)

    # -- driver ------------------------------------------------------------

    def decode(
        self,
        y,
        noise_var: float,
        iterations: int = 100,
        patience: int | None = None,
        callback=None,
    ) -> np.ndarray:
        """Estimate the integer vector b' with H x = b' from ``y = x + noise``.

        ``y`` is (n,) or (B, n). With ``patience`` a codeword stops iterating
        once its decision has been unchanged for that many iterations;
        otherwise exactly ``iterations`` rounds run. ``callback(it, v2c, c2v)``
        is invoked after each round.
        """
        if noise_var <= 0:
            raise ValueError("noise_var must be positive")
        if iterations < 1:
            raise ValueError("iterations must be >= 1")
        y = np.asarray(y, dtype=float)
        single = y.ndim == 1
        y2 = np.atleast_2d(y)
        if y2.shape[-1] != self.code.n:
            raise DimensionMismatch(f"received length {y2.shape[-1]} != code length {self.code.n}")
        out = np.empty(y2.shape, dtype=np.int64)
        self._set_window(self.window_points(noise_var))
        for lo in range(0, y2.shape[0], self.chunk):
            out[lo : lo + self.chunk] = self._decode_chunk(y2[lo : lo + self.chunk], noise_var, iterations, patience, callback)
        return out[0] if single else out

    def _decode_chunk(self, y, noise_var, iterations, patience, callback):
        channel = _normalize(np.exp(-(self.offsets**2) / (2 * noise_var)), self.step)
        bsz = y.shape[0]
        v2c = np.broadcast_to(channel, (bsz, self.d, self.code.n, self.ng)).copy()
        result = np.zeros((bsz, self.code.n), dtype=np.int64)
        active = np.arange(bsz)
        prev = None
        stable = np.zeros(bsz, dtype=np.int64)
        for it in range(iterations):
            ya = y[active]
            c2v = self._check_update(v2c, ya)
            v2c, belief = self._variable_update(c2v, channel)
            if callback is not None:
                callback(it, v2c, c2v)
            dec = self._decide(ya, belief)
            result[active] = dec
            if patience is None:
                continue
            if prev is not None:
                same = np.all(dec == prev, axis=1)
                stable[active] = np.where(same, stable[active] + 1, 0)
            done = stable[active] >= patience
            if np.any(done):
                keep = ~done
                active, v2c, dec = active[keep], v2c[keep], dec[keep]
                if active.size == 0:
                    break
            prev = dec
        return result


def bp_decode(
    code: LdlcCode,
    constellation: CheckConstellation,
    y,
    noise_var: float,
    iterations: int = 100,
    step: float = DEFAULT_STEP,
    span: float = DEFAULT_SPAN,
    patience: int | None = None,
) -> np.ndarray:
    return LdlcBpDecoder(code, constellation, step, span).decode(y, noise_var, iterations, patience)
