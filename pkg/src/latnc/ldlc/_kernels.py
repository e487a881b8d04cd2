"""Compiled inner loops for the LDLC BP decoder."""
import numba as nb
import numpy as np


@nb.njit(cache=True)
def check_outputs(conv, lc, start, lo, period, count, h, y, offsets, step):
    """Check-to-variable messages from the all-but-one convolutions.

    ``conv[b, r, :lc]`` is the density of the other terms' sum on the grid
    ``(start[b, r] + m) * step`` (negative FFT ripple is clipped). The output
    on the target grid ``y[b, r] + offsets`` is the sum over allowed check
    values ``lo[r] + t * period[r] * step`` (t < count[r]) of that density at
    ``value - h[r] * x``, linearly interpolated, normalized to unit mass
    (uniform if empty). A prefix sum with stride ``period`` makes each output
    O(1).
    """
    bsz, rows = start.shape
    ng = offsets.shape[0]
    out = np.empty((bsz, rows, ng))
    run = np.empty(lc)
    inv_step = 1.0 / step
    for b in range(bsz):
        for r in range(rows):
            per = period[r]
            cnt = count[r]
            for m in range(lc):
                v = conv[b, r, m]
                if v < 0.0:
                    v = 0.0
                run[m] = v + (run[m - per] if m >= per else 0.0)
            base = lo[r] * inv_step - start[b, r]
            tot = 0.0
            for i in range(ng):
                x = base - h[r] * (y[b, r] + offsets[i]) * inv_step
                m0 = int(np.floor(x))
                fr = x - m0
                val = (1.0 - fr) * _strided_sum(run, m0, per, cnt, lc) + fr * _strided_sum(run, m0 + 1, per, cnt, lc)
                if val < 0.0:
                    val = 0.0
                out[b, r, i] = val
                tot += val
            if tot > 0.0:
                scale = inv_step / tot
                for i in range(ng):
                    out[b, r, i] *= scale
            else:
                for i in range(ng):
                    out[b, r, i] = inv_step / ng
    return out


@nb.njit(inline="always")
def _strided_sum(run, m, period, cnt, lc):
    """sum of pc[m + t * period] for 0 <= t < cnt, given run = strided prefix sum of pc."""
    t0 = 0
    if m < 0:
        t0 = (-m + period - 1) // period
    t1 = cnt - 1
    if m + t1 * period > lc - 1:
        if m > lc - 1:
            return 0.0
        t1 = (lc - 1 - m) // period
    if t1 < t0:
        return 0.0
    hi = run[m + t1 * period]
    lo_idx = m + (t0 - 1) * period
    return hi - run[lo_idx] if lo_idx >= 0 else hi


@nb.njit(cache=True)
def exclusive_products(f):
    """out[t] = prod over u != t of f[u], first axis; f is (d, K) complex."""
    d, k = f.shape
    out = np.empty_like(f)
    for j in range(k):
        acc = 1.0 + 0.0j
        for t in range(d):
            out[t, j] = acc
            acc *= f[t, j]
        acc = 1.0 + 0.0j
        for t in range(d - 1, -1, -1):
            out[t, j] *= acc
            acc *= f[t, j]
    return out


@nb.njit(cache=True)
def stretch(v2c, y, h, step, length, splat):
    """Density of h * x on the integer grid ``(start + j) * step``, j < length.

    ``v2c`` is (B, n, ng) on ``y + (i - ng/2) * step``. With ``splat`` each
    sample's mass is split linearly between its two neighbouring bins
    (no peak can fall between samples when |h| <= 1); otherwise the density
    is interpolated at the bin centers. Each output row sums to 1.
    Returns (stretched, start).
    """
    bsz, n, ng = v2c.shape
    half = ng // 2
    out = np.zeros((bsz, n, length))
    start = np.empty((bsz, n), dtype=np.int64)
    for b in range(bsz):
        for k in range(n):
            hk = h[k]
            yk = y[b, k]
            zs = int(np.floor((hk * yk - abs(hk) * half * step) / step)) - 1
            start[b, k] = zs
            row = out[b, k]
            if splat:
                for i in range(ng):
                    p = v2c[b, k, i]
                    if p == 0.0:
                        continue
                    pos = hk * (yk + (i - half) * step) / step - zs
                    j0 = int(np.floor(pos))
                    fr = pos - j0
                    if 0 <= j0 < length:
                        row[j0] += (1.0 - fr) * p
                    if 0 <= j0 + 1 < length:
                        row[j0 + 1] += fr * p
            else:
                for j in range(length):
                    fi = ((zs + j) * step / hk - yk) / step + half
                    i0 = int(np.floor(fi))
                    fr = fi - i0
                    a = v2c[b, k, i0] if 0 <= i0 < ng else 0.0
                    c = v2c[b, k, i0 + 1] if 0 <= i0 + 1 < ng else 0.0
                    row[j] = (1.0 - fr) * a + fr * c
            tot = 0.0
            for j in range(length):
                tot += row[j]
            if tot > 0.0:
                for j in range(length):
                    row[j] /= tot
    return out, start


@nb.njit(cache=True)
def variable_update(c2v, var_edges, channel, step):
    """Variable-node products.

    ``c2v`` is (B, E, ng) with edge ids grouped per variable by
    ``var_edges`` (n, d). Returns (v2c, belief): each outgoing message is the
    channel density times all other incoming messages, the belief uses all
    of them. Every output is normalized to unit mass; an all-zero outgoing
    message falls back to the channel density.
    """
    bsz, n_edges, ng = c2v.shape
    n, d = var_edges.shape
    out = np.empty_like(c2v)
    belief = np.empty((bsz, n, ng))
    scaled = np.empty((d, ng))
    suf = np.empty(ng)
    for b in range(bsz):
        for k in range(n):
            for t in range(d):
                e = var_edges[k, t]
                peak = 0.0
                for i in range(ng):
                    if c2v[b, e, i] > peak:
                        peak = c2v[b, e, i]
                inv = 1.0 / peak if peak > 0.0 else 0.0
                for i in range(ng):
                    scaled[t, i] = c2v[b, e, i] * inv
            # outgoing[t] = channel * prod_{u<t} * prod_{u>t}; build prefixes in place
            for t in range(d):
                e = var_edges[k, t]
                for i in range(ng):
                    out[b, e, i] = channel[i]
            for i in range(ng):
                acc = 1.0
                for t in range(d):
                    out[b, var_edges[k, t], i] *= acc
                    acc *= scaled[t, i]
                belief[b, k, i] = channel[i] * acc
                acc = 1.0
                for t in range(d - 1, -1, -1):
                    out[b, var_edges[k, t], i] *= acc
                    acc *= scaled[t, i]
            for t in range(d):
                _normalize_row(out[b, var_edges[k, t]], channel, step)
            _normalize_row(belief[b, k], channel, step)
    return out, belief


@nb.njit(inline="always")
def _normalize_row(row, fallback, step):
    tot = 0.0
    for i in range(row.shape[0]):
        tot += row[i]
    if not tot > 0.0:
        for i in range(row.shape[0]):
            row[i] = fallback[i]
        tot = 0.0
        for i in range(row.shape[0]):
            tot += row[i]
    scale = 1.0 / (tot * step)
    for i in range(row.shape[0]):
        row[i] *= scale
