"""Experiment runners: one function per scheme, all returning ResultRow lists."""
from __future__ import annotations

import math
import sys
import threading
import time
from dataclasses import dataclass

import numpy as np

from .. import bicm, nested_nc
from ..channel_sim import error_stats, gaussian_noise, noise_stream, run_monte_carlo_multi
from ..ldlc import (
    LdlcBpDecoder,
    build_mapping,
    build_parity,
    cancel_side_info,
    degree7_sequence,
    network_encode_shape,
    recover_symbols,
    single_user_shape,
)
from ..lattice_core import VoronoiSampler, shaping_stats
from .config import ExperimentConfig
from .results import ResultRow

# generator streams derived from a trial seed; noise uses streams 0 (A) and 1 (B)
MESSAGE_STREAM = 2
CALIBRATION_STREAM = 3


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _stats_row(scheme, user, snr_db, rate, st, wall) -> ResultRow:
    return ResultRow(scheme, user, float(snr_db), float(rate), st.rate_estimate, st.ci95_low, st.ci95_high, st.trials, st.errors, wall)


def _points(cfg: ExperimentConfig):
    """(index, {user: snr_db}) for every sweep point."""
    length = len(cfg.sweep(cfg.users[0]))
    for i in range(length):
        yield i, {u: cfg.sweep(u)[i] for u in cfg.users}


def _channel_gains(snr_db: dict, power: float) -> tuple[float, dict]:
    """Noise variance and per-user gains giving SNR_u = P beta_u^2 / noise_var.

    The first listed user gets beta = 1; the other's gain is set from its SNR.
    """
    if any(math.isinf(s) for s in snr_db.values()):
        # infinite SNR is the noiseless path
        return 0.0, {u: 1.0 for u in snr_db}
    ref = next(iter(snr_db))
    noise_var = power / 10 ** (snr_db[ref] / 10)
    betas = {u: math.sqrt(10 ** (s / 10) * noise_var / power) for u, s in snr_db.items()}
    return noise_var, betas


# --- LDLC ---------------------------------------------------------------------


@dataclass
class LdlcSetup:
    code: object
    mapping: object
    power_nc: float
    power_su: dict

    def decoder(self, cfg: ExperimentConfig, user: str, cache: threading.local) -> LdlcBpDecoder:
        key = f"dec_{user}"
        if not hasattr(cache, key):
            setattr(cache, key, LdlcBpDecoder(self.code, self.mapping.decoder_constellation(user), cfg.step, cfg.span))
        return getattr(cache, key)


def ldlc_setup(cfg: ExperimentConfig) -> LdlcSetup:
    seq = cfg.generating_sequence or degree7_sequence()
    code = build_parity(seq, cfg.n, cfg.code_seed)
    mapping = build_mapping(cfg.L_A, cfg.L_B, cfg.epsilon, n=cfg.n)
    rng = np.random.default_rng([cfg.seed, CALIBRATION_STREAM])
    p_nc, p_a, p_b = [], [], []
    for _ in range(cfg.power_calibration):
        b_a, b_b = _ldlc_messages(rng, cfg)
        p_nc.append(network_encode_shape(code, mapping, b_a, b_b, cfg.m_width).power)
        p_a.append(single_user_shape(code, mapping, "A", b_a, cfg.m_width).power)
        p_b.append(single_user_shape(code, mapping, "B", b_b, cfg.m_width).power)
    return LdlcSetup(code, mapping, float(np.mean(p_nc)), {"A": float(np.mean(p_a)), "B": float(np.mean(p_b))})


def _ldlc_messages(rng, cfg):
    return rng.integers(-cfg.L_A, cfg.L_A, cfg.n), rng.integers(-cfg.L_B, cfg.L_B, cfg.n)


def _symbol_errors(setup, user, b_hat, truth) -> int:
    sym, ok = recover_symbols(b_hat, setup.mapping, user)
    return int(np.sum((sym != truth) | ~ok))


def _run_ldlc(cfg: ExperimentConfig, threads: int) -> list[ResultRow]:
    setup = ldlc_setup(cfg)
    _progress(f"ldlc: P_NC={setup.power_nc:.4f} P_A={setup.power_su['A']:.4f} P_B={setup.power_su['B']:.4f}")
    network = cfg.scheme == "ldlc-rdwnc"
    with_p2p = not network or cfg.baseline
    rows = []
    cache = threading.local()
    for i, snr in _points(cfg):
        # the baseline shares the broadcast noise; a standalone p2p run uses its own power
        power = setup.power_nc if network else None
        t0 = time.perf_counter()

        def trial(seed):
            rng = np.random.default_rng([seed, MESSAGE_STREAM])
            b = dict(zip("AB", _ldlc_messages(rng, cfg)))
            out = {}
            x_nc = network_encode_shape(setup.code, setup.mapping, b["A"], b["B"], cfg.m_width).x if network else None
            for user in cfg.users:
                p = power if power is not None else setup.power_su[user]
                noise_var, betas = _channel_gains(snr, p)
                beta = betas[user]
                noise = gaussian_noise(noise_stream(seed, 0 if user == "A" else 1), cfg.n, noise_var)
                dec = setup.decoder(cfg, user, cache)
                eff_var = noise_var / beta**2
                if network:
                    other = "B" if user == "A" else "A"
                    z = cancel_side_info(beta * x_nc + noise, beta, setup.code, setup.mapping, user, b[other])
                    b_hat = dec.decode(z, eff_var, cfg.bp_iterations, cfg.bp_patience)
                    out[("ldlc-rdwnc", user)] = (_symbol_errors(setup, user, b_hat, b[user]), cfg.n)
                if with_p2p:
                    x_su = single_user_shape(setup.code, setup.mapping, user, b[user], cfg.m_width).x
                    b_hat = dec.decode((beta * x_su + noise) / beta, eff_var, cfg.bp_iterations, cfg.bp_patience)
                    out[("ldlc-p2p", user)] = (_symbol_errors(setup, user, b_hat, b[user]), cfg.n)
            return out

        stats = run_monte_carlo_multi(trial, cfg.trials, cfg.min_errors, cfg.seed + i * cfg.trials, threads)
        wall = time.perf_counter() - t0
        for (scheme, user), st in sorted(stats.items()):
            rows.append(_stats_row(scheme, user, snr[user], setup.mapping.rate(user), st, wall))
        _progress(f"ldlc point {i}: " + ", ".join(f"{s}/{u}={st.rate_estimate:.3g}" for (s, u), st in sorted(stats.items())))
    return rows


# --- BICM ---------------------------------------------------------------------


def bicm_codes(cfg: ExperimentConfig):
    k_a = cfg.packet_bits
    k_b = cfg.packet_bits * cfg.q_A // cfg.q_B
    return {"A": bicm.make_ra_code(k_a, cfg.q_A, cfg.ra_seed), "B": bicm.make_ra_code(k_b, cfg.q_B, cfg.ra_seed + 1)}


def bicm_rate(cfg: ExperimentConfig, user: str) -> float:
    """Information bits per complex channel use."""
    q = cfg.q_A if user == "A" else cfg.q_B
    return bicm.constellation(cfg.constellation).bits_per_symbol / q


def _esn0_db(cfg: ExperimentConfig, user: str, snr_db: float) -> float:
    if cfg.snr_kind == "esn0":
        return snr_db
    return snr_db + 10 * math.log10(bicm_rate(cfg, user))


def _run_bicm(cfg: ExperimentConfig, threads: int) -> list[ResultRow]:
    const = bicm.constellation(cfg.constellation)
    codes = bicm_codes(cfg)
    network = cfg.scheme == "bicm-rdwnc"
    with_p2p = not network or cfg.baseline
    rows = []
    for i, snr in _points(cfg):
        esn0 = {u: _esn0_db(cfg, u, s) for u, s in snr.items()}
        noise_var, betas = _channel_gains(esn0, 1.0)
        t0 = time.perf_counter()

        def trial(seed):
            rng = np.random.default_rng([seed, MESSAGE_STREAM])
            bits = {u: rng.integers(0, 2, (cfg.packets_per_trial, codes[u].info_length), dtype=np.uint8) for u in "AB"}
            out = {}
            if network:
                # the unused user's gain only matters for its own receiver
                chan = bicm.BroadcastChannel(betas.get("A", 1.0), betas.get("B", 1.0), noise_var, "complex")
                dec = dict(zip("AB", bicm.bicm_nc_trial(
                    codes["A"], codes["B"], const, cfg.interleaver_seed, (bits["A"], bits["B"]), chan, seed,
                    iterations=cfg.ra_iterations,
                )))
                for u in cfg.users:
                    out[("bicm-rdwnc", u)] = (int(np.sum(dec[u] != bits[u])), bits[u].size)
            if with_p2p:
                for u in cfg.users:
                    d = bicm.bicm_p2p_trial(
                        codes[u], const, cfg.interleaver_seed, bits[u], betas[u], noise_var, seed,
                        stream=0 if u == "A" else 1, iterations=cfg.ra_iterations,
                    )
                    out[("bicm-p2p", u)] = (int(np.sum(d != bits[u])), bits[u].size)
            return out

        stats = run_monte_carlo_multi(trial, cfg.trials, cfg.min_errors, cfg.seed + i * cfg.trials, threads)
        wall = time.perf_counter() - t0
        for (scheme, user), st in sorted(stats.items()):
            rows.append(_stats_row(scheme, user, snr[user], bicm_rate(cfg, user), st, wall))
        _progress(f"bicm point {i}: " + ", ".join(f"{s}/{u}={st.rate_estimate:.3g}" for (s, u), st in sorted(stats.items())))
    if const.name == "qpsk":
        gain = bicm.modulation_gain_db()
        rows += [ResultRow("bicm-modulation-gain", u, gain, bicm_rate(cfg, u), 0.0, 0.0, 0.0, 0, 0, 0.0) for u in cfg.users]
    return rows


# --- nested lattice identity and closed forms ------------------------------------


def _run_identity(cfg: ExperimentConfig, threads: int) -> list[ResultRow]:
    pair = nested_nc.one_dim_pair() if cfg.lattice == "1d" else nested_nc.hexagonal_pair()
    power = shaping_stats(VoronoiSampler(pair.coarse, pair.search_radius), 20_000, cfg.seed).second_moment
    rows = []
    for i, snr in _points(cfg):
        noise_var, betas = _channel_gains(snr, power)
        for user in cfg.users:
            t0 = time.perf_counter()
            mism = nested_nc.coupled_identity_mismatches(
                pair, user, cfg.trials, betas[user], noise_var, cfg.alpha, cfg.seed + 1000 * i + (0 if user == "A" else 1)
            )
            st = error_stats(mism, cfg.trials, cfg.trials, cfg.seed)
            rows.append(_stats_row("lattice-identity", user, snr[user], pair.rate(user), st, time.perf_counter() - t0))
    return rows


def _run_shaping_gain(cfg: ExperimentConfig, threads: int) -> list[ResultRow]:
    t0 = time.perf_counter()
    res = nested_nc.shaping_gain_1d(cfg.L)
    mismatch = 0 if res.enumeration_matches else 1
    rate = math.log2(cfg.L)  # user B: 2Z inside 2L Z
    return [ResultRow("shaping-gain-1d", "B", res.gain_db, rate, float(mismatch), 0.0, 1.0, 1, mismatch, time.perf_counter() - t0)]


_RUNNERS = {
    "ldlc-p2p": _run_ldlc,
    "ldlc-rdwnc": _run_ldlc,
    "bicm-p2p": _run_bicm,
    "bicm-rdwnc": _run_bicm,
    "lattice-identity": _run_identity,
    "shaping-gain-1d": _run_shaping_gain,
}


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    return _RUNNERS[cfg.scheme](cfg, threads)
