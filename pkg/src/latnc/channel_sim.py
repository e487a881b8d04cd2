"""Two-user Gaussian broadcast channel and the Monte Carlo error-rate engine."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .errors import NonFinite, NonPositiveInput, TrialFailed

SignalKind = Literal["real", "complex"]


@dataclass(frozen=True)
class BroadcastChannel:
    """y_u = beta_u * x + n_u.

    ``noise_var`` is the variance per real dimension for real signals and
    the total per complex symbol (half per component) for complex ones.
    Zero noise is accepted as the noiseless path.
    """

    beta_a: float
    beta_b: float
    noise_var: float
    signal_kind: SignalKind = "real"

    def __post_init__(self):
        if not (self.beta_a > 0 and self.beta_b > 0):
            raise NonPositiveInput("channel gains must be positive")
        if not self.noise_var >= 0:
            raise NonPositiveInput("noise variance must be non-negative")
        if self.signal_kind not in ("real", "complex"):
            raise ValueError(f"unknown signal kind {self.signal_kind!r}")

    def beta(self, user: str) -> float:
        return self.beta_a if user == "A" else self.beta_b


def noise_stream(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for (seed, stream); stream 0 is user A, 1 is user B."""
    return np.random.default_rng([int(seed), int(stream)])


def gaussian_noise(rng: np.random.Generator, shape, noise_var: float, signal_kind: SignalKind = "real") -> np.ndarray:
    if signal_kind == "real":
        return rng.normal(0.0, math.sqrt(noise_var), shape)
    sd = math.sqrt(noise_var / 2)
    return rng.normal(0.0, sd, shape) + 1j * rng.normal(0.0, sd, shape)


def transmit_broadcast(channel: BroadcastChannel, x, seed: int, coupled: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Pass ``x`` to both receivers.

    Noise is independent per user unless ``coupled``, in which case both
    receivers see the same noise realization (stream 0).
    """
    x = np.asarray(x)
    if not np.all(np.isfinite(x)):
        raise NonFinite("transmit signal contains non-finite values")
    n_a = gaussian_noise(noise_stream(seed, 0), x.shape, channel.noise_var, channel.signal_kind)
    n_b = n_a if coupled else gaussian_noise(noise_stream(seed, 1), x.shape, channel.noise_var, channel.signal_kind)
    return channel.beta_a * x + n_a, channel.beta_b * x + n_b


def snr_accounting(power: float, beta: float, noise_var: float, signal_kind: SignalKind = "real"):
    """(SNR, SNR in dB, capacity) with SNR = P beta^2 / noise_var.

    Capacity is in bits per real dimension for real signals and per complex
    symbol for complex ones.
    """
    if not (power > 0 and beta > 0 and noise_var > 0):
        raise NonPositiveInput("power, beta and noise_var must all be positive")
    snr = power * beta**2 / noise_var
    cap = math.log2(1 + snr) * (0.5 if signal_kind == "real" else 1.0)
    return snr, 10 * math.log10(snr), cap


def noise_var_for_snr(snr_db: float, power: float = 1.0, beta: float = 1.0) -> float:
    return power * beta**2 / 10 ** (snr_db / 10)


# --- Monte Carlo -------------------------------------------------------------


@dataclass(frozen=True)
class ErrorStats:
    trials: int
    errors: int
    denominator: int
    rate_estimate: float
    ci95_low: float
    ci95_high: float
    seed: int

    def overlaps(self, other: "ErrorStats") -> bool:
        return self.ci95_low <= other.ci95_high and other.ci95_low <= self.ci95_high


def wilson_interval(errors: int, denominator: int) -> tuple[float, float]:
    if denominator == 0:
        return 0.0, 1.0
    lo, hi = proportion_confint(errors, denominator, alpha=0.05, method="wilson")
    p = errors / denominator
    return max(0.0, min(float(lo), p)), min(1.0, max(float(hi), p))


def error_stats(errors: int, denominator: int, trials: int, seed: int) -> ErrorStats:
    lo, hi = wilson_interval(errors, denominator)
    rate = errors / denominator if denominator else 0.0
    return ErrorStats(trials, int(errors), int(denominator), rate, lo, hi, seed)


def _run_trial(trial_fn, index: int, seed: int) -> dict:
    try:
        out = trial_fn(seed)
    except Exception as exc:  # noqa: BLE001 - re-raised with the trial index
        raise TrialFailed(index, exc) from exc
    if isinstance(out, dict):
        return {k: (int(e), int(n)) for k, (e, n) in out.items()}
    errors, denom = out
    return {None: (int(errors), int(denom))}


def run_monte_carlo_multi(
    trial_fn: Callable[[int], dict],
    max_trials: int,
    min_errors: int | None = 100,
    base_seed: int = 0,
    threads: int = 1,
) -> dict:
    """Like :func:`run_monte_carlo` for trials reporting several counters at once.

    ``trial_fn(seed)`` returns ``{key: (errors, denominator)}``; the run stops
    once every counter has reached ``min_errors``. Returns ``{key: ErrorStats}``.
    """
    if max_trials < 1:
        raise ValueError("max_trials must be >= 1")
    totals: dict = {}
    done = 0

    def consume(results) -> bool:
        nonlocal done
        for res in results:
            for k, (e, n) in res.items():
                e0, n0 = totals.get(k, (0, 0))
                totals[k] = (e0 + e, n0 + n)
            done += 1
            if min_errors is not None and all(e >= min_errors for e, _ in totals.values()):
                return True
        return False

    if threads <= 1:
        for i in range(max_trials):
            if consume([_run_trial(trial_fn, i, base_seed + i)]):
                break
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for start in range(0, max_trials, threads):
                idx = range(start, min(start + threads, max_trials))
                futures = [pool.submit(_run_trial, trial_fn, i, base_seed + i) for i in idx]
                if consume([f.result() for f in futures]):
                    break
    return {k: error_stats(e, n, done, base_seed) for k, (e, n) in totals.items()}


def run_monte_carlo(
    trial_fn: Callable[[int], tuple[int, int]],
    max_trials: int,
    min_errors: int | None = 100,
    base_seed: int = 0,
    threads: int = 1,
) -> ErrorStats:
    """Run ``trial_fn(base_seed + i)`` for i = 0, 1, ... and pool the counts.

    Stops after the first trial at which the pooled error count reaches
    ``min_errors`` (``None`` runs all ``max_trials``). With ``threads > 1``
    trials run in waves; results past the stopping trial are discarded, so
    the outcome is the same as a serial run. Trial exceptions are re-raised
    as :class:`TrialFailed` carrying the trial index.
    """
    return run_monte_carlo_multi(trial_fn, max_trials, min_errors, base_seed, threads)[None]
