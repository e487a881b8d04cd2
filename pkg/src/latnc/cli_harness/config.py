"""Experiment configuration: JSON in, validated dataclass out."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Any

from ..errors import ParseError, ValidationError

SCHEMES = ("ldlc-p2p", "ldlc-rdwnc", "bicm-p2p", "bicm-rdwnc", "lattice-identity", "shaping-gain-1d")
USERS = ("A", "B")


@dataclass
class ExperimentConfig:
    scheme: str
    # sweep: one list for both users or {"A": [...], "B": [...]} of equal length
    snr_sweep_db: list[float] | dict[str, list[float]] = field(default_factory=list)
    users: list[str] = field(default_factory=lambda: list(USERS))
    trials: int = 100
    min_errors: int | None = 100
    seed: int = 0
    baseline: bool = True

    # LDLC
    generating_sequence: list[float] | None = None  # None: 1 followed by six 1/sqrt(7)
    n: int = 100
    code_seed: int = 0
    L_A: int = 4
    L_B: int = 2
    epsilon: int = 2
    m_width: int = 64
    bp_iterations: int = 100
    step: float = 1.0 / 128.0
    span: float = 8.0
    bp_patience: int | None = 5
    power_calibration: int = 100

    # BICM
    constellation: str = "qpsk"
    q_A: int = 2
    q_B: int = 4
    packet_bits: int = 1000
    packets_per_trial: int = 50
    interleaver_seed: int = 0
    ra_seed: int = 0
    ra_iterations: int = 20
    snr_kind: str = "ebn0"

    # nested lattice identity / closed forms
    lattice: str = "1d"
    alpha: float = 1.0
    L: int = 4

    def sweep(self, user: str) -> list[float]:
        if isinstance(self.snr_sweep_db, dict):
            return list(self.snr_sweep_db[user])
        return list(self.snr_sweep_db)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_NEEDS_SWEEP = {"ldlc-p2p", "ldlc-rdwnc", "bicm-p2p", "bicm-rdwnc", "lattice-identity"}


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return (isinstance(v, (int, float))) and not isinstance(v, bool)


def _check_sweep(name: str, values, allow_empty: bool = False) -> list[float]:
    if not isinstance(values, list) or (not values and not allow_empty) or not all(_is_real(v) for v in values):
        raise ValidationError(name, "must be a non-empty list of numbers")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValidationError(name, "must be strictly increasing")
    return [float(v) for v in values]


def _coerce(name: str, value):
    ints = {
        "trials", "seed", "n", "code_seed", "L_A", "L_B", "epsilon", "m_width", "bp_iterations",
        "power_calibration", "q_A", "q_B", "packet_bits", "packets_per_trial", "interleaver_seed",
        "ra_seed", "ra_iterations", "L",
    }
    if name in ints:
        if not _is_int(value):
            raise ValidationError(name, "must be an integer")
        return value
    if name in ("min_errors", "bp_patience"):
        if value is not None and not _is_int(value):
            raise ValidationError(name, "must be an integer or null")
        return value
    if name in ("step", "span", "alpha"):
        if not _is_real(value):
            raise ValidationError(name, "must be a number")
        return float(value)
    if name == "baseline":
        if not isinstance(value, bool):
            raise ValidationError(name, "must be true or false")
        return value
    if name in ("scheme", "constellation", "snr_kind", "lattice"):
        if not isinstance(value, str):
            raise ValidationError(name, "must be a string")
        return value
    if name == "generating_sequence":
        if value is None:
            return None
        if not isinstance(value, list) or not value or not all(_is_real(v) and v > 0 for v in value):
            raise ValidationError(name, "must be a non-empty list of positive numbers")
        return [float(v) for v in value]
    if name == "users":
        if not isinstance(value, list) or not value or any(u not in USERS for u in value) or len(set(value)) != len(value):
            raise ValidationError(name, "must be a non-empty list drawn from A, B")
        return [u for u in USERS if u in value]
    if name == "snr_sweep_db":
        if isinstance(value, dict):
            if set(value) - set(USERS) or not value:
                raise ValidationError(name, "per-user sweep keys must be A and/or B")
            out = {u: _check_sweep(f"{name}.{u}", v) for u, v in value.items()}
            if len({len(v) for v in out.values()}) != 1:
                raise ValidationError(name, "per-user sweeps must have equal length")
            return out
        # empty is fine for closed-form schemes; validate() rejects it where a sweep is needed
        return _check_sweep(name, value, allow_empty=True)
    raise ValidationError(name, "unknown field")


def validate(obj: dict) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise ValidationError("<root>", "config must be a JSON object")
    if "scheme" not in obj:
        raise ValidationError("scheme", "missing required field")
    for key in obj:
        if key not in _FIELDS:
            raise ValidationError(key, "unknown field")
    values = {k: _coerce(k, v) for k, v in obj.items()}
    cfg = ExperimentConfig(**values)
    if cfg.scheme not in SCHEMES:
        raise ValidationError("scheme", f"must be one of {', '.join(SCHEMES)}")
    if cfg.scheme in _NEEDS_SWEEP and not cfg.snr_sweep_db:
        raise ValidationError("snr_sweep_db", "required for this scheme")
    if isinstance(cfg.snr_sweep_db, dict) and set(cfg.users) - set(cfg.snr_sweep_db):
        raise ValidationError("snr_sweep_db", "missing a sweep for a listed user")
    positive = ("trials", "n", "m_width", "bp_iterations", "power_calibration", "packet_bits", "packets_per_trial", "ra_iterations")
    for name in positive:
        if getattr(cfg, name) < 1:
            raise ValidationError(name, "must be >= 1")
    for name in ("min_errors", "bp_patience"):
        v = getattr(cfg, name)
        if v is not None and v < 1:
            raise ValidationError(name, "must be >= 1 or null")
    for name in ("L_A", "L_B"):
        if getattr(cfg, name) < 1:
            raise ValidationError(name, "must be >= 1")
    for name in ("q_A", "q_B"):
        if getattr(cfg, name) < 2:
            raise ValidationError(name, "must be >= 2")
    if cfg.epsilon < 0:
        raise ValidationError("epsilon", "must be >= 0")
    if not (cfg.step > 0 and cfg.span > 0):
        raise ValidationError("step" if cfg.step <= 0 else "span", "must be positive")
    if cfg.constellation.lower() not in ("qpsk", "16qam"):
        raise ValidationError("constellation", "must be qpsk or 16qam")
    if cfg.snr_kind not in ("ebn0", "esn0"):
        raise ValidationError("snr_kind", "must be ebn0 or esn0")
    if cfg.lattice not in ("1d", "hex"):
        raise ValidationError("lattice", "must be 1d or hex")
    if not 0 < cfg.alpha <= 1:
        raise ValidationError("alpha", "must lie in (0, 1]")
    if cfg.scheme.startswith("bicm") and (cfg.packet_bits * cfg.q_A) % cfg.q_B:
        raise ValidationError("packet_bits", "q_A * packet_bits must be divisible by q_B")
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    return validate(obj)


def config_to_json(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)
