"""Gate-error statistics and the coherent bit-flip operators.

Every random quantity is drawn from its own Philox stream keyed by
``(seed, trial, stream[, sample])``, so a draw at a given position is a
pure function of those integers: streams are consumed strictly in
position order and asking for more positions only extends the prefix.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from enum import IntEnum

import numpy as np

SIGN_MODES = ("all_plus", "all_minus", "per_gate_random")
PHASE_MODELS = ("on_gate", "between")

IDENTITY = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class Stream(IntEnum):
    ETA = 0
    CHI = 1
    FLIP = 2
    SIGN = 3
    GATE = 4
    MEASURE = 5


@dataclass(frozen=True)
class NoiseConfig:
    """Bit-flip and phase-flip error statistics.

    Standard deviations are relative to their means (``eta_sd = eta_rel_sd
    * eta_mean``).  ``phase_model`` selects how a phase-flip event acts:
    ``"on_gate"`` conjugates the erroneous gate by sigma_z (the sign of
    that gate's sigma_x error term is inverted), ``"between"`` inserts a
    persistent sigma_z after the gate.
    """

    eta_mean: float = 1e-3
    eta_rel_sd: float = 0.0
    chi_mean: float = 0.0
    chi_rel_sd: float = 0.0
    sign_mode: str = "all_plus"
    seed: int = 0
    phase_model: str = "on_gate"

    def __post_init__(self):
        if not 0.0 <= self.eta_mean <= 0.5:
            raise ValueError("eta_mean must lie in [0, 1/2]")
        if not 0.0 <= self.chi_mean <= 0.5:
            raise ValueError("chi_mean must lie in [0, 1/2]")
        if self.eta_rel_sd < 0 or self.chi_rel_sd < 0:
            raise ValueError("standard deviations must be non-negative")
        if self.sign_mode not in SIGN_MODES:
            raise ValueError(f"sign_mode must be one of {SIGN_MODES}")
        if self.phase_model not in PHASE_MODELS:
            raise ValueError(f"phase_model must be one of {PHASE_MODELS}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a uint64")

    @classmethod
    def from_absolute(cls, eta_mean: float, eta_sd: float = 0.0, chi_mean: float = 0.0,
                      chi_sd: float = 0.0, **kwargs) -> "NoiseConfig":
        return cls(eta_mean=eta_mean, eta_rel_sd=eta_sd / eta_mean if eta_mean else 0.0,
                   chi_mean=chi_mean, chi_rel_sd=chi_sd / chi_mean if chi_mean else 0.0,
                   **kwargs)

    @property
    def eta_sd(self) -> float:
        return self.eta_rel_sd * self.eta_mean

    @property
    def chi_sd(self) -> float:
        return self.chi_rel_sd * self.chi_mean

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "NoiseConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown noise fields: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "NoiseConfig":
        return cls.from_dict(json.loads(text))


def stream_rng(seed: int, trial: int, stream: Stream, sample: int = 0) -> np.random.Generator:
    seq = np.random.SeedSequence(seed, spawn_key=(trial, int(stream), sample))
    return np.random.Generator(np.random.Philox(seq))


def _clamped_normal(rng: np.random.Generator, mean: float, sd: float, count: int) -> np.ndarray:
    if sd == 0.0:
        return np.full(count, mean)
    return np.clip(rng.normal(mean, sd, count), 0.0, 0.5)


def draw_etas(config: NoiseConfig, trial: int, count: int) -> np.ndarray:
    """Per-gate bit-flip probabilities from N(eta_mean, eta_sd), clamped to [0, 1/2]."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return _clamped_normal(stream_rng(config.seed, trial, Stream.ETA),
                           config.eta_mean, config.eta_sd, count)


def draw_chis(config: NoiseConfig, trial: int, count: int) -> np.ndarray:
    """Per-position phase-flip probabilities (fixed for a device trial)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return _clamped_normal(stream_rng(config.seed, trial, Stream.CHI),
                           config.chi_mean, config.chi_sd, count)


def draw_phase_flips(config: NoiseConfig, trial: int, count: int, sample: int = 0) -> np.ndarray:
    """One Bernoulli(chi_k) phase-flip event per position; ``sample`` indexes patterns."""
    if config.chi_mean == 0.0:
        return np.zeros(count, dtype=bool)
    chis = draw_chis(config, trial, count)
    return stream_rng(config.seed, trial, Stream.FLIP, sample).random(count) < chis


def draw_signs(config: NoiseConfig, trial: int, count: int) -> np.ndarray:
    """The +-1 in front of the sigma_x term of each error operator."""
    if config.sign_mode == "all_plus":
        return np.ones(count, dtype=np.int8)
    if config.sign_mode == "all_minus":
        return -np.ones(count, dtype=np.int8)
    # uniform floats keep the prefix property under chunked reads; small-int draws do not
    heads = stream_rng(config.seed, trial, Stream.SIGN).random(count) < 0.5
    return np.where(heads, -1, 1).astype(np.int8)


def draw_gates(config: NoiseConfig, trial: int, count: int) -> np.ndarray:
    """Uniform gate bits for runs parameterized by Hamming weight only."""
    return (stream_rng(config.seed, trial, Stream.GATE).random(count) < 0.5).astype(np.uint8)


def error_unitary(eta: float, sign: int = 1) -> np.ndarray:
    """sqrt(1 - eta) * I + sign * i * sqrt(eta) * sigma_x."""
    if not 0.0 <= eta <= 0.5:
        raise ValueError("eta must lie in [0, 1/2]")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return np.sqrt(1.0 - eta) * IDENTITY + sign * 1j * np.sqrt(eta) * SIGMA_X


def error_unitaries(etas: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Stack of error operators, shape ``(len(etas), 2, 2)``."""
    etas = np.asarray(etas, dtype=float)
    diag = np.sqrt(1.0 - etas)
    off = 1j * np.asarray(signs) * np.sqrt(etas)
    out = np.empty((etas.size, 2, 2), dtype=np.complex128)
    out[:, 0, 0] = diag
    out[:, 1, 1] = diag
    out[:, 0, 1] = off
    out[:, 1, 0] = off
    return out
