"""Query success probabilities for the classical and the hybrid oracle.

The hybrid oracle evolves one ancilla qubit through ``eps_k a_k`` for
every activated gate.  Both gate types anticommute with sigma_x, and so
does a sigma_z phase flip, so every error operator
``exp(i s theta_k sigma_x)`` (``sin theta_k = sqrt(eta_k)``) can be moved
past the gates at the cost of a sign.  The whole query then collapses to
``P = cos^2(sum_k s_k theta_k)``, which is what the fast paths evaluate;
``hybrid_success_exact`` keeps the explicit 2x2 evolution as reference.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .noise import (
    SIGMA_Z,
    NoiseConfig,
    Stream,
    error_unitaries,
    stream_rng,
)

I_SIGMA_Y = np.array([[0, 1], [-1, 0]], dtype=np.complex128)
GATES = np.stack([SIGMA_Z, I_SIGMA_Y])

DEFAULT_SIM_CAP = 1 << 22
MAX_SIM_CAP = 1 << 25
DEFAULT_STEP_BUDGET = 1 << 24
CHUNK = 1 << 20
NORM_TOL = 1e-9

MODES = ("classical", "hybrid")
ESTIMATORS = ("average", "bernoulli")


class CapExceeded(RuntimeError):
    """Gate count above the simulation cap."""


class NormDrift(ArithmeticError):
    """State norm left 1 by more than the tolerance."""


@dataclass(frozen=True)
class QubitState:
    amp0: complex
    amp1: complex

    @classmethod
    def basis(cls, bit: int) -> "QubitState":
        return cls(1.0 + 0j, 0j) if bit == 0 else cls(0j, 1.0 + 0j)

    def apply(self, matrix: np.ndarray) -> "QubitState":
        a0 = matrix[0, 0] * self.amp0 + matrix[0, 1] * self.amp1
        a1 = matrix[1, 0] * self.amp0 + matrix[1, 1] * self.amp1
        return QubitState(complex(a0), complex(a1))

    @property
    def norm_sq(self) -> float:
        return abs(self.amp0) ** 2 + abs(self.amp1) ** 2

    def probability(self, bit: int) -> float:
        return abs(self.amp0 if bit == 0 else self.amp1) ** 2


@dataclass(frozen=True)
class QueryResult:
    success_prob: float
    outcome_bit: int | None = None


@dataclass(frozen=True)
class TrialEstimate:
    mean: float
    stderr: float
    trials: int
    mode: str
    omega: int | None = None

    @property
    def kappa(self) -> int | None:
        return None if self.omega is None else 1 << self.omega


def _check_cap(kappa: int, cap: int) -> None:
    if cap > MAX_SIM_CAP:
        raise ValueError(f"simulation cap may not exceed 2^25 (got {cap})")
    if kappa > cap:
        raise CapExceeded(
            f"kappa = {kappa} exceeds the simulation cap {cap}; "
            "lower omega or use the fitted model beyond the cap")


# -- classical -------------------------------------------------------------

def classical_success_exact(etas) -> float:
    """Probability that an even number of independent bit flips occurs."""
    etas = np.asarray(etas, dtype=float)
    with np.errstate(divide="ignore"):
        log_prod = np.sum(np.log1p(-2.0 * etas))
    return 0.5 * (1.0 + math.exp(log_prod))


def classical_model(omega, c: float):
    """Mean-field decay 1/2 (1 + exp(-2^omega / c))."""
    if c <= 0:
        raise ValueError("c must be positive")
    with np.errstate(over="ignore"):
        value = 0.5 * (1.0 + np.exp(-np.exp2(np.asarray(omega, dtype=float)) / c))
    return float(value) if np.ndim(value) == 0 else value


def characteristic_constant(eta_mean: float) -> float:
    """c = -1 / ln(1 - 2 eta_mean)."""
    if not 0.0 < eta_mean < 0.5:
        raise ValueError("characteristic constant needs 0 < eta_mean < 1/2")
    return -1.0 / math.log1p(-2.0 * eta_mean)


# -- hybrid ----------------------------------------------------------------

def chain_product(mats: np.ndarray) -> np.ndarray:
    """``mats[K-1] @ ... @ mats[0]`` by pairwise reduction."""
    mats = np.asarray(mats)
    if mats.shape[0] == 0:
        return np.eye(mats.shape[-1], dtype=mats.dtype)
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            tail = mats[-1:]
            mats = np.concatenate([mats[1::2] @ mats[0:-1:2], tail])
        else:
            mats = mats[1::2] @ mats[0::2]
    return mats[0]


def _defaults(etas, signs, gates, phase_flips):
    etas = np.asarray(etas, dtype=float)
    kappa = etas.size
    signs = np.ones(kappa, dtype=np.int8) if signs is None else np.asarray(signs)
    gates = np.zeros(kappa, dtype=np.uint8) if gates is None else np.asarray(gates, dtype=np.uint8)
    flips = np.zeros(kappa, dtype=bool) if phase_flips is None else np.asarray(phase_flips, dtype=bool)
    if not (signs.size == gates.size == flips.size == kappa):
        raise ValueError("eta, sign, gate and phase-flip streams must have equal length")
    return etas, signs, gates, flips


def step_matrices(etas, signs, gates, phase_flips, phase_model: str = "on_gate") -> np.ndarray:
    """Per-gate operators ``eps_k a_k`` with phase flips applied."""
    mats = error_unitaries(etas, signs) @ GATES[gates]
    if phase_flips.any():
        if phase_model == "on_gate":
            mats[phase_flips] = SIGMA_Z @ mats[phase_flips] @ SIGMA_Z
        elif phase_model == "between":
            mats[phase_flips] = SIGMA_Z @ mats[phase_flips]
        else:
            raise ValueError(f"unknown phase model {phase_model!r}")
    return mats


def hybrid_success_exact(etas, signs=None, phase_flips=None, gates=None, alpha: int = 0,
                         phase_model: str = "on_gate", cap: int = DEFAULT_SIM_CAP) -> float:
    """|<h*| prod_k eps_k a_k |alpha>|^2 by explicit 2x2 complex evolution.

    ``phase_flips[k]`` marks a phase-flip event at gate ``k``; with the
    ``"between"`` model it is a sigma_z applied after ``eps_k a_k``.
    The target bit is ``alpha`` XOR the parity of the i sigma_y gates.
    """
    etas, signs, gates, flips = _defaults(etas, signs, gates, phase_flips)
    kappa = etas.size
    _check_cap(kappa, cap)
    if kappa <= CHUNK:
        total = chain_product(step_matrices(etas, signs, gates, flips, phase_model))
    else:
        total = np.eye(2, dtype=np.complex128)
        for start in range(0, kappa, CHUNK):
            part = slice(start, start + CHUNK)
            total = chain_product(step_matrices(etas[part], signs[part], gates[part],
                                                flips[part], phase_model)) @ total
    psi = total[:, alpha]
    norm_sq = abs(psi[0]) ** 2 + abs(psi[1]) ** 2
    if not abs(norm_sq - 1.0) <= NORM_TOL:
        raise NormDrift(f"state norm^2 drifted to {norm_sq!r}")
    target = alpha ^ (int(gates.sum()) & 1)
    return float(abs(psi[target]) ** 2)


def evolve(state: QubitState, etas, signs=None, phase_flips=None, gates=None,
           phase_model: str = "on_gate") -> QubitState:
    """Gate-by-gate statevector evolution (small kappa)."""
    etas, signs, gates, flips = _defaults(etas, signs, gates, phase_flips)
    for mat in step_matrices(etas, signs, gates, flips, phase_model):
        state = state.apply(mat)
    return state


def hybrid_closed_form_w1(eta0: float, eta1: float) -> float:
    """Two activated gates: P_C + 2 sqrt((1 - eta0)(1 - eta1) eta0 eta1)."""
    pc = (1.0 - eta0) * (1.0 - eta1) + eta0 * eta1
    return pc + 2.0 * math.sqrt((1.0 - eta0) * (1.0 - eta1) * eta0 * eta1)


def hybrid_closed_form_w2(eta0: float, eta1: float, eta2: float, eta3: float) -> float:
    """Four activated gates, product form of the pairwise cancellation."""
    r = [math.sqrt(1.0 - e) for e in (eta0, eta1, eta2, eta3)]
    q = [math.sqrt(e) for e in (eta0, eta1, eta2, eta3)]
    cos_hi = r[3] * r[2] + q[3] * q[2]
    cos_lo = r[1] * r[0] + q[1] * q[0]
    sin_hi = r[3] * q[2] - q[3] * r[2]
    sin_lo = r[1] * q[0] - q[1] * r[0]
    return (cos_hi * cos_lo - sin_hi * sin_lo) ** 2


def _alternation(kappa: int, start: int = 0, length: int | None = None) -> np.ndarray:
    # (-1)^(number of gates applied after gate k)
    k = np.arange(start, start + (kappa - start if length is None else length))
    return (1 - 2 * ((kappa - 1 - k) & 1)).astype(np.int8)


def signed_angles(etas, signs=None, phase_flips=None, phase_model: str = "on_gate") -> np.ndarray:
    """Angles ``s_k theta_k`` whose sum fixes the query amplitude."""
    etas, signs, _, flips = _defaults(etas, signs, None, phase_flips)
    s = signs * _alternation(etas.size)
    if phase_model == "on_gate":
        s = np.where(flips, -s, s)
    elif phase_model == "between":
        after = np.cumsum(flips[::-1])[::-1]
        s = np.where(after & 1, -s, s)
    else:
        raise ValueError(f"unknown phase model {phase_model!r}")
    return s * np.arcsin(np.sqrt(etas))


def hybrid_success_angle(etas, signs=None, phase_flips=None, phase_model: str = "on_gate") -> float:
    """Same value as ``hybrid_success_exact`` via the anticommutation reduction."""
    return math.cos(float(np.sum(signed_angles(etas, signs, phase_flips, phase_model)))) ** 2


def _marginal_factor(theta, sigma, chis, phase_model):
    # E[exp(2 i Phi)] over phase patterns, for one block of gates
    c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
    if phase_model == "on_gate":
        return np.prod(c2 + 1j * sigma * (1.0 - 2.0 * chis) * s2)
    # transfer matrices D_k T_k on the parity of later flips
    mats = np.empty((theta.size, 2, 2), dtype=np.complex128)
    plus = c2 + 1j * sigma * s2
    minus = c2 - 1j * sigma * s2
    mats[:, 0, 0] = plus * (1 - chis)
    mats[:, 0, 1] = plus * chis
    mats[:, 1, 0] = minus * chis
    mats[:, 1, 1] = minus * (1 - chis)
    return chain_product(mats[::-1])


def hybrid_success_marginal(etas, signs=None, chis=None, phase_model: str = "on_gate") -> float:
    """Success probability averaged exactly over all phase-flip patterns."""
    etas = np.asarray(etas, dtype=float)
    signs = np.ones(etas.size, dtype=np.int8) if signs is None else np.asarray(signs)
    chis = np.zeros(etas.size) if chis is None else np.asarray(chis, dtype=float)
    theta = np.arcsin(np.sqrt(etas))
    sigma = signs * _alternation(etas.size)
    factor = _marginal_factor(theta, sigma, chis, phase_model)
    if phase_model == "between":
        factor = factor[0, 0] + factor[1, 0]
    elif phase_model != "on_gate":
        raise ValueError(f"unknown phase model {phase_model!r}")
    return 0.5 * (1.0 + float(np.real(factor)))


# -- device-trial Monte Carlo ----------------------------------------------

class _DeviceStreams:
    """Chunked readers over one device trial's random streams."""

    def __init__(self, noise: NoiseConfig, trial: int):
        self.noise = noise
        self.trial = trial
        self._eta = stream_rng(noise.seed, trial, Stream.ETA)
        self._chi = stream_rng(noise.seed, trial, Stream.CHI)
        self._sign = stream_rng(noise.seed, trial, Stream.SIGN)

    def etas(self, count):
        if self.noise.eta_sd == 0.0:
            return np.full(count, self.noise.eta_mean)
        return np.clip(self._eta.normal(self.noise.eta_mean, self.noise.eta_sd, count), 0.0, 0.5)

    def chis(self, count):
        if self.noise.chi_sd == 0.0:
            return np.full(count, self.noise.chi_mean)
        return np.clip(self._chi.normal(self.noise.chi_mean, self.noise.chi_sd, count), 0.0, 0.5)

    def signs(self, count):
        mode = self.noise.sign_mode
        if mode == "all_plus":
            return np.ones(count, dtype=np.int8)
        if mode == "all_minus":
            return -np.ones(count, dtype=np.int8)
        return np.where(self._sign.random(count) < 0.5, -1, 1).astype(np.int8)


def _device_probability(mode: str, kappa: int, noise: NoiseConfig, trial: int,
                        phase_samples: int | None, step_budget: int) -> float:
    streams = _DeviceStreams(noise, trial)
    if mode == "classical":
        log_prod = 0.0
        for start in range(0, kappa, CHUNK):
            etas = streams.etas(min(CHUNK, kappa - start))
            with np.errstate(divide="ignore"):
                log_prod += float(np.sum(np.log1p(-2.0 * etas)))
        return 0.5 * (1.0 + math.exp(log_prod))

    with_flips = noise.chi_mean > 0.0
    if with_flips and phase_samples is None:
        on_gate = noise.phase_model == "on_gate"
        acc = np.complex128(1.0) if on_gate else np.eye(2, dtype=np.complex128)
        for start in range(0, kappa, CHUNK):
            count = min(CHUNK, kappa - start)
            theta = np.arcsin(np.sqrt(streams.etas(count)))
            sigma = streams.signs(count) * _alternation(kappa, start, count)
            block = _marginal_factor(theta, sigma, streams.chis(count), noise.phase_model)
            acc = acc * block if on_gate else acc @ block
        factor = acc if on_gate else acc[0, 0] + acc[1, 0]
        return 0.5 * (1.0 + float(np.real(factor)))

    samples = 1
    if with_flips:
        samples = max(1, min(int(phase_samples), step_budget // kappa))
    flip_rngs = [stream_rng(noise.seed, trial, Stream.FLIP, s) for s in range(samples)]
    phi = np.zeros(samples)
    parity = np.zeros(samples, dtype=np.int64)
    for start in range(0, kappa, CHUNK):
        count = min(CHUNK, kappa - start)
        theta = np.arcsin(np.sqrt(streams.etas(count)))
        sigma = streams.signs(count) * _alternation(kappa, start, count)
        base = sigma * theta
        if not with_flips:
            phi += base.sum()
            continue
        chis = streams.chis(count)
        for s, rng in enumerate(flip_rngs):
            flips = rng.random(count) < chis
            if noise.phase_model == "on_gate":
                phi[s] += np.sum(np.where(flips, -base, base))
            else:
                # parity of earlier flips equals parity of later ones up to a global sign
                before = parity[s] + np.cumsum(flips) - flips
                phi[s] += np.sum(np.where(before & 1, -base, base))
                parity[s] += int(flips.sum())
    return float(np.mean(np.cos(phi) ** 2))


def estimate_success(mode: str, omega: int, noise: NoiseConfig, devices: int = 100,
                     phase_samples: int | None = 1000, estimator: str = "average",
                     queries: int = 100_000, threads: int = 1, cap: int = DEFAULT_SIM_CAP,
                     step_budget: int = DEFAULT_STEP_BUDGET) -> TrialEstimate:
    """Mean success probability over ``devices`` independent device draws.

    Each device trial draws its own ``eta_k``, signs and ``chi_k``.  With
    ``estimator="average"`` the exact per-device probability is used
    (averaged over ``phase_samples`` sampled phase-flip patterns, or over
    all patterns exactly when ``phase_samples`` is None).  ``"bernoulli"``
    additionally samples ``queries`` measurement outcomes per device and
    reports ``N_S / (N_S + N_F)``.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if estimator not in ESTIMATORS:
        raise ValueError(f"estimator must be one of {ESTIMATORS}")
    if devices < 1 or (phase_samples is not None and phase_samples < 1):
        raise ValueError("devices and phase_samples must be >= 1")
    if omega < 0:
        raise ValueError("omega must be >= 0")
    kappa = 1 << omega
    _check_cap(kappa, cap)

    def one(trial: int) -> float:
        p = _device_probability(mode, kappa, noise, trial, phase_samples, step_budget)
        if estimator == "bernoulli":
            hits = stream_rng(noise.seed, trial, Stream.MEASURE).binomial(queries, min(p, 1.0))
            return hits / queries
        return p

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = np.fromiter(pool.map(one, range(devices)), dtype=float, count=devices)
    else:
        values = np.fromiter(map(one, range(devices)), dtype=float, count=devices)
    stderr = float(values.std(ddof=1) / math.sqrt(devices)) if devices > 1 else 0.0
    return TrialEstimate(mean=float(values.mean()), stderr=stderr, trials=devices, mode=mode,
                         omega=omega)


def sample_query(success_prob: float, h_star: int, rng: np.random.Generator) -> QueryResult:
    """Measure once: returns ``h_star`` with probability ``success_prob``."""
    error = int(rng.random() >= success_prob)
    return QueryResult(success_prob=success_prob, outcome_bit=h_star ^ error)
