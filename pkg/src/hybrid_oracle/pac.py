"""Sample-complexity factors, PAC bounds and a small enumerative learner."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.special import gammaln
from scipy.stats import binomtest

from .engines import classical_model
from .oracle import OracleSpec, moebius_transform, truth_table

LN2 = math.log(2.0)
SERIES_TOL = 1e-12
MAX_LEARNER_BITS = 4


class DegenerateOracle(ArithmeticError):
    """Oracle no better than a coin flip; the bound is infinite."""


class NonConvergent(ArithmeticError):
    """Series truncation did not converge within its term budget."""


@dataclass(frozen=True)
class PacParams:
    epsilon: float
    delta: float
    hypothesis_log2: float
    xi: float = 0.0

    def __post_init__(self):
        if not 0 < self.epsilon < 1 or not 0 < self.delta < 1:
            raise ValueError("epsilon and delta must lie in (0, 1)")
        if self.hypothesis_log2 < 0:
            raise ValueError("hypothesis_log2 must be >= 0")
        if self.xi < 0:
            raise ValueError("xi must be >= 0")


@dataclass(frozen=True)
class PacBound:
    M: int
    A: float
    p_bar: float
    xi: float
    epsilon: float
    delta: float
    log2_hypotheses: float

    def to_json(self) -> str:
        return json.dumps({"M": self.M, "A": self.A, "p_bar": self.p_bar, "xi": self.xi,
                           "epsilon": self.epsilon, "delta": self.delta,
                           "log2_hypotheses": self.log2_hypotheses}, sort_keys=True)


# -- averages and factors --------------------------------------------------

def log_binomial(n: int, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def average_success(n: int, curve: Callable | Sequence[float]) -> float:
    """Binomially weighted mean of P(omega) over uniformly random n-bit inputs.

    ``curve`` is either a callable ``P(omega)`` accepting an array of
    Hamming weights, or a sequence with ``n + 1`` entries.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    omegas = np.arange(n + 1)
    if callable(curve):
        probs = np.asarray(curve(omegas), dtype=float)
    else:
        probs = np.asarray(curve, dtype=float)
        if probs.size != n + 1:
            raise ValueError(f"need {n + 1} values of P(omega), got {probs.size}")
    weights = np.exp(log_binomial(n, omegas) - n * LN2)
    return float(np.sum(weights * probs))


def model_curve(c: float) -> Callable:
    return lambda omega: classical_model(omega, c)


def a_factor(p_bar: float) -> float:
    """(2 P_bar - 1)^-2."""
    if p_bar <= 0.5:
        raise DegenerateOracle(f"average success {p_bar} <= 1/2; sample complexity is unbounded")
    return 1.0 / (2.0 * p_bar - 1.0) ** 2


def a_factor_series(n: int, gamma: float, c: float, j_max: int = 20_000,
                    max_digits: int = 20_000) -> float:
    """A from the alternating power series in 1/(gamma c).

    The terms first grow to about ``exp(2^n / (gamma c))`` before they
    decay, so the sum is carried out with mpmath at a precision that
    covers that cancellation.  Raises NonConvergent when the series needs
    more than ``j_max`` terms or ``max_digits`` digits.
    """
    if gamma <= 0 or c <= 0:
        raise ValueError("gamma and c must be positive")
    if math.isinf(gamma * c):
        return 1.0
    t = 1.0 / (gamma * c)
    # log|term_j| ~ j ln t - ln j! + n ln((2^j + 1)/2); the ratio drops below 1 near j = t 2^n
    js = np.arange(j_max + 1, dtype=float)
    with np.errstate(over="ignore"):
        log_terms = (js * math.log(t) - gammaln(js + 1.0)
                     + n * (np.logaddexp(js * LN2, 0.0) - LN2))
    peak = float(log_terms.max())
    # the sum is at least the omega = 0 contribution 2^-n e^-t
    log_floor = -n * LN2 - t
    tail_ok = log_terms < log_floor + math.log(SERIES_TOL) - 5.0
    past_peak = js > js[int(np.argmax(log_terms))]
    done = np.nonzero(tail_ok & past_peak)[0]
    digits = int((peak - log_floor) / math.log(10.0)) + 30
    if done.size == 0 or digits > max_digits:
        raise NonConvergent(
            f"series for n={n}, gamma*c={gamma * c:.4g} needs more than {j_max} terms "
            f"or {max_digits} digits (peak term ~ 10^{peak / math.log(10):.0f})")
    j_stop = int(done[0])
    with mpmath.workdps(digits):
        tm = mpmath.mpf(t)
        total = mpmath.mpf(0)
        term_scale = mpmath.mpf(1)  # t^j / j!
        bits = mpmath.mp.prec + 8
        binom = [math.comb(n, m) for m in range(n + 1)]
        for j in range(j_stop + 1):
            if j == 0:
                term = term_scale
            elif j > bits:
                term = mpmath.ldexp(term_scale, n * (j - 1))
            else:
                # ((2^j + 1) / 2)^n = 2^(n (j - 1)) (1 + 2^-j)^n, expanded to working precision
                top = min(n, bits // j + 1)
                tail = sum(binom[m] << (j * (top - m)) for m in range(top + 1))
                term = mpmath.ldexp(term_scale * tail, n * (j - 1) - j * top)
            total += -term if j & 1 else term
            term_scale = term_scale * tm / (j + 1)
        y = float(total)
    if y <= 0:
        raise DegenerateOracle("series sum is not positive; oracle is no better than chance")
    return 1.0 / y**2


# -- bounds ----------------------------------------------------------------

def noisy_bound_real(params: PacParams) -> float:
    if params.xi >= 0.5:
        raise DegenerateOracle(f"xi = {params.xi} >= 1/2; the bound is infinite")
    log_h = params.hypothesis_log2 * LN2
    return 2.0 / (params.epsilon**2 * (1.0 - 2.0 * params.xi) ** 2) * (
        LN2 + log_h - math.log(params.delta))


def sample_bound_noisy(params: PacParams) -> int:
    """ceil(2 / (eps^2 (1 - 2 xi)^2) * ln(2 |H| / delta))."""
    return math.ceil(noisy_bound_real(params))


def sample_bound_noiseless(epsilon: float, delta: float, hypothesis_log2: float) -> int:
    """ceil((1 / eps) ln(|H| / delta)), never negative."""
    value = (hypothesis_log2 * LN2 - math.log(delta)) / epsilon
    return max(0, math.ceil(value))


def pac_bound(params: PacParams) -> PacBound:
    p_bar = 1.0 - params.xi
    return PacBound(M=sample_bound_noisy(params), A=a_factor(p_bar), p_bar=p_bar, xi=params.xi,
                    epsilon=params.epsilon, delta=params.delta,
                    log2_hypotheses=params.hypothesis_log2)


# -- learner ---------------------------------------------------------------

class HypothesisClass:
    """All 2^(2^n) Boolean functions of n <= 4 bits.

    Hypothesis ``i`` has Reed-Muller coefficient ``a_k`` equal to bit ``k``
    of ``i``; ``tables[i, x]`` is its output on input ``x``.
    """

    def __init__(self, n: int):
        if not 1 <= n <= MAX_LEARNER_BITS:
            raise ValueError(f"enumeration supports 1 <= n <= {MAX_LEARNER_BITS}")
        self.n = n
        size = 1 << (1 << n)
        idx = np.arange(size, dtype=np.uint64)[:, None]
        ks = np.arange(1 << n, dtype=np.uint64)[None, :]
        coeffs = ((idx >> ks) & np.uint64(1)).astype(np.uint8)
        self.tables = moebius_transform(coeffs)

    def __len__(self) -> int:
        return self.tables.shape[0]

    def oracle(self, index: int) -> OracleSpec:
        return OracleSpec(n=self.n, coeffs=tuple((index >> k) & 1 for k in range(1 << self.n)))

    def index_of(self, oracle: OracleSpec) -> int:
        return sum(int(a) << k for k, a in enumerate(oracle.coefficients(np.arange(1 << self.n))))


@dataclass(frozen=True)
class SampleSet:
    inputs: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return self.inputs.size


def draw_samples(oracle: OracleSpec, m: int, rng: np.random.Generator,
                 xi: float = 0.0) -> SampleSet:
    """Uniform inputs with replacement; each label flipped with probability ``xi``."""
    table = truth_table(oracle)
    inputs = rng.integers(0, 1 << oracle.n, m)
    errors = (rng.random(m) < xi).astype(np.uint8)
    return SampleSet(inputs=inputs, labels=table[inputs] ^ errors)


def pac_learn(samples: SampleSet, hclass: HypothesisClass) -> int:
    """Index of the hypothesis agreeing with the most samples (lowest index on ties)."""
    counts = np.zeros((1 << hclass.n, 2), dtype=np.int64)
    np.add.at(counts, (samples.inputs, samples.labels), 1)
    cols = np.arange(1 << hclass.n)
    agreement = counts[cols, hclass.tables].sum(axis=1)
    return int(np.argmax(agreement))


def error_rate(h: OracleSpec, h_star: OracleSpec) -> float:
    """Fraction of the 2^n inputs where the two functions differ."""
    if h.n != h_star.n:
        raise ValueError("functions have different input widths")
    return float(np.mean(truth_table(h) != truth_table(h_star)))


@dataclass(frozen=True)
class LearnRun:
    run: int
    error_rate: float
    success: bool


@dataclass(frozen=True)
class LearnSummary:
    runs: list[LearnRun]
    samples: int
    success_fraction: float
    wilson_low: float
    wilson_high: float


def validate_learner(n: int, epsilon: float, delta: float, xi: float = 0.0, runs: int = 500,
                     samples: int | None = None, seed: int = 0,
                     confidence: float = 0.95) -> LearnSummary:
    """Monte-Carlo check of the (epsilon, delta) guarantee.

    Each run draws a uniformly random target from the full class, ``M``
    noisy samples, and learns.  ``M`` defaults to the bound that applies:
    the noiseless one when ``xi == 0``, the noisy one otherwise.
    """
    hclass = HypothesisClass(n)
    log2_h = float(1 << n)
    if samples is None:
        if xi == 0.0:
            samples = sample_bound_noiseless(epsilon, delta, log2_h)
        else:
            samples = sample_bound_noisy(PacParams(epsilon, delta, log2_h, xi))
    tables = hclass.tables
    results = []
    for run in range(runs):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(run,))))
        target = int(rng.integers(0, len(hclass)))
        inputs = rng.integers(0, 1 << n, samples)
        labels = tables[target, inputs] ^ (rng.random(samples) < xi).astype(np.uint8)
        learned = pac_learn(SampleSet(inputs, labels), hclass)
        err = float(np.mean(tables[learned] != tables[target]))
        results.append(LearnRun(run=run, error_rate=err, success=err <= epsilon))
    wins = sum(r.success for r in results)
    ci = binomtest(wins, runs).proportion_ci(confidence_level=confidence, method="wilson")
    return LearnSummary(runs=results, samples=samples, success_fraction=wins / runs,
                        wilson_low=float(ci.low), wilson_high=float(ci.high))
