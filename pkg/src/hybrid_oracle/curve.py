"""Decay curves P(omega) and their characteristic constant."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .engines import DEFAULT_SIM_CAP, TrialEstimate, estimate_success
from .noise import NoiseConfig

USABLE_BAND = (0.02, 0.98)
# points with 2P-1 under this many standard errors are noise, kept only by upward fluctuations
MIN_SNR = 3.0
CSV_HEADER = ("omega", "kappa", "p_mean", "p_stderr", "trials", "mode")


class InsufficientPoints(ValueError):
    """Fewer than two curve points inside the usable band."""


@dataclass(frozen=True)
class CurvePoint:
    omega: int
    p_mean: float
    p_stderr: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p_mean <= 1.0:
            raise ValueError(f"p_mean out of [0, 1]: {self.p_mean}")


@dataclass(frozen=True)
class CurveFit:
    c_fit: float
    residual_rms: float
    points_used: int
    gamma: float | None = None
    baseline_c: float | None = None

    @property
    def eta_eff(self) -> float:
        # approximate inversion c ~ 1 / (2 eta)
        return 1.0 / (2.0 * self.c_fit)

    def to_dict(self) -> dict:
        return {"c_fit": self.c_fit, "gamma": self.gamma, "eta_eff": self.eta_eff,
                "residual_rms": self.residual_rms, "points_used": self.points_used,
                "baseline_c": self.baseline_c}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _significant(p: CurvePoint, min_snr: float) -> bool:
    return 2.0 * p.p_mean - 1.0 >= min_snr * 2.0 * p.p_stderr


def fit_characteristic(points: Iterable[CurvePoint], baseline_c: float | None = None,
                       band: tuple[float, float] = USABLE_BAND,
                       min_snr: float = MIN_SNR) -> CurveFit:
    """Fit ``2P - 1 = exp(-2^omega / c)`` through the origin in the log domain.

    Only points with ``y = 2P - 1`` inside ``band`` and at least ``min_snr``
    standard errors above zero are kept.  Weights are ``(y / 2 stderr)^2``,
    the inverse variance of ``ln y``; if any retained point has zero stderr
    the fit is unweighted.
    """
    kept = [p for p in points
            if band[0] <= 2.0 * p.p_mean - 1.0 <= band[1] and _significant(p, min_snr)]
    if len(kept) < 2:
        raise InsufficientPoints(
            f"{len(kept)} point(s) with 2P-1 in {band}; the sweep never left saturation")
    kappa = np.array([2.0 ** p.omega for p in kept])
    y = np.array([2.0 * p.p_mean - 1.0 for p in kept])
    err = np.array([p.p_stderr for p in kept])
    log_y = np.log(y)
    w = np.ones_like(y) if np.any(err <= 0) else (y / (2.0 * err)) ** 2
    c_fit = -np.sum(w * kappa**2) / np.sum(w * kappa * log_y)
    residual = log_y + kappa / c_fit
    gamma = advantage_ratio(c_fit, baseline_c) if baseline_c else None
    return CurveFit(c_fit=float(c_fit), residual_rms=float(np.sqrt(np.mean(residual**2))),
                    points_used=len(kept), gamma=gamma, baseline_c=baseline_c)


def advantage_ratio(c_eff: float, c: float) -> float:
    if c <= 0 or c_eff <= 0:
        raise ValueError("constants must be positive")
    return c_eff / c


def usable_length(c: float) -> float:
    """Input length 2 log2 c up to which the oracle stays useful at weight n/2."""
    if c <= 0:
        raise ValueError("c must be positive")
    return 2.0 * math.log2(c)


def sweep(mode: str, omegas: Sequence[int], noise: NoiseConfig, *, devices: int = 100,
          phase_samples: int | None = 1000, estimator: str = "average",
          queries: int = 100_000, threads: int = 1,
          cap: int = DEFAULT_SIM_CAP) -> list[TrialEstimate]:
    return [estimate_success(mode, w, noise, devices=devices, phase_samples=phase_samples,
                             estimator=estimator, queries=queries, threads=threads, cap=cap)
            for w in omegas]


def sweep_until_decayed(mode: str, noise: NoiseConfig, *, omega_start: int = 0,
                        floor: float = USABLE_BAND[0], cap: int = DEFAULT_SIM_CAP,
                        **kwargs) -> list[TrialEstimate]:
    """Sweep omega upward until ``2P - 1`` falls below ``floor`` or into the noise, or the cap is hit."""
    out = []
    omega = omega_start
    while (1 << omega) <= cap:
        est = estimate_success(mode, omega, noise, cap=cap, **kwargs)
        out.append(est)
        y = 2.0 * est.mean - 1.0
        if y < floor or y < MIN_SNR * 2.0 * est.stderr:
            break
        omega += 1
    return out


def to_points(estimates: Iterable[TrialEstimate]) -> list[CurvePoint]:
    return [CurvePoint(e.omega, min(max(e.mean, 0.0), 1.0), e.stderr) for e in estimates]


def curve_csv(estimates: Iterable[TrialEstimate]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for e in estimates:
        writer.writerow([e.omega, e.kappa, repr(e.mean), repr(e.stderr), e.trials, e.mode])
    return buf.getvalue()


def read_curve_csv(text: str, mode: str | None = None) -> list[CurvePoint]:
    """Points from ``curve_csv`` output, optionally only the rows of one mode."""
    rows = csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#"))
    missing = set(CSV_HEADER) - set(rows.fieldnames or ())
    if missing:
        raise ValueError(f"curve CSV lacks columns {sorted(missing)}")
    return [CurvePoint(int(r["omega"]), float(r["p_mean"]), float(r["p_stderr"]))
            for r in rows if mode is None or r["mode"] == mode]
