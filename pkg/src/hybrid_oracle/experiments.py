"""Experiment configs, artifact writers and the preset experiments.

Every CSV starts with ``#`` comment lines carrying the config hash and
seed; everything after them (the body) depends only on the config, never
on thread count or wall time.  Timings go to ``manifest.json``.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .curve import (
    CurveFit,
    InsufficientPoints,
    curve_csv,
    fit_characteristic,
    sweep,
    sweep_until_decayed,
    to_points,
)
from .engines import DEFAULT_SIM_CAP, MAX_SIM_CAP, TrialEstimate, characteristic_constant
from .noise import NoiseConfig
from .pac import DegenerateOracle, a_factor, average_success, model_curve, validate_learner

log = logging.getLogger(__name__)

PRESETS = ("fig_s1a", "fig_s1b", "table_s1", "fig_s2", "table_s2", "table_i", "fig2", "learn")
# fields that may not influence any output byte
_UNHASHED = ("threads", "out")


@dataclass
class ExperimentConfig:
    preset: str | None = None
    mode: str = "both"
    omega_min: int = 0
    omega_max: int | None = None
    eta_mean: float = 1e-3
    eta_rel_sd: float = 0.05
    chi_mean: float = 0.0
    chi_rel_sd: float = 0.1
    sign_mode: str = "all_plus"
    phase_model: str = "on_gate"
    devices: int = 100
    phase_samples: int | None = 1000
    estimator: str = "average"
    queries: int = 100_000
    cap: int = DEFAULT_SIM_CAP
    seed: int = 0
    n_min: int = 8
    n_max: int = 35
    c: float | None = None
    gamma: float | None = None
    a_budget: float = 1e6
    n: int = 3
    epsilon: float = 0.1
    delta: float = 0.1
    xi: float = 0.0
    runs: int = 500
    samples: int | None = None
    threads: int = 1
    out: str = "results"

    def __post_init__(self):
        if self.preset is not None and self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {PRESETS}")
        if self.mode not in ("classical", "hybrid", "both"):
            raise ValueError("mode must be classical, hybrid or both")
        if self.devices < 1 or self.threads < 1 or self.runs < 1:
            raise ValueError("devices, threads and runs must be >= 1")
        if self.cap > MAX_SIM_CAP:
            raise ValueError("cap may not exceed 2^25")
        if self.omega_max is not None and self.omega_max < self.omega_min:
            raise ValueError("omega_max < omega_min")
        if self.n_max < self.n_min:
            raise ValueError("n_max < n_min")
        self.noise()  # validates the noise fields

    def noise(self, **overrides) -> NoiseConfig:
        fields = dict(eta_mean=self.eta_mean, eta_rel_sd=self.eta_rel_sd, chi_mean=self.chi_mean,
                      chi_rel_sd=self.chi_rel_sd, sign_mode=self.sign_mode, seed=self.seed,
                      phase_model=self.phase_model)
        fields.update(overrides)
        return NoiseConfig(**fields)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        unknown = set(doc) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def config_hash(self) -> str:
        doc = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    config_hash: str
    seed: int
    version: str = __version__
    wall_time: float = 0.0
    stages: dict[str, float] = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)


class Run:
    """Collects artifacts and stage timings for one invocation."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.out = Path(config.out)
        self.manifest = RunManifest(config_hash=config.config_hash(), seed=config.seed)
        self._t0 = time.perf_counter()

    def stage(self, name: str):
        run = self

        class _Timer:
            def __enter__(self):
                self.t = time.perf_counter()
                log.info("stage %s", name)

            def __exit__(self, *exc):
                run.manifest.stages[name] = round(time.perf_counter() - self.t, 3)

        return _Timer()

    def _path(self, name: str) -> Path:
        path = self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        self.manifest.artifacts.append(name)
        return path

    def write_csv(self, name: str, body: str) -> Path:
        head = (f"# hybrid_oracle {__version__}\n"
                f"# config_hash={self.manifest.config_hash} seed={self.config.seed}\n")
        path = self._path(name)
        path.write_text(head + body)
        return path

    def write_json(self, name: str, doc: dict) -> Path:
        doc = dict(doc, config_hash=self.manifest.config_hash, seed=self.config.seed)
        path = self._path(name)
        path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
        return path

    def finish(self) -> RunManifest:
        self.manifest.wall_time = round(time.perf_counter() - self._t0, 3)
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / "manifest.json").write_text(
            json.dumps(dataclasses.asdict(self.manifest), indent=2) + "\n")
        (self.out / "config.json").write_text(self.config.to_json() + "\n")
        return self.manifest


def csv_body(path: Path | str) -> str:
    """CSV text without the leading comment lines."""
    return "".join(line for line in Path(path).read_text().splitlines(keepends=True)
                   if not line.startswith("#"))


# -- curve -----------------------------------------------------------------

def _modes(config: ExperimentConfig) -> list[str]:
    return ["classical", "hybrid"] if config.mode == "both" else [config.mode]


def _curve(config: ExperimentConfig, mode: str, noise: NoiseConfig) -> list[TrialEstimate]:
    kwargs = dict(devices=config.devices, phase_samples=config.phase_samples,
                  estimator=config.estimator, queries=config.queries, threads=config.threads,
                  cap=config.cap)
    if config.omega_max is None:
        return sweep_until_decayed(mode, noise, omega_start=config.omega_min, **kwargs)
    return sweep(mode, range(config.omega_min, config.omega_max + 1), noise, **kwargs)


def _baseline_c(noise: NoiseConfig) -> float | None:
    return characteristic_constant(noise.eta_mean) if 0 < noise.eta_mean < 0.5 else None


def _fit_doc(estimates: list[TrialEstimate], baseline_c: float | None) -> dict:
    try:
        fit = fit_characteristic(to_points(estimates), baseline_c=baseline_c)
    except InsufficientPoints as exc:
        return {"c_fit": None, "gamma": None, "eta_eff": None, "residual_rms": None,
                "points_used": 0, "baseline_c": baseline_c, "note": str(exc)}
    doc = fit.to_dict()
    doc["log10_2c_fit"] = math.log10(2.0 * fit.c_fit)
    doc["eta_eff_approximate"] = True
    return doc


def run_curve(config: ExperimentConfig, run: Run, prefix: str = "",
              noise: NoiseConfig | None = None) -> dict[str, dict]:
    """Sweep omega for each requested mode; write ``curve.csv`` and one fit JSON per mode."""
    noise = noise or config.noise()
    fits, body = {}, []
    for i, mode in enumerate(_modes(config)):
        with run.stage(f"{prefix}sweep_{mode}"):
            estimates = _curve(config, mode, noise)
        text = curve_csv(estimates)
        body.append(text if i == 0 else text.split("\n", 1)[1])
        fits[mode] = _fit_doc(estimates, _baseline_c(noise))
        run.write_json(f"{prefix}fit_{mode}.json", fits[mode])
    run.write_csv(f"{prefix}curve.csv", "".join(body))
    return fits


# -- P-bar / A over n ------------------------------------------------------

PBAR_HEADER = ("n", "p_bar_c", "p_bar_q", "a_c", "a_q", "source_c", "source_q",
               "impractical_c", "impractical_q")


def _mixed_curve(c: float, measured: dict[int, float] | None):
    model = model_curve(c)
    if not measured:
        return model, "model"

    def curve(omegas):
        values = model(omegas)
        for i, w in enumerate(omegas):
            if int(w) in measured:
                values[i] = measured[int(w)]
        return values

    return curve, "measured+model"


def _a_or_inf(p_bar: float) -> float:
    try:
        return a_factor(p_bar)
    except DegenerateOracle:
        return math.inf


def pbar_rows(n_min: int, n_max: int, c: float, gamma: float, a_budget: float = 1e6,
              measured_c: dict[int, float] | None = None,
              measured_q: dict[int, float] | None = None) -> list[dict]:
    curve_c, src_c = _mixed_curve(c, measured_c)
    curve_q, src_q = _mixed_curve(gamma * c, measured_q)
    rows = []
    for n in range(n_min, n_max + 1):
        pc, pq = average_success(n, curve_c), average_success(n, curve_q)
        ac, aq = _a_or_inf(pc), _a_or_inf(pq)
        rows.append({"n": n, "p_bar_c": pc, "p_bar_q": pq, "a_c": ac, "a_q": aq,
                     "source_c": src_c, "source_q": src_q,
                     "impractical_c": ac > a_budget, "impractical_q": aq > a_budget})
    return rows


def first_exceeding(c: float, threshold: float, n_start: int = 0, n_limit: int = 4096) -> int | None:
    """Smallest n >= n_start whose model A exceeds ``threshold``."""
    curve = model_curve(c)
    for n in range(n_start, n_limit + 1):
        if _a_or_inf(average_success(n, curve)) > threshold:
            return n
    return None


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    return str(value)


def rows_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def run_pac(config: ExperimentConfig, run: Run, prefix: str = "",
            measured_c: dict[int, float] | None = None,
            measured_q: dict[int, float] | None = None) -> list[dict]:
    c = config.c if config.c is not None else characteristic_constant(config.eta_mean)
    if config.gamma is None:
        raise ValueError("run_pac needs gamma (from a fit or supplied)")
    with run.stage(f"{prefix}pbar"):
        rows = pbar_rows(config.n_min, config.n_max, c, config.gamma, config.a_budget,
                         measured_c, measured_q)
    run.write_csv(f"{prefix}pbar.csv", rows_csv(PBAR_HEADER, rows))
    run.write_json(f"{prefix}pbar_summary.json", {
        "c": c, "gamma": config.gamma, "a_budget": config.a_budget,
        "first_n_a_c_over_budget": first_exceeding(c, config.a_budget, config.n_min),
        "first_n_a_q_over_budget": first_exceeding(config.gamma * c, config.a_budget,
                                                   config.n_min)})
    return rows


# -- learner ---------------------------------------------------------------

def run_learn(config: ExperimentConfig, run: Run, prefix: str = ""):
    with run.stage(f"{prefix}learn"):
        summary = validate_learner(config.n, config.epsilon, config.delta, xi=config.xi,
                                   runs=config.runs, samples=config.samples, seed=config.seed)
    rows = [{"run": r.run, "error_rate": r.error_rate, "success": r.success} for r in summary.runs]
    mean_err = sum(r.error_rate for r in summary.runs) / len(summary.runs)
    rows.append({"run": "summary", "error_rate": mean_err, "success": summary.success_fraction})
    run.write_csv(f"{prefix}learn.csv", rows_csv(("run", "error_rate", "success"), rows))
    run.write_json(f"{prefix}learn_summary.json", {
        "n": config.n, "epsilon": config.epsilon, "delta": config.delta, "xi": config.xi,
        "samples": summary.samples, "runs": config.runs,
        "success_fraction": summary.success_fraction,
        "wilson_low": summary.wilson_low, "wilson_high": summary.wilson_high})
    return summary


# -- presets ---------------------------------------------------------------

TABLE_S1_REL_SD = (0.01, 0.05, 0.10)
TABLE_S2_CHI = (0.0, 1e-4, 1e-3, 1e-2)
FIG_S1A_ETA = (1e-4, 1e-3, 1e-2)


def _variant(config: ExperimentConfig, **changes) -> ExperimentConfig:
    return dataclasses.replace(config, **changes)


def _preset_fig_s1a(config, run):
    table = []
    for eta in FIG_S1A_ETA:
        cfg = _variant(config, mode="both", eta_mean=eta, eta_rel_sd=0.0, chi_mean=0.0,
                       omega_max=config.omega_max if config.omega_max is not None else 12)
        fits = run_curve(cfg, run, prefix=f"eta_{eta:g}/")
        table.append({"eta_mean": eta, "c_exact": characteristic_constant(eta),
                      "c_fit_classical": fits["classical"]["c_fit"]})
    return {"rows": table}


def _preset_table_s1(config, run):
    table = []
    for rel in TABLE_S1_REL_SD:
        cfg = _variant(config, mode="both", eta_rel_sd=rel, chi_mean=0.0)
        fits = run_curve(cfg, run, prefix=f"rel_sd_{rel:g}/")
        hyb = fits["hybrid"]
        table.append({"eta_rel_sd": rel, "c_eff": hyb["c_fit"], "gamma": hyb["gamma"],
                      "eta_eff": hyb["eta_eff"],
                      "log10_2c_eff": hyb.get("log10_2c_fit"),
                      "c_classical": fits["classical"]["c_fit"]})
    return {"rows": table}


def _preset_table_s2(config, run):
    table = []
    for chi in TABLE_S2_CHI:
        cfg = _variant(config, mode="hybrid", eta_rel_sd=0.05, chi_mean=chi)
        fits = run_curve(cfg, run, prefix=f"chi_{chi:g}/")
        hyb = fits["hybrid"]
        table.append({"chi_mean": chi, "c_eff": hyb["c_fit"], "gamma": hyb["gamma"],
                      "eta_eff": hyb["eta_eff"], "log10_2c_eff": hyb.get("log10_2c_fit"),
                      "log10_gamma": math.log10(hyb["gamma"]) if hyb["gamma"] else None})
    return {"rows": table}


def _preset_fig2(config, run):
    cfg = _variant(config, mode="hybrid", eta_rel_sd=0.05, chi_mean=1e-2)
    fits = run_curve(cfg, run, prefix="curve/")
    gamma = fits["hybrid"]["gamma"]
    if gamma is None:
        raise InsufficientPoints("the chi = 1e-2 sweep produced no fit")
    rows = run_pac(_variant(cfg, gamma=gamma), run, prefix="pac/")
    return {"gamma": gamma, "a_q_le_a_c": all(r["a_q"] <= r["a_c"] for r in rows)}


def _preset_learn(config, run):
    out = {}
    for name, changes in (("noiseless_n3", dict(n=3, xi=0.0)), ("noisy_n2", dict(n=2, xi=0.25))):
        summary = run_learn(_variant(config, **changes), run, prefix=f"{name}/")
        out[name] = {"samples": summary.samples, "success_fraction": summary.success_fraction,
                     "wilson_low": summary.wilson_low}
    return out


_PRESET_RUNNERS = {
    "fig_s1a": _preset_fig_s1a,
    "fig_s1b": _preset_table_s1,
    "table_s1": _preset_table_s1,
    "fig_s2": _preset_table_s2,
    "table_s2": _preset_table_s2,
    "table_i": _preset_table_s2,
    "fig2": _preset_fig2,
    "learn": _preset_learn,
}

# reduced-scale defaults: 10^2 devices, phase patterns marginalized exactly
PRESET_DEFAULTS = dict(devices=100, phase_samples=None, estimator="average")


def preset_config(name: str, **overrides) -> ExperimentConfig:
    if name not in _PRESET_RUNNERS:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    fields = dict(PRESET_DEFAULTS, preset=name)
    fields.update(overrides)
    return ExperimentConfig(**fields)


def run_preset(config: ExperimentConfig) -> tuple[dict, RunManifest]:
    if config.preset is None:
        raise ValueError("config has no preset")
    run = Run(config)
    summary = _PRESET_RUNNERS[config.preset](config, run)
    run.write_json("summary.json", {"preset": config.preset, **summary})
    return summary, run.finish()
