"""Command-line front end.

Input words use x1 as the least-significant bit; monomial index k is
activated by input x when k & x == k.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .curve import InsufficientPoints, fit_characteristic, read_curve_csv
from .engines import CapExceeded, NormDrift, characteristic_constant
from .experiments import (
    PRESETS,
    ExperimentConfig,
    Run,
    preset_config,
    run_curve,
    run_learn,
    run_pac,
    run_preset,
)
from .pac import DegenerateOracle, NonConvergent, PacParams, pac_bound

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

log = logging.getLogger("hybrid_oracle")


EXACT = "exact"


def _phase_samples(text: str):
    if text == EXACT:
        return EXACT
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("phase samples must be >= 1 or 'exact'")
    return value


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="master seed (uint64)")
    p.add_argument("--threads", type=int, help="worker threads; never changes results")
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")


def _noise_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eta-mean", type=float)
    p.add_argument("--eta-rel-sd", type=float, help="bit-flip sd as a fraction of the mean")
    p.add_argument("--chi-mean", type=float)
    p.add_argument("--chi-rel-sd", type=float, help="phase-flip sd as a fraction of the mean")
    p.add_argument("--sign-mode", choices=("all_plus", "all_minus", "per_gate_random"))
    p.add_argument("--phase-model", choices=("on_gate", "between"))


def _sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--devices", type=int, help="device trials per point")
    p.add_argument("--phase-samples", type=_phase_samples,
                   help="sampled phase-flip patterns per device, or 'exact'")
    p.add_argument("--estimator", choices=("average", "bernoulli"))
    p.add_argument("--queries", type=int, help="measurements per device (bernoulli)")
    p.add_argument("--cap", type=int, help="max gates per query (<= 2^25)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybrid-oracle",
        description="Noisy classical/hybrid oracle simulation, decay fits and PAC bounds. "
                    "Input bit x1 is the least-significant bit of the integer encoding.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", help="sweep P(omega) and fit the characteristic constant")
    p.add_argument("--mode", choices=("classical", "hybrid", "both"))
    p.add_argument("--omega-min", type=int)
    p.add_argument("--omega-max", type=int, help="default: sweep until 2P-1 < 0.02")
    _noise_flags(p)
    _sim_flags(p)
    _common(p)

    p = sub.add_parser("fit", help="fit a curve CSV")
    p.add_argument("csv", type=Path)
    p.add_argument("--mode", choices=("classical", "hybrid"), help="rows to use")
    p.add_argument("--baseline-c", type=float)
    p.add_argument("--eta-mean", type=float, help="baseline c from the mean bit-flip rate")
    _common(p)

    p = sub.add_parser("pbar", help="average success and A factors over n")
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--c", type=float, help="classical constant (default from --eta-mean)")
    p.add_argument("--eta-mean", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--fit", type=Path, help="fit JSON supplying gamma")
    p.add_argument("--curve-c", type=Path, help="measured classical curve CSV")
    p.add_argument("--curve-q", type=Path, help="measured hybrid curve CSV")
    p.add_argument("--a-budget", type=float)
    _common(p)

    p = sub.add_parser("pac-bound", help="noisy-sample PAC bound")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--log2-hypotheses", type=float, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--xi", type=float)
    group.add_argument("--p-bar", type=float)
    _common(p)

    p = sub.add_parser("learn", help="Monte-Carlo check of the learner at the bound")
    p.add_argument("--n", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--xi", type=float)
    p.add_argument("--runs", type=int)
    p.add_argument("--samples", type=int, help="override M (0 = no-data control)")
    _common(p)

    p = sub.add_parser("preset", help="run a reproduction preset")
    p.add_argument("name", choices=PRESETS)
    p.add_argument("--devices", type=int)
    p.add_argument("--phase-samples", type=_phase_samples)
    p.add_argument("--cap", type=int)
    p.add_argument("--runs", type=int, help="learner runs (learn preset)")
    _common(p)
    return parser


_CONFIG_KEYS = {f for f in ExperimentConfig.__dataclass_fields__}


def _config(args, base: ExperimentConfig | None = None) -> ExperimentConfig:
    doc = base.to_dict() if base is not None else {}
    if args.config is not None:
        doc.update(json.loads(args.config.read_text()))
    for key, value in vars(args).items():
        if key in _CONFIG_KEYS and key != "config" and value is not None:
            doc[key] = value
    if doc.get("phase_samples") == EXACT:
        doc["phase_samples"] = None
    return ExperimentConfig.from_dict(doc)


def _measured(path: Path | None, mode: str) -> dict[int, float] | None:
    if path is None:
        return None
    return {p.omega: p.p_mean for p in read_curve_csv(path.read_text(), mode=mode)}


def _cmd_curve(args) -> dict:
    config = _config(args)
    run = Run(config)
    fits = run_curve(config, run)
    run.finish()
    return fits


def _cmd_fit(args) -> dict:
    config = _config(args)
    points = read_curve_csv(args.csv.read_text(), mode=args.mode)
    baseline = args.baseline_c
    if baseline is None and args.eta_mean is not None:
        baseline = characteristic_constant(args.eta_mean)
    fit = fit_characteristic(points, baseline_c=baseline)
    run = Run(config)
    doc = fit.to_dict()
    run.write_json("fit.json", doc)
    run.finish()
    return doc


def _cmd_pbar(args) -> dict:
    config = _config(args)
    if args.fit is not None:
        gamma = json.loads(args.fit.read_text()).get("gamma")
        if gamma is None:
            raise ValueError(f"{args.fit} carries no gamma")
        config = ExperimentConfig.from_dict({**config.to_dict(), "gamma": gamma})
    run = Run(config)
    rows = run_pac(config, run, measured_c=_measured(args.curve_c, "classical"),
                   measured_q=_measured(args.curve_q, "hybrid"))
    run.finish()
    return {"rows": len(rows)}


def _cmd_pac_bound(args) -> dict:
    config = _config(args)
    xi = 1.0 - args.p_bar if args.p_bar is not None else (args.xi or 0.0)
    bound = pac_bound(PacParams(args.epsilon, args.delta, args.log2_hypotheses, xi))
    run = Run(config)
    doc = json.loads(bound.to_json())
    run.write_json("bound.json", doc)
    run.finish()
    return doc


def _cmd_learn(args) -> dict:
    config = _config(args)
    run = Run(config)
    summary = run_learn(config, run)
    run.finish()
    return {"samples": summary.samples, "success_fraction": summary.success_fraction,
            "wilson_low": summary.wilson_low, "wilson_high": summary.wilson_high}


def _cmd_preset(args) -> dict:
    config = _config(args, base=preset_config(args.name))
    summary, manifest = run_preset(config)
    return {"summary": summary, "wall_time": manifest.wall_time}


COMMANDS = {
    "curve": _cmd_curve,
    "fit": _cmd_fit,
    "pbar": _cmd_pbar,
    "pac-bound": _cmd_pac_bound,
    "learn": _cmd_learn,
    "preset": _cmd_preset,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        result = COMMANDS[args.command](args)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateOracle, InsufficientPoints, NonConvergent, NormDrift) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(result, indent=2, default=lambda v: None if v is None or (
        isinstance(v, float) and math.isinf(v)) else str(v)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
