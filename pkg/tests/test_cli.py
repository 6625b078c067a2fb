import json
import subprocess
import sys

import pytest

from hybrid_oracle.cli import main
from hybrid_oracle.experiments import ExperimentConfig, csv_body


def run(argv, tmp_path):
    return main(argv + ["--out", str(tmp_path)])


def test_curve_writes_csv_fits_and_manifest(tmp_path):
    code = run(["curve", "--mode", "both", "--eta-mean", "1e-2", "--omega-max", "9",
                "--devices", "3", "--eta-rel-sd", "0.2"], tmp_path)
    assert code == 0
    lines = (tmp_path / "curve.csv").read_text().splitlines()
    assert lines[0].startswith("# hybrid_oracle")
    assert lines[1].startswith("# config_hash=")
    assert lines[2] == "omega,kappa,p_mean,p_stderr,trials,mode"
    assert len(lines) == 3 + 2 * 10
    fit = json.loads((tmp_path / "fit_classical.json").read_text())
    assert {"c_fit", "gamma", "eta_eff", "residual_rms", "points_used", "config_hash"} <= set(fit)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert {"config_hash", "seed", "version", "wall_time", "stages", "artifacts"} <= set(manifest)


def test_fit_subcommand(tmp_path, capsys):
    run(["curve", "--mode", "classical", "--eta-mean", "1e-2", "--omega-max", "10",
         "--devices", "1", "--eta-rel-sd", "0"], tmp_path / "c")
    code = main(["fit", str(tmp_path / "c" / "curve.csv"), "--mode", "classical",
                 "--eta-mean", "1e-2", "--out", str(tmp_path / "f")])
    assert code == 0
    doc = json.loads((tmp_path / "f" / "fit.json").read_text())
    assert doc["gamma"] == pytest.approx(1.0, rel=1e-9)


def test_pbar_subcommand(tmp_path):
    assert run(["pbar", "--c", "500", "--gamma", "25", "--n-min", "8", "--n-max", "12"],
               tmp_path) == 0
    rows = csv_body(tmp_path / "pbar.csv").splitlines()
    assert rows[0] == "n,p_bar_c,p_bar_q,a_c,a_q,source_c,source_q,impractical_c,impractical_q"
    assert len(rows) == 6


def test_pbar_gamma_one_columns_coincide(tmp_path):
    run(["pbar", "--c", "500", "--gamma", "1", "--n-min", "8", "--n-max", "20"], tmp_path)
    for line in csv_body(tmp_path / "pbar.csv").splitlines()[1:]:
        f = line.split(",")
        assert f[1] == f[2] and f[3] == f[4]


def test_pbar_flags_impractical(tmp_path):
    run(["pbar", "--c", "500", "--gamma", "1", "--n-min", "30", "--n-max", "45",
         "--a-budget", "1e6"], tmp_path)
    last = csv_body(tmp_path / "pbar.csv").splitlines()[-1].split(",")
    assert last[-2] == "1" and last[-1] == "1"


def test_pac_bound_subcommand(tmp_path, capsys):
    assert run(["pac-bound", "--epsilon", "0.1", "--delta", "0.1", "--log2-hypotheses", "8",
                "--xi", "0.25"], tmp_path) == 0
    assert json.loads(capsys.readouterr().out)["M"] == 6833
    assert json.loads((tmp_path / "bound.json").read_text())["M"] == 6833


def test_learn_subcommand(tmp_path):
    assert run(["learn", "--n", "2", "--runs", "40"], tmp_path) == 0
    doc = json.loads((tmp_path / "learn_summary.json").read_text())
    assert doc["samples"] == sample_count_n2()
    assert csv_body(tmp_path / "learn.csv").splitlines()[-1].startswith("summary,")


def sample_count_n2():
    from hybrid_oracle.pac import sample_bound_noiseless
    return sample_bound_noiseless(0.1, 0.1, 4)


def test_config_file_with_flag_override(tmp_path):
    cfg = ExperimentConfig(mode="classical", eta_mean=1e-2, omega_max=4, devices=2, seed=5)
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    assert main(["curve", "--config", str(path), "--seed", "6", "--out", str(tmp_path / "o")]) == 0
    saved = json.loads((tmp_path / "o" / "config.json").read_text())
    assert saved["seed"] == 6 and saved["eta_mean"] == 1e-2 and saved["omega_max"] == 4


def test_phase_samples_exact_overrides_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"phase_samples": 10, "mode": "hybrid", "omega_max": 2,
                                "devices": 1}))
    main(["curve", "--config", str(path), "--phase-samples", "exact",
          "--out", str(tmp_path / "o")])
    assert json.loads((tmp_path / "o" / "config.json").read_text())["phase_samples"] is None


def test_exit_code_for_cap(tmp_path, capsys):
    code = run(["curve", "--mode", "hybrid", "--omega-min", "30", "--omega-max", "30"], tmp_path)
    assert code == 2
    assert "lower omega" in capsys.readouterr().err


def test_exit_code_for_bad_config(tmp_path):
    assert run(["curve", "--eta-mean", "0.9"], tmp_path) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"nonsense": 1}')
    assert main(["curve", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_exit_code_for_numerical_failures(tmp_path):
    assert run(["pac-bound", "--epsilon", "0.1", "--delta", "0.1", "--log2-hypotheses", "4",
                "--xi", "0.5"], tmp_path) == 3
    # hybrid curve saturated at 1: nothing to fit
    run(["curve", "--mode", "hybrid", "--omega-max", "6", "--devices", "1", "--eta-rel-sd", "0"],
        tmp_path / "c")
    assert main(["fit", str(tmp_path / "c" / "curve.csv"), "--out", str(tmp_path / "f")]) == 3


def test_help_documents_bit_order():
    out = subprocess.run([sys.executable, "-m", "hybrid_oracle", "--help"], capture_output=True,
                         text=True, check=True).stdout
    assert "least-significant" in out


def test_preset_fig_s1a(tmp_path):
    assert run(["preset", "fig_s1a"], tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    for row in summary["rows"]:
        assert row["c_fit_classical"] == pytest.approx(row["c_exact"], rel=1e-9)
    body = csv_body(tmp_path / "eta_0.001" / "curve.csv").splitlines()
    hybrid = [line.split(",") for line in body[1:] if line.endswith("hybrid")]
    assert all(float(r[2]) == 1.0 for r in hybrid if int(r[0]) >= 1)
