import json
import subprocess
import sys

import numpy as np
import pytest

from hydrochain.cli import main
from hydrochain.config import ConfigError, ExperimentConfig
from hydrochain.experiments import (run_equilibrium, run_experiment,
                                    run_hydro, run_wigner_le, trajectory_rng)
from hydrochain.profiles import MacroProfile, profile_from_spec


def base_doc(**over):
    doc = {"schema": 1, "kind": "equilibrium", "n_list": [16], "gamma": 1.0,
           "ensemble_size": 8, "t_end": 0.01, "seed": 3,
           "tau0": {"type": "constant", "value": 1.0},
           "beta0": {"type": "constant", "value": 2.0}}
    doc.update(over)
    return doc


# ---------------------------------------------------------------------------
# profile grammar


def test_profile_specs():
    p = profile_from_spec({"type": "cosine", "mean": 1.0, "amplitude": 0.5,
                           "mode": 1})
    assert p.eval(0.0) == pytest.approx(1.5)
    q = profile_from_spec({"type": "fourier", "coeffs": [[0, 1.0, 0.0],
                                                         [1, 0.25, 0.0]]})
    assert q.eval(0.0) == pytest.approx(1.5)
    c = profile_from_spec(2.5)
    assert c.eval(0.3) == pytest.approx(2.5)
    s = profile_from_spec({"type": "smoothed_step", "low": 0.5, "high": 1.5})
    vals = s.eval(np.linspace(0, 1, 64, endpoint=False))
    assert vals.min() > 0.3 and vals.max() < 1.7


def test_profile_spec_rejects_unknown():
    with pytest.raises(ValueError):
        profile_from_spec({"type": "cosine", "mean": 1.0, "amplitude": 0.5,
                           "wavelength": 2})
    with pytest.raises(ValueError):
        profile_from_spec({"type": "sawtooth"})


def test_profile_hermitian_enforced():
    with pytest.raises(ValueError):
        MacroProfile(np.array([1j, 0.0, 1j]))


# ---------------------------------------------------------------------------
# config validation


def test_config_roundtrip(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(base_doc()))
    cfg = ExperimentConfig.from_file(str(path))
    assert cfg.kind == "equilibrium"
    assert cfg.t_snapshots == [0.01]


def test_config_unknown_key():
    with pytest.raises(ConfigError, match="unknown configuration keys"):
        ExperimentConfig.from_dict(base_doc(tempo=3))


def test_config_schema_version():
    with pytest.raises(ConfigError, match="schema"):
        ExperimentConfig.from_dict(base_doc(schema=99))


def test_config_bad_values():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(base_doc(n_list=[]))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(base_doc(gamma=-1.0))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(base_doc(kind="dance"))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(base_doc(eta_max=8))  # 2*8 >= 16
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(base_doc(t_snapshots=[0.5]))  # > t_end
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(base_doc(
            beta0={"type": "cosine", "mean": 0.5, "amplitude": 1.0}))


def test_config_event_estimate():
    cfg = ExperimentConfig.from_dict(base_doc(n_list=[8], ensemble_size=10,
                                              t_end=0.5, gamma=2.0, eta_max=2))
    assert cfg.estimated_events() == pytest.approx(2.0 * 512 * 0.5 * 10)


def test_output_dir_env_override(tmp_path, monkeypatch):
    cfg = ExperimentConfig.from_dict(base_doc(output_dir="ignored"))
    monkeypatch.setenv("HYDROCHAIN_OUT", str(tmp_path / "env_out"))
    assert cfg.resolve_output_dir() == str(tmp_path / "env_out")


# ---------------------------------------------------------------------------
# runners


def test_trajectory_rng_is_stream_stable():
    a = trajectory_rng(7, 16, 3).standard_normal(4)
    b = trajectory_rng(7, 16, 3).standard_normal(4)
    c = trajectory_rng(7, 16, 4).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_run_equilibrium_small(tmp_path):
    cfg = ExperimentConfig.from_dict(base_doc(
        ensemble_size=200, t_end=0.01, t_snapshots=[0.0, 0.01],
        output_dir=str(tmp_path / "eq")))
    report, code = run_equilibrium(cfg)
    assert code == 0
    assert report["pass"]
    assert (tmp_path / "eq" / "report.json").exists()
    assert (tmp_path / "eq" / "results.csv").exists()


def test_run_equilibrium_requires_homogeneous(tmp_path):
    cfg = ExperimentConfig.from_dict(base_doc(
        tau0={"type": "cosine", "mean": 1.0, "amplitude": 0.2},
        output_dir=str(tmp_path / "x")))
    with pytest.raises(ConfigError):
        run_equilibrium(cfg)


def test_run_hydro_small_and_reproducible(tmp_path):
    doc = base_doc(kind="hydro", n_list=[16], ensemble_size=30, t_end=0.01,
                   t_snapshots=[0.01], eta_max=2,
                   tau0={"type": "cosine", "mean": 1.0, "amplitude": 0.5},
                   beta0={"type": "constant", "value": 1.0},
                   output_dir=str(tmp_path / "a"))
    cfg = ExperimentConfig.from_dict(doc)
    report, _ = run_hydro(cfg)
    errs = report["per_n"]["16"]["snapshots"]["0.01"]
    assert np.isfinite(errs["l2_elongation"])
    doc2 = dict(doc, output_dir=str(tmp_path / "b"))
    run_hydro(ExperimentConfig.from_dict(doc2))
    a_csv = (tmp_path / "a" / "results.csv").read_bytes()
    b_csv = (tmp_path / "b" / "results.csv").read_bytes()
    assert a_csv == b_csv
    a_svg = (tmp_path / "a" / "plots" / "elongation.svg").read_bytes()
    b_svg = (tmp_path / "b" / "plots" / "elongation.svg").read_bytes()
    assert a_svg == b_svg


def test_run_hydro_worker_count_independent(tmp_path):
    doc = base_doc(kind="hydro", n_list=[12], ensemble_size=12, t_end=0.005,
                   t_snapshots=[0.005], eta_max=2,
                   tau0={"type": "cosine", "mean": 1.0, "amplitude": 0.5},
                   beta0={"type": "constant", "value": 1.0})
    r1, _ = run_hydro(ExperimentConfig.from_dict(
        dict(doc, output_dir=str(tmp_path / "t1"))), threads=1)
    r2, _ = run_hydro(ExperimentConfig.from_dict(
        dict(doc, output_dir=str(tmp_path / "t2"))), threads=2)
    assert (tmp_path / "t1" / "results.csv").read_bytes() == \
        (tmp_path / "t2" / "results.csv").read_bytes()


def test_run_wigner_le_validates_horizon(tmp_path):
    cfg = ExperimentConfig.from_dict(base_doc(
        kind="wigner_le", lambdas=[10.0], t_end=0.1, eta_max=1,
        output_dir=str(tmp_path / "w")))
    with pytest.raises(ConfigError, match="t_end"):
        run_wigner_le(cfg)


def test_run_wigner_le_small(tmp_path):
    cfg = ExperimentConfig.from_dict(base_doc(
        kind="wigner_le", n_list=[16], lambdas=[4.0], t_end=2.0,
        ensemble_size=25, eta_max=1, output_dir=str(tmp_path / "w")))
    report, _ = run_wigner_le(cfg)
    rows = report["per_lambda"]["4.0"]
    assert set(rows) == {"eta0_const", "eta0_osc", "eta1_const", "eta1_osc"}
    for row in rows.values():
        assert np.isfinite(row["stderr"])


def test_max_events_cap(tmp_path):
    cfg = ExperimentConfig.from_dict(base_doc(output_dir=str(tmp_path / "c")))
    with pytest.raises(ConfigError, match="exceeds cap"):
        run_experiment(cfg, max_events=1.0)


# ---------------------------------------------------------------------------
# CLI


def test_cli_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["run"])  # missing config path
    assert exc.value.code == 2


def test_cli_config_error_exit_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(base_doc(n_list=[])))
    assert main(["run", str(path)]) == 2


def test_cli_missing_file_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "nope.json")]) == 2


def test_cli_runs_equilibrium(tmp_path, capsys):
    path = tmp_path / "eq.json"
    path.write_text(json.dumps(base_doc(ensemble_size=100,
                                        t_snapshots=[0.01],
                                        output_dir=str(tmp_path / "out"))))
    code = main(["run", str(path), "--seed", "11"])
    captured = capsys.readouterr()
    assert "estimated flip events" in captured.out
    assert code == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["pass"] is True


def test_cli_entrypoint_subprocess(tmp_path):
    path = tmp_path / "eq.json"
    path.write_text(json.dumps(base_doc(ensemble_size=20,
                                        output_dir=str(tmp_path / "out"))))
    proc = subprocess.run([sys.executable, "-m", "hydrochain.cli", "run",
                           str(path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


def test_cli_verify_matrix(tmp_path):
    code = main(["verify-matrix", "--seed", "2", "--out",
                 str(tmp_path / "mv")])
    assert code == 0
    report = json.loads((tmp_path / "mv" / "report.json").read_text())
    assert report["pass"] is True
    ids = {c["check_id"] for c in report["checks"]}
    assert {"det_closed_form", "inverse_closed_form", "trig_closure",
            "cancellation_scalar", "mean_system_residual"} <= ids
