import csv
import json
import math

import numpy as np
import pytest

from mechq import cli
from mechq.cli import RunConfig, main, theory_rows
from mechq.hilbert import ContractViolationError

TWO_PI = 2.0 * math.pi


def read_csv(path):
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [list(map(float, r)) for r in reader]
    return header, np.asarray(rows)


def test_theory_table_operating_row(tmp_path, config_path):
    out = tmp_path / "res"
    rc = main(["theory", "--config", str(config_path), "--out", str(out)])
    assert rc == 0
    header, rows = read_csv(out / "theory.csv")
    assert header == cli.THEORY_HEADER
    op = rows[np.isclose(rows[:, 0], -0.71e6)]
    assert op.shape[0] == 1
    assert op[0, 4] == pytest.approx(0.893, abs=1e-3)
    assert op[0, 5] == pytest.approx(8.772, abs=1e-2)
    manifest = json.loads((out / "theory_manifest.json").read_text())
    assert manifest["tool"] == "mechq"
    assert manifest["outputs"] == [str(out / "theory.csv")]
    assert manifest["config"]["g_hz"] == pytest.approx(280e3)


def test_theory_decoupled_device(tmp_path, config_path):
    out = tmp_path / "res"
    rc = main(["theory", "--config", str(config_path), "--out", str(out),
               "--g-hz", "0",
               "--delta-min-hz=-2e6", "--delta-max-hz=-1e6",
               "--delta-step-hz", "5e5"])
    assert rc == 0
    _, rows = read_csv(out / "theory.csv")
    np.testing.assert_allclose(rows[:, 1], 0.0)  # alpha
    np.testing.assert_allclose(rows[:, 4], 0.0)  # p_phonon_1


def test_theory_rows_reject_zero_detuning():
    with pytest.raises(ContractViolationError):
        theory_rows(1.0, 1.0, 1.0, np.array([0.0]))


def test_run_and_replay_byte_identical(tmp_path, config_path):
    run_cfg = tmp_path / "rc.json"
    run_cfg.write_text(json.dumps({
        "device": str(config_path),
        "experiment": "mech_rabi",
        "parameters": {"n_points": 9},
        "output_dir": str(tmp_path / "a"),
    }))
    assert main(["run", "--run-config", str(run_cfg)]) == 0
    assert main(["replay", str(tmp_path / "a" / "mech_rabi_manifest.json"),
                 "--out", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "mech_rabi.csv").read_bytes()
    second = (tmp_path / "b" / "mech_rabi.csv").read_bytes()
    assert first == second


def test_run_seeded_shots_reproducible(tmp_path, config_path):
    args = ["run", "--config", str(config_path), "--experiment", "rpn",
            "--shots", "400", "--seed", "3", "--t-max-us", "2"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "rpn.csv").read_bytes() == \
        (tmp_path / "b" / "rpn.csv").read_bytes()
    assert main(["run", "--config", str(config_path), "--experiment", "rpn",
                 "--shots", "400", "--seed", "4", "--t-max-us", "2",
                 "--out", str(tmp_path / "c")]) == 0
    assert (tmp_path / "a" / "rpn.csv").read_bytes() != \
        (tmp_path / "c" / "rpn.csv").read_bytes()


def test_fit_pipeline_t1(tmp_path, config_path):
    out = tmp_path / "t1"
    assert main(["run", "--config", str(config_path),
                 "--experiment", "phonon_t1", "--out", str(out)]) == 0
    assert main(["fit", "--data", str(out / "phonon_t1.csv"),
                 "--out", str(tmp_path / "fit.json")]) == 0
    result = json.loads((tmp_path / "fit.json").read_text())
    assert result["fit"]["t1_s"] == pytest.approx(104e-6, rel=0.05)


def test_fit_ramsey_needs_manifest(tmp_path, config_path):
    out = tmp_path / "ram"
    assert main(["run", "--config", str(config_path),
                 "--experiment", "ramsey_anharmonicity",
                 "--t-max-us", "50", "--out", str(out)]) == 0
    assert main(["fit", "--data", str(out / "ramsey_anharmonicity.csv"),
                 "--out", str(tmp_path / "fit.json")]) == 0
    result = json.loads((tmp_path / "fit.json").read_text())
    assert result["fit"]["alpha_hz"] == pytest.approx(-17454.7, rel=0.01)
    # strip the manifest: the fit must refuse rather than guess rates
    (out / "ramsey_anharmonicity_manifest.json").unlink()
    assert main(["fit", "--data", str(out / "ramsey_anharmonicity.csv")]) == 2


def test_spectroscopy_requires_probe_amplitude(tmp_path, config_path):
    rc = main(["run", "--config", str(config_path),
               "--experiment", "spectroscopy", "--out", str(tmp_path / "x")])
    assert rc == 2


def test_wigner_command(tmp_path, config_path, monkeypatch):
    monkeypatch.setenv("MECHQ_THREADS", "2")
    out = tmp_path / "w"
    rc = main(["wigner", "--config", str(config_path), "--label", "one",
               "--out", str(out), "--n-points", "11", "--extent", "2.0"])
    assert rc == 0
    header, rows = read_csv(out / "wigner_one.csv")
    assert header == ["re_beta", "im_beta", "w"]
    assert rows.shape == (121, 3)
    assert rows[:, 2].min() < -0.1  # the one-state map dips negative


def test_run_config_validation():
    with pytest.raises(ContractViolationError):
        RunConfig(device="x", experiment="nope")
    with pytest.raises(ContractViolationError):
        RunConfig(device="x", experiment="rpn", shots=0)
    ok = RunConfig(device="x", experiment="rpn", shots="250")
    assert ok.shots == 250


def test_bad_threads_env(monkeypatch, tmp_path, config_path):
    monkeypatch.setenv("MECHQ_THREADS", "0")
    rc = main(["wigner", "--config", str(config_path),
               "--out", str(tmp_path), "--n-points", "5"])
    assert rc == 2
