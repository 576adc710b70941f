"""Command-line front end: strict config parsing, exit codes, output
formats, and byte-level idempotence."""

import json
import subprocess
import sys

import numpy as np
import pytest

import levyou.cli as cli


def run_cli(args):
    proc = subprocess.run([sys.executable, "-m", "levyou.cli"] + [str(a) for a in args],
                          capture_output=True, text=True)
    return proc


def write_cfg(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


GOOD = {"d": 1, "Q": [[2.0]], "B": [[-1.0]], "pi": {"type": "null"}}


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def test_load_config_defaults(tmp_path):
    cfg = cli.load_config(write_cfg(tmp_path, GOOD))
    assert cfg.degree_cap == 6
    assert cfg.seed == 20260822
    assert cfg.model.d == 1


def test_missing_required_key_names_path(tmp_path):
    doc = {k: v for k, v in GOOD.items() if k != "B"}
    with pytest.raises(cli.ConfigError) as err:
        cli.load_config(write_cfg(tmp_path, doc))
    assert "B" in str(err.value)


def test_unknown_top_key_names_path(tmp_path):
    doc = dict(GOOD, extra=1)
    with pytest.raises(cli.ConfigError) as err:
        cli.load_config(write_cfg(tmp_path, doc))
    assert "extra" in str(err.value)


def test_unknown_pi_key_names_path(tmp_path):
    doc = dict(GOOD, pi={"type": "null", "rate": 1.0})
    with pytest.raises(cli.ConfigError) as err:
        cli.load_config(write_cfg(tmp_path, doc))
    assert "rate" in str(err.value)


def test_bad_matrix_shape_rejected(tmp_path):
    doc = dict(GOOD, Q=[[1.0, 2.0]])
    with pytest.raises(cli.ConfigError):
        cli.load_config(write_cfg(tmp_path, doc))


def test_model_construction_error_becomes_config_error(tmp_path):
    doc = dict(GOOD, B=[[1.0]])  # unstable drift
    with pytest.raises(cli.ConfigError):
        cli.load_config(write_cfg(tmp_path, doc))


def test_stable_pi_variant(tmp_path):
    doc = dict(GOOD, pi={"type": "alphaStable", "alpha": 1.5,
                         "directions": [[1.0], [-1.0]],
                         "weights": [0.5, 0.5]})
    cfg = cli.load_config(write_cfg(tmp_path, doc))
    assert cfg.model.pi.variant == "alpha_stable"


def test_config_hash_stable_under_key_order(tmp_path):
    a = cli.load_config(write_cfg(tmp_path, GOOD, "a.json"))
    reordered = {"pi": {"type": "null"}, "B": [[-1.0]], "Q": [[2.0]], "d": 1}
    b = cli.load_config(write_cfg(tmp_path, reordered, "b.json"))
    assert a.model_hash == b.model_hash


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------

def test_exit_2_on_malformed_config(tmp_path):
    p = write_cfg(tmp_path, {"d": 1, "Q": [[1.0]], "pi": {"type": "null"}})
    proc = run_cli(["spectrum", "--config", p, "--out", tmp_path / "o.json"])
    assert proc.returncode == 2
    assert "config error" in proc.stderr


def test_exit_2_on_unreadable_config(tmp_path):
    p = tmp_path / "nope.json"
    proc = run_cli(["spectrum", "--config", p, "--out", tmp_path / "o.json"])
    assert proc.returncode == 2


def test_exit_1_on_computation_failure(tmp_path):
    # a grid far too coarse for the requested density
    doc = dict(GOOD, grid={"halfWidths": [8.0], "sizes": [16]})
    p = write_cfg(tmp_path, doc)
    proc = run_cli(["density", "--config", p, "--out", tmp_path / "o.json"])
    assert proc.returncode == 1


def test_exit_0_on_success(tmp_path, fixture_dir):
    proc = run_cli(["spectrum", "--config", fixture_dir / "gauss1d.json",
                    "--out", tmp_path / "o.json"])
    assert proc.returncode == 0


# ---------------------------------------------------------------------------
# outputs
# ---------------------------------------------------------------------------

def test_spectrum_json_content(tmp_path, fixture_dir):
    out = tmp_path / "spec.json"
    run_cli(["spectrum", "--config", fixture_dir / "kinetic_fp.json",
             "--out", out])
    doc = json.loads(out.read_text())
    thetas = [e["theta"] for e in doc["eigenvalues"]]
    assert thetas[0] == 0.0
    assert any(abs(t + 0.75) < 1e-12 for t in thetas)
    for e in doc["eigenvalues"]:
        assert e["Ma"] == e["Mg"]


def test_spectrum_csv_format(tmp_path, fixture_dir):
    out = tmp_path / "spec.csv"
    run_cli(["spectrum", "--config", fixture_dir / "gauss1d.json",
             "--out", out, "--format", "csv"])
    lines = out.read_text().splitlines()
    assert lines[0].startswith("theta")
    assert len(lines) > 3


def test_eigen_polynomial_export_format(tmp_path, fixture_dir):
    out = tmp_path / "eig.json"
    run_cli(["eigen", "--config", fixture_dir / "gauss1d.json",
             "--out", out, "--n", "2"])
    doc = json.loads(out.read_text())
    poly = doc["eigenfunctions"][0]["polynomial"]
    assert poly["dim"] == 1
    idxs = [t["index"] for t in poly["terms"]]
    assert idxs == sorted(idxs)


def test_json_floats_round_trip_exactly(tmp_path, fixture_dir):
    out = tmp_path / "den.json"
    run_cli(["density", "--config", fixture_dir / "gauss1d.json",
             "--out", out])
    doc = json.loads(out.read_text())
    vals = np.asarray(doc["values"], dtype=float)
    # 17 significant digits reproduce the double exactly
    import levyou as lv
    cfg = cli.load_config(fixture_dir / "gauss1d.json")
    mu = lv.invariant_density(cfg.model, lv.default_grid(cfg.model))
    assert np.array_equal(vals.reshape(mu.values.shape), mu.values)


def test_outputs_idempotent(tmp_path, fixture_dir):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        run_cli(["mehler", "--config", fixture_dir / "gauss1d.json",
                 "--out", out, "--t", "1.0", "--x", "0.3", "--y", "0.4",
                 "--N", "10"])
    assert a.read_bytes() == b.read_bytes()


def test_verify_command_green(tmp_path, fixture_dir):
    out = tmp_path / "verify.json"
    proc = run_cli(["verify", "--config", fixture_dir / "gauss1d.json",
                    "--out", out])
    assert proc.returncode == 0
    doc = json.loads(out.read_text())
    assert doc["failed"] == 0
    assert doc["ran"] > 0


def test_diagnose_reports_assumptions(tmp_path, fixture_dir):
    out = tmp_path / "diag.json"
    proc = run_cli(["diagnose", "--config", fixture_dir / "stable1d.json",
                    "--out", out])
    assert proc.returncode == 0
    doc = json.loads(out.read_text())
    assert doc["compactness"]["verdict"] == "NonCompactNecessaryFail"
