import json

import pytest

from dicodes import main
from dicodes.data_manager import load_codebook, read_csv


@pytest.fixture
def write_config(tmp_path):
    """Write a config document to disk, pointing its output at tmp_path/results."""
    def _write(doc, name="config.json"):
        doc = {**doc, "output": {"dir": str(tmp_path / "results"), "prefix": "run"}}
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)
    return _write


def test_bounds_command(write_config, tmp_path, sweep_config_doc):
    path = write_config(sweep_config_doc)
    assert main.main(["bounds", "--config", path, "--seed", "99"]) == main.EXIT_OK

    csv_path = tmp_path / "results" / "run_bounds.csv"
    header = csv_path.read_text().splitlines()[0]
    assert header.startswith("# dicodes bounds config_sha256=")
    assert header.endswith("master_seed=99")

    rows = read_csv(str(csv_path))
    assert len(rows) == 4
    assert all("bounds_only" in row["status"] for row in rows)
    assert all(row["conv_thm2_bits"] != "" for row in rows)
    assert all(row["lambda1_hat"] == "" for row in rows)


def test_missing_config_is_config_error(tmp_path):
    assert main.main(["bounds", "--config", str(tmp_path / "absent.json")]) == main.EXIT_CONFIG


def test_malformed_config_is_config_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main.main(["bounds", "--config", str(path)]) == main.EXIT_CONFIG


def test_unknown_key_is_config_error(write_config, sweep_config_doc):
    path = write_config({**sweep_config_doc, "blocklength": 8})
    assert main.main(["bounds", "--config", path]) == main.EXIT_CONFIG


def test_construct_infeasible_parameters(write_config):
    path = write_config({"channel": {"preset": "awgn", "P": 1.0, "sigma2": 1.0}, "n": [4], "E1": [1.0]})
    assert main.main(["construct", "--config", path]) == main.EXIT_INFEASIBLE


def test_construct_strict_size(write_config, sweep_config_doc):
    path = write_config(sweep_config_doc)
    assert main.main(["construct", "--config", path, "--strict-size"]) == main.EXIT_INFEASIBLE


def test_construct_then_simulate(write_config, tmp_path, sweep_config_doc):
    path = write_config({**sweep_config_doc, "n": [8], "E1": [0.02], "trials": 200})
    assert main.main(["construct", "--config", path]) == main.EXIT_OK

    results = tmp_path / "results"
    cb = load_codebook(str(results / "run_codebook.json"))
    assert cb.N == 8
    assert cb.saturated is False
    certificate = (results / "run_codebook.cert.txt").read_text()
    assert "packing                PASS" in certificate
    assert "power                  PASS" in certificate

    assert main.main(["simulate", "--config", path, "--codebook", str(results / "run_codebook.json")]) == main.EXIT_OK
    rows = read_csv(str(results / "run_simulate.csv"))
    assert len(rows) == 1
    assert rows[0]["N"] == "8"
    assert "truncated" in rows[0]["status"]
    assert 0.0 <= float(rows[0]["lambda1_hat"]) <= 1.0
    assert rows[0]["lambda2_bound"] != ""


def test_simulate_missing_codebook(write_config, tmp_path, sweep_config_doc):
    path = write_config(sweep_config_doc)
    assert main.main(["simulate", "--config", path, "--codebook", str(tmp_path / "none.json")]) == main.EXIT_CONFIG


def test_sweep_is_identical_across_thread_counts(write_config, tmp_path, sweep_config_doc):
    path = write_config(sweep_config_doc)
    csv_path = tmp_path / "results" / "run_sweep.csv"

    assert main.main(["sweep", "--config", path, "--threads", "1"]) == main.EXIT_OK
    serial = csv_path.read_bytes()
    assert main.main(["sweep", "--config", path, "--threads", "3"]) == main.EXIT_OK
    assert csv_path.read_bytes() == serial

    rows = read_csv(str(csv_path))
    assert [row["n"] for row in rows] == ["8", "8", "12", "12"]
    assert all(row["status"] == "ok|truncated" for row in rows)
    assert (tmp_path / "results" / "run_sweep_plot.py").exists()


def test_out_overrides_config_dir(write_config, tmp_path, sweep_config_doc):
    path = write_config(sweep_config_doc)
    out = tmp_path / "elsewhere"
    assert main.main(["bounds", "--config", path, "--out", str(out)]) == main.EXIT_OK
    assert (out / "run_bounds.csv").exists()
