import math

import pytest

from dicodes import bounds
from dicodes.errors import SizeCapExceeded
from dicodes.experiment import parse_config
from dicodes.sweep import cell_seed, run_cell, run_grid


def _cell(doc):
    cfg = parse_config(doc)
    return cfg, cfg.grid()[0]


def test_type2_only_cell_is_bounds_only():
    cfg, cell = _cell({"channel": {"preset": "awgn", "P": 10.0, "sigma2": 1.0}, "n": [16], "E2": [0.01]})
    row = run_cell(cfg, cell)
    assert row["status"] == "bounds_only"
    assert row["E1_nats"] is None
    assert row["conv_thm1_bits"] is None
    assert row["conv_thm2_bits"] == pytest.approx(math.log2(math.sqrt(2000.0) + 1.0))


def test_violated_hypotheses_are_infeasible():
    cfg, cell = _cell({"channel": {"preset": "awgn", "P": 1.0, "sigma2": 1.0}, "n": [8], "E1": [1.0]})
    row = run_cell(cfg, cell)
    assert row["status"] == "infeasible"
    assert "eps" not in row


def test_formulas_only_cell(sweep_config_doc):
    cfg, cell = _cell(sweep_config_doc)
    row = run_cell(cfg, cell, simulate=False)
    assert row["status"] == "bounds_only"
    assert row["rate_bits"] == pytest.approx(row["ach_thm3_bits"])
    assert row["rate_per_log2n"] == pytest.approx(row["rate_bits"] / 3.0)
    assert row["E2_nats"] == row["E1_nats"]
    assert "lambda1_hat" not in row


def test_simulated_cell(sweep_config_doc):
    cfg, cell = _cell(sweep_config_doc)
    row = run_cell(cfg, cell)
    assert row["status"] == "ok|truncated"
    assert row["N"] == 8
    assert row["seed"] == cell_seed(cfg, cell)
    assert row["lambda1_bound"] == pytest.approx(math.exp(-8 * 0.02))


def test_simulated_row_carries_the_constructed_type2_exponent(sweep_config_doc):
    cfg, cell = _cell({**sweep_config_doc, "n": [100], "E1": [0.04], "trials": 200})
    requested = run_cell(cfg, cell, simulate=False)
    assert requested["conv_thm1_bits"] is not None

    row = run_cell(cfg, cell)
    achievable = bounds.achievable_rate_linear(0.04, 0.5, 1.0, 20.0)
    assert row["E2_nats"] == pytest.approx(achievable.E2)
    assert row["lambda2_bound"] == pytest.approx(math.exp(-100 * row["E2_nats"]))
    assert 100 * row["E2_nats"] < bounds.LN16
    assert row["conv_thm1_bits"] is None
    assert row["conv_thm2_bits"] == pytest.approx(bounds.converse_rate_asymmetric(0.04, 1.0, 20.0))
    assert "bound_violation" not in row["status"]


def test_strict_size_propagates(sweep_config_doc):
    cfg, cell = _cell(sweep_config_doc)
    with pytest.raises(SizeCapExceeded):
        run_cell(cfg, cell, strict_size=True)


def test_bits_tag(sweep_config_doc):
    cfg, cell = _cell({**sweep_config_doc, "exponent_base": "bits"})
    row = run_cell(cfg, cell, simulate=False)
    assert row["status"] == "from_bits|bounds_only"
    assert row["E1_nats"] == pytest.approx(0.02 * math.log(2.0))


def test_run_grid_keeps_grid_order(sweep_config_doc):
    cfg = parse_config(sweep_config_doc)
    rows = run_grid(cfg, simulate=False, threads=3)
    assert [(row["n"], row["E1_nats"]) for row in rows] == [(8, 0.02), (8, 0.04), (12, 0.02), (12, 0.04)]
    assert len({row["seed"] for row in rows}) == 4
