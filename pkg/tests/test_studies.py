from fractions import Fraction

import numpy as np
import pytest

from mprk.analytics.studies import check_halving, split_config, study_convergence, study_speedup
from mprk.solver.config import ConfigError


def test_halving_sequence():
    assert check_halving([0.1, 0.05, 0.025]) == [0.1, 0.05, 0.025]


@pytest.mark.parametrize("dts", [[0.1], [0.1, 0.05], [0.1, 0.05, 0.02]])
def test_bad_dt_lists(dts):
    with pytest.raises(ConfigError, match="dt_list"):
        check_halving(dts)


def test_split_config_relayers_the_column(small_config):
    cfg = small_config("convection2d")
    out = split_config(cfg, Fraction(1, 2), 20)
    domain = out["domain"]
    assert domain["cells1"] == [12, 1, 4]
    assert domain["cells2"] == [12, 1, 16]
    assert domain["z1"] == [-2.0, 0.0]
    assert domain["z2"] == [0.0, 8.0]
    # input is left untouched
    assert cfg["domain"]["cells2"] == [12, 1, 10]


@pytest.mark.parametrize("ratio", [Fraction(1, 3), Fraction(19, 20)])
def test_impossible_splits(small_config, ratio):
    with pytest.raises(ConfigError, match="split"):
        split_config(small_config("convection2d"), ratio, 20)


def test_speedup_study_eval_counts_match_model(small_config):
    cfg = small_config("convection2d")
    table = study_speedup(cfg, [1, 2], [Fraction(1, 2)], nz_total=20, steps=1)
    assert list(table.columns) == ["m", "split", "spd", "eval_ratio", "eval_matches_model",
                                   "wcr", "wcr_within_model"]
    assert table["eval_matches_model"].all()
    single = table[table["m"] == 1].iloc[0]
    assert single["spd"] == 1.0
    assert single["eval_ratio"] == 1.0
    double = table[table["m"] == 2].iloc[0]
    # N_S / N_total = 10 / 20
    assert double["spd"] == pytest.approx(4.0 / 3.0)
    assert double["split"] == "1/2"
    assert double["wcr"] > 0.0
    assert table["wcr_within_model"].dtype == bool


def test_speedup_study_runs_both_schemes_threaded(small_config):
    cfg = small_config("convection2d")
    table = study_speedup(cfg, [2], [Fraction(1, 2)], nz_total=20, steps=1, threads=2)
    assert table["eval_matches_model"].all()
    assert table["wcr"].iloc[0] > 0.0


def test_convergence_study_is_second_order(small_config):
    cfg = small_config("manufactured")
    cfg["t_end"] = 0.2
    table = study_convergence(cfg, [0.05, 0.025, 0.0125])
    assert len(table) == 3
    errors = table["err_rho"].to_numpy()
    assert np.all(np.diff(errors) < 0.0)
    assert np.isnan(table["order_rho"].iloc[0])
    assert 1.6 <= table["order_rho"].iloc[-1] <= 2.4
    assert 1.6 <= table["order_rhoE"].iloc[-1] <= 2.4
    assert (table["cr1"] > 0).all()
