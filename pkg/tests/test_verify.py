import pandas as pd
import pytest

from mprk.analytics.verify import SUITE, run_verification, seam_deviation
from mprk.solver.config import NUMERICS

SMALL_CONVECTION = {"cells1": [20, 1, 20], "cells2": [20, 1, 40]}


def test_quick_checks_pass(tmp_path):
    report = run_verification(tmp_path, only=["tableau", "order_conditions", "speedup_tables",
                                              "split_transparency"])
    assert report["passed"].all()
    assert set(report["check"]) >= {"tableau_m2_exact", "order_conditions",
                                    "region_split_transparent"}
    saved = pd.read_csv(tmp_path / "verify.csv")
    assert len(saved) == len(report)


def test_single_rate_reduction_check():
    rows = SUITE["single_rate_reduction"](steps=5)
    assert all(row["passed"] for row in rows)


def test_seam_check_separates_buffer_depths():
    assert seam_deviation("convection2d", NUMERICS["buffer_layers"], **SMALL_CONVECTION) == 0.0
    assert seam_deviation("convection2d", 1, **SMALL_CONVECTION) > NUMERICS["seam_tolerance"]


def test_buffer_adequacy_check():
    rows = SUITE["buffer_adequacy"]()
    assert [row["check"] for row in rows] == ["buffer_default_adequate",
                                              "buffer_one_layer_detected"]
    assert all(row["passed"] for row in rows)


def test_convection_is_second_order_in_time():
    rows = SUITE["temporal_order"]()
    low, high = NUMERICS["order_band"]
    # three halvings for each of rho, rhou, rhoE
    assert len(rows) == 9
    for row in rows:
        assert row["passed"], row
        assert low <= row["value"] <= high


def test_wall_clock_stays_within_the_model():
    rows = SUITE["speedup_wall_clock"](steps=1)
    by_name = {row["check"]: row for row in rows}
    wall = by_name["wcr_within_model_m4_21/25"]
    # 1 / (1 + (1/4 - 1) * 42/50), with the margin on top
    assert wall["threshold"] == pytest.approx(NUMERICS["wcr_margin"] / (1.0 - 0.75 * 0.84))
    assert wall["value"] > 0.0
    assert wall["passed"]
    assert by_name["eval_ratio_m4_21/25"]["passed"]


def test_report_without_output_dir():
    report = run_verification(only=["tableau"])
    assert list(report.columns) == ["check", "value", "threshold", "passed"]
    assert len(report) == 1
