"""
Built-in invariant suite. Each check returns one row of
(check, value, threshold, passed); the suite writes verify.csv.
"""
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from mprk.analytics.generate import write_table
from mprk.analytics.metrics import ConservationHistory, conservation_history
from mprk.analytics.speedup import SpeedupInputs, parallel_speedup, serial_speedup
from mprk.analytics.studies import study_convergence, study_speedup
from mprk.solver.butcher import base_rk2, generate_mprk, order_conditions
from mprk.solver.config import NUMERICS, resolve_config
from mprk.solver.integrator import Scheme, StepDiagnostics, integrate, mprk_step
from mprk.solver.scenarios import build_scenario
from mprk.solver.spatial import RegionStages, interface_exchange, rhs_monolithic, rhs_region

logger = logging.getLogger(__name__)

Check = Dict[str, Any]

# Exact m=2 partition tableaus for the RK2 base
TABLE_M2 = {
    "fast_a": [[0, 0, 0, 0], [0.5, 0, 0, 0], [0.25, 0.25, 0, 0], [0.25, 0.25, 0.5, 0]],
    "fast_b": [0.25, 0.25, 0.25, 0.25],
    "buffer_a": [[0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0]],
    "slow_a": [[0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 0]],
    "slow_b": [0.5, 0.5, 0, 0],
}

# Model speedups printed in the reference tables (value, decimals)
SERIAL_TABLE = [((2, 84, 100), 1.7), ((4, 84, 100), 2.7), ((8, 84, 100), 3.8), ((2, 4, 100), 1.0)]
PARALLEL_TABLE = [((8, 705, 800), 4.4), ((2, 65, 800), 1.0)]


def _row(check: str, value: float, threshold: float, passed: bool) -> Check:
    return {"check": check, "value": float(value), "threshold": float(threshold), "passed": bool(passed)}


def check_tableau_fidelity() -> List[Check]:
    tabs = generate_mprk(base_rk2(), 2)
    dev = max(
        np.max(np.abs(tabs.fast.a - TABLE_M2["fast_a"])),
        np.max(np.abs(tabs.fast.b - TABLE_M2["fast_b"])),
        np.max(np.abs(tabs.buffer.a - TABLE_M2["buffer_a"])),
        np.max(np.abs(tabs.slow.a - TABLE_M2["slow_a"])),
        np.max(np.abs(tabs.slow.b - TABLE_M2["slow_b"])),
    )
    return [_row("tableau_m2_exact", dev, 0.0, dev == 0.0)]


def check_order_conditions() -> List[Check]:
    worst = 0.0
    for m in (1, 2, 4, 8):
        tabs = generate_mprk(base_rk2(), m)
        for tab in (tabs.fast, tabs.buffer, tabs.slow):
            sb, bc = order_conditions(tab)
            worst = max(worst, abs(sb - 1.0), abs(bc - 0.5))
    return [_row("order_conditions", worst, 1e-14, worst <= 1e-14)]


def check_speedup_tables() -> List[Check]:
    rows = []
    for (m, slow, total), printed in SERIAL_TABLE:
        value = serial_speedup(SpeedupInputs.from_ratio(m, slow, total))
        rows.append(_row(f"serial_speedup_m{m}_{slow}/{total}", value, printed,
                         round(value, 1) == printed))
    for (m, slow, total), printed in PARALLEL_TABLE:
        value = parallel_speedup(SpeedupInputs.from_ratio(m, slow, total))
        rows.append(_row(f"parallel_speedup_m{m}_{slow}/{total}", value, printed,
                         round(value, 1) == printed))
    return rows


def _small(scenario: str, **overrides) -> Dict[str, Any]:
    return resolve_config(scenario, overrides=overrides)


def check_single_rate_reduction(steps: int = 20) -> List[Check]:
    cfg = _small("convection2d", domain={"cells1": [20, 1, 20], "cells2": [20, 1, 40]})
    dt = float(cfg["dt"])
    problem, state = build_scenario(cfg)
    a = integrate(problem, state.copy(), Scheme("mprk", 1), dt, steps * dt).state
    b = integrate(problem, state.copy(), Scheme("rk2"), dt, steps * dt).state
    dev = max(np.max(np.abs(a.field1.data - b.field1.data)),
              np.max(np.abs(a.field2.data - b.field2.data)))
    return [_row("mprk_m1_equals_rk2", dev, 1e-13, dev <= 1e-13)]


def check_conservation(steps: int = 40) -> List[Check]:
    """Mass drift, per-domain drift and interface bookkeeping on the shear case."""
    cfg = _small("khi2d", domain={"cells1": [40, 1, 20], "cells2": [40, 1, 20]})
    problem, state = build_scenario(cfg)
    rows = []
    for m in (1, 2, 4, 8):
        history = ConservationHistory()
        result = integrate(problem, state.copy(), Scheme("mprk", m), float(cfg["dt"]),
                           steps * float(cfg["dt"]), hooks=[conservation_history(history)])
        tol = NUMERICS["mass_drift_tolerance"]
        drift = history.max_relative_mass_drift()
        rows.append(_row(f"mass_drift_m{m}", drift, tol, drift <= tol))
        own = history.max_relative_domain_drift()
        rows.append(_row(f"domain_mass_drift_m{m}", own, tol, own <= tol))
        imbalance = float(np.max(np.abs(result.diagnostics.interface.imbalance)))
        rows.append(_row(f"interface_imbalance_m{m}", imbalance, 0.0, imbalance == 0.0))
    return rows


def check_split_transparency() -> List[Check]:
    cfg = _small("convection2d", domain={"cells1": [20, 1, 20], "cells2": [20, 1, 40]})
    problem, state = build_scenario(cfg)
    part = problem.partition
    q1, q2 = state.field1.data, state.field2.data
    stages = RegionStages(q1, q2[:, part.buffer_slice()], q2[:, part.slow_slice()])
    exchange = interface_exchange(problem, q1, stages.buffer)
    split = np.concatenate([
        rhs_region(problem, "B", stages, exchange),
        rhs_region(problem, "S", stages),
    ], axis=1)
    _, whole = rhs_monolithic(problem, q1, q2, exchange=exchange)
    dev = float(np.max(np.abs(split - whole)))
    return [_row("region_split_transparent", dev, 1e-14, dev <= 1e-14)]


def seam_deviation(scenario: str, buffer_layers: int, m: int = 8, steps: int = 2,
                   **domain) -> float:
    """Largest buffer stage mismatch next to the slow region over a few steps."""
    cfg = _small(scenario, domain=dict(domain, buffer_layers=buffer_layers))
    problem, state = build_scenario(cfg)
    tabs = generate_mprk(base_rk2(), m)
    diagnostics = StepDiagnostics()
    dt = float(cfg["dt"])
    for _ in range(steps):
        state = mprk_step(problem, state, tabs, dt, check_buffer=True, diagnostics=diagnostics)
    return diagnostics.seam_deviation


def check_buffer_adequacy() -> List[Check]:
    tol = NUMERICS["seam_tolerance"]
    small = {"cells1": [20, 1, 20], "cells2": [20, 1, 40]}
    good = seam_deviation("convection2d", NUMERICS["buffer_layers"], **small)
    thin = seam_deviation("convection2d", 1, **small)
    return [
        _row("buffer_default_adequate", good, tol, good <= tol),
        _row("buffer_one_layer_detected", thin, tol, thin > tol),
    ]


def check_temporal_order() -> List[Check]:
    """Observed MPRK order on the convection case against an RK4 reference."""
    cfg = _small("convection2d")
    dt = float(cfg["dt"])
    table = study_convergence(cfg, [dt, dt / 2, dt / 4, dt / 8], reference_dt=dt / 20)
    low, high = NUMERICS["order_band"]
    rows = []
    for key in ("rho", "rhou", "rhoE"):
        for i, order in enumerate(table[f"order_{key}"]):
            if np.isnan(order):
                continue
            rows.append(_row(f"temporal_order_{key}_{i}", order, low, low <= order <= high))
    return rows


def check_speedup_wall_clock(steps: int = 2) -> List[Check]:
    """Measured wall-clock ratio for m=4 stays within the model speedup."""
    cfg = _small("convection2d", domain={"cells1": [20, 1, 25], "cells2": [20, 1, 25]})
    table = study_speedup(cfg, [4], [Fraction(84, 100)], nz_total=50, steps=steps)
    rows = []
    for record in table.itertuples():
        margin = NUMERICS["wcr_margin"] * record.spd
        rows.append(_row(f"wcr_within_model_m{record.m}_{record.split}", record.wcr, margin,
                         record.wcr_within_model))
        rows.append(_row(f"eval_ratio_m{record.m}_{record.split}", record.eval_ratio, record.spd,
                         record.eval_matches_model))
    return rows


SUITE: Dict[str, Callable[[], List[Check]]] = {
    "tableau": check_tableau_fidelity,
    "order_conditions": check_order_conditions,
    "speedup_tables": check_speedup_tables,
    "single_rate_reduction": check_single_rate_reduction,
    "conservation": check_conservation,
    "split_transparency": check_split_transparency,
    "buffer_adequacy": check_buffer_adequacy,
    "temporal_order": check_temporal_order,
    "speedup_wall_clock": check_speedup_wall_clock,
}


def run_verification(output_dir: Optional[Path] = None,
                     only: Optional[List[str]] = None) -> pd.DataFrame:
    logger.info("\n" + "=" * 60)
    logger.info("VERIFYING INVARIANTS")
    logger.info("=" * 60)
    rows: List[Check] = []
    for name, check in SUITE.items():
        if only and name not in only:
            continue
        results = check()
        for row in results:
            status = "ok" if row["passed"] else "FAILED"
            logger.info(f"  {row['check']:<34} {status:<7} value={row['value']:.6g}")
        rows.extend(results)
    report = pd.DataFrame(rows, columns=["check", "value", "threshold", "passed"])
    if output_dir is not None:
        Path(output_dir).mkdir(parents=True, exist_ok=True)
        write_table(report, Path(output_dir) / "verify.csv")
    return report
