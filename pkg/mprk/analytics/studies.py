"""
Verification studies: temporal self-convergence against a fourth-order
reference, and multirate speedup over single-rate RK2 across (m, split).
"""
import copy
import logging
import math
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from mprk.analytics.metrics import courant_number, l2_error_coupled
from mprk.analytics.speedup import SpeedupInputs, measured_speedup, speedup_fraction
from mprk.solver.config import NUMERICS, ConfigError
from mprk.solver.integrator import Scheme, integrate
from mprk.solver.scenarios import build_scenario

logger = logging.getLogger(__name__)

ERROR_KEYS = ("rho", "rhou", "rhov", "rhow", "rhoE", "momentum")


def _banner(title: str) -> None:
    logger.info("\n" + "=" * 60)
    logger.info(title.upper())
    logger.info("=" * 60)


def check_halving(dt_list: Sequence[float]) -> List[float]:
    dts = [float(dt) for dt in dt_list]
    if len(dts) < 3:
        raise ConfigError(f"dt_list: need at least 3 values to measure an order, got {len(dts)}")
    for coarse, fine in zip(dts, dts[1:]):
        if not math.isclose(fine, coarse / 2.0, rel_tol=1e-12):
            raise ConfigError(f"dt_list: {fine} is not half of {coarse}")
    return dts


def study_convergence(cfg: Dict[str, Any], dt_list: Sequence[float],
                      reference_dt: Optional[float] = None, threads: int = 1) -> pd.DataFrame:
    """
    MPRK errors at each dt against a classical RK4 run at reference_dt
    (default min(dt_list)/10), with observed orders log2(e_2h / e_h).
    """
    dts = check_halving(dt_list)
    ref_dt = reference_dt or min(dts) / 10.0
    t_end = float(cfg["t_end"])
    m = int(cfg["m"])

    _banner(f"temporal convergence: {cfg['scenario']} m={m}")
    problem, initial = build_scenario(cfg)

    logger.info(f"  reference RK4 dt={ref_dt:g}")
    reference = integrate(problem, initial.copy(), Scheme("rk4"), ref_dt, t_end).state

    rows = []
    for dt in dts:
        result = integrate(problem, initial.copy(), Scheme("mprk", m), dt, t_end, threads=threads)
        errors = l2_error_coupled(result.state, reference)
        row = {
            "dt": dt,
            "cr1": courant_number(initial.field1, problem.fluid1, dt),
            "cr2": courant_number(initial.field2, problem.fluid2, dt),
        }
        for key in ERROR_KEYS:
            row[f"err_{key}"] = errors[key]
        rows.append(row)
        logger.info(f"  dt={dt:g} err_rho={errors['rho']:.3e} err_rhoE={errors['rhoE']:.3e}")

    table = pd.DataFrame(rows)
    for key in ERROR_KEYS:
        err = table[f"err_{key}"].to_numpy()
        orders = [np.nan]
        for coarse, fine in zip(err, err[1:]):
            orders.append(math.log2(coarse / fine) if fine > 0 and coarse > 0 else np.nan)
        table[f"order_{key}"] = orders
    return table


def split_config(cfg: Dict[str, Any], ratio: Fraction, nz_total: int) -> Dict[str, Any]:
    """
    Re-layer the whole column into fast (Omega_1) and buffer + slow (Omega_2)
    so that the slow layers make up `ratio` of the vertical count.
    """
    slow = ratio * nz_total
    if slow.denominator != 1:
        raise ConfigError(f"split {ratio}: {nz_total} layers cannot be split exactly")
    nb = int(cfg["domain"]["buffer_layers"])
    nz2 = int(slow) + nb
    nz1 = nz_total - nz2
    if nz1 < 1:
        raise ConfigError(f"split {ratio}: no layers left for the fast region")

    domain = cfg["domain"]
    bottom = float(domain["z1"][0])
    top = float(domain["z2"][1])
    dz = (top - bottom) / nz_total
    out = copy.deepcopy(cfg)
    nx, ny = int(domain["cells1"][0]), int(domain["cells1"][1])
    out["domain"]["z1"] = [-nz1 * dz, 0.0]
    out["domain"]["z2"] = [0.0, nz2 * dz]
    out["domain"]["cells1"] = [nx, ny, nz1]
    out["domain"]["cells2"] = [nx, ny, nz2]
    return out


def study_speedup(cfg: Dict[str, Any], m_list: Sequence[int], split_list: Sequence[Fraction],
                  nz_total: Optional[int] = None, steps: int = 1,
                  threads: int = 1) -> pd.DataFrame:
    """
    For every (m, split): the model speedup, the exact element-evaluation
    ratio of SR RK2 at dt/m against MPRK at dt, and the wall-clock ratio with
    whether it stays within the model. Both runs use the same thread count.
    """
    _banner(f"speedup study: {cfg['scenario']}")
    dt = float(cfg["dt"])
    nz_total = nz_total or int(cfg["domain"]["cells1"][2]) + int(cfg["domain"]["cells2"][2])

    rows = []
    for split in split_list:
        ratio = Fraction(split)
        layered = split_config(cfg, ratio, nz_total)
        problem, initial = build_scenario(layered)
        n_slow, n_buffer, n_fast, n_total = problem.element_counts()
        for m in m_list:
            mprk = integrate(problem, initial.copy(), Scheme("mprk", int(m)), dt, steps * dt,
                             threads=threads, log_every=steps)
            single = integrate(problem, initial.copy(), Scheme("rk2"), dt / m, steps * dt,
                               threads=threads, log_every=steps * m)
            inputs = SpeedupInputs(m=int(m), n_slow=n_slow, n_buffer=n_buffer,
                                   n_fast=n_fast, n_total=n_total)
            report = measured_speedup(single.ledger, mprk.ledger, inputs,
                                      wall_sr=single.wall_clock, wall_mprk=mprk.wall_clock)
            within = report.wcr is not None and report.wcr <= NUMERICS["wcr_margin"] * report.ideal
            rows.append({
                "m": int(m),
                "split": f"{ratio.numerator}/{ratio.denominator}",
                "spd": report.ideal,
                "eval_ratio": report.eval_ratio_float,
                "eval_matches_model": report.eval_ratio == speedup_fraction(inputs),
                "wcr": report.wcr,
                "wcr_within_model": within,
            })
            wcr = report.wcr if report.wcr is not None else float("nan")
            logger.info(f"  m={m} split={ratio} spd={report.ideal:.3f} "
                        f"evals={report.eval_ratio_float:.3f} wcr={wcr:.3f}")
    return pd.DataFrame(rows, columns=["m", "split", "spd", "eval_ratio",
                                       "eval_matches_model", "wcr", "wcr_within_model"])
