"""
Command-line driver.

    mprk run convection2d --m=4 --dt=0.025 --t-end=2.5
    mprk study-convergence manufactured --dt-list 0.05,0.025,0.0125
    mprk study-speedup convection2d --m-list 2,4,8 --split-list 24/100,54/100,84/100
    mprk verify

Any unrecognized `--key=value` is a config override (dots nest, dashes become
underscores). Exit codes: 0 success, 1 config error, 2 numerical failure.
"""
import argparse
import logging
import sys
import time
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

from mprk.analytics.generate import write_history_csv, write_run_summary, write_snapshot, write_table
from mprk.analytics.metrics import ConservationHistory, conservation_history, courant_number
from mprk.analytics.studies import study_convergence, study_speedup
from mprk.analytics.verify import SUITE, run_verification
from mprk.solver.config import ConfigError, output_directory, parse_overrides, resolve_config
from mprk.solver.integrator import Scheme, integrate, step_plan
from mprk.solver.physics import NonPhysicalState
from mprk.solver.scenarios import build_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILURE = 2


def _banner(title: str) -> None:
    logger.info("\n" + "=" * 60)
    logger.info(title)
    logger.info("=" * 60)


def snapshot_hook(output_dir: Path, every: int, n_steps: int):
    """Writes both domains at step 0, every `every` steps (0 = never) and at the end."""
    def hook(step: int, state) -> None:
        if step == 0 or step == n_steps or (every and step % every == 0):
            write_snapshot(state.field1, 1, state.t, step, output_dir)
            write_snapshot(state.field2, 2, state.t, step, output_dir)
    return hook


def _eval_ratio(evaluations: Dict[str, int]) -> Optional[str]:
    slow, fast = evaluations.get("S", 0), evaluations.get("F", 0)
    if not slow or not fast:
        return None
    ratio = Fraction(fast, slow)
    return f"1:{ratio}"


def run_simulation(cfg: Dict[str, Any], output_dir: Optional[Path] = None) -> Dict[str, Any]:
    """Run one configured scenario and write history.csv, snapshots and run.json."""
    _banner(f"RUNNING SCENARIO {cfg['scenario'].upper()}")
    logger.info(f"Started: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")

    # build first so a bad setup leaves no partial outputs
    setup_started = time.perf_counter()
    problem, state = build_scenario(cfg)
    setup_time = time.perf_counter() - setup_started

    output_dir = Path(output_dir or output_directory(cfg) / cfg["scenario"])
    output_dir.mkdir(parents=True, exist_ok=True)

    scheme = Scheme(cfg["scheme"], int(cfg["m"]))
    dt, t_end = float(cfg["dt"]), float(cfg["t_end"])
    out = cfg.get("output") or {}
    n_steps = len(step_plan(state.t, t_end, dt))

    logger.info(f"  {scheme.label} dt={dt:g} t_end={t_end:g} steps={n_steps}")
    logger.info(f"  grids {problem.grid1.shape} / {problem.grid2.shape}, "
                f"buffer {problem.partition.buffer_layers} layers")
    cr1 = courant_number(state.field1, problem.fluid1, dt)
    cr2 = courant_number(state.field2, problem.fluid2, dt)
    logger.info(f"  Courant numbers: domain 1 {cr1:.3f}, domain 2 {cr2:.3f}")

    history = ConservationHistory()
    hooks = [
        conservation_history(history),
        snapshot_hook(output_dir, int(out.get("snapshot_every") or 0), n_steps),
    ]
    result = integrate(problem, state, scheme, dt, t_end, hooks=hooks,
                       cadence=int(out.get("cadence") or 1), threads=int(cfg["threads"]),
                       check_buffer=bool(cfg.get("check_buffer")))

    _banner("SAVING OUTPUTS")
    write_history_csv(history, output_dir)
    final = history.records[-1]
    summary = {
        "config": cfg,
        "scheme": scheme.label,
        "steps": result.steps,
        "t_final": float(result.state.t),
        "dt_sequence": [float(h) for h in result.dt_sequence],
        "courant": {"domain1": cr1, "domain2": cr2},
        "element_counts": dict(zip(("slow", "buffer", "fast", "total"),
                                   problem.element_counts())),
        "ledger": result.ledger.as_dict(),
        "slow_fast_eval_ratio": _eval_ratio(result.ledger.evaluations),
        "final": {
            "mass": final["mass"],
            "energy": final["energy"],
            "mass1": final["mass1"],
            "mass2": final["mass2"],
            "max_relative_mass_drift": history.max_relative_mass_drift(),
            "max_relative_domain_drift": history.max_relative_domain_drift(),
        },
        "interface_imbalance": [float(v) for v in result.diagnostics.interface.imbalance],
        "seam_deviation": float(result.diagnostics.seam_deviation),
        "timings": {"setup": setup_time, "integrate": result.wall_clock},
    }
    write_run_summary(summary, output_dir)

    logger.info("=" * 60)
    logger.info(f"Finished: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    return summary


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _fraction_list(text: str) -> List[Fraction]:
    return [Fraction(v.strip()) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mprk", description="Coupled multirate Navier-Stokes solver",
                                     allow_abbrev=False)
    parser.add_argument("--log-level", default="INFO", help="logging level (default INFO)")
    verbs = parser.add_subparsers(dest="verb", required=True)

    def with_config(sub):
        sub.add_argument("scenario", nargs="?", help="preset name (or set `scenario` in --config)")
        sub.add_argument("--config", type=Path, help="YAML file merged over the preset")
        sub.add_argument("--threads", type=int, help="RHS worker threads")
        return sub

    with_config(verbs.add_parser("run", help="run a scenario", allow_abbrev=False))

    conv = with_config(verbs.add_parser("study-convergence", help="temporal order study", allow_abbrev=False))
    conv.add_argument("--dt-list", type=_float_list, help="comma separated, each half the previous")
    conv.add_argument("--reference-dt", type=float, help="RK4 reference step (default min/10)")

    spd = with_config(verbs.add_parser("study-speedup", help="multirate speedup study", allow_abbrev=False))
    spd.add_argument("--m-list", type=_int_list, default=[1, 2, 4, 8])
    spd.add_argument("--split-list", type=_fraction_list,
                     default=[Fraction(24, 100), Fraction(54, 100), Fraction(84, 100)])
    spd.add_argument("--nz-total", type=int, help="vertical layers across both domains")
    spd.add_argument("--steps", type=int, default=1, help="slow steps per timed run")

    ver = verbs.add_parser("verify", help="run the invariant suite", allow_abbrev=False)
    ver.add_argument("--only", type=lambda s: s.split(","), help=f"subset of {', '.join(SUITE)}")
    ver.add_argument("--output-dir", type=Path)
    return parser


def _resolve(args, extra: List[str]) -> Dict[str, Any]:
    overrides = parse_overrides(extra)
    if args.threads is not None:
        overrides["threads"] = args.threads
    return resolve_config(args.scenario, args.config, overrides)


def _dispatch(args, extra: List[str]) -> int:
    if args.verb == "verify":
        if extra:
            raise ConfigError(f"verify takes no overrides, got {' '.join(extra)}")
        out = args.output_dir or output_directory({}) / "verify"
        report = run_verification(out, args.only)
        failed = report[~report["passed"]]
        if len(failed):
            logger.error(f"  {len(failed)} check(s) failed: {', '.join(failed['check'])}")
            return EXIT_FAILURE
        return EXIT_OK

    cfg = _resolve(args, extra)
    if args.verb == "run":
        run_simulation(cfg)
        return EXIT_OK

    out = output_directory(cfg) / f"{cfg['scenario']}-{args.verb}"
    if args.verb == "study-convergence":
        dt = float(cfg["dt"])
        dt_list = args.dt_list or [dt, dt / 2, dt / 4, dt / 8]
        table = study_convergence(cfg, dt_list, args.reference_dt, threads=int(cfg["threads"]))
        out.mkdir(parents=True, exist_ok=True)
        write_table(table, out / "convergence.csv")
    else:
        table = study_speedup(cfg, args.m_list, args.split_list, args.nz_total,
                              steps=args.steps, threads=int(cfg["threads"]))
        out.mkdir(parents=True, exist_ok=True)
        write_table(table, out / "speedup.csv")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for command-line execution."""
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.INFO),
                        format="%(message)s")
    try:
        return _dispatch(args, extra)
    except ConfigError as exc:
        logger.error(f"config error: {exc}")
        return EXIT_CONFIG
    except NonPhysicalState as exc:
        logger.error(f"numerical failure: {exc}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
