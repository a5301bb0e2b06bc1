"""
Time stepping: the multirate partitioned RK step over the fast / buffer / slow
split, single-rate RK steps on the monolithic system, and the fixed-step driver.
"""
import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from mprk.solver.butcher import ButcherTableau, MprkTableauSet, base_rk2, generate_mprk, rk4_classic
from mprk.solver.config import NUMERICS
from mprk.solver.domain import ConservedField, CoupledProblem, CoupledState
from mprk.solver.physics import ENERGY, MX, MY, NonPhysicalState
from mprk.solver.spatial import REGIONS, RegionStages, interface_exchange, rhs_monolithic, rhs_region

logger = logging.getLogger(__name__)

Hook = Callable[[int, CoupledState], None]


@dataclass
class RhsEvalLedger:
    """Exact count of right-hand-side evaluations and elements touched per region."""
    evaluations: Dict[str, int] = field(default_factory=lambda: {r: 0 for r in REGIONS})
    elements: Dict[str, int] = field(default_factory=lambda: {r: 0 for r in REGIONS})
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, region: str, n_elements: int) -> None:
        with self._lock:
            self.evaluations[region] += 1
            self.elements[region] += n_elements

    @property
    def total_elements(self) -> int:
        return sum(self.elements.values())

    def as_dict(self) -> Dict[str, Dict[str, int]]:
        return {
            "evaluations": dict(self.evaluations),
            "elements": dict(self.elements),
            "total_elements": self.total_elements,
        }


@dataclass
class StageWorkspace:
    """Stage states Q[region][i] and tendencies R[region][i], i = 0..m*s-1."""
    Q: Dict[str, List[Optional[np.ndarray]]]
    R: Dict[str, List[Optional[np.ndarray]]]

    @classmethod
    def allocate(cls, stages: int) -> "StageWorkspace":
        return cls(
            Q={r: [None] * stages for r in REGIONS},
            R={r: [None] * stages for r in REGIONS},
        )


@dataclass
class InterfaceLedger:
    """
    x-momentum, y-momentum and energy that entered each side through the
    interface, booked from the face fluxes each side actually applied and
    weighted with that side's step weights. side1 + side2 is zero when the
    two sides saw one flux.
    """
    side1: np.ndarray = field(default_factory=lambda: np.zeros(3))
    side2: np.ndarray = field(default_factory=lambda: np.zeros(3))

    ROWS = (MX, MY, ENERGY)

    def add(self, top1: np.ndarray, bottom2: np.ndarray, weight1: float, weight2: float,
            dt: float, face_area: float) -> None:
        """`top1` is the +z flux on the top face of Omega_1, `bottom2` on the bottom face of Omega_2."""
        for k, row in enumerate(self.ROWS):
            into1 = -float(np.sum(top1[row])) * face_area
            into2 = float(np.sum(bottom2[row])) * face_area
            self.side1[k] += dt * weight1 * into1
            self.side2[k] += dt * weight2 * into2

    @property
    def imbalance(self) -> np.ndarray:
        return self.side1 + self.side2


@dataclass
class StepDiagnostics:
    seam_deviation: float = 0.0
    interface: InterfaceLedger = field(default_factory=InterfaceLedger)


@dataclass(frozen=True)
class Scheme:
    kind: str = "mprk"
    m: int = 1

    def __post_init__(self):
        if self.kind not in ("mprk", "rk2", "rk4"):
            raise ValueError(f"unknown scheme '{self.kind}'")

    @property
    def label(self) -> str:
        return f"MPRK2(m={self.m})" if self.kind == "mprk" else self.kind.upper()

    def tableaus(self):
        if self.kind == "mprk":
            return generate_mprk(base_rk2(), self.m)
        return base_rk2() if self.kind == "rk2" else rk4_classic()


def stage_combination(q: np.ndarray, dt: float, coeffs: Sequence[float],
                      tendencies: Sequence[Optional[np.ndarray]]) -> np.ndarray:
    """q + dt * sum_j c_j R_j over the nonzero coefficients only."""
    acc = None
    for c, r in zip(coeffs, tendencies):
        if c == 0.0:
            continue
        term = c * r
        acc = term if acc is None else acc + term
    if acc is None:
        return q.copy()
    return q + dt * acc


def _face_area(problem: CoupledProblem) -> float:
    return problem.grid1.dx * problem.grid1.dy


def _evaluate(jobs: Dict[str, Callable[[], np.ndarray]],
              pool: Optional[ThreadPoolExecutor]) -> Dict[str, np.ndarray]:
    if pool is None:
        return {name: job() for name, job in jobs.items()}
    futures = {name: pool.submit(job) for name, job in jobs.items()}
    return {name: fut.result() for name, fut in futures.items()}


def mprk_step(problem: CoupledProblem, state: CoupledState, tableaus: MprkTableauSet,
              dt: float, ledger: Optional[RhsEvalLedger] = None,
              pool: Optional[ThreadPoolExecutor] = None, check_buffer: bool = False,
              diagnostics: Optional[StepDiagnostics] = None) -> CoupledState:
    """
    One multirate step. Per stage: buffer update, slow update (or copy of the
    repeated slow stage), fast update, then the buffer, slow (first s stages
    only) and fast tendencies. The three tendencies depend only on this
    stage's states, so they may run concurrently.
    """
    part = problem.partition
    nb = part.buffer_layers
    s, n_stages = tableaus.s, tableaus.stages
    fast, buffer, slow = tableaus.fast, tableaus.buffer, tableaus.slow

    qF = state.field1.data
    qB = state.field2.data[:, part.buffer_slice()]
    qS = state.field2.data[:, part.slow_slice()]
    ws = StageWorkspace.allocate(n_stages)
    seam = slice(max(nb - NUMERICS["seam_stencil_layers"], 0), nb)

    for i in range(n_stages):
        try:
            QB = stage_combination(qB, dt, buffer.a[i, :i], ws.R["B"][:i])
            if i < s:
                QS = stage_combination(qS, dt, slow.a[i, :i], ws.R["S"][:i])
            else:
                QS = ws.Q["S"][tableaus.slow_source_stage(i)]
            QF = stage_combination(qF, dt, fast.a[i, :i], ws.R["F"][:i])
            ws.Q["B"][i], ws.Q["S"][i], ws.Q["F"][i] = QB, QS, QF

            if check_buffer and diagnostics is not None and i >= s:
                ref = ws.Q["B"][i % s]
                dev = float(np.max(np.abs(QB[:, seam] - ref[:, seam]), initial=0.0))
                diagnostics.seam_deviation = max(diagnostics.seam_deviation, dev)

            exchange = interface_exchange(problem, QF, QB, stage=i)
            stages = RegionStages(QF, QB, QS)
            applied: Dict[str, np.ndarray] = {}
            jobs = {"B": lambda: rhs_region(problem, "B", stages, exchange, ledger, applied)}
            if i < s:
                jobs["S"] = lambda: rhs_region(problem, "S", stages, None, ledger)
            jobs["F"] = lambda: rhs_region(problem, "F", stages, exchange, ledger, applied)
            results = _evaluate(jobs, pool)
        except NonPhysicalState as exc:
            exc.stage = i
            raise
        for region, tendency in results.items():
            ws.R[region][i] = tendency

        if diagnostics is not None:
            diagnostics.interface.add(applied["F"], applied["B"], fast.b[i], buffer.b[i],
                                      dt, _face_area(problem))

    new_F = stage_combination(qF, dt, fast.b, ws.R["F"])
    new_B = stage_combination(qB, dt, buffer.b, ws.R["B"])
    new_S = stage_combination(qS, dt, slow.b, ws.R["S"])
    field2 = np.concatenate([new_B, new_S], axis=1)
    return CoupledState(
        ConservedField(state.field1.grid, new_F),
        ConservedField(state.field2.grid, field2),
        state.t + dt,
    )


def single_rate_step(problem: CoupledProblem, state: CoupledState, tableau: ButcherTableau,
                     dt: float, ledger: Optional[RhsEvalLedger] = None,
                     diagnostics: Optional[StepDiagnostics] = None,
                     pool: Optional[ThreadPoolExecutor] = None) -> CoupledState:
    """Explicit RK step on the whole coupled system, interface exchanged every stage."""
    q1, q2 = state.field1.data, state.field2.data
    R1: List[np.ndarray] = []
    R2: List[np.ndarray] = []
    for i in range(tableau.stages):
        try:
            Q1 = stage_combination(q1, dt, tableau.a[i, :i], R1)
            Q2 = stage_combination(q2, dt, tableau.a[i, :i], R2)
            exchange = interface_exchange(problem, Q1, Q2[:, :problem.partition.buffer_layers], stage=i)
            applied: Dict[str, np.ndarray] = {}
            r1, r2 = rhs_monolithic(problem, Q1, Q2, ledger, exchange, applied, pool)
        except NonPhysicalState as exc:
            exc.stage = i
            raise
        R1.append(r1)
        R2.append(r2)
        if diagnostics is not None:
            diagnostics.interface.add(applied["F"], applied["B"], tableau.b[i], tableau.b[i],
                                      dt, _face_area(problem))

    return CoupledState(
        ConservedField(state.field1.grid, stage_combination(q1, dt, tableau.b, R1)),
        ConservedField(state.field2.grid, stage_combination(q2, dt, tableau.b, R2)),
        state.t + dt,
    )


@dataclass
class IntegrationResult:
    state: CoupledState
    ledger: RhsEvalLedger
    steps: int
    dt_sequence: List[float]
    diagnostics: StepDiagnostics
    wall_clock: float


def step_plan(t0: float, t_end: float, dt: float) -> List[float]:
    """Fixed steps of dt, the last one shortened to land on t_end."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end < t0:
        raise ValueError(f"t_end {t_end} is before t {t0}")
    span = t_end - t0
    if span == 0.0:
        return []
    n = max(1, math.ceil(span / dt - 1e-9))
    last = span - (n - 1) * dt
    if abs(last - dt) <= 1e-12 * dt:
        last = dt
    return [dt] * (n - 1) + [last]


def integrate(problem: CoupledProblem, state: CoupledState, scheme: Scheme, dt: float,
              t_end: float, hooks: Sequence[Hook] = (), cadence: int = 1,
              threads: int = 1, check_buffer: bool = False,
              ledger: Optional[RhsEvalLedger] = None,
              log_every: Optional[int] = None) -> IntegrationResult:
    """
    Advance with fixed dt. Hooks run at step 0, every `cadence` steps and on
    the final step. Failures carry the step index.
    """
    plan = step_plan(state.t, t_end, dt)
    ledger = ledger or RhsEvalLedger()
    diagnostics = StepDiagnostics()
    tableaus = scheme.tableaus()
    cadence = max(1, int(cadence or 1))
    log_every = log_every or max(1, len(plan) // 10)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    for hook in hooks:
        hook(0, state)

    t0 = state.t
    started = time.perf_counter()
    try:
        for step, h in enumerate(plan, start=1):
            try:
                if scheme.kind == "mprk":
                    state = mprk_step(problem, state, tableaus, h, ledger, pool,
                                      check_buffer, diagnostics)
                else:
                    state = single_rate_step(problem, state, tableaus, h, ledger, diagnostics, pool)
            except NonPhysicalState as exc:
                exc.step = step
                logger.error(f"  {scheme.label} failed: {exc}")
                raise
            # keep the clock free of accumulated round-off
            state.t = t_end if step == len(plan) else t0 + step * dt

            if step % cadence == 0 or step == len(plan):
                for hook in hooks:
                    hook(step, state)
            if step % log_every == 0 or step == len(plan):
                logger.info(f"  step {step}/{len(plan)} t={state.t:.6g}")
    finally:
        if pool is not None:
            pool.shutdown()

    return IntegrationResult(
        state=state,
        ledger=ledger,
        steps=len(plan),
        dt_sequence=plan,
        diagnostics=diagnostics,
        wall_clock=time.perf_counter() - started,
    )
