"""
Ideal speedup of the multirate scheme over its single-rate base.

With uniform work per element, single-rate RK with dt/m costs m s N_total
element evaluations per slow step, MPRK costs s N_S + m s (N_B + N_F), so
  speedup = (1 + (1/m - 1) N_S / N_total)^-1
independent of s and of the per-element throughput.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Optional

from mprk.solver.integrator import RhsEvalLedger

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpeedupInputs:
    """Element counts, either global (serial) or of the busiest process (parallel)."""
    m: int
    n_slow: int
    n_buffer: int
    n_fast: int
    n_total: Optional[int] = None
    s: int = 2
    # elements per second per process; cancels out of every ratio
    eps: Optional[float] = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        counts = (self.n_slow, self.n_buffer, self.n_fast)
        if min(counts) < 0:
            raise ValueError("element counts must be non-negative")
        total = sum(counts) if self.n_total is None else self.n_total
        if total != sum(counts) or total <= 0:
            raise ValueError(f"n_total {self.n_total} inconsistent with region counts {counts}")
        object.__setattr__(self, "n_total", total)

    @classmethod
    def from_ratio(cls, m: int, slow: int, total: int, **kwargs) -> "SpeedupInputs":
        """Only N_S / N_total matters; the remainder is booked as fast."""
        return cls(m=m, n_slow=slow, n_buffer=0, n_fast=total - slow, n_total=total, **kwargs)

    @property
    def slow_fraction(self) -> Fraction:
        return Fraction(self.n_slow, self.n_total)


def speedup_fraction(inputs: SpeedupInputs) -> Fraction:
    return 1 / (1 + (Fraction(1, inputs.m) - 1) * inputs.slow_fraction)


def serial_speedup(inputs: SpeedupInputs) -> float:
    return float(speedup_fraction(inputs))


def parallel_speedup(inputs: SpeedupInputs) -> float:
    """Same expression on per-process counts; one process gives the serial value."""
    return float(speedup_fraction(inputs))


def eval_counts(inputs: SpeedupInputs) -> Dict[str, int]:
    """Element evaluations per slow step of both schemes."""
    m, s = inputs.m, inputs.s
    return {
        "single_rate": m * s * inputs.n_total,
        "mprk": s * inputs.n_slow + m * s * (inputs.n_buffer + inputs.n_fast),
    }


@dataclass
class SpeedupReport:
    ideal: float
    eval_ratio: Fraction
    wcr: Optional[float] = None

    @property
    def eval_ratio_float(self) -> float:
        return float(self.eval_ratio)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "spd": self.ideal,
            "eval_ratio": float(self.eval_ratio),
            "eval_ratio_exact": f"{self.eval_ratio.numerator}/{self.eval_ratio.denominator}",
            "wcr": self.wcr,
        }


def _check_compatible(ledger_sr: RhsEvalLedger, ledger_mprk: RhsEvalLedger) -> None:
    for region in ledger_sr.evaluations:
        n_sr, n_mp = ledger_sr.evaluations[region], ledger_mprk.evaluations[region]
        if n_sr == 0 or n_mp == 0:
            if n_sr != n_mp and ledger_sr.elements[region] and ledger_mprk.elements[region]:
                raise ValueError(f"region {region}: ledgers are not comparable")
            continue
        # element count per evaluation must agree (same grids and partition)
        if ledger_sr.elements[region] * n_mp != ledger_mprk.elements[region] * n_sr:
            raise ValueError(f"region {region}: ledgers come from different configurations")


def measured_speedup(ledger_sr: RhsEvalLedger, ledger_mprk: RhsEvalLedger,
                     inputs: Optional[SpeedupInputs] = None,
                     wall_sr: Optional[float] = None,
                     wall_mprk: Optional[float] = None) -> SpeedupReport:
    """Exact element-evaluation ratio, the measured wall-clock ratio when timed, and the model value."""
    _check_compatible(ledger_sr, ledger_mprk)
    if ledger_mprk.total_elements == 0:
        raise ValueError("MPRK ledger is empty")
    ratio = Fraction(ledger_sr.total_elements, ledger_mprk.total_elements)
    wcr = None
    if wall_sr is not None and wall_mprk:
        wcr = wall_sr / wall_mprk
    ideal = serial_speedup(inputs) if inputs is not None else float(ratio)
    return SpeedupReport(ideal=ideal, eval_ratio=ratio, wcr=wcr)
