"""
Butcher tableaus and the fast / buffer / slow MPRK partition construction.
Coefficients are built from exact rationals and stored as float64 arrays.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

import numpy as np

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-14


class TableauError(ValueError):
    """Implicit or inconsistent Butcher coefficients."""


@dataclass(frozen=True)
class ButcherTableau:
    """Explicit RK coefficients (a strictly lower triangular, c = row sums of a)."""
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    name: str = ""

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        c = np.asarray(self.c, dtype=np.float64)
        s = b.shape[0]
        if a.shape != (s, s) or c.shape != (s,):
            raise TableauError(f"shape mismatch: a{a.shape}, b({s},), c{c.shape}")
        if np.any(np.triu(a) != 0.0):
            raise TableauError(f"tableau '{self.name}' is not explicit")
        if np.max(np.abs(a.sum(axis=1) - c), initial=0.0) > ROW_SUM_TOL:
            raise TableauError(f"tableau '{self.name}' violates c_i = sum_j a_ij")
        for arr in (a, b, c):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def stages(self) -> int:
        return self.b.shape[0]

    def stability_polynomial(self) -> np.ndarray:
        """
        Coefficients of R(z) = 1 + z b^T (I - zA)^{-1} 1, lowest power first.
        Explicit methods give a polynomial of degree <= stages.
        """
        s = self.stages
        coeffs = np.zeros(s + 1)
        coeffs[0] = 1.0
        term = np.ones(s)
        for k in range(1, s + 1):
            coeffs[k] = self.b @ term
            term = self.a @ term
        return coeffs


@dataclass(frozen=True)
class MprkTableauSet:
    fast: ButcherTableau
    buffer: ButcherTableau
    slow: ButcherTableau
    m: int
    s: int

    @property
    def stages(self) -> int:
        return self.m * self.s

    def slow_source_stage(self, i: int) -> int:
        """0-based slow stage whose state is reused at global stage i."""
        return i % self.s


def _from_fractions(a, b, c, name: str) -> ButcherTableau:
    return ButcherTableau(
        a=np.array([[float(x) for x in row] for row in a]),
        b=np.array([float(x) for x in b]),
        c=np.array([float(x) for x in c]),
        name=name,
    )


def base_rk2() -> ButcherTableau:
    """Two-stage explicit trapezoidal method."""
    return ButcherTableau(
        a=np.array([[0.0, 0.0], [1.0, 0.0]]),
        b=np.array([0.5, 0.5]),
        c=np.array([0.0, 1.0]),
        name="rk2",
    )


def rk4_classic() -> ButcherTableau:
    """Classical four-stage, fourth-order method (reference oracle)."""
    return ButcherTableau(
        a=np.array([
            [0.0, 0.0, 0.0, 0.0],
            [0.5, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ]),
        b=np.array([1.0, 2.0, 2.0, 1.0]) / 6.0,
        c=np.array([0.0, 0.5, 0.5, 1.0]),
        name="rk4",
    )


def _rationals(values: np.ndarray) -> List:
    return [Fraction(float(v)).limit_denominator(1 << 20) for v in np.ravel(values)]


def generate_mprk(base: ButcherTableau, m: int) -> MprkTableauSet:
    """
    Partition a base method into fast, buffer and slow tableaus of m*s stages.

    fast:   m subcycles of size 1/m; diagonal blocks A/m, lower blocks 1 b^T / m
    buffer: block-diagonal unscaled A, weights of the fast partition
    slow:   first s rows of A, later rows repeat row mod(i, s), weights (b, 0, ...)
    """
    if not isinstance(m, int) or m < 1:
        raise TableauError(f"rate ratio must be a positive integer, got {m!r}")
    if np.any(np.triu(base.a) != 0.0):
        raise TableauError("base tableau must be explicit")

    s = base.stages
    n = m * s
    A = np.array(_rationals(base.a), dtype=object).reshape(s, s)
    b = _rationals(base.b)
    c = _rationals(base.c)
    zero = Fraction(0)

    fast_a = [[zero] * n for _ in range(n)]
    buffer_a = [[zero] * n for _ in range(n)]
    slow_a = [[zero] * n for _ in range(n)]
    fast_c: List[Fraction] = []

    for k in range(m):
        for i in range(s):
            row = k * s + i
            for l in range(k):
                for j in range(s):
                    fast_a[row][l * s + j] = b[j] / m
            for j in range(s):
                fast_a[row][k * s + j] = A[i, j] / m
                buffer_a[row][k * s + j] = A[i, j]
                slow_a[row][j] = A[row % s, j]
            fast_c.append(Fraction(k, m) + c[i] / m)

    fast_b = [bj / m for _ in range(m) for bj in b]
    slow_b = list(b) + [zero] * (n - s)
    repeated_c = c * m

    tableaus = MprkTableauSet(
        fast=_from_fractions(fast_a, fast_b, fast_c, f"mprk{m}-fast"),
        buffer=_from_fractions(buffer_a, fast_b, repeated_c, f"mprk{m}-buffer"),
        slow=_from_fractions(slow_a, slow_b, repeated_c, f"mprk{m}-slow"),
        m=m,
        s=s,
    )
    logger.debug(f"generated MPRK tableau set m={m} s={s}")
    return tableaus


def format_tableau(tableau: ButcherTableau, width: int = 9) -> str:
    """Aligned plain-text Butcher array: c | a rows, then the b row."""
    def cell(x: float) -> str:
        return f"{Fraction(x).limit_denominator(1 << 16)!s:>{width}}"

    lines = []
    for i in range(tableau.stages):
        row = " ".join(cell(x) for x in tableau.a[i, :i]) if i else ""
        lines.append(f"{cell(tableau.c[i])} | {row}")
    lines.append("-" * (width + 2) + "+" + "-" * ((width + 1) * tableau.stages))
    lines.append(" " * width + " | " + " ".join(cell(x) for x in tableau.b))
    return "\n".join(lines)


def order_conditions(tableau: ButcherTableau) -> Sequence[float]:
    """(sum b, b.c) for the first and second order checks."""
    return float(np.sum(tableau.b)), float(tableau.b @ tableau.c)
