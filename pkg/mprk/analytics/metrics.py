"""
Diagnostic quantities: total mass and energy, conservation histories,
volume-weighted L2 norms and Courant numbers.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
import pandas as pd

from mprk.solver.domain import ConservedField, CoupledState
from mprk.solver.physics import ENERGY, RHO, VARIABLES, FluidParams, conserved_to_primitive

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["t", "mass", "energy", "mass_drift", "energy_drift", "mass1", "mass2"]


def domain_mass(f: ConservedField) -> float:
    return float(np.sum(f.data[RHO]) * f.grid.volume)


def domain_energy(f: ConservedField) -> float:
    return float(np.sum(f.data[ENERGY]) * f.grid.volume)


def total_mass(state: CoupledState) -> float:
    """sum over both domains of rho |K|."""
    return domain_mass(state.field1) + domain_mass(state.field2)


def total_energy(state: CoupledState) -> float:
    return domain_energy(state.field1) + domain_energy(state.field2)


@dataclass
class ConservationHistory:
    records: List[Dict[str, float]] = field(default_factory=list)

    def append(self, state: CoupledState) -> None:
        m1, m2 = domain_mass(state.field1), domain_mass(state.field2)
        mass, energy = m1 + m2, total_energy(state)
        if self.records:
            m0, e0 = self.records[0]["mass"], self.records[0]["energy"]
        else:
            m0, e0 = mass, energy
        self.records.append({
            "t": float(state.t),
            "mass": mass,
            "energy": energy,
            "mass_drift": abs(mass - m0),
            "energy_drift": abs(energy - e0),
            "mass1": m1,
            "mass2": m2,
        })

    def __len__(self) -> int:
        return len(self.records)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.records, columns=HISTORY_COLUMNS)

    def max_relative_mass_drift(self) -> float:
        if not self.records:
            return 0.0
        m0 = self.records[0]["mass"]
        return max(r["mass_drift"] for r in self.records) / abs(m0)

    def max_relative_domain_drift(self) -> float:
        """Largest relative drift of either domain's own mass."""
        if not self.records:
            return 0.0
        first = self.records[0]
        return max(
            max(abs(r["mass1"] - first["mass1"]) / abs(first["mass1"]),
                abs(r["mass2"] - first["mass2"]) / abs(first["mass2"]))
            for r in self.records
        )


def conservation_history(history: ConservationHistory):
    """Integrator hook appending one record per call."""
    def hook(step: int, state: CoupledState) -> None:
        history.append(state)
    return hook


def l2_error(field_a: ConservedField, field_b: ConservedField) -> Dict[str, float]:
    """(sum |K| (a - b)^2)^(1/2) per conserved variable, plus combined momentum."""
    if field_a.grid != field_b.grid:
        raise ValueError("l2_error needs fields on the same grid")
    diff2 = (field_a.data - field_b.data) ** 2
    sums = diff2.reshape(5, -1).sum(axis=1) * field_a.grid.volume
    norms = {name: float(np.sqrt(v)) for name, v in zip(VARIABLES, sums)}
    norms["momentum"] = float(np.sqrt(sums[1:4].sum()))
    return norms


def l2_error_coupled(state_a: CoupledState, state_b: CoupledState) -> Dict[str, float]:
    """Norms over both domains together."""
    e1 = l2_error(state_a.field1, state_b.field1)
    e2 = l2_error(state_a.field2, state_b.field2)
    return {k: float(np.sqrt(e1[k] ** 2 + e2[k] ** 2)) for k in e1}


def courant_number(f: ConservedField, params: FluidParams, dt: float) -> float:
    """Cr = dt max over elements of sum_d (|u_d| + a) / dx_d, active axes only."""
    prim = conserved_to_primitive(f.data, params)
    velocity = (prim.u, prim.v, prim.w)
    rate = np.zeros_like(prim.rho)
    for axis in f.grid.active_axes():
        rate = rate + (np.abs(velocity[axis]) + prim.a) / f.grid.spacing[axis]
    return float(dt * np.max(rate))
