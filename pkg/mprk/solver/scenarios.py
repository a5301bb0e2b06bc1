"""
Initial conditions for the coupled experiments.

Every scenario starts from the potential-temperature hydrostatic profile
  Psi = 1 + g z / (cp (1 + dtheta/theta0))
  T = (1 + dtheta/theta0) Psi,  P = Psi^(gamma/(gamma-1)) / gamma,
  rho = theta0 / (theta0 + dtheta) Psi^(1/(gamma-1))
and adds temperature bubbles or velocity fields on top.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from mprk.solver.config import ConfigError
from mprk.solver.domain import (
    ConservedField, CoupledProblem, CoupledState, DomainConfig, StructuredGrid,
    build_coupled_domain, coupled_boundaries,
)
from mprk.solver.physics import FluidParams, primitive_to_conserved

logger = logging.getLogger(__name__)


@dataclass
class Perturbation:
    domain: int
    amplitude: float
    center: Tuple[float, float, float]
    radius: float

    def delta_theta(self, x, y, z) -> np.ndarray:
        """A (1 + cos(pi r)) inside r <= radius, zero outside."""
        cx, cy, cz = self.center
        r = np.sqrt((x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2)
        return np.where(r <= self.radius, self.amplitude * (1.0 + np.cos(np.pi * r)), 0.0)


@dataclass
class ScenarioConfig:
    name: str
    domain: DomainConfig
    gamma: float
    Pr: float
    mu1: float
    mu2: float
    g: float
    theta0: float
    perturbations: List[Perturbation] = field(default_factory=list)
    jet: Dict[str, float] = field(default_factory=dict)
    vortex: Dict[str, Any] = field(default_factory=dict)
    waves: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, cfg: Dict[str, Any]) -> "ScenarioConfig":
        fluid = cfg["fluid"]
        perts = []
        for n, p in enumerate(cfg.get("perturbations") or []):
            center = list(p.get("center", (0.0, 0.0, 0.0)))
            if len(center) == 2:
                # 2D centres are given as (x, z)
                center = [center[0], 0.0, center[1]]
            if p.get("radius", 0.0) <= 0.0:
                raise ConfigError(f"perturbations[{n}].radius: must be positive")
            perts.append(Perturbation(int(p["domain"]), float(p["amplitude"]),
                                      tuple(float(c) for c in center), float(p["radius"])))
        return cls(
            name=cfg["scenario"],
            domain=DomainConfig.from_dict(cfg["domain"]),
            gamma=float(fluid["gamma"]),
            Pr=float(fluid["Pr"]),
            mu1=float(fluid["mu1"]),
            mu2=float(fluid["mu2"]),
            g=float(fluid["g"]),
            theta0=float(fluid["theta0"]),
            perturbations=perts,
            jet=dict(cfg.get("jet") or {}),
            vortex=dict(cfg.get("vortex") or {}),
            waves=dict(cfg.get("waves") or {}),
        )

    def fluids(self) -> Tuple[FluidParams, FluidParams]:
        return (
            FluidParams(gamma=self.gamma, mu=self.mu1, Pr=self.Pr, g=self.g),
            FluidParams(gamma=self.gamma, mu=self.mu2, Pr=self.Pr, g=self.g),
        )


def build_problem(config: ScenarioConfig) -> CoupledProblem:
    grid1, grid2, partition = build_coupled_domain(config.domain)
    bc1, bc2 = coupled_boundaries(config.domain.lateral_bc)
    fluid1, fluid2 = config.fluids()
    return CoupledProblem(grid1, grid2, partition, fluid1, fluid2, bc1, bc2,
                          metadata={"scenario": config.name})


def hydrostatic_state(grid: StructuredGrid, params: FluidParams, theta0: float,
                      delta_theta: Optional[np.ndarray] = None,
                      velocity: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None,
                      domain: int = 1) -> np.ndarray:
    """Conserved (5, nz, ny, nx) array of the potential-temperature profile."""
    _, _, z = grid.cell_centers()
    dtheta = np.zeros_like(z) if delta_theta is None else delta_theta
    ratio = 1.0 + dtheta / theta0
    psi = 1.0 + params.g * z / (params.cp * ratio)
    if np.any(psi <= 0.0):
        raise ConfigError(
            f"domain {domain}: hydrostatic profile has Psi <= 0 (domain too deep for g={params.g})"
        )
    gamma = params.gamma
    p = psi ** (gamma / (gamma - 1.0)) / gamma
    rho = theta0 / (theta0 + dtheta) * psi ** (1.0 / (gamma - 1.0))
    if velocity is None:
        zero = np.zeros_like(z)
        velocity = (zero, zero, zero)
    u, v, w = velocity
    return primitive_to_conserved(rho, u, v, w, p, gamma)


def _bubbles(config: ScenarioConfig, grid: StructuredGrid, domain: int) -> np.ndarray:
    x, y, z = grid.cell_centers()
    dtheta = np.zeros_like(z)
    for pert in config.perturbations:
        if pert.domain == domain:
            dtheta = dtheta + pert.delta_theta(x, y, z)
    return dtheta


def _finish(problem: CoupledProblem, q1: np.ndarray, q2: np.ndarray) -> CoupledState:
    state = CoupledState(ConservedField(problem.grid1, q1), ConservedField(problem.grid2, q2), 0.0)
    state.field1.validity_scan(problem.fluid1, domain=1)
    state.field2.validity_scan(problem.fluid2, domain=2)
    return state


def init_thermal_convection(config: ScenarioConfig) -> Tuple[CoupledProblem, CoupledState]:
    """Hydrostatic rest state with cosine potential-temperature bubbles in either fluid."""
    problem = build_problem(config)
    q1 = hydrostatic_state(problem.grid1, problem.fluid1, config.theta0,
                           _bubbles(config, problem.grid1, 1), domain=1)
    q2 = hydrostatic_state(problem.grid2, problem.fluid2, config.theta0,
                           _bubbles(config, problem.grid2, 2), domain=2)
    return problem, _finish(problem, q1, q2)


def jet_profile(z: np.ndarray, amplitude: float, height: float, width: float) -> np.ndarray:
    """u = U sech^2((z - z_j) / delta)."""
    return amplitude / np.cosh((z - height) / width) ** 2


def vortex_velocity(x: np.ndarray, z: np.ndarray, speed: float, radius: float,
                    cx: float, cz: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gaussian streamfunction psi0 exp(-r^2 / 2R^2) in the x-z plane, scaled so
    the peak speed (reached at r = R) equals `speed`.
    """
    psi0 = speed * radius * math.exp(0.5)
    envelope = psi0 * np.exp(-((x - cx) ** 2 + (z - cz) ** 2) / (2.0 * radius ** 2)) / radius ** 2
    u = -(z - cz) * envelope
    w = (x - cx) * envelope
    return u, w


def _jet_and_vortex(config: ScenarioConfig) -> Tuple[CoupledProblem, CoupledState]:
    problem = build_problem(config)
    jet = {"amplitude": 0.0, "height": 0.0, "width": 1.0, **config.jet}
    vortex = {"speed": 0.0, "radius": 1.0, "center": [0.0, 0.0, 0.0], **config.vortex}
    if jet["width"] <= 0.0 or vortex["radius"] <= 0.0:
        raise ConfigError("jet.width / vortex.radius: must be positive")
    center = list(vortex["center"])
    cx, cz = (center[0], center[-1])

    x1, _, z1 = problem.grid1.cell_centers()
    u1, w1 = vortex_velocity(x1, z1, vortex["speed"], vortex["radius"], cx, cz)
    q1 = hydrostatic_state(problem.grid1, problem.fluid1, config.theta0,
                           _bubbles(config, problem.grid1, 1),
                           velocity=(u1, np.zeros_like(u1), w1), domain=1)

    _, _, z2 = problem.grid2.cell_centers()
    u2 = jet_profile(z2, jet["amplitude"], jet["height"], jet["width"])
    q2 = hydrostatic_state(problem.grid2, problem.fluid2, config.theta0,
                           _bubbles(config, problem.grid2, 2),
                           velocity=(u2, np.zeros_like(u2), np.zeros_like(u2)), domain=2)
    return problem, _finish(problem, q1, q2)


def init_khi(config: ScenarioConfig) -> Tuple[CoupledProblem, CoupledState]:
    """Shear jet in Omega_2 over a compact vortex in Omega_1; density is hydrostatic."""
    return _jet_and_vortex(config)


def init_wind_driven_3d(config: ScenarioConfig) -> Tuple[CoupledProblem, CoupledState]:
    """The jet extruded in y over a y-aligned vortex tube."""
    if config.domain.cells1[1] < 2:
        raise ConfigError("wind3d: needs ny >= 2")
    return _jet_and_vortex(config)


def init_thermal_bubble_3d(config: ScenarioConfig) -> Tuple[CoupledProblem, CoupledState]:
    if config.domain.cells1[1] < 2:
        raise ConfigError("bubble3d: needs ny >= 2")
    return init_thermal_convection(config)


def init_manufactured(config: ScenarioConfig) -> Tuple[CoupledProblem, CoupledState]:
    """
    Smooth x-periodic case: a bubble plus opposite horizontal waves
    u = +-A sin(2 pi k x / Lx) on either side of the interface.
    """
    problem = build_problem(config)
    amp = float(config.waves.get("amplitude", 0.0))
    k = int(config.waves.get("wavenumber", 1))
    x0, x1 = config.domain.x
    length = x1 - x0

    def waves(grid, sign):
        x, _, _ = grid.cell_centers()
        u = sign * amp * np.sin(2.0 * np.pi * k * (x - x0) / length)
        return (u, np.zeros_like(u), np.zeros_like(u))

    q1 = hydrostatic_state(problem.grid1, problem.fluid1, config.theta0,
                           _bubbles(config, problem.grid1, 1), waves(problem.grid1, -1.0), domain=1)
    q2 = hydrostatic_state(problem.grid2, problem.fluid2, config.theta0,
                           _bubbles(config, problem.grid2, 2), waves(problem.grid2, 1.0), domain=2)
    return problem, _finish(problem, q1, q2)


SCENARIO_BUILDERS: Dict[str, Callable[[ScenarioConfig], Tuple[CoupledProblem, CoupledState]]] = {
    "convection2d": init_thermal_convection,
    "convection2d-dual": init_thermal_convection,
    "khi2d": init_khi,
    "bubble3d": init_thermal_bubble_3d,
    "wind3d": init_wind_driven_3d,
    "manufactured": init_manufactured,
}


def build_scenario(cfg: Dict[str, Any]) -> Tuple[CoupledProblem, CoupledState]:
    """Problem and initial state from a resolved run config."""
    config = ScenarioConfig.from_dict(cfg)
    if config.name not in SCENARIO_BUILDERS:
        raise ConfigError(f"scenario: no initializer for '{config.name}'")
    problem, state = SCENARIO_BUILDERS[config.name](config)
    logger.debug(f"initialized {config.name}: {problem.grid1.shape} / {problem.grid2.shape}")
    return problem, state
