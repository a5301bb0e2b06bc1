"""
Pointwise compressible Navier-Stokes physics in nondimensional form.
Every function accepts conserved arrays of shape (5, ...) and broadcasts.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

# Conserved variable rows
RHO, MX, MY, MZ, ENERGY = range(5)
VARIABLES = ("rho", "rhou", "rhov", "rhow", "rhoE")

GAS_CONSTANT_AIR = 287.05


class NonPhysicalState(RuntimeError):
    """Density or pressure left the admissible set."""

    def __init__(self, message: str, domain: Optional[int] = None,
                 element: Optional[Tuple[int, ...]] = None):
        super().__init__(message)
        self.domain = domain
        self.element = element
        self.stage: Optional[int] = None
        self.step: Optional[int] = None

    def __str__(self):
        parts = [super().__str__()]
        if self.domain is not None:
            parts.append(f"domain={self.domain}")
        if self.element is not None:
            parts.append(f"element(k,j,i)={self.element}")
        if self.stage is not None:
            parts.append(f"stage={self.stage}")
        if self.step is not None:
            parts.append(f"step={self.step}")
        return " ".join(parts)


@dataclass(frozen=True)
class FluidParams:
    gamma: float = 1.4
    mu: float = 0.0
    Pr: float = 0.72
    g: float = 0.0

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if self.Pr <= 0.0:
            raise ValueError(f"Pr must be positive, got {self.Pr}")
        if self.mu < 0.0:
            raise ValueError(f"mu must be non-negative, got {self.mu}")

    @property
    def cp(self) -> float:
        return 1.0 / (self.gamma - 1.0)

    @property
    def kappa(self) -> float:
        """Thermal conductivity cp * mu / Pr."""
        return self.cp * self.mu / self.Pr


@dataclass
class PrimitiveState:
    rho: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    p: np.ndarray
    T: np.ndarray
    gamma: float

    @property
    def velocity(self) -> np.ndarray:
        return np.stack([self.u, self.v, self.w])

    @property
    def e(self) -> np.ndarray:
        return self.p / (self.rho * (self.gamma - 1.0))

    @property
    def E(self) -> np.ndarray:
        return self.e + 0.5 * (self.u ** 2 + self.v ** 2 + self.w ** 2)

    @property
    def H(self) -> np.ndarray:
        return self.E + self.p / self.rho

    @property
    def a(self) -> np.ndarray:
        return np.sqrt(self.gamma * self.p / self.rho)


def eos_pressure(rho, T, gamma: float):
    """Normalized ideal gas law p = rho T / gamma."""
    return rho * T / gamma


def _first_bad(mask: np.ndarray) -> Optional[Tuple[int, ...]]:
    if mask.ndim == 0:
        return ()
    return tuple(int(x) for x in np.argwhere(mask)[0])


def conserved_to_primitive(q: np.ndarray, params: FluidParams,
                           domain: Optional[int] = None) -> PrimitiveState:
    """Raises NonPhysicalState at the first element with rho <= 0 or p <= 0."""
    q = np.asarray(q, dtype=np.float64)
    rho = q[RHO]
    bad = ~(rho > 0.0)
    if np.any(bad):
        raise NonPhysicalState("non-positive density", domain, _first_bad(bad))
    u = q[MX] / rho
    v = q[MY] / rho
    w = q[MZ] / rho
    e = q[ENERGY] / rho - 0.5 * (u * u + v * v + w * w)
    p = rho * e * (params.gamma - 1.0)
    bad = ~(p > 0.0)
    if np.any(bad):
        raise NonPhysicalState("non-positive pressure", domain, _first_bad(bad))
    T = params.gamma * p / rho
    return PrimitiveState(rho, u, v, w, p, T, params.gamma)


def primitive_to_conserved(rho, u, v, w, p, gamma: float) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.float64)
    E = p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v + w * w)
    return np.stack(np.broadcast_arrays(rho, rho * u, rho * v, rho * w, E)).astype(np.float64)


def inviscid_flux(q: np.ndarray, axis: int, params: FluidParams,
                  prim: Optional[PrimitiveState] = None) -> np.ndarray:
    """Euler flux along axis 0=x, 1=y, 2=z."""
    prim = prim or conserved_to_primitive(q, params)
    un = (prim.u, prim.v, prim.w)[axis]
    flux = q * un
    flux[MX + axis] += prim.p
    flux[ENERGY] += prim.p * un
    return flux


def stress_tensor(grad_u: np.ndarray, mu: float) -> np.ndarray:
    """
    grad_u[i, j] = d u_i / d x_j with trailing broadcast dims.
    sigma = mu (grad u + grad u^T - 2/3 I div u)
    """
    div = grad_u[0, 0] + grad_u[1, 1] + grad_u[2, 2]
    sigma = mu * (grad_u + np.swapaxes(grad_u, 0, 1))
    for d in range(3):
        sigma[d, d] -= (2.0 / 3.0) * mu * div
    return sigma


def viscous_flux(velocity: np.ndarray, grad_u: np.ndarray, grad_T: np.ndarray,
                 axis: int, params: FluidParams) -> np.ndarray:
    """
    Viscous flux along one axis: (0, sigma_x.d, sigma_y.d, sigma_z.d, u.sigma_.d - Pi_d)
    with heat flux Pi = -kappa grad T.
    """
    sigma = stress_tensor(grad_u, params.mu)
    heat = -params.kappa * grad_T[axis]
    shape = (5,) + np.shape(heat)
    flux = np.zeros(shape)
    flux[MX] = sigma[0, axis]
    flux[MY] = sigma[1, axis]
    flux[MZ] = sigma[2, axis]
    flux[ENERGY] = (velocity[0] * sigma[0, axis] + velocity[1] * sigma[1, axis]
                    + velocity[2] * sigma[2, axis] - heat)
    return flux


def gravity_source(q: np.ndarray, params: FluidParams) -> np.ndarray:
    """(0, 0, 0, rho g, rho g w) with the signed vertical acceleration g."""
    source = np.zeros_like(q, dtype=np.float64)
    if params.g == 0.0:
        return source
    source[MZ] = q[RHO] * params.g
    source[ENERGY] = q[MZ] * params.g
    return source


def max_wave_speed(prim: PrimitiveState, axis: int) -> np.ndarray:
    """Spectral radius |u_n| + a of the Euler flux Jacobian."""
    un = (prim.u, prim.v, prim.w)[axis]
    return np.abs(un) + prim.a


def flux_eigenvalues(prim: PrimitiveState, axis: int) -> np.ndarray:
    un = (prim.u, prim.v, prim.w)[axis]
    a = prim.a
    return np.stack([un - a, un, un, un, un + a])


@dataclass(frozen=True)
class ReferenceScales:
    """
    Reference set for nondimensionalization. The far-field convention takes
    u_r as the sound speed of fluid 2, sqrt(gamma R T_inf2).
    """
    rho: float
    u: float
    T: float
    L: float
    mu: float

    @classmethod
    def far_field(cls, rho_inf: float, T_inf: float, L: float, mu: float,
                  gamma: float = 1.4, R: float = GAS_CONSTANT_AIR) -> "ReferenceScales":
        return cls(rho=rho_inf, u=math.sqrt(gamma * R * T_inf), T=T_inf, L=L, mu=mu)

    @property
    def time(self) -> float:
        return self.L / self.u

    @property
    def pressure(self) -> float:
        return self.rho * self.u ** 2

    @property
    def reynolds(self) -> float:
        return self.rho * self.u * self.L / self.mu

    def cp_tilde(self, cp: float) -> float:
        """T_r c_p / u_r^2."""
        return self.T * cp / self.u ** 2


def nondimensionalize(quantities: Dict[str, float], scales: ReferenceScales) -> Dict[str, float]:
    """
    Apply the reference scaling to any of: rho, u, v, w, x, y, z, t, p, T, E, e, mu, g.
    Unknown keys raise KeyError.
    """
    factors = {
        "rho": scales.rho,
        "u": scales.u, "v": scales.u, "w": scales.u,
        "x": scales.L, "y": scales.L, "z": scales.L,
        "t": scales.time,
        # with u_r^2 = gamma R T_r this gives p* = rho* T* / gamma
        "p": scales.pressure,
        "T": scales.T,
        "E": scales.u ** 2, "e": scales.u ** 2,
        "mu": scales.mu * scales.reynolds,
        "g": scales.u ** 2 / scales.L,
    }
    out = {}
    for key, value in quantities.items():
        if key not in factors:
            raise KeyError(f"no reference scale for '{key}'")
        out[key] = value / factors[key]
    return out
