"""
Rigid-lid interface between the two fluids.

Momentum and heat cross z = 0 through linear bulk laws driven by the jumps of
horizontal velocity and temperature between the adjacent cells. No mass or
advective flux crosses; the normal momentum row only sees each side's pressure.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from mprk.solver.physics import (
    ENERGY, MX, MY, MZ, FluidParams, PrimitiveState, conserved_to_primitive,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BulkCoefficients:
    b_u: float
    b_v: float
    b_T: float


class InterfaceFluxes(NamedTuple):
    """Per interface face (ny, nx) values shared by both sides."""
    sigma_xz: np.ndarray
    sigma_yz: np.ndarray
    Pi_z: np.ndarray
    work: np.ndarray


class WallStates(NamedTuple):
    u: np.ndarray
    v: np.ndarray
    T: np.ndarray


class InterfaceExchange(NamedTuple):
    """What each side's RHS needs at the interface for one stage."""
    stage: int
    fluxes: InterfaceFluxes
    wall1: WallStates
    wall2: WallStates


def _harmonic(c1: float, c2: float, dz1: float, dz2: float) -> float:
    denom = dz2 * c1 + dz1 * c2
    if denom == 0.0:
        return 0.0
    return 2.0 * c1 * c2 / denom


def bulk_coefficients(mu1: float, mu2: float, kappa1: float, kappa2: float,
                      dz1: float, dz2: float) -> BulkCoefficients:
    """b_u = b_v = 2 mu1 mu2 / (dz2 mu1 + dz1 mu2); b_T the same with kappa."""
    b_u = _harmonic(mu1, mu2, dz1, dz2)
    return BulkCoefficients(b_u=b_u, b_v=b_u, b_T=_harmonic(kappa1, kappa2, dz1, dz2))


def interface_fluxes(prim1: PrimitiveState, prim2: PrimitiveState,
                     coeffs: BulkCoefficients, exchange_v: bool = True,
                     wall1: Optional[WallStates] = None,
                     wall2: Optional[WallStates] = None) -> InterfaceFluxes:
    """
    Bulk fluxes from the cells adjacent to the interface.
    prim1 is the top layer of Omega_1, prim2 the bottom layer of Omega_2.
    The work term uses the mean of the two sides' wall velocities when given.
    """
    sigma_xz = coeffs.b_u * (prim2.u - prim1.u)
    if exchange_v:
        sigma_yz = coeffs.b_v * (prim2.v - prim1.v)
    else:
        sigma_yz = np.zeros_like(sigma_xz)
    Pi_z = -coeffs.b_T * (prim2.T - prim1.T)

    if wall1 is not None and wall2 is not None:
        u_hat = 0.5 * (wall1.u + wall2.u)
        v_hat = 0.5 * (wall1.v + wall2.v)
    else:
        u_hat = 0.5 * (prim1.u + prim2.u)
        v_hat = 0.5 * (prim1.v + prim2.v) if exchange_v else np.zeros_like(u_hat)
    work = u_hat * sigma_xz + v_hat * sigma_yz
    return InterfaceFluxes(sigma_xz, sigma_yz, Pi_z, work)


def wall_states(prim: PrimitiveState, fluxes: InterfaceFluxes, side: int,
                dz: float, mu: float, kappa: float,
                exchange_v: bool = True) -> WallStates:
    """
    Interface values reconstructed from one side:
      side 1: u_w = u1 + sigma dz1 / (2 mu1), T_w = T1 - Pi dz1 / (2 kappa1)
      side 2: u_w = u2 - sigma dz2 / (2 mu2), T_w = T2 + Pi dz2 / (2 kappa2)
    """
    if side not in (1, 2):
        raise ValueError(f"side must be 1 or 2, got {side}")
    sign = 1.0 if side == 1 else -1.0

    def shifted(value, flux, coeff):
        if coeff == 0.0:
            return value.copy()
        return value + sign * flux * dz / (2.0 * coeff)

    u = shifted(prim.u, fluxes.sigma_xz, mu)
    v = shifted(prim.v, fluxes.sigma_yz, mu) if exchange_v else np.zeros_like(u)
    T = shifted(prim.T, -fluxes.Pi_z, kappa)
    return WallStates(u, v, T)


def exchange_interface_data(q1_top: np.ndarray, q2_bottom: np.ndarray,
                            fluid1: FluidParams, fluid2: FluidParams,
                            dz1: float, dz2: float, exchange_v: bool,
                            stage_fast: int = 0, stage_buffer: int = 0) -> InterfaceExchange:
    """
    Interface data for one stage from the fast region's top layer and the
    buffer region's bottom layer. Only (u, T), or (u, v, T) in 3D, are used;
    the normal velocity never enters.
    """
    if stage_fast != stage_buffer:
        raise ValueError(
            f"interface exchange between different stages (fast {stage_fast}, buffer {stage_buffer})"
        )
    prim1 = conserved_to_primitive(q1_top, fluid1, domain=1)
    prim2 = conserved_to_primitive(q2_bottom, fluid2, domain=2)
    coeffs = bulk_coefficients(fluid1.mu, fluid2.mu, fluid1.kappa, fluid2.kappa, dz1, dz2)

    base = interface_fluxes(prim1, prim2, coeffs, exchange_v=exchange_v)
    wall1 = wall_states(prim1, base, 1, dz1, fluid1.mu, fluid1.kappa, exchange_v)
    wall2 = wall_states(prim2, base, 2, dz2, fluid2.mu, fluid2.kappa, exchange_v)
    fluxes = interface_fluxes(prim1, prim2, coeffs, exchange_v, wall1, wall2)
    return InterfaceExchange(stage_fast, fluxes, wall1, wall2)


def interface_face_flux(fluxes: InterfaceFluxes, p_face: np.ndarray) -> np.ndarray:
    """
    Total numerical flux through the interface in +z, shape (5, ny, nx):
    (0, -sigma_xz, -sigma_yz, p_own, -(work - Pi_z)).
    """
    flux = np.zeros((5,) + np.shape(p_face))
    flux[MX] = -fluxes.sigma_xz
    flux[MY] = -fluxes.sigma_yz
    flux[MZ] = p_face
    flux[ENERGY] = -(fluxes.work - fluxes.Pi_z)
    return flux


def interface_transfer(fluxes: InterfaceFluxes, face_area: float) -> Tuple[float, float, float]:
    """Rate of x-momentum, y-momentum and energy entering Omega_1 through the interface."""
    return (
        float(np.sum(fluxes.sigma_xz) * face_area),
        float(np.sum(fluxes.sigma_yz) * face_area),
        float(np.sum(fluxes.work - fluxes.Pi_z) * face_area),
    )
