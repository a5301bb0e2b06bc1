"""
Second-order cell-centered finite volume right-hand side.

Per axis: central-difference gradients, linear reconstruction to the faces,
local Lax-Friedrichs inviscid flux, compact viscous flux from common face
states, then the flux divergence plus gravity. Region callbacks (fast, buffer,
slow) evaluate z-slabs of the same kernel so the split reproduces the
monolithic operator exactly.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from mprk.solver.config import NUMERICS
from mprk.solver.coupling import InterfaceExchange, InterfaceFluxes, exchange_interface_data, interface_face_flux
from mprk.solver.domain import BoundarySpec, CoupledProblem, StructuredGrid
from mprk.solver.physics import (
    ENERGY, MX, MZ, RHO, FluidParams, PrimitiveState, conserved_to_primitive,
    gravity_source, viscous_flux,
)

logger = logging.getLogger(__name__)

REGIONS = ("F", "B", "S")
HALO_LAYERS = NUMERICS["seam_stencil_layers"]


@dataclass
class GradientField:
    """Cell gradients: dq[axis] (5, ...), grad_u[i, j] = du_i/dx_j, grad_T[j]."""
    dq: List[np.ndarray]
    grad_u: np.ndarray
    grad_T: np.ndarray


@dataclass
class FaceFluxSet:
    """Numerical flux F* = F_inviscid - F_viscous on faces 0..n of each active axis."""
    fluxes: List[Optional[np.ndarray]]


class CellTraces(NamedTuple):
    velocity: np.ndarray
    grad_u: np.ndarray
    T: np.ndarray
    grad_T: np.ndarray


class RegionStages(NamedTuple):
    fast: np.ndarray
    buffer: np.ndarray
    slow: np.ndarray


# Array helpers -----------------------------------------------------------------

def _pos(arr: np.ndarray, axis: int) -> int:
    # spatial axes are the trailing (z, y, x)
    return arr.ndim - 1 - axis


def _take(arr: np.ndarray, axis: int, sl) -> np.ndarray:
    idx = [slice(None)] * arr.ndim
    idx[_pos(arr, axis)] = sl
    return arr[tuple(idx)]


def _pad(arr: np.ndarray, axis: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return np.concatenate([lo, arr, hi], axis=_pos(arr, axis))


def _mirror(q: np.ndarray) -> np.ndarray:
    """No-slip reflection: every momentum component negated."""
    ghost = q.copy()
    ghost[MX:MZ + 1] = -ghost[MX:MZ + 1]
    return ghost


def difference(f: np.ndarray, axis: int, h: float, periodic: bool) -> np.ndarray:
    """Central differences inside, one-sided at non-periodic ends, zero if n < 2."""
    pos = _pos(f, axis)
    n = f.shape[pos]
    if n < 2:
        return np.zeros_like(f)
    if periodic:
        return (np.roll(f, -1, axis=pos) - np.roll(f, 1, axis=pos)) / (2.0 * h)
    g = np.empty_like(f)
    inner = [slice(None)] * f.ndim
    inner[pos] = slice(1, n - 1)
    g[tuple(inner)] = (_take(f, axis, slice(2, None)) - _take(f, axis, slice(None, -2))) / (2.0 * h)
    first = [slice(None)] * f.ndim
    first[pos] = slice(0, 1)
    g[tuple(first)] = (_take(f, axis, slice(1, 2)) - _take(f, axis, slice(0, 1))) / h
    last = [slice(None)] * f.ndim
    last[pos] = slice(n - 1, n)
    g[tuple(last)] = (_take(f, axis, slice(n - 1, n)) - _take(f, axis, slice(n - 2, n - 1))) / h
    return g


# Gradients and reconstruction --------------------------------------------------

def ls_gradients(q: np.ndarray, grid: StructuredGrid, bc: BoundarySpec,
                 prim: PrimitiveState) -> GradientField:
    """
    Gradients of conserved variables, velocity and temperature. On a uniform
    grid the least-squares stencil reduces to central differences.
    """
    stacked = np.concatenate([q, prim.u[None], prim.v[None], prim.w[None], prim.T[None]])
    dq: List[np.ndarray] = []
    grad_u = np.zeros((3, 3) + q.shape[1:])
    grad_T = np.zeros((3,) + q.shape[1:])
    for axis in range(3):
        if grid.counts[axis] < 2:
            dq.append(np.zeros_like(q))
            continue
        g = difference(stacked, axis, grid.spacing[axis], bc.is_periodic(axis))
        dq.append(g[:5])
        grad_u[:, axis] = g[5:8]
        grad_T[axis] = g[8]
    return GradientField(dq, grad_u, grad_T)


def apply_boundary_conditions(cells: np.ndarray, axis: int, bc: BoundarySpec,
                              reflect=_mirror) -> Tuple[np.ndarray, np.ndarray]:
    """
    One ghost layer on each side of `axis`. Walls reflect the adjacent cell,
    periodic sides wrap, interface and cut sides copy the adjacent cell as a
    placeholder whose face flux is replaced later.
    """
    n = cells.shape[_pos(cells, axis)]
    first = _take(cells, axis, slice(0, 1))
    last = _take(cells, axis, slice(n - 1, n))
    if bc.is_periodic(axis):
        return last.copy(), first.copy()
    ghosts = []
    for side, adjacent in ((0, first), (1, last)):
        if bc.kind(axis, side) == "wall":
            ghosts.append(reflect(adjacent))
        else:
            ghosts.append(adjacent.copy())
    return ghosts[0], ghosts[1]


def reconstruct_face_states(q: np.ndarray, grads: GradientField, grid: StructuredGrid,
                            bc: BoundarySpec, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Left/right states on faces 0..n along `axis`:
      q_l(i+1/2) = q_i + g_i h/2,  q_r(i+1/2) = q_{i+1} - g_{i+1} h/2
    Outside states at boundary faces come from the ghost rule of that side.
    """
    half = 0.5 * grid.spacing[axis]
    to_right = q + grads.dq[axis] * half
    to_left = q - grads.dq[axis] * half
    n = grid.counts[axis]

    if bc.is_periodic(axis):
        left_lo = _take(to_right, axis, slice(n - 1, n))
        right_hi = _take(to_left, axis, slice(0, 1))
    else:
        # outside trace mirrors the inside face state
        left_lo, _ = apply_boundary_conditions(to_left, axis, bc)
        _, right_hi = apply_boundary_conditions(to_right, axis, bc)

    q_left = np.concatenate([left_lo, to_right], axis=_pos(q, axis))
    q_right = np.concatenate([to_left, right_hi], axis=_pos(q, axis))
    return q_left, q_right


# Numerical fluxes --------------------------------------------------------------

def _unit_normal(normal: Union[int, Sequence[float]]) -> Tuple[float, float, float]:
    if isinstance(normal, (int, np.integer)):
        n = [0.0, 0.0, 0.0]
        n[int(normal)] = 1.0
        return tuple(n)
    return tuple(float(c) for c in normal)


def _normal_velocity(prim: PrimitiveState, n: Tuple[float, float, float]) -> np.ndarray:
    un = prim.u * n[0]
    if n[1] != 0.0:
        un = un + prim.v * n[1]
    if n[2] != 0.0:
        un = un + prim.w * n[2]
    return un


def _normal_flux(q: np.ndarray, prim: PrimitiveState, n: Tuple[float, float, float]) -> np.ndarray:
    un = _normal_velocity(prim, n)
    flux = q * un
    for d in range(3):
        if n[d] != 0.0:
            flux[MX + d] += prim.p * n[d]
    flux[ENERGY] += prim.p * un
    return flux


def roe_average(q_l: np.ndarray, q_r: np.ndarray, params: FluidParams,
                prim_l: Optional[PrimitiveState] = None,
                prim_r: Optional[PrimitiveState] = None) -> PrimitiveState:
    """sqrt(rho)-weighted velocity and enthalpy; a^2 = (gamma-1)(H - |u|^2/2)."""
    prim_l = prim_l or conserved_to_primitive(q_l, params)
    prim_r = prim_r or conserved_to_primitive(q_r, params)
    sl, sr = np.sqrt(prim_l.rho), np.sqrt(prim_r.rho)
    wsum = sl + sr
    rho = sl * sr
    u = (sl * prim_l.u + sr * prim_r.u) / wsum
    v = (sl * prim_l.v + sr * prim_r.v) / wsum
    w = (sl * prim_l.w + sr * prim_r.w) / wsum
    H = (sl * prim_l.H + sr * prim_r.H) / wsum
    a2 = np.maximum((params.gamma - 1.0) * (H - 0.5 * (u * u + v * v + w * w)), 0.0)
    p = rho * a2 / params.gamma
    return PrimitiveState(rho, u, v, w, p, a2, params.gamma)


def lax_friedrichs_flux(q_l: np.ndarray, q_r: np.ndarray, normal, params: FluidParams,
                        domain: Optional[int] = None) -> np.ndarray:
    """
    1/2 (F(q_l) + F(q_r)).n + lambda/2 (q_l - q_r), lambda the largest
    |u.n| + a over the left, right and Roe states. `normal` is an axis index
    or a unit vector.
    """
    n = _unit_normal(normal)
    prim_l = conserved_to_primitive(q_l, params, domain=domain)
    prim_r = conserved_to_primitive(q_r, params, domain=domain)
    roe = roe_average(q_l, q_r, params, prim_l, prim_r)
    lam = np.maximum.reduce([
        np.abs(_normal_velocity(prim_l, n)) + prim_l.a,
        np.abs(_normal_velocity(prim_r, n)) + prim_r.a,
        np.abs(_normal_velocity(roe, n)) + roe.a,
    ])
    central = 0.5 * (_normal_flux(q_l, prim_l, n) + _normal_flux(q_r, prim_r, n))
    return central + 0.5 * lam * (q_l - q_r)


def viscous_face_flux(left: CellTraces, right: CellTraces, axis: int, h: float,
                      params: FluidParams) -> np.ndarray:
    """
    Common face states: mean velocity, compact normal gradient across the face,
    tangential gradients averaged from the two cells.
    """
    velocity = 0.5 * (left.velocity + right.velocity)
    grad_u = 0.5 * (left.grad_u + right.grad_u)
    grad_u[:, axis] = (right.velocity - left.velocity) / h
    grad_T = 0.5 * (left.grad_T + right.grad_T)
    grad_T[axis] = (right.T - left.T) / h
    return viscous_flux(velocity, grad_u, grad_T, axis, params)


def _reflect_traces(traces: np.ndarray) -> np.ndarray:
    # rows: u, v, w, T, du_i/dx_j (9), dT/dx_j (3)
    ghost = traces.copy()
    ghost[0:3] = -ghost[0:3]
    ghost[4:13] = -ghost[4:13]
    return ghost


def _cell_traces(prim: PrimitiveState, grads: GradientField) -> np.ndarray:
    shape = prim.u.shape
    return np.concatenate([
        np.stack([prim.u, prim.v, prim.w, prim.T]),
        grads.grad_u.reshape((9,) + shape),
        grads.grad_T,
    ])


def _unpack_traces(t: np.ndarray) -> CellTraces:
    shape = t.shape[1:]
    return CellTraces(t[0:3], t[4:13].reshape((3, 3) + shape), t[3], t[13:16])


def compute_face_fluxes(q: np.ndarray, grid: StructuredGrid, params: FluidParams,
                        bc: BoundarySpec, interface: Optional[InterfaceFluxes] = None,
                        domain: Optional[int] = None) -> FaceFluxSet:
    prim = conserved_to_primitive(q, params, domain=domain)
    grads = ls_gradients(q, grid, bc, prim)
    viscous = params.mu > 0.0 or params.kappa > 0.0
    traces = _cell_traces(prim, grads) if viscous else None

    fluxes: List[Optional[np.ndarray]] = [None, None, None]
    for axis in grid.active_axes():
        n, h = grid.counts[axis], grid.spacing[axis]
        q_left, q_right = reconstruct_face_states(q, grads, grid, bc, axis)
        flux = lax_friedrichs_flux(q_left, q_right, axis, params, domain=domain)

        if viscous:
            lo, hi = apply_boundary_conditions(traces, axis, bc, reflect=_reflect_traces)
            padded = _pad(traces, axis, lo, hi)
            left = _unpack_traces(_take(padded, axis, slice(0, n + 1)))
            right = _unpack_traces(_take(padded, axis, slice(1, n + 2)))
            flux -= viscous_face_flux(left, right, axis, h, params)

        for side, face in ((0, 0), (1, n)):
            kind = bc.kind(axis, side)
            face_idx = [slice(None)] * flux.ndim
            face_idx[_pos(flux, axis)] = slice(face, face + 1)
            face_idx = tuple(face_idx)
            if kind == "cut":
                flux[face_idx] = 0.0
            elif kind == "interface":
                if axis != 2 or interface is None:
                    raise ValueError("interface boundary needs z-axis interface fluxes")
                inside = q_right[face_idx] if side == 0 else q_left[face_idx]
                p_face = conserved_to_primitive(inside, params, domain=domain).p
                flux[face_idx] = interface_face_flux(interface, p_face[0])[:, None]
        fluxes[axis] = flux
    return FaceFluxSet(fluxes)


def flux_divergence(q: np.ndarray, face_fluxes: FaceFluxSet, grid: StructuredGrid,
                    params: FluidParams) -> np.ndarray:
    """dq/dt = -sum_d (F_{i+1/2} - F_{i-1/2}) / h_d + gravity."""
    tendency = gravity_source(q, params)
    for axis in grid.active_axes():
        flux = face_fluxes.fluxes[axis]
        n = grid.counts[axis]
        tendency -= (_take(flux, axis, slice(1, n + 1)) - _take(flux, axis, slice(0, n))) / grid.spacing[axis]
    return tendency


def domain_tendency(q: np.ndarray, grid: StructuredGrid, params: FluidParams,
                    bc: BoundarySpec, interface: Optional[InterfaceFluxes] = None,
                    domain: Optional[int] = None) -> np.ndarray:
    face_fluxes = compute_face_fluxes(q, grid, params, bc, interface, domain)
    return flux_divergence(q, face_fluxes, grid, params)


def _interface_tendency(q: np.ndarray, grid: StructuredGrid, params: FluidParams,
                        bc: BoundarySpec, interface: InterfaceFluxes, domain: int,
                        applied: Optional[Dict[str, np.ndarray]], key: str) -> np.ndarray:
    """domain_tendency that also hands back the flux it put on the interface face."""
    face_fluxes = compute_face_fluxes(q, grid, params, bc, interface, domain)
    if applied is not None:
        z_flux = face_fluxes.fluxes[2]
        applied[key] = z_flux[:, -1] if domain == 1 else z_flux[:, 0]
    return flux_divergence(q, face_fluxes, grid, params)


# Region callbacks --------------------------------------------------------------

def interface_exchange(problem: CoupledProblem, q_fast: np.ndarray, q_buffer: np.ndarray,
                       stage: int = 0, stage_buffer: Optional[int] = None) -> InterfaceExchange:
    return exchange_interface_data(
        q_fast[:, -1], q_buffer[:, 0], problem.fluid1, problem.fluid2,
        problem.grid1.dz, problem.grid2.dz, exchange_v=problem.is_3d,
        stage_fast=stage, stage_buffer=stage if stage_buffer is None else stage_buffer,
    )


def region_size(problem: CoupledProblem, region: str) -> int:
    n_slow, n_buffer, n_fast, _ = problem.element_counts()
    return {"F": n_fast, "B": n_buffer, "S": n_slow}[region]


def rhs_region(problem: CoupledProblem, region: str, stages: RegionStages,
               exchange: Optional[InterfaceExchange] = None, ledger=None,
               applied: Optional[Dict[str, np.ndarray]] = None) -> np.ndarray:
    """
    Tendency of one region's elements. F needs the buffer (through the
    interface exchange), B needs F and S, S needs B. F and B write the flux
    they applied on the interface face into `applied` under their region key.
    """
    if region not in REGIONS:
        raise ValueError(f"unknown region '{region}'")
    part = problem.partition
    nb, ns = part.buffer_layers, part.slow_layers
    grid2, bc2 = problem.grid2, problem.bc2

    if region in ("F", "B") and exchange is None:
        exchange = interface_exchange(problem, stages.fast, stages.buffer)

    if region == "F":
        result = _interface_tendency(stages.fast, problem.grid1, problem.fluid1, problem.bc1,
                                     exchange.fluxes, 1, applied, "F")
    elif region == "B":
        halo = stages.slow[:, :HALO_LAYERS]
        slab = np.concatenate([stages.buffer, halo], axis=1)
        top = "wall" if halo.shape[1] == ns else "cut"
        bc = bc2.with_z("interface", top)
        result = _interface_tendency(slab, grid2.layers(0, slab.shape[1]), problem.fluid2, bc,
                                     exchange.fluxes, 2, applied, "B")[:, :nb]
    else:
        if ns == 0:
            result = np.zeros((5, 0) + grid2.shape[1:])
        else:
            halo = stages.buffer[:, max(nb - HALO_LAYERS, 0):]
            nh = halo.shape[1]
            slab = np.concatenate([halo, stages.slow], axis=1)
            bc = bc2.with_z("cut", "wall")
            result = domain_tendency(slab, grid2.layers(nb - nh, part.nz2), problem.fluid2, bc,
                                     domain=2)[:, nh:]

    if ledger is not None:
        ledger.record(region, region_size(problem, region))
    return result


def rhs_monolithic(problem: CoupledProblem, q1: np.ndarray, q2: np.ndarray,
                   ledger=None, exchange: Optional[InterfaceExchange] = None,
                   applied: Optional[Dict[str, np.ndarray]] = None,
                   pool=None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Both domains in one evaluation, Omega_2 without the region split. With a
    pool the two domain tendencies run concurrently.
    """
    exchange = exchange or interface_exchange(problem, q1, q2)
    jobs = (
        lambda: _interface_tendency(q1, problem.grid1, problem.fluid1, problem.bc1,
                                    exchange.fluxes, 1, applied, "F"),
        lambda: _interface_tendency(q2, problem.grid2, problem.fluid2, problem.bc2,
                                    exchange.fluxes, 2, applied, "B"),
    )
    if pool is None:
        r1, r2 = (job() for job in jobs)
    else:
        r1, r2 = [future.result() for future in [pool.submit(job) for job in jobs]]
    if ledger is not None:
        for region in REGIONS:
            ledger.record(region, region_size(problem, region))
    return r1, r2


def total_mass_rate(problem: CoupledProblem, r1: np.ndarray, r2: np.ndarray) -> float:
    """sum |K| d(rho)/dt over both domains."""
    return float(np.sum(r1[RHO]) * problem.grid1.volume + np.sum(r2[RHO]) * problem.grid2.volume)
