import math

import numpy as np
import pytest

from mprk.solver.physics import (
    ENERGY, MX, MY, MZ, RHO, FluidParams, NonPhysicalState, ReferenceScales,
    conserved_to_primitive, eos_pressure, flux_eigenvalues, gravity_source,
    inviscid_flux, nondimensionalize, primitive_to_conserved, stress_tensor,
    viscous_flux,
)

AIR = FluidParams(gamma=1.4, mu=1e-3, Pr=0.72, g=-0.5)


def _state(rho=1.2, u=0.3, v=-0.1, w=0.2, p=0.8):
    return primitive_to_conserved(np.array([rho]), u, v, w, p, AIR.gamma)


def test_conserved_primitive_round_trip():
    prim = conserved_to_primitive(_state(), AIR)
    assert prim.rho[0] == pytest.approx(1.2)
    assert prim.u[0] == pytest.approx(0.3)
    assert prim.v[0] == pytest.approx(-0.1)
    assert prim.w[0] == pytest.approx(0.2)
    assert prim.p[0] == pytest.approx(0.8)


def test_normalized_equation_of_state():
    prim = conserved_to_primitive(_state(), AIR)
    assert prim.T[0] == pytest.approx(AIR.gamma * 0.8 / 1.2)
    assert eos_pressure(prim.rho, prim.T, AIR.gamma)[0] == pytest.approx(0.8)
    assert prim.a[0] == pytest.approx(math.sqrt(1.4 * 0.8 / 1.2))


def test_negative_density_names_the_element():
    q = np.stack([_state()[:, 0]] * 3, axis=1)
    q[RHO, 2] = -1.0
    with pytest.raises(NonPhysicalState) as info:
        conserved_to_primitive(q, AIR, domain=2)
    assert info.value.domain == 2
    assert info.value.element == (2,)
    assert "domain=2" in str(info.value)


def test_negative_pressure_is_detected():
    q = _state()
    q[ENERGY] = 0.0
    with pytest.raises(NonPhysicalState, match="pressure"):
        conserved_to_primitive(q, AIR)


def test_inviscid_flux_at_rest_is_pressure_only():
    q = _state(u=0.0, v=0.0, w=0.0)
    for axis in range(3):
        flux = inviscid_flux(q, axis, AIR)
        expected = np.zeros(5)
        expected[MX + axis] = 0.8
        np.testing.assert_allclose(flux[:, 0], expected, atol=1e-15)


def test_inviscid_flux_mass_row_is_momentum():
    q = _state()
    np.testing.assert_allclose(inviscid_flux(q, 0, AIR)[RHO], q[MX])
    np.testing.assert_allclose(inviscid_flux(q, 2, AIR)[RHO], q[MZ])


def test_stress_tensor_is_symmetric_and_traceless():
    grad_u = np.arange(9.0).reshape(3, 3)
    sigma = stress_tensor(grad_u, 2.0)
    np.testing.assert_allclose(sigma, sigma.T)
    assert np.trace(sigma) == pytest.approx(0.0, abs=1e-12)


def test_viscous_flux_of_pure_shear():
    grad_u = np.zeros((3, 3))
    grad_u[0, 2] = 1.0
    velocity = np.array([0.5, 0.0, 0.0])
    flux = viscous_flux(velocity, grad_u, np.zeros(3), 2, AIR)
    assert flux[MX] == pytest.approx(AIR.mu)
    assert flux[MY] == 0.0
    assert flux[MZ] == pytest.approx(0.0)
    assert flux[ENERGY] == pytest.approx(0.5 * AIR.mu)


def test_viscous_flux_carries_heat_down_the_gradient():
    grad_T = np.array([0.0, 0.0, 1.0])
    flux = viscous_flux(np.zeros(3), np.zeros((3, 3)), grad_T, 2, AIR)
    assert flux[ENERGY] == pytest.approx(AIR.kappa)


def test_gravity_source_uses_signed_acceleration():
    q = _state()
    src = gravity_source(q, AIR)
    np.testing.assert_allclose(src[:MZ], 0.0)
    assert src[MZ][0] == pytest.approx(1.2 * AIR.g)
    assert src[ENERGY][0] == pytest.approx(q[MZ][0] * AIR.g)


def test_fluid_params_derived_coefficients():
    assert AIR.cp == pytest.approx(2.5)
    assert AIR.kappa == pytest.approx(2.5 * 1e-3 / 0.72)
    with pytest.raises(ValueError):
        FluidParams(gamma=1.0)
    with pytest.raises(ValueError):
        FluidParams(mu=-1.0)


def test_flux_eigenvalues_are_ordered():
    prim = conserved_to_primitive(_state(), AIR)
    lam = flux_eigenvalues(prim, 0)[:, 0]
    assert list(lam) == sorted(lam)
    assert lam[4] - lam[0] == pytest.approx(2.0 * prim.a[0])


def test_far_field_scales_give_normalized_gas_law():
    scales = ReferenceScales.far_field(rho_inf=1.2, T_inf=288.0, L=100.0, mu=1.8e-5)
    assert scales.u == pytest.approx(math.sqrt(1.4 * 287.05 * 288.0))
    rho, T = 1.1, 300.0
    p = rho * 287.05 * T
    nd = nondimensionalize({"rho": rho, "T": T, "p": p}, scales)
    assert nd["p"] == pytest.approx(nd["rho"] * nd["T"] / 1.4)


def test_viscosity_scales_to_inverse_reynolds():
    scales = ReferenceScales(rho=1.0, u=340.0, T=288.0, L=10.0, mu=1.8e-5)
    nd = nondimensionalize({"mu": 1.8e-5, "t": scales.time}, scales)
    assert nd["mu"] == pytest.approx(1.0 / scales.reynolds)
    assert nd["t"] == pytest.approx(1.0)


def test_unknown_quantity_has_no_scale():
    scales = ReferenceScales(rho=1.0, u=1.0, T=1.0, L=1.0, mu=1.0)
    with pytest.raises(KeyError):
        nondimensionalize({"q": 1.0}, scales)
