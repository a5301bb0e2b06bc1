import math

import numpy as np
import pytest

from mprk.analytics.metrics import (
    HISTORY_COLUMNS, ConservationHistory, courant_number, l2_error, l2_error_coupled,
    total_energy, total_mass,
)
from mprk.solver.domain import ConservedField, CoupledState, StructuredGrid
from mprk.solver.physics import RHO, FluidParams, primitive_to_conserved

GRID = StructuredGrid(4, 1, 2, 0.5, 1.0, 0.25)
AIR = FluidParams(gamma=1.4)


def _uniform(rho=1.0, p=1.0 / 1.4, u=0.0, grid=GRID):
    data = primitive_to_conserved(np.full(grid.shape, rho), u, 0.0, 0.0, p, 1.4)
    return ConservedField(grid, data)


def test_totals_are_volume_weighted():
    state = CoupledState(_uniform(1.0), _uniform(2.0))
    assert total_mass(state) == pytest.approx(3.0 * 8 * GRID.volume)
    assert total_energy(state) == pytest.approx(2 * 8 * GRID.volume * (1.0 / 1.4) / 0.4)


def test_history_tracks_drift():
    history = ConservationHistory()
    state = CoupledState(_uniform(1.0), _uniform(1.0))
    history.append(state)
    state.field2.data[RHO, 0, 0, 0] += 0.1
    state.t = 0.5
    history.append(state)
    frame = history.to_frame()
    assert list(frame.columns) == HISTORY_COLUMNS
    assert frame["t"].tolist() == [0.0, 0.5]
    assert frame["mass_drift"].iloc[-1] == pytest.approx(0.1 * GRID.volume)
    assert history.max_relative_mass_drift() == pytest.approx(0.1 / 16)
    assert history.max_relative_domain_drift() == pytest.approx(0.1 / 8)


def test_empty_history():
    history = ConservationHistory()
    assert history.max_relative_mass_drift() == 0.0
    assert len(history.to_frame()) == 0


def test_l2_error_per_variable():
    a = _uniform(1.0)
    b = a.copy()
    b.data[RHO] += 1.0
    errors = l2_error(a, b)
    assert errors["rho"] == pytest.approx(math.sqrt(8 * GRID.volume))
    assert errors["rhoE"] == 0.0
    assert errors["momentum"] == 0.0
    assert l2_error(a, a)["rho"] == 0.0


def test_l2_error_needs_matching_grids():
    other = StructuredGrid(4, 1, 3, 0.5, 1.0, 0.25)
    with pytest.raises(ValueError):
        l2_error(_uniform(), _uniform(grid=other))


def test_coupled_error_combines_domains():
    a = CoupledState(_uniform(1.0), _uniform(1.0))
    b = a.copy()
    b.field1.data[RHO] += 1.0
    b.field2.data[RHO] += 1.0
    assert l2_error_coupled(a, b)["rho"] == pytest.approx(math.sqrt(16 * GRID.volume))


def test_courant_number_of_rest_gas():
    field = _uniform(1.0, p=1.0 / 1.4)
    # sound speed 1; active axes x and z
    assert courant_number(field, AIR, 0.1) == pytest.approx(0.1 * (1 / 0.5 + 1 / 0.25))
    moving = _uniform(1.0, p=1.0 / 1.4, u=0.5)
    assert courant_number(moving, AIR, 0.1) == pytest.approx(0.1 * (1.5 / 0.5 + 1 / 0.25))
