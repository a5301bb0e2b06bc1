from fractions import Fraction

import numpy as np
import pytest

from mprk.analytics.metrics import ConservationHistory, conservation_history
from mprk.analytics.speedup import SpeedupInputs, speedup_fraction
from mprk.solver.butcher import base_rk2, generate_mprk
from mprk.solver.integrator import (
    InterfaceLedger, RhsEvalLedger, Scheme, StepDiagnostics, integrate, mprk_step,
    stage_combination, step_plan,
)
from mprk.solver.physics import ENERGY, MX, NonPhysicalState


def test_step_plan_shortens_the_last_step():
    plan = step_plan(0.0, 1.0, 0.3)
    assert len(plan) == 4
    assert plan[:3] == [0.3, 0.3, 0.3]
    assert plan[-1] == pytest.approx(0.1)


def test_step_plan_snaps_round_off():
    plan = step_plan(0.0, 2.5, 0.025)
    assert len(plan) == 100
    assert all(h == 0.025 for h in plan)


def test_empty_plan_when_already_at_end():
    assert step_plan(1.0, 1.0, 0.1) == []


@pytest.mark.parametrize("t0, t_end, dt", [(0.0, 1.0, 0.0), (0.0, 1.0, -0.1), (1.0, 0.5, 0.1)])
def test_invalid_step_plans(t0, t_end, dt):
    with pytest.raises(ValueError):
        step_plan(t0, t_end, dt)


def test_stage_combination_skips_zero_weights():
    q = np.ones(3)
    r = np.array([1.0, 2.0, 3.0])
    out = stage_combination(q, 0.5, [0.0, 2.0], [None, r])
    np.testing.assert_array_equal(out, q + 0.5 * (2.0 * r))
    same = stage_combination(q, 0.5, [0.0, 0.0], [None, None])
    np.testing.assert_array_equal(same, q)
    assert same is not q


def test_unknown_scheme():
    with pytest.raises(ValueError):
        Scheme("euler")
    assert Scheme("mprk", 4).label == "MPRK2(m=4)"
    assert Scheme("rk4").label == "RK4"


def test_m1_reproduces_single_rate_rk2(small_problem):
    problem, state = small_problem("manufactured")
    dt = 0.05
    a = integrate(problem, state.copy(), Scheme("mprk", 1), dt, 10 * dt).state
    b = integrate(problem, state.copy(), Scheme("rk2"), dt, 10 * dt).state
    assert np.max(np.abs(a.field1.data - b.field1.data)) <= 1e-13
    assert np.max(np.abs(a.field2.data - b.field2.data)) <= 1e-13


@pytest.mark.parametrize("m", [2, 4, 8])
def test_multirate_steps_conserve_mass(small_problem, m):
    problem, state = small_problem("khi2d")
    history = ConservationHistory()
    result = integrate(problem, state, Scheme("mprk", m), 0.25, 10 * 0.25,
                       hooks=[conservation_history(history)])
    assert len(history) == 11
    assert history.max_relative_mass_drift() <= 1e-12
    assert history.max_relative_domain_drift() <= 1e-12
    np.testing.assert_array_equal(result.diagnostics.interface.imbalance, 0.0)


def test_interface_bookkeeping_is_nonzero_but_balanced(small_problem):
    problem, state = small_problem("manufactured")
    result = integrate(problem, state, Scheme("mprk", 4), 0.05, 0.2)
    interface = result.diagnostics.interface
    assert np.any(interface.side1 != 0.0)
    np.testing.assert_array_equal(interface.side1 + interface.side2, 0.0)


def test_interface_ledger_books_each_side_from_its_own_flux():
    top1 = np.zeros((5, 1, 4))
    top1[MX] = -0.5
    top1[ENERGY] = -2.0
    ledger = InterfaceLedger()
    ledger.add(top1, top1, 0.5, 0.5, 0.1, 2.0)
    np.testing.assert_allclose(ledger.side1, [0.2, 0.0, 0.8])
    np.testing.assert_array_equal(ledger.imbalance, 0.0)

    # buffer applying a different flux than the fast side shows up
    bottom2 = top1.copy()
    bottom2[MX] *= 1.5
    ledger.add(top1, bottom2, 0.5, 0.5, 0.1, 2.0)
    assert ledger.imbalance[0] == pytest.approx(-0.1)
    assert ledger.imbalance[2] == 0.0


def test_single_rate_run_books_a_balanced_interface(small_problem):
    problem, state = small_problem("manufactured")
    result = integrate(problem, state, Scheme("rk2"), 0.05, 0.1)
    interface = result.diagnostics.interface
    assert np.any(interface.side2 != 0.0)
    np.testing.assert_array_equal(interface.imbalance, 0.0)


def test_ledger_counts_per_region(small_problem):
    problem, state = small_problem("manufactured")
    result = integrate(problem, state, Scheme("mprk", 4), 0.05, 3 * 0.05)
    n_slow, n_buffer, n_fast, _ = problem.element_counts()
    assert result.ledger.evaluations == {"S": 6, "B": 24, "F": 24}
    assert result.ledger.elements == {"S": 6 * n_slow, "B": 24 * n_buffer, "F": 24 * n_fast}


def test_ledger_ratio_is_the_speedup_model(small_problem):
    problem, state = small_problem("manufactured")
    m, dt = 4, 0.05
    mprk = integrate(problem, state.copy(), Scheme("mprk", m), dt, dt)
    single = integrate(problem, state.copy(), Scheme("rk2"), dt / m, dt)
    assert single.steps == m
    counts = problem.element_counts()
    inputs = SpeedupInputs(m, *counts)
    ratio = Fraction(single.ledger.total_elements, mprk.ledger.total_elements)
    assert ratio == speedup_fraction(inputs)


def test_threads_do_not_change_the_result(small_problem):
    problem, state = small_problem("manufactured")
    serial = integrate(problem, state.copy(), Scheme("mprk", 2), 0.05, 0.1, threads=1)
    threaded = integrate(problem, state.copy(), Scheme("mprk", 2), 0.05, 0.1, threads=3)
    np.testing.assert_array_equal(serial.state.field1.data, threaded.state.field1.data)
    np.testing.assert_array_equal(serial.state.field2.data, threaded.state.field2.data)
    assert serial.ledger.evaluations == threaded.ledger.evaluations


def test_threads_do_not_change_single_rate_runs(small_problem):
    problem, state = small_problem("manufactured")
    serial = integrate(problem, state.copy(), Scheme("rk2"), 0.05, 0.1, threads=1)
    threaded = integrate(problem, state.copy(), Scheme("rk2"), 0.05, 0.1, threads=2)
    np.testing.assert_array_equal(serial.state.field1.data, threaded.state.field1.data)
    np.testing.assert_array_equal(serial.state.field2.data, threaded.state.field2.data)
    np.testing.assert_array_equal(threaded.diagnostics.interface.imbalance, 0.0)


def test_clock_lands_on_end_time(small_problem):
    problem, state = small_problem("manufactured")
    result = integrate(problem, state, Scheme("mprk", 2), 0.03, 0.1)
    assert result.steps == 4
    assert result.state.t == 0.1
    assert result.dt_sequence[-1] == pytest.approx(0.01)


def test_hooks_follow_the_cadence(small_problem):
    problem, state = small_problem("manufactured")
    seen = []
    integrate(problem, state, Scheme("mprk", 2), 0.05, 5 * 0.05,
              hooks=[lambda step, s: seen.append(step)], cadence=2)
    assert seen == [0, 2, 4, 5]


def test_adequate_buffer_reproduces_repeated_stages(small_problem):
    problem, state = small_problem("manufactured", buffer_layers=6)
    tabs = generate_mprk(base_rk2(), 8)
    diagnostics = StepDiagnostics()
    for _ in range(2):
        state = mprk_step(problem, state, tabs, 0.05, check_buffer=True, diagnostics=diagnostics)
    assert diagnostics.seam_deviation == 0.0


def test_thin_buffer_is_detected(small_problem):
    problem, state = small_problem("manufactured", buffer_layers=1)
    tabs = generate_mprk(base_rk2(), 8)
    diagnostics = StepDiagnostics()
    mprk_step(problem, state, tabs, 0.05, check_buffer=True, diagnostics=diagnostics)
    assert diagnostics.seam_deviation > 1e-12


def test_nonphysical_state_reports_step_and_stage(small_problem):
    problem, state = small_problem("manufactured")
    state.field2.data[ENERGY, 0, 0, 3] = 0.0
    with pytest.raises(NonPhysicalState) as info:
        integrate(problem, state, Scheme("mprk", 2), 0.05, 0.1)
    assert info.value.step == 1
    assert info.value.stage == 0
    assert info.value.domain == 2


def test_single_rate_ledger_books_every_region_per_stage(small_problem):
    problem, state = small_problem("manufactured")
    ledger = RhsEvalLedger()
    integrate(problem, state, Scheme("rk4"), 0.05, 0.1, ledger=ledger)
    assert ledger.evaluations == {"F": 8, "B": 8, "S": 8}
