import math
from fractions import Fraction

import numpy as np
import pytest

from curieweiss import ode
from curieweiss.errors import StepFailure
from curieweiss.oracles import reference_integrate


def test_tableau_consistency():
    # row sums of A equal the nodes; both weight rows sum to 1 (exactly)
    a_rows = [
        [],
        [Fraction(1, 5)],
        [Fraction(3, 40), Fraction(9, 40)],
        [Fraction(44, 45), Fraction(-56, 15), Fraction(32, 9)],
        [Fraction(19372, 6561), Fraction(-25360, 2187), Fraction(64448, 6561), Fraction(-212, 729)],
        [Fraction(9017, 3168), Fraction(-355, 33), Fraction(46732, 5247), Fraction(49, 176), Fraction(-5103, 18656)],
        [Fraction(35, 384), Fraction(0), Fraction(500, 1113), Fraction(125, 192), Fraction(-2187, 6784), Fraction(11, 84)],
    ]
    nodes = [Fraction(0), Fraction(1, 5), Fraction(3, 10), Fraction(4, 5), Fraction(8, 9), Fraction(1), Fraction(1)]
    for row, c in zip(a_rows, nodes):
        assert sum(row, Fraction(0)) == c
    b5 = [Fraction(35, 384), Fraction(0), Fraction(500, 1113), Fraction(125, 192),
          Fraction(-2187, 6784), Fraction(11, 84), Fraction(0)]
    b4 = [Fraction(5179, 57600), Fraction(0), Fraction(7571, 16695), Fraction(393, 640),
          Fraction(-92097, 339200), Fraction(187, 2100), Fraction(1, 40)]
    assert sum(b5, Fraction(0)) == 1
    assert sum(b4, Fraction(0)) == 1
    # the float tableau in the module matches the exact one
    for i, row in enumerate(a_rows):
        assert np.allclose(ode._A[i], [float(x) for x in row], rtol=0, atol=1e-16)
    assert np.allclose(ode._B5, [float(x) for x in b5], rtol=0, atol=1e-16)
    assert np.allclose(ode._B4, [float(x) for x in b4], rtol=0, atol=1e-16)


def test_exponential_to_1e12():
    sol = ode.integrate(lambda t, y: -y, 0.0, [1.0], 10.0, rtol=1e-12, atol=1e-14)
    assert abs(sol.states[-1, 0] - math.exp(-10.0)) < 1e-12


def test_linear_system_with_known_solution():
    a = np.array([[0.0, 1.0], [-1.0, 0.0]])
    sol = ode.integrate(lambda t, y: a @ y, 0.0, [1.0, 0.0], 2 * math.pi,
                        rtol=1e-12, atol=1e-14)
    assert np.allclose(sol.states[-1], [1.0, 0.0], atol=1e-10)


def test_complex_state():
    sol = ode.integrate(lambda t, y: 1j * y, 0.0, np.array([1.0 + 0j]), math.pi,
                        rtol=1e-12, atol=1e-14)
    assert abs(sol.states[-1, 0] - (-1.0 + 0j)) < 1e-10


def test_order_of_convergence():
    # tolerances loose enough that no step is rejected: every step equals
    # max_step, so halving it must shrink the global error ~ 2^-5
    errs = []
    for h in (0.1, 0.05):
        sol = ode.integrate(lambda t, y: np.array([y[0] * math.cos(t)]), 0.0, [1.0],
                            5.0, rtol=1e6, atol=1e6, max_step=h, first_step=h)
        errs.append(abs(sol.states[-1, 0] - math.exp(math.sin(5.0))))
    ratio = errs[0] / errs[1]
    assert 20.0 < ratio < 50.0


def test_dense_output_accuracy():
    # cubic Hermite between accepted steps: O(h^4), so bound the sampling
    # error through max_step rather than the integration tolerance
    sol = ode.integrate(lambda t, y: np.array([math.cos(t)]), 0.0, [0.0], 3.0,
                        rtol=1e-11, atol=1e-13, max_step=0.05)
    for t in np.linspace(0.1, 2.9, 17):
        assert abs(sol(t)[0] - math.sin(t)) < 1e-7
    # exact at accepted step endpoints
    for i in (1, len(sol.times) // 2, -1):
        t = float(sol.times[i])
        assert np.allclose(sol(t), sol.states[i], atol=1e-14)


def test_event_detection_bisection():
    sol = ode.integrate(lambda t, y: np.array([1.0]), 0.0, [0.0], 10.0,
                        events=[lambda t, y: y[0] - 0.7853981])
    assert sol.event_time == pytest.approx(0.7853981, abs=1e-9)
    assert sol.event_index == 0
    assert sol.times[-1] == pytest.approx(sol.event_time)


def test_event_not_triggered_runs_to_end():
    sol = ode.integrate(lambda t, y: np.array([1.0]), 0.0, [0.0], 1.0,
                        events=[lambda t, y: y[0] - 5.0])
    assert sol.event_time is None
    assert sol.times[-1] == pytest.approx(1.0)


def test_step_failure_on_badly_scaled_problem():
    def stiff_blowup(t, y):
        return np.array([1e60 * (1.0 if int(t * 1e6) % 2 else -1.0)])

    with pytest.raises(StepFailure):
        ode.integrate(stiff_blowup, 0.0, [1.0], 1.0, rtol=1e-12, atol=1e-14,
                      max_rejects=5)


def test_against_reference_integrator():
    def rhs(t, y):
        return np.array([y[1], -math.sin(y[0])])  # pendulum

    sol = ode.integrate(rhs, 0.0, [1.0, 0.0], 10.0, rtol=1e-10, atol=1e-12)
    _, states, sample = reference_integrate(rhs, [1.0, 0.0], (0.0, 10.0))
    for i in np.linspace(0, len(sol.times) - 1, 20).astype(int):
        t = sol.times[i]
        assert np.allclose(sol.states[i], sample(t), atol=1e-8)


def test_reference_integrator_calibration():
    _, states, _ = reference_integrate(lambda t, y: -y, [1.0], (0.0, 10.0))
    assert abs(states[-1][0] - math.exp(-10.0)) < 1e-12
