import math

import numpy as np
import pytest

from singshock.errors import BlowUp, NoConvergence, SingularJacobian, StepLimitExceeded
from singshock.inner import RHO3, beta_field
from singshock.numerics import EventSpec, IntegratorConfig, fd_jacobian, integrate, quad, solve_root

from oracles import rk4, sigma_of_beta


def decay(_t, y):
    return -y


def osc(_t, y):
    return np.array([y[1], -y[0]])


def test_exponential_decay():
    cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)
    tr = integrate(decay, [1.0], (0.0, 1.0), cfg)
    assert abs(tr.y_final[0] - math.exp(-1)) < 1e-10 * math.exp(-1) * 10


def test_oscillator_event():
    ev = EventSpec(lambda t, y: y[0], direction=-1, terminal=True, name="zero")
    tr = integrate(osc, [1.0, 0.0], (0.0, 10.0), IntegratorConfig(), [ev])
    assert tr.status == "event:zero"
    assert abs(tr.t_final - math.pi / 2) < 1e-8
    assert abs(tr.y_final[0]) < 1e-10


def test_event_direction_filter():
    ev = EventSpec(lambda t, y: y[0], direction=+1, name="up")
    tr = integrate(osc, [1.0, 0.0], (0.0, 7.0), IntegratorConfig(), [ev])
    assert [round(e.t, 8) for e in tr.events] == [round(1.5 * math.pi, 8)]


def test_event_independent_of_steps():
    ev = EventSpec(lambda t, y: y[0] - 0.3, name="hit")
    a = integrate(osc, [1.0, 0.0], (0.0, 6.0), IntegratorConfig(), [ev])
    b = integrate(osc, [1.0, 0.0], (0.0, 6.0), IntegratorConfig(max_step=0.05), [ev])
    assert len(a.events) == len(b.events) == 2
    for x, y in zip(a.events, b.events):
        assert abs(x.t - y.t) < 1e-8


def test_beta_saturation_against_rk4():
    f = lambda t, y: np.array([beta_field(y[0])])  # noqa: E731
    tr = integrate(f, [0.0], (0.0, -20.0), IntegratorConfig())
    assert abs(tr.y_final[0] - RHO3) < 1e-10
    coarse = rk4(f, [0.0], 0.0, -20.0, 4000)[0]
    fine = rk4(f, [0.0], 0.0, -20.0, 8000)[0]
    assert abs(fine - coarse) < 1e-11
    assert abs(tr.y_final[0] - fine) < 1e-11


def test_beta_at_minus_ten_matches_closed_form():
    # the gap to rho3 at sigma = -10 is 2.8e-6, set by the saturation rate 1.297
    f = lambda t, y: np.array([beta_field(y[0])])  # noqa: E731
    b = integrate(f, [0.0], (0.0, -10.0), IntegratorConfig()).y_final[0]
    assert abs(sigma_of_beta(b) + 10.0) * abs(beta_field(b)) < 1e-10
    assert 2.7e-6 < RHO3 - b < 2.9e-6


def test_tolerance_halving_does_not_hurt():
    exact = math.cos(5.0)
    errs = []
    for tol in (1e-8, 5e-9, 2.5e-9):
        tr = integrate(osc, [1.0, 0.0], (0.0, 5.0), IntegratorConfig(rel_tol=tol, abs_tol=tol))
        errs.append(abs(tr.y_final[0] - exact))
    assert errs[1] <= errs[0] * 1.0001 + 1e-15
    assert errs[2] <= errs[1] * 1.0001 + 1e-15


def test_reversed_field_reproduces_start():
    fwd = integrate(osc, [1.0, 0.0], (0.0, 3.0), IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13))
    back = integrate(osc, fwd.y_final, (3.0, 0.0), IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13))
    assert np.allclose(back.y_final, [1.0, 0.0], atol=1e-10)


def test_dense_output_and_refinement():
    tr = integrate(osc, [1.0, 0.0], (0.0, 3.0), IntegratorConfig())
    assert abs(tr(1.234)[0] - math.cos(1.234)) < 1e-9
    t, y = tr.refined(4)
    assert len(t) == 4 * (len(tr.times) - 1) + 1
    assert np.all(np.isin(tr.times, t))
    assert np.allclose(y[:, 0], np.cos(t), atol=1e-9)


def test_step_limit_and_blowup():
    with pytest.raises(StepLimitExceeded):
        integrate(osc, [1.0, 0.0], (0.0, 100.0), IntegratorConfig(max_steps=3))
    with pytest.raises(BlowUp):
        integrate(lambda t, y: y * y, [1.0], (0.0, 2.0), IntegratorConfig(blowup_norm=1e6))


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(max_steps=0)


def test_quad_examples():
    assert quad(lambda x: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-14)
    assert quad(lambda x: math.exp(-x), 0.0, math.inf) == pytest.approx(1.0, abs=1e-10)
    v = quad(lambda x: math.exp(-x), 0.0, math.inf, tail=lambda c: math.exp(-c), cut=30.0)
    assert v == pytest.approx(1.0, abs=1e-10)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_quad_reports_failure():
    with pytest.raises(NoConvergence):
        quad(lambda x: 1.0 / math.sqrt(abs(x - 0.3)) * math.sin(1 / (abs(x - 0.3) + 1e-9)), 0.0, 1.0, tol=1e-14)


def test_solve_root_examples():
    assert solve_root(lambda x: x * x - 4.0, 3.0) == pytest.approx(2.0, abs=1e-10)
    sol = solve_root(lambda z: np.array([z[0] + z[1] - 1.0, z[0] - z[1]]), np.array([1.0, 1.0]))
    assert np.allclose(sol, [0.5, 0.5], atol=1e-10)


def test_solve_root_singular():
    with pytest.raises(SingularJacobian):
        solve_root(lambda z: np.array([z[0] + z[1] - 1.0, 2 * z[0] + 2 * z[1] - 2.5]), np.array([0.0, 0.0]))


def test_solve_root_no_root():
    with pytest.raises(NoConvergence):
        solve_root(lambda x: x * x + 1.0, 0.5, max_iter=30)


def test_fd_jacobian_accuracy():
    F = lambda x: np.array([np.sin(x[0]) * x[1], x[0] ** 3])  # noqa: E731
    x = np.array([0.7, 1.3])
    J = fd_jacobian(F, x)
    exact = np.array([[np.cos(0.7) * 1.3, np.sin(0.7)], [3 * 0.49, 0.0]])
    assert np.allclose(J, exact, atol=1e-8)
