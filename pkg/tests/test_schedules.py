import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from nodectrl.errors import ConfigurationError
from nodectrl.schedules import ControlSchedule, constant_schedule, exp_schedule, power_schedule


def test_grid_basics():
    s = constant_schedule(0.5, 0.1, 0.0, 1.0, 0.01)
    assert s.n_steps == 100
    t = s.times()
    assert t.shape == (101,)
    assert t[0] == 0.0
    # non-accumulating grid: t_k = t0 + k*dt
    assert t[50] == 0.0 + 50 * 0.01


def test_horizon_validation():
    with pytest.raises(ConfigurationError):
        constant_schedule(0.0, None, 1.0, 1.0, 0.01)
    with pytest.raises(ConfigurationError):
        constant_schedule(0.0, None, 0.0, 1.0, -0.1)
    with pytest.raises(ConfigurationError):
        # dt does not divide the horizon
        constant_schedule(0.0, None, 0.0, 1.0, 0.3)


def test_constant_weight_and_bias():
    s = constant_schedule(-3.0, 0.25, 0.0, 1.0, 0.1)
    assert s.weight_at(0.0) == -3.0
    assert s.weight_at(0.7) == -3.0
    assert s.bias_at(0.3) == 0.25
    assert s.bias_at(0.3) == s.bias_at(0.9)


def test_matrix_weight_sets_dimension():
    w = np.array([[0.0, 1.0], [-1.0, 0.0]])
    s = constant_schedule(w, None, 0.0, 1.0, 0.1)
    assert s.d == 2
    assert_array_equal(s.weight_at(0.5), w)
    with pytest.raises(ConfigurationError):
        constant_schedule(np.ones((2, 3)), None, 0.0, 1.0, 0.1)


def test_power_profile():
    s = power_schedule(-3.0, 4.0, 0.0, 1.0, 0.01)
    assert s.weight_at(0.0) == 0.0
    assert_allclose(s.weight_at(0.5), -3.0 * 0.5 ** 4)
    w = s.weight_values()
    assert w.shape == (101,)
    assert_allclose(w[-1], -3.0)


def test_power_alpha_zero_is_constant_weight():
    s = power_schedule(-3.0, 0.0, 0.0, 1.0, 0.01)
    assert_allclose(s.weight_values(), -3.0)


def test_power_negative_alpha_rejected():
    with pytest.raises(ConfigurationError):
        power_schedule(1.0, -1.0, 0.0, 1.0, 0.1)


def test_exp_profile():
    s = exp_schedule(-3.0, 4.0, 0.0, 1.0, 0.01)
    assert_allclose(s.weight_at(0.0), -3.0)
    assert_allclose(s.weight_at(1.0), -3.0 * np.e ** 4)


def test_piecewise_weight_nodal():
    n = 10
    wn = np.linspace(0.0, 1.0, n + 1)
    s = ControlSchedule(t0=0.0, T=1.0, dt=0.1, mode="piecewise", w_nodes=wn)
    assert s.weight_at(0.0) == wn[0]
    assert s.weight_at(0.5) == wn[5]
    with pytest.raises(ConfigurationError):
        ControlSchedule(t0=0.0, T=1.0, dt=0.1, mode="piecewise", w_nodes=wn[:-1])


def test_nodal_bias_lookup():
    b = np.arange(11.0)
    s = ControlSchedule(t0=0.0, T=1.0, dt=0.1, mode="constant", w=0.0, b=b)
    assert s.bias_at(0.0) == 0.0
    assert s.bias_at(0.3) == 3.0
    vals = s.bias_values()
    assert vals.shape == (11, 1)


def test_bias_values_validation():
    s = constant_schedule(0.0, None, 0.0, 1.0, 0.1)
    assert_array_equal(s.bias_values(), np.zeros((11, 1)))
    with pytest.raises(ConfigurationError):
        ControlSchedule(t0=0.0, T=1.0, dt=0.1, mode="constant", w=0.0,
                        b=np.arange(7.0)).bias_values()


def test_with_bias_keeps_grid():
    s = power_schedule(-3.0, 4.0, 0.0, 1.0, 0.01)
    s2 = s.with_bias(0.7)
    assert s2.bias_at(0.5) == 0.7
    assert s2.mode == "power" and s2.omega == s.omega and s2.dt == s.dt


def test_unknown_mode():
    with pytest.raises(ConfigurationError):
        ControlSchedule(t0=0.0, T=1.0, dt=0.1, mode="spline")


def test_time_outside_grid():
    s = constant_schedule(0.0, np.arange(11.0), 0.0, 1.0, 0.1)
    with pytest.raises(ConfigurationError):
        s.bias_at(2.0)
