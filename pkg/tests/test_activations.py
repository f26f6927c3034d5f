import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from nodectrl.activations import ACTIVATIONS, gcu, get_activation, identity, relu, sigmoid, tanh
from nodectrl.errors import ConfigurationError


def test_identity_passthrough():
    x = np.array([-2.0, 0.0, 3.5])
    assert_array_equal(identity(x), x)


def test_relu_table():
    assert_array_equal(relu(np.array([-1.0, 0.0, 2.0])), [0.0, 0.0, 2.0])


def test_relu_scalar():
    assert relu(np.float64(-3.0)) == 0.0
    assert relu(np.float64(1.5)) == 1.5


def test_sigmoid_midpoint_and_range():
    assert sigmoid(np.float64(0.0)) == 0.5
    x = np.linspace(-50, 50, 101)
    s = sigmoid(x)
    assert np.all((s >= 0) & (s <= 1))
    assert_allclose(sigmoid(np.array([700.0])), [1.0])  # no overflow warning path


def test_tanh_odd():
    x = np.array([-1.0, -0.3, 0.0, 0.3, 1.0])
    assert_allclose(tanh(-x), -tanh(x), rtol=0, atol=0)


def test_gcu_values():
    # x * cos(x): zero at 0, equals x at multiples of 2*pi
    assert gcu(np.float64(0.0)) == 0.0
    assert_allclose(gcu(np.array([np.pi])), [-np.pi])
    x = np.array([0.5, 1.0, 2.0])
    assert_allclose(gcu(x), x * np.cos(x))


@pytest.mark.parametrize("name", sorted(ACTIVATIONS))
def test_dtype_preserved(name):
    # longdouble must survive every activation (surrogate internals rely on it)
    f = ACTIVATIONS[name]
    for dtype in (np.float32, np.float64, np.longdouble):
        out = f(np.ones(3, dtype=dtype))
        assert out.dtype == dtype


def test_get_activation_by_name_and_callable():
    assert get_activation("relu") is relu
    f = lambda x: x
    assert get_activation(f) is f


def test_get_activation_unknown():
    with pytest.raises(ConfigurationError):
        get_activation("swish")
