"""Scalar activation functions, applied component-wise by the integrators.

All maps accept floats or numpy arrays and preserve dtype, so they can run in
extended precision when the caller needs it.
"""

import numpy as np

from .errors import ConfigurationError


def identity(x):
    return np.asanyarray(x)


def relu(x):
    x = np.asanyarray(x)
    return np.maximum(x, x.dtype.type(0))


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asanyarray(x)))


def tanh(x):
    return np.tanh(x)


def gcu(x):
    """Growing cosine unit x*cos(x)."""
    x = np.asanyarray(x)
    return x * np.cos(x)


ACTIVATIONS = {
    "identity": identity,
    "relu": relu,
    "sigmoid": sigmoid,
    "tanh": tanh,
    "gcu": gcu,
}


def get_activation(name):
    """Look up an activation by name or pass a callable through."""
    if callable(name):
        return name
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown activation {name!r}; choose from {sorted(ACTIVATIONS)}"
        ) from None
