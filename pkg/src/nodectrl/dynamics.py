"""Discrete residual step, explicit Euler integration, and the training loss.

The layer map is x(k+1) = A x(k) + dt * act(w x(k) + b); with A = I it is the
explicit Euler discretization of the continuous dynamics x' = act(w(t) x + b(t)).
"""

import numpy as np

from .activations import get_activation
from .errors import ConfigurationError, NumericError


def resnet_step(x, w, b, dt, act, A=None):
    """One residual layer: A x + dt * act(w x + b).

    A defaults to the identity, which makes the layer the Euler step of the
    continuous-depth network.
    """
    if dt <= 0:
        raise ConfigurationError(f"need dt > 0, got {dt}")
    act = get_activation(act)
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    pre = w * x + b if w.ndim == 0 else w @ x + b
    base = x if A is None else np.asarray(A, dtype=float) @ x
    try:
        out = base + dt * act(pre)
    except ValueError as exc:
        raise ConfigurationError(f"dimension mismatch in resnet_step: {exc}") from exc
    if not np.all(np.isfinite(out)):
        bad = np.flatnonzero(~np.isfinite(np.atleast_1d(out)))
        raise NumericError(f"non-finite state component(s) {bad.tolist()} after step")
    return out


def integrate_ode(x0, ctrl, act):
    """Explicit Euler trajectory of x' = act(w(t) x + b(t)).

    Returns states at every grid time, shape (n_steps + 1,) + shape(x0).
    The first entry equals x0 exactly.
    """
    act = get_activation(act)
    x0 = np.asarray(x0, dtype=float)
    n = ctrl.n_steps
    dt = ctrl.dt
    traj = np.empty((n + 1,) + x0.shape)
    traj[0] = x0
    x = x0
    t = ctrl.t0
    for k in range(n):
        t = ctrl.t0 + k * dt
        w = ctrl.weight_at(t)
        b = ctrl.bias_at(t)
        pre = w * x + b if np.ndim(w) == 0 else np.asarray(w) @ x + b
        x = x + dt * act(pre)
        if not np.all(np.isfinite(x)):
            raise NumericError(f"non-finite state at t={t + dt:.6g}")
        traj[k + 1] = x
    return traj


def integrate_ensemble(states, ctrl, act):
    """Final states of M decoupled particles under one shared schedule.

    Bitwise identical to looping integrate_ode over particles: the d = 1 path
    uses element-wise array operations (each lane is the scalar computation),
    the d > 1 path is an explicit per-particle loop.
    """
    act = get_activation(act)
    states = np.asarray(states, dtype=float)
    if states.ndim == 2 and states.shape[1] == 1:
        finals = integrate_ensemble(states[:, 0], ctrl, act)
        return finals.reshape(-1, 1)
    if states.ndim == 1:
        # d = 1: element-wise ops act per lane, no reductions
        x = states.copy()
        dt = ctrl.dt
        for k in range(ctrl.n_steps):
            t = ctrl.t0 + k * dt
            x = x + dt * act(ctrl.weight_at(t) * x + ctrl.bias_at(t))
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.isfinite(x))[0])
            raise NumericError(f"non-finite state for particle {bad}")
        return x
    finals = np.empty_like(states)
    for i in range(states.shape[0]):
        try:
            finals[i] = integrate_ode(states[i], ctrl, act)[-1]
        except NumericError as exc:
            raise NumericError(f"particle {i}: {exc}") from exc
    return finals


def loss_micro(finals, targets, ell="square"):
    """Empirical training loss (1/M) sum_i l(x_i(T) - y_i).

    ell="square" uses the squared Euclidean norm, ell="abs" the norm itself.
    """
    if ell not in ("square", "abs"):
        raise ConfigurationError(f"unknown loss kind {ell!r}")
    finals = np.atleast_1d(np.asarray(finals, dtype=float))
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    if finals.shape != targets.shape:
        raise ConfigurationError(f"shape mismatch {finals.shape} vs {targets.shape}")
    diff = finals - targets
    if diff.ndim == 1:
        per = diff * diff if ell == "square" else np.abs(diff)
    elif ell == "square":
        per = (diff * diff).sum(axis=1)
    else:
        per = np.sqrt((diff * diff).sum(axis=1))
    return float(per.mean())
