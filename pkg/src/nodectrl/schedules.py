"""Control schedules: weight and bias trajectories over a uniform time grid.

A schedule fixes the horizon [t0, T], the Euler step dt, and one of four weight
profiles:

  constant    w(t) = w            (scalar or d x d matrix)
  piecewise   w(t) = w_k on [t_k, t_{k+1})   (left-closed, nodal arrays)
  power       w(t) = omega * t**alpha        (scalar, d = 1)
  exp         w(t) = omega * e**(alpha * t)  (scalar, d = 1)

The bias may be constant, nodal (one value per grid point), or absent (zero).
Nodal arrays carry n_steps + 1 entries; Euler steps read the left endpoint,
quadrature reads every node.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

_GRID_TOL = 1e-12


@dataclass(frozen=True)
class ControlSchedule:
    t0: float
    T: float
    dt: float
    mode: str = "constant"
    w: object = 0.0          # constant weight: scalar or (d, d) array
    b: object = None         # constant bias, nodal (n+1, d) array, or None
    omega: float = 0.0       # power/exp profiles
    alpha: float = 0.0
    w_nodes: object = None   # piecewise weights, nodal
    d: int = field(default=1)

    def __post_init__(self):
        if not self.T > self.t0:
            raise ConfigurationError(f"need T > t0, got [{self.t0}, {self.T}]")
        if not self.dt > 0:
            raise ConfigurationError(f"need dt > 0, got {self.dt}")
        n = round((self.T - self.t0) / self.dt)
        if n < 1 or abs(n * self.dt - (self.T - self.t0)) > _GRID_TOL * max(1.0, self.T - self.t0):
            raise ConfigurationError(
                f"dt={self.dt} does not divide the horizon [{self.t0}, {self.T}]"
            )
        if self.mode not in ("constant", "piecewise", "power", "exp"):
            raise ConfigurationError(f"unknown schedule mode {self.mode!r}")
        if self.mode == "constant":
            wm = np.asarray(self.w, dtype=float)
            if wm.ndim == 0:
                object.__setattr__(self, "w", float(wm))
            else:
                if wm.ndim != 2 or wm.shape[0] != wm.shape[1]:
                    raise ConfigurationError(f"constant weight must be square, got {wm.shape}")
                object.__setattr__(self, "w", wm)
                object.__setattr__(self, "d", wm.shape[0])
        elif self.mode == "piecewise":
            wn = np.asarray(self.w_nodes, dtype=float)
            if wn.shape[0] != n + 1:
                raise ConfigurationError(
                    f"piecewise schedule needs {n + 1} nodal weights, got {wn.shape[0]}"
                )

    # -- grid ---------------------------------------------------------------

    @property
    def n_steps(self):
        return round((self.T - self.t0) / self.dt)

    def times(self):
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    def _index(self, t):
        k = int(round((t - self.t0) / self.dt))
        if k < 0 or k > self.n_steps:
            raise ConfigurationError(f"t={t} outside [{self.t0}, {self.T}]")
        return k

    # -- evaluation ----------------------------------------------------------

    def weight_at(self, t):
        """Weight value at time t (scalar modes return floats)."""
        if self.mode == "constant":
            return self.w
        if self.mode == "power":
            return self.omega * t ** self.alpha
        if self.mode == "exp":
            return self.omega * np.exp(self.alpha * t)
        return np.asarray(self.w_nodes)[self._index(t)]

    def bias_at(self, t):
        if self.b is None:
            return 0.0
        b = np.asarray(self.b, dtype=float)
        if b.ndim == 0:
            return float(b)
        if b.ndim == 1:
            # d=1 nodal trajectory vs constant d-vector
            return b[self._index(t)] if self.d == 1 else b
        return b[self._index(t)]

    def weight_values(self):
        """Nodal weight values, shape (n_steps + 1,) for scalar modes."""
        if self.mode == "piecewise":
            return np.asarray(self.w_nodes, dtype=float)
        if self.mode == "constant":
            wm = np.asarray(self.w, dtype=float)
            if wm.ndim == 0:
                return np.full(self.n_steps + 1, float(wm))
            return np.broadcast_to(wm, (self.n_steps + 1,) + wm.shape).copy()
        t = self.times()
        if self.mode == "power":
            return self.omega * t ** self.alpha
        return self.omega * np.exp(self.alpha * t)

    def bias_values(self, d=None):
        """Nodal bias values, shape (n_steps + 1, d)."""
        d = d or self.d
        n1 = self.n_steps + 1
        if self.b is None:
            return np.zeros((n1, d))
        b = np.asarray(self.b, dtype=float)
        if b.ndim == 0:
            return np.full((n1, d), float(b))
        if b.ndim == 1 and b.shape[0] == d:
            return np.broadcast_to(b, (n1, d)).copy()
        if b.ndim == 1 and d == 1:
            if b.shape[0] != n1:
                raise ConfigurationError(f"nodal bias needs {n1} entries, got {b.shape[0]}")
            return b.reshape(n1, 1)
        if b.shape != (n1, d):
            raise ConfigurationError(f"nodal bias shape {b.shape} != {(n1, d)}")
        return b

    def with_bias(self, b):
        """Same grid and weights, different bias."""
        return ControlSchedule(
            t0=self.t0, T=self.T, dt=self.dt, mode=self.mode, w=self.w, b=b,
            omega=self.omega, alpha=self.alpha, w_nodes=self.w_nodes,
        )


def constant_schedule(w, b, t0, T, dt):
    return ControlSchedule(t0=t0, T=T, dt=dt, mode="constant", w=w, b=b)


def power_schedule(omega, alpha, t0, T, dt, b=None):
    if alpha < 0:
        raise ConfigurationError(f"power profile needs alpha >= 0, got {alpha}")
    return ControlSchedule(t0=t0, T=T, dt=dt, mode="power", omega=omega, alpha=alpha, b=b)


def exp_schedule(omega, alpha, t0, T, dt, b=None):
    return ControlSchedule(t0=t0, T=T, dt=dt, mode="exp", omega=omega, alpha=alpha, b=b)
