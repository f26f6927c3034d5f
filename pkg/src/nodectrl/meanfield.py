"""1D transport of the data distribution and the mean-field training loss.

The density obeys d/dt mu + d/dx (act(w x + b) mu) = 0, discretized with a
first-order conservative upwind finite-volume scheme on cell averages rho_j:

    rho_j^{n+1} = rho_j^n - (dt/dx) (F_{j+1/2} - F_{j-1/2})
    F_{j+1/2}   = v+ rho_j + v- rho_{j+1},  v = act(w x_{j+1/2} + b)

with v+ = max(v,0), v- = min(v,0). Interface velocities are evaluated at cell
edges; boundaries admit zero inflow and free outflow. Under the CFL condition
dt max|v| / dx <= 1 the update is a convex combination, so cell averages stay
nonnegative and the discrete mass changes only by boundary flux.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .activations import get_activation
from .errors import CFLError, ConfigurationError
from .dynamics import integrate_ensemble


@dataclass
class Density1D:
    """Cell-averaged nonnegative density on a uniform grid over [xmin, xmax]."""

    xmin: float
    xmax: float
    dx: float
    cells: np.ndarray

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=float)
        nc = round((self.xmax - self.xmin) / self.dx)
        if nc != self.cells.shape[0]:
            raise ConfigurationError(
                f"{self.cells.shape[0]} cells but the interval holds {nc} of width {self.dx}"
            )

    @property
    def n_cells(self):
        return self.cells.shape[0]

    @property
    def mass(self):
        return float(self.cells.sum() * self.dx)

    def edges(self):
        return self.xmin + self.dx * np.arange(self.n_cells + 1)

    def centers(self):
        return self.xmin + self.dx * (np.arange(self.n_cells) + 0.5)

    def quantiles(self, n):
        """Deterministic inverse-CDF points at levels (k + 0.5)/n, sorted."""
        q = (np.arange(n) + 0.5) / n
        return self._inverse_cdf(q)

    def _inverse_cdf(self, u):
        masses = self.cells * self.dx
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        total = cum[-1]
        if total <= 0:
            raise ConfigurationError("cannot sample from a zero-mass density")
        cum = cum / total
        u = np.asarray(u, dtype=float)
        idx = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, self.n_cells - 1)
        width = cum[idx + 1] - cum[idx]
        frac = np.where(width > 0, (u - cum[idx]) / np.where(width > 0, width, 1.0), 0.5)
        return self.edges()[idx] + frac * self.dx

    def sample(self, n, rng):
        """n inverse-CDF draws with uniform sub-cell placement (unsorted)."""
        return self._inverse_cdf(rng.random(n))


def gaussian_density(mean, spread, xmin, xmax, dx, convention="variance"):
    """Gaussian initial datum as exact CDF differences per cell, renormalized
    to unit mass. `spread` is the variance by default; convention="std" reads
    it as the standard deviation."""
    if convention == "variance":
        sd = math.sqrt(spread)
    elif convention == "std":
        sd = float(spread)
    else:
        raise ConfigurationError(f"unknown Gaussian convention {convention!r}")
    nc = round((xmax - xmin) / dx)
    edges = xmin + dx * np.arange(nc + 1)
    cdf = np.array([0.5 * (1.0 + math.erf((e - mean) / (sd * math.sqrt(2)))) for e in edges])
    cells = np.diff(cdf) / dx
    cells = cells / (cells.sum() * dx)
    return Density1D(xmin=xmin, xmax=xmax, dx=dx, cells=cells)


def uniform_density(xmin, xmax, dx):
    nc = round((xmax - xmin) / dx)
    return Density1D(xmin=xmin, xmax=xmax, dx=dx, cells=np.full(nc, 1.0 / (xmax - xmin)))


@dataclass
class SampleSet:
    """Uniformly weighted scalar samples, kept sorted ascending."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=float).reshape(-1))
        if pts.size < 1:
            raise ConfigurationError("empty sample set")
        self.points = pts

    @property
    def n(self):
        return self.points.shape[0]

    def quantiles(self, n):
        """Empirical inverse CDF at levels (k + 0.5)/n (step-function quantiles)."""
        q = (np.arange(n) + 0.5) / n
        idx = np.minimum((q * self.n).astype(int), self.n - 1)
        return self.points[idx]

    def sample(self, n, rng):
        """Resample with replacement (unsorted)."""
        return self.points[rng.integers(0, self.n, n)]


def velocity_field(x, w, b, act):
    """Transport velocity act(w x + b)."""
    return get_activation(act)(w * np.asarray(x, dtype=float) + b)


def fv_step(rho, w, b, act, dt, return_fluxes=False):
    """One conservative upwind step. Raises CFLError (naming the admissible dt)
    when dt max|v|/dx > 1. With return_fluxes=True also returns the boundary
    fluxes (F_left, F_right) actually applied, for mass-balance audits."""
    v = velocity_field(rho.edges(), w, b, act)
    vmax = float(np.abs(v).max())
    if dt * vmax / rho.dx > 1.0 + 1e-12:
        raise CFLError(
            f"dt={dt} violates CFL; need dt <= {rho.dx / vmax:.6e} for max speed {vmax:.6e}",
            admissible_dt=rho.dx / vmax,
        )
    vp = np.maximum(v, 0.0)
    vm = np.minimum(v, 0.0)
    cells = rho.cells
    F = np.empty(rho.n_cells + 1)
    F[1:-1] = vp[1:-1] * cells[:-1] + vm[1:-1] * cells[1:]
    F[0] = vm[0] * cells[0]        # zero inflow, free outflow
    F[-1] = vp[-1] * cells[-1]
    new = cells - (dt / rho.dx) * (F[1:] - F[:-1])
    out = Density1D(xmin=rho.xmin, xmax=rho.xmax, dx=rho.dx, cells=new)
    if return_fluxes:
        return out, (float(F[0]), float(F[-1]))
    return out


def solve_meanfield(rho0, ctrl, act):
    """March fv_step over the schedule grid (weights and bias read at the left
    endpoint of each step, matching the particle integrator)."""
    rho = rho0
    dt = ctrl.dt
    for k in range(ctrl.n_steps):
        t = ctrl.t0 + k * dt
        rho = fv_step(rho, ctrl.weight_at(t), ctrl.bias_at(t), act, dt)
    return rho


def push_forward_particles(n, rho0, ctrl, act, rng):
    """Empirical push-forward: n inverse-CDF samples of rho0 transported by the
    particle integrator; returns the sorted finals. The d = 1 ensemble path is
    bitwise identical to integrating each sample on its own."""
    if n < 1:
        raise ConfigurationError(f"need n >= 1, got {n}")
    x0 = rho0.sample(n, rng)
    finals = integrate_ensemble(x0, ctrl, act)
    return SampleSet(points=finals)


def wasserstein1(a, b, n=10000):
    """Exact 1D Wasserstein-1 distance between uniformly weighted samples:
    mean absolute difference of sorted order statistics.

    Unequal sizes (or Density1D inputs) are resampled deterministically to a
    common count via empirical quantiles at levels (k + 0.5)/m, m being the
    larger sample count (n for densities)."""
    if not isinstance(a, (SampleSet, Density1D)):
        a = SampleSet(points=a)
    if not isinstance(b, (SampleSet, Density1D)):
        b = SampleSet(points=b)
    counts = [s.n for s in (a, b) if isinstance(s, SampleSet)]
    m = max(counts) if counts else n
    if len(counts) == 2 and counts[0] == counts[1]:
        pa, pb = a.points, b.points
    else:
        pa = a.points if isinstance(a, SampleSet) and a.n == m else a.quantiles(m)
        pb = b.points if isinstance(b, SampleSet) and b.n == m else b.quantiles(m)
    return float(np.abs(pa - pb).mean())


def loss_meanfield(mu, nu, ell="abs", n_samples=100, repeats=100, seed_key=(0,)):
    """Monte-Carlo estimate of the double integral int int l(x - y) dnu(y) dmu(x).

    Each repeat draws n_samples fresh points from mu and nu with its own
    derived stream default_rng([*seed_key, repeat]) and averages l over all
    pairs; returns (mean over repeats, standard error over repeats). Repeats
    are therefore reproducible independently of execution order.
    """
    if n_samples < 1 or repeats < 1:
        raise ConfigurationError("need n_samples >= 1 and repeats >= 1")
    if ell == "abs":
        pair = lambda z: np.abs(z)
    elif ell == "square":
        pair = lambda z: z * z
    else:
        raise ConfigurationError(f"unknown loss kind {ell!r}")
    key = tuple(int(k) for k in np.atleast_1d(seed_key))
    vals = np.empty(repeats)
    for r in range(repeats):
        rg = np.random.default_rng([*key, r])
        x = _draw(mu, n_samples, rg)
        y = _draw(nu, n_samples, rg)
        vals[r] = float(pair(x[:, None] - y[None, :]).mean())
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(repeats)) if repeats > 1 else 0.0
    return mean, stderr


def _draw(m, n, rng):
    if isinstance(m, (Density1D, SampleSet)):
        return m.sample(n, rng)
    raise ConfigurationError(f"cannot sample from {type(m).__name__}")
