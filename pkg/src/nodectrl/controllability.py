"""Exact control of the linear ensemble dynamics and explicit static controls.

For identity activation the M-particle system with one shared bias is

    x_i'(t) = w(t) x_i(t) + u(t),   i = 1..M,

i.e. a block system with generator I_M (x) w(t) and input matrix stacking M
copies of the identity. Costates solve the backward problem lam' = -w(t)^T lam
per particle; the pairing

    x(T) . lamT  =  int_{t0}^{T} u(t) . sum_i lam_i(t) dt

(for x(t0) = 0) links terminal states to controls and is checked numerically by
`duality_gap`. `hum_solve_terminal` inverts the terminal map column by column to
steer an arbitrary x0 to an arbitrary y with a bias-only control.

Static controls: with c1(t) = exp(int w) and c2(t) = int exp(-int w), the
constant bias b = (y - x0 c1(T)) / (c1(T) c2(T)) steers x0 to y at time T.
Closed-form flows for the power and exponential weight profiles evaluate the
controlled trajectory without time stepping.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ControllabilityError, NumericError
from .activations import get_activation
from .schedules import ControlSchedule

# condition-number ceiling for the terminal map solve
_COND_LIMIT = 1e12


@dataclass
class AdjointState:
    times: np.ndarray      # (n+1,)
    costates: np.ndarray   # (n+1, M, d)
    terminal: np.ndarray   # (M*d,)

    @property
    def M(self):
        return self.costates.shape[1]

    @property
    def d(self):
        return self.costates.shape[2]


@dataclass
class StaticControlResult:
    b: float
    c1T: float
    c2T: float


@dataclass
class ExtendedTrajectory:
    times: np.ndarray
    x1: np.ndarray   # (n+1, d) evolving state
    x2: np.ndarray   # (d,) frozen initial datum
    x3: np.ndarray   # (d,) frozen target


@dataclass
class HUMResult:
    lambdaT: np.ndarray       # (M*d,)
    bias: np.ndarray          # (n+1, d) nodal bias trajectory
    gramian: np.ndarray       # (M*d, M*d) terminal map
    cond: float
    adjoint: AdjointState


def _weight_matrix(ctrl, t, d):
    w = ctrl.weight_at(t)
    if np.ndim(w) == 0:
        return float(w) * np.eye(d) if d > 1 else w
    return np.asarray(w, dtype=float)


def adjoint_solve(w_schedule, lambdaT, d=None):
    """Backward Euler sweep of lam_i' = -w(t)^T lam_i from lam(T) = lamT.

    lambdaT is the stacked terminal costate in R^(M*d); d defaults to the
    schedule's state dimension and M is inferred. The last grid entry equals
    lambdaT exactly.
    """
    lambdaT = np.asarray(lambdaT, dtype=float).reshape(-1)
    d = int(d or w_schedule.d)
    if lambdaT.size % d:
        raise ConfigurationError(f"terminal costate size {lambdaT.size} not divisible by d={d}")
    M = lambdaT.size // d
    n = w_schedule.n_steps
    dt = w_schedule.dt
    lam = np.empty((n + 1, M, d))
    lam[n] = lambdaT.reshape(M, d)
    for k in range(n, 0, -1):
        t = w_schedule.t0 + k * dt
        w = _weight_matrix(w_schedule, t, d)
        # lam' = -w^T lam stepped leftward: lam_{k-1} = lam_k + dt w^T lam_k
        if np.ndim(w) == 0:
            lam[k - 1] = lam[k] + dt * (w * lam[k])
        else:
            lam[k - 1] = lam[k] + dt * (lam[k] @ w)
    if not np.all(np.isfinite(lam)):
        raise NumericError("non-finite costate during backward sweep")
    return AdjointState(times=w_schedule.times(), costates=lam, terminal=lambdaT)


def hum_bias(adjoint):
    """Bias trajectory b(t) = sum_i lam_i(t), shape (n+1, d)."""
    return adjoint.costates.sum(axis=1)


def _forward_linear(w_schedule, bias_nodes, x0, M, d):
    """Euler solve of x_i' = w(t) x_i + b(t) for M stacked particles."""
    n = w_schedule.n_steps
    dt = w_schedule.dt
    x = np.array(x0, dtype=float).reshape(M, d)
    for k in range(n):
        t = w_schedule.t0 + k * dt
        w = _weight_matrix(w_schedule, t, d)
        drift = (w * x) if np.ndim(w) == 0 else (x @ w.T)
        x = x + dt * (drift + bias_nodes[k])
    return x


@dataclass
class DualityTerms:
    terminal_pairing: float   # x(T) . lamT
    quadrature: float         # trapezoid of b(t) . sum_i lam_i(t)
    xT: np.ndarray
    scale: float              # ||x(T)|| * ||lamT||, for relative gaps


def duality_terms(w_schedule, bias, lambdaT, d=None):
    lambdaT = np.asarray(lambdaT, dtype=float).reshape(-1)
    adj = adjoint_solve(w_schedule, lambdaT, d=d)
    M, d = adj.M, adj.d
    n = w_schedule.n_steps
    bias_nodes = np.asarray(bias, dtype=float)
    if bias_nodes.ndim == 0:
        bias_nodes = np.full((n + 1, d), float(bias_nodes))
    elif bias_nodes.ndim == 1 and bias_nodes.shape[0] == d:
        bias_nodes = np.broadcast_to(bias_nodes, (n + 1, d)).copy()
    elif bias_nodes.ndim == 1 and d == 1:
        bias_nodes = bias_nodes.reshape(-1, 1)
    if bias_nodes.shape != (n + 1, d):
        raise ConfigurationError(f"bias shape {bias_nodes.shape} != {(n + 1, d)}")
    xT = _forward_linear(w_schedule, bias_nodes, np.zeros(M * d), M, d)
    lhs = float(xT.reshape(-1) @ lambdaT)
    s = adj.costates.sum(axis=1)                    # (n+1, d)
    integrand = (bias_nodes * s).sum(axis=1)        # b(t) . sum_i lam_i(t)
    dt = w_schedule.dt
    rhs = dt * (integrand[0] / 2 + integrand[1:-1].sum() + integrand[-1] / 2)
    scale = float(np.linalg.norm(xT) * np.linalg.norm(lambdaT))
    return DualityTerms(terminal_pairing=lhs, quadrature=float(rhs), xT=xT, scale=scale)


def duality_gap(w_schedule, bias, lambdaT, d=None):
    """|x(T).lamT - int b . sum_i lam_i dt| on the shared grid."""
    terms = duality_terms(w_schedule, bias, lambdaT, d=d)
    return abs(terms.terminal_pairing - terms.quadrature)


def hum_solve_terminal(w_schedule, x0, y, d=None):
    """Bias-only control steering the stacked state x0 to y at time T.

    Assembles the terminal map lamT -> x(T) column by column (one backward and
    one forward solve per unit terminal vector) and solves the resulting square
    system. Raises ControllabilityError with a condition estimate when the map
    is numerically singular, e.g. two particles with one shared scalar bias.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x0.shape != y.shape:
        raise ConfigurationError(f"x0 and y sizes differ: {x0.size} vs {y.size}")
    d = int(d or w_schedule.d)
    M = x0.size // d
    if M * d != x0.size:
        raise ConfigurationError(f"state size {x0.size} not divisible by d={d}")

    md = M * d
    gramian = np.empty((md, md))
    columns = []
    for j in range(md):
        e = np.zeros(md)
        e[j] = 1.0
        adj = adjoint_solve(w_schedule, e, d=d)
        bias = hum_bias(adj)
        xT = _forward_linear(w_schedule, bias, np.zeros(md), M, d)
        gramian[:, j] = xT.reshape(-1)
        columns.append(bias)

    svals = np.linalg.svd(gramian, compute_uv=False)
    cond = float("inf") if svals[-1] == 0 else float(svals[0] / svals[-1])
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise ControllabilityError(
            f"terminal map numerically singular (cond ~ {cond:.3e}); "
            "the shared-bias input cannot reach this target family",
            cond_estimate=cond,
        )
    x_free = _forward_linear(w_schedule, np.zeros((w_schedule.n_steps + 1, d)), x0, M, d)
    rhs = y - x_free.reshape(-1)
    lambdaT = np.linalg.solve(gramian, rhs)
    adj = adjoint_solve(w_schedule, lambdaT, d=d)
    bias = hum_bias(adj)
    return HUMResult(lambdaT=lambdaT, bias=bias, gramian=gramian, cond=cond, adjoint=adj)


# -- static control -----------------------------------------------------------


def _weight_antiderivative(w_schedule, t):
    """W(t) = int_{t0}^t w(s) ds, closed form per profile."""
    t0 = w_schedule.t0
    mode = w_schedule.mode
    if mode == "constant":
        w = w_schedule.w
        if np.ndim(w) != 0:
            raise ConfigurationError("static control requires a scalar weight")
        return w * (t - t0)
    if mode == "power":
        a1 = w_schedule.alpha + 1.0
        return w_schedule.omega * (t ** a1 - t0 ** a1) / a1
    if mode == "exp":
        om, al = w_schedule.omega, w_schedule.alpha
        if al == 0.0:
            return om * (t - t0)
        return om * (np.exp(al * t) - np.exp(al * t0)) / al
    raise ConfigurationError(f"no closed-form weight integral for mode {w_schedule.mode!r}")


def c1_c2(w_schedule, t):
    """Homogeneous growth factor c1(t)=e^{W(t)} and source factor
    c2(t) = int_{t0}^t e^{-W(s)} ds.

    The inner integral W is closed-form per profile; the outer integral is a
    composite trapezoid on the schedule grid (exact node count, so a zero
    weight yields c2 = t - t0 without rounding drift).
    """
    t0 = w_schedule.t0
    if t < t0 - 1e-12 or t > w_schedule.T + 1e-12:
        raise ConfigurationError(f"t={t} outside [{t0}, {w_schedule.T}]")
    dt = w_schedule.dt
    n_full = int(np.floor((t - t0) / dt + 1e-9))
    nodes = t0 + dt * np.arange(n_full + 1)
    with np.errstate(over="ignore"):
        # extreme weights may overflow to inf; static_control rejects the
        # resulting non-finite product explicitly
        c1 = float(np.exp(_weight_antiderivative(w_schedule, t)))
        vals = np.exp(-np.array([_weight_antiderivative(w_schedule, s) for s in nodes]))
    if n_full == 0:
        c2 = 0.0
    else:
        c2 = dt * (vals[0] / 2 + vals[1:-1].sum() + vals[-1] / 2)
    rest = t - nodes[-1]
    if rest > 1e-9 * max(1.0, dt):
        tail = np.exp(-_weight_antiderivative(w_schedule, t))
        c2 += rest * (vals[-1] + tail) / 2
    return c1, float(c2)


def static_control(x0, y, w_schedule):
    """Constant bias steering x0 to y over the schedule horizon:
    b = (y - x0 c1(T)) / (c1(T) c2(T))."""
    c1T, c2T = c1_c2(w_schedule, w_schedule.T)
    denom = c1T * c2T
    if not np.isfinite(denom) or abs(denom) < 1e-14:
        raise ConfigurationError(f"degenerate horizon: c1(T) c2(T) = {denom:.3e}")
    b = (y - x0 * c1T) / denom
    return StaticControlResult(b=float(b), c1T=c1T, c2T=c2T)


def closed_form_flow(case, omega, alpha, b, x0, t, t0=0.0, panels=2048):
    """Controlled trajectory value at time t for the two weight profiles.

    case "power":  w(s) = omega s^alpha
    case "exp":    w(s) = omega e^(alpha s)

    Phi(t) = x0 e^{W(t)} + b int_{t0}^t e^{W(t) - W(s)} ds with W the closed-form
    weight integral. The remaining integral has no elementary antiderivative for
    general alpha; composite Simpson with `panels` panels (default 2048). The
    W(t) prefactor is folded into the integrand to avoid overflow when W swings
    over hundreds of units.
    """
    if case == "power":
        if alpha < 0:
            raise ConfigurationError(f"power profile needs alpha >= 0, got {alpha}")
        a1 = alpha + 1.0
        W = lambda s: omega * (s ** a1 - t0 ** a1) / a1
    elif case == "exp":
        if alpha == 0.0:
            W = lambda s: omega * (s - t0)
        else:
            W = lambda s: omega * (np.exp(alpha * s) - np.exp(alpha * t0)) / alpha
    else:
        raise ConfigurationError(f"unknown closed-form case {case!r}")
    if t == t0:
        return float(x0)
    Wt = W(t)
    if panels % 2:
        panels += 1
    s = t0 + (t - t0) * np.arange(panels + 1) / panels
    g = np.exp(Wt - W(s))         # bounded by 1 when W is decreasing
    h = (t - t0) / panels
    simpson = (h / 3) * (g[0] + g[-1] + 4 * g[1:-1:2].sum() + 2 * g[2:-2:2].sum())
    return float(x0 * np.exp(Wt) + b * simpson)


def integrate_extended(x, y, w_schedule, bias_fn, act="identity"):
    """Euler flow of the autonomous extension (x1, x2, x3).

    x1 evolves under x1' = act(w(t) x1 + bias_fn(t, x2, x3)); x2 holds the
    initial datum and x3 the target, both exactly constant (never written).
    """
    act = get_activation(act)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = x.shape[0]
    n = w_schedule.n_steps
    dt = w_schedule.dt
    x1 = np.empty((n + 1, d))
    x1[0] = x
    cur = x.copy()
    for k in range(n):
        t = w_schedule.t0 + k * dt
        w = _weight_matrix(w_schedule, t, d)
        b = np.asarray(bias_fn(t, x, y), dtype=float)
        pre = (w * cur if np.ndim(w) == 0 else w @ cur) + b
        cur = cur + dt * act(pre)
        if not np.all(np.isfinite(cur)):
            raise NumericError(f"non-finite extended state at t={t + dt:.6g}")
        x1[k + 1] = cur
    return ExtendedTrajectory(times=w_schedule.times(), x1=x1, x2=x, x3=y)
