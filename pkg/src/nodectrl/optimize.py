"""Projected gradient descent over a rectangular parameter box."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericError


@dataclass(frozen=True)
class BoxDomain:
    w_min: float
    w_max: float
    b_min: float
    b_max: float

    def __post_init__(self):
        if not (self.w_min < self.w_max and self.b_min < self.b_max):
            raise ConfigurationError(f"degenerate box {self}")

    @property
    def lower(self):
        return np.array([self.w_min, self.b_min])

    @property
    def upper(self):
        return np.array([self.w_max, self.b_max])

    def contains(self, p):
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.lower) and np.all(p <= self.upper))

    def corners(self):
        return np.array(
            [
                [self.w_min, self.b_min],
                [self.w_max, self.b_min],
                [self.w_min, self.b_max],
                [self.w_max, self.b_max],
            ]
        )


def project(p, box):
    """Component-wise clamp onto the box (idempotent)."""
    return np.minimum(np.maximum(np.asarray(p, dtype=float), box.lower), box.upper)


@dataclass
class DescentTrace:
    iterates: np.ndarray     # (K+1, 2) including the start
    objectives: np.ndarray   # (K+1,)
    step_size: float
    stop_reason: str         # "max_iters" | "small_grad" | "small_step"

    @property
    def final(self):
        return self.iterates[-1]


def pgd(objective, gradient, start, box, step=1e-5, max_iters=100000,
        grad_tol=1e-8, step_tol=0.0):
    """Constant-step projected gradient descent p <- clamp(p - step grad(p)).

    Stops on max_iters, on ||grad|| <= grad_tol, or on an iterate displacement
    <= step_tol (disabled at 0). The trace records every iterate with its
    objective value.
    """
    if step <= 0:
        raise ConfigurationError(f"need step > 0, got {step}")
    start = np.asarray(start, dtype=float)
    if not box.contains(start):
        raise ConfigurationError(f"start {start} outside box {box}")
    iterates = [start.copy()]
    objectives = [float(objective(start))]
    p = start
    stop = "max_iters"
    for k in range(int(max_iters)):
        g = np.asarray(gradient(p), dtype=float)
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient at iteration {k}")
        if np.linalg.norm(g) <= grad_tol:
            stop = "small_grad"
            break
        p_new = project(p - step * g, box)
        iterates.append(p_new.copy())
        objectives.append(float(objective(p_new)))
        moved = np.linalg.norm(p_new - p)
        p = p_new
        if step_tol > 0 and moved <= step_tol:
            stop = "small_step"
            break
    return DescentTrace(
        iterates=np.asarray(iterates),
        objectives=np.asarray(objectives),
        step_size=float(step),
        stop_reason=stop,
    )
