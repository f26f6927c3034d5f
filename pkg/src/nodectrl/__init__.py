"""Continuous residual networks at the particle and mean-field level:
simulation, exact linear control, kernel surrogates of the training loss, and
projected gradient descent over the control box.
"""

from .activations import ACTIVATIONS, gcu, get_activation, identity, relu, sigmoid, tanh
from .controllability import (
    AdjointState,
    DualityTerms,
    HUMResult,
    StaticControlResult,
    adjoint_solve,
    c1_c2,
    closed_form_flow,
    duality_gap,
    duality_terms,
    hum_bias,
    hum_solve_terminal,
    integrate_extended,
    static_control,
)
from .dynamics import integrate_ensemble, integrate_ode, loss_micro, resnet_step
from .errors import (
    CFLError,
    ConfigurationError,
    ControllabilityError,
    IllConditionedError,
    NodectrlError,
    NumericError,
)
from .meanfield import (
    Density1D,
    SampleSet,
    fv_step,
    gaussian_density,
    loss_meanfield,
    push_forward_particles,
    solve_meanfield,
    uniform_density,
    velocity_field,
    wasserstein1,
)
from .optimize import BoxDomain, DescentTrace, pgd, project
from .schedules import ControlSchedule, constant_schedule, exp_schedule, power_schedule
from .surrogate import (
    GaussianKernelSurrogate,
    fit_interpolation,
    fit_ridge,
    kernel_eval,
    relative_error_field,
)

__version__ = "0.1.0"

__all__ = [
    "ACTIVATIONS",
    "AdjointState",
    "BoxDomain",
    "CFLError",
    "ConfigurationError",
    "ControllabilityError",
    "ControlSchedule",
    "Density1D",
    "DescentTrace",
    "DualityTerms",
    "GaussianKernelSurrogate",
    "HUMResult",
    "IllConditionedError",
    "NodectrlError",
    "NumericError",
    "SampleSet",
    "StaticControlResult",
    "adjoint_solve",
    "c1_c2",
    "closed_form_flow",
    "constant_schedule",
    "duality_gap",
    "duality_terms",
    "exp_schedule",
    "fit_interpolation",
    "fit_ridge",
    "fv_step",
    "gaussian_density",
    "gcu",
    "get_activation",
    "hum_bias",
    "hum_solve_terminal",
    "identity",
    "integrate_ensemble",
    "integrate_extended",
    "integrate_ode",
    "kernel_eval",
    "loss_meanfield",
    "loss_micro",
    "pgd",
    "power_schedule",
    "project",
    "push_forward_particles",
    "relative_error_field",
    "relu",
    "resnet_step",
    "sigmoid",
    "solve_meanfield",
    "static_control",
    "tanh",
    "uniform_density",
    "velocity_field",
    "wasserstein1",
    "__version__",
]
