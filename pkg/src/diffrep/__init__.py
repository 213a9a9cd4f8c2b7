"""Fast evaluation of Riemann-Liouville fractional integrals through diffusive
representations, with slow reference oracles to check them against.
"""

from diffrep.engine import (
    DiffusiveState,
    Stepper,
    TimeGrid,
    evaluate_on_grid,
    init_state,
    iter_values,
    read_value,
    residual_check_ode,
    step_backward_euler,
    step_trapezoidal,
)
from diffrep.errors import (
    ConvergenceError,
    DiffrepError,
    DomainError,
    IntegerOrder,
    NonPositiveOrder,
    OrderOutOfRange,
    PoleError,
    RangeError,
    ToleranceNotMet,
    UnsupportedTransform,
)
from diffrep.fractional import (
    FractionalOrder,
    binom_alternating_sum,
    gamma,
    make_order,
    rl_power_closed_form,
)
from diffrep.oracle import (
    SourceFunction,
    builtin_source,
    phi_decay_probe,
    phi_direct,
    rl_direct,
)
from diffrep.quadrature import (
    QuadratureRule,
    build_diffusive_rule,
    gauss_laguerre,
    gauss_legendre,
)
from diffrep.transforms import TransformSpec, check_admissible, psi, psi_prime

__all__ = [
    "ConvergenceError",
    "DiffrepError",
    "DiffusiveState",
    "DomainError",
    "FractionalOrder",
    "IntegerOrder",
    "NonPositiveOrder",
    "OrderOutOfRange",
    "PoleError",
    "QuadratureRule",
    "RangeError",
    "SourceFunction",
    "Stepper",
    "TimeGrid",
    "ToleranceNotMet",
    "TransformSpec",
    "UnsupportedTransform",
    "binom_alternating_sum",
    "build_diffusive_rule",
    "builtin_source",
    "check_admissible",
    "evaluate_on_grid",
    "gamma",
    "gauss_laguerre",
    "gauss_legendre",
    "init_state",
    "iter_values",
    "make_order",
    "phi_decay_probe",
    "phi_direct",
    "psi",
    "psi_prime",
    "read_value",
    "residual_check_ode",
    "rl_direct",
    "rl_power_closed_form",
    "step_backward_euler",
    "step_trapezoidal",
]
