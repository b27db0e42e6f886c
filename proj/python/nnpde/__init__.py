from ._core import (
    ConfigError,
    FormatError,
    NumericalError,
    analytic_solution,
    cost_model,
    fd_convergence,
    gradient_check,
    grid,
    network_values,
    preset,
    preset_names,
    slot_count,
    solve,
    source,
    validate,
)

__all__ = [
    "ConfigError",
    "FormatError",
    "NumericalError",
    "analytic_solution",
    "cost_model",
    "fd_convergence",
    "gradient_check",
    "grid",
    "network_values",
    "preset",
    "preset_names",
    "slot_count",
    "solve",
    "source",
    "validate",
]
