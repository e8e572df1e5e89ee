"""Periodic spectral steady states, decay and stability experiments."""

from ._core import (
    ConfigError,
    Error,
    Field,
    Lattice,
    PhysicalParams,
    PreconditionError,
    __version__,
    build_steady,
    check_decay_envelope,
    config_keys,
    evolve_difference,
    forcing,
    heat_evolve,
    leray_project,
    load_checkpoint,
    nonlinear_term,
    random_band_field,
    run_command,
    save_checkpoint,
    steady_residual,
    stokes_solve,
)

__all__ = [
    "ConfigError",
    "Error",
    "Field",
    "Lattice",
    "PhysicalParams",
    "PreconditionError",
    "__version__",
    "build_steady",
    "check_decay_envelope",
    "config_keys",
    "evolve_difference",
    "forcing",
    "heat_evolve",
    "leray_project",
    "load_checkpoint",
    "nonlinear_term",
    "random_band_field",
    "run_command",
    "save_checkpoint",
    "steady_residual",
    "stokes_solve",
]
