"""Cooperative UWB indoor positioning simulator (python bindings)."""

try:
    # Installed layout: the extension lives inside the package.
    from ._uwbcoop import (  # noqa: F401
        DEFAULT_BURN_IN,
        SPEED_OF_LIGHT,
        Cep,
        ParseError,
        RunResult,
        Scenario,
        accuracy,
        cep,
        distance,
        load_scenario,
        run_monte_carlo,
        run_scenario,
        scenario_hash,
        validate_scenario,
    )
except ImportError:
    # In-tree layout: the extension sits on PYTHONPATH next to the build.
    from _uwbcoop import (  # noqa: F401
        DEFAULT_BURN_IN,
        SPEED_OF_LIGHT,
        Cep,
        ParseError,
        RunResult,
        Scenario,
        accuracy,
        cep,
        distance,
        load_scenario,
        run_monte_carlo,
        run_scenario,
        scenario_hash,
        validate_scenario,
    )

__all__ = [
    "DEFAULT_BURN_IN",
    "SPEED_OF_LIGHT",
    "Cep",
    "ParseError",
    "RunResult",
    "Scenario",
    "accuracy",
    "cep",
    "distance",
    "load_scenario",
    "run_monte_carlo",
    "run_scenario",
    "scenario_hash",
    "validate_scenario",
]
