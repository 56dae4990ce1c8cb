from .integrators import (
    BlowUpError,
    PositivityError,
    SolveResult,
    solve_burgers,
    solve_growth,
    solve_she,
)
from .experiments import (
    ExperimentConfig,
    burgers_invariance,
    c0_limit,
    deterministic_consistency,
    growth_polynomial,
    hopf_cole_compare,
    intermediate_sweep,
    weak_asym_sweep,
)

__all__ = [
    "SolveResult",
    "BlowUpError",
    "PositivityError",
    "solve_growth",
    "solve_she",
    "solve_burgers",
    "ExperimentConfig",
    "growth_polynomial",
    "hopf_cole_compare",
    "deterministic_consistency",
    "weak_asym_sweep",
    "intermediate_sweep",
    "burgers_invariance",
    "c0_limit",
]
