from .lattice import (
    GridSpec,
    LatticeField,
    MollifierSpec,
    ResolutionError,
    heat_kernel_modes,
    mollified_noise,
    mollify,
    sample_white_noise,
)
from .constants import (
    ModeEngine,
    constant_C0,
    constant_C0_eps,
    ctau_constant,
    ctau_combinatorial_factor,
    ctau_pairing,
    renorm_constants_C2_C3,
)

__all__ = [
    "GridSpec",
    "MollifierSpec",
    "LatticeField",
    "ResolutionError",
    "sample_white_noise",
    "mollify",
    "mollified_noise",
    "heat_kernel_modes",
    "ModeEngine",
    "constant_C0",
    "constant_C0_eps",
    "renorm_constants_C2_C3",
    "ctau_constant",
    "ctau_pairing",
    "ctau_combinatorial_factor",
]
