"""darboux1d: second-order Darboux (SUSY) transformations between 1-D
Schrodinger operators on a finite interval, Dirichlet spectra, and
Jordan-chain (diagonalizability) diagnostics.

The hot numerical loops live in a compiled extension with a pure-Python
fallback selected at import; ``kernel_backend()`` reports which one is
active.
"""
from ._kernel import BACKEND_NAME as _BACKEND_NAME
from .darboux import (
    CombinationRecipe,
    DarbouxResult,
    EigenfunctionRecipe,
    ExplicitRecipe,
    TransformationSpec,
    build_transformation_function,
    darboux_exceptional,
    darboux_map,
    darboux_potential,
    second_solution_check,
    verify_intertwining,
)
from .errors import (
    AmbiguousWindingError,
    ConfigError,
    Darboux1dError,
    DegenerateCaseError,
    IntegrationBlowupError,
    NotAnEigenvalueError,
    NumericsError,
    PotentialRegularityError,
    RootOnContourError,
    WronskianZeroError,
)
from .examples import (
    ScenarioReport,
    probe_degenerate_limit,
    reproduce_scenario,
    run_backward_v2,
    run_chain_dim3,
    run_forward_b2,
    run_forward_bgeneric,
)
from .grid import Interval, default_interval
from .integrate import (
    WaveSolution,
    energy_derivative_chain,
    integrate,
    integrate_with_energy_derivative,
    solve_inhomogeneous,
    wronskian2,
)
from .jordan import JordanReport, background_emergence_check, diagnose_level, is_diagonalizable
from .potentials import (
    BackwardPartnerPotential,
    ConstantPotential,
    DarbouxDerivedPotential,
    PotentialSpec,
    TabulatedPotential,
    TripleChainPotential,
    TrigPTPotential,
    zero_potential,
)
from .spectral import (
    CharacteristicSample,
    SpectrumReport,
    characteristic,
    eigenfunction,
    find_complex_spectrum,
    find_real_spectrum,
    root_multiplicity,
)

__version__ = "0.1.0"


def kernel_backend() -> str:
    """Name of the active integration kernel: "c" or "python"."""
    return _BACKEND_NAME
