"""Charged particle on a cone with an Aharonov-Bohm flux, a uniform field and an
anharmonic potential: spectrum, states, thermodynamics, magnetic response and
Shannon entropies."""

from .errors import (
    BracketingFailure,
    CaseDNeedsField,
    ConvergenceFailure,
    DegenerateConfinement,
    DisclinationError,
    DomainError,
    GridTooCoarse,
    KinkPoint,
    NoConventionMatches,
    TailMassExceeded,
    ThermoOverflow,
)
from .model import (
    Anharmonic,
    DerivedParams,
    Harmonic,
    InverseSquare,
    Pseudoharmonic,
    QuantumNumbers,
    ShiftedPseudoharmonic,
    SystemConfig,
    derive_params,
    potential_from_dict,
)
from .spectrum import (
    EnergyLevel,
    RadialState,
    effective_potential,
    energy,
    energy_alpha_derivative,
    energy_general,
    landau_limit,
    wavefunction,
)
from .oracle import RadialGrid, numerov_eigenvalue
from .thermo import (
    ThermoInput,
    entropy_thermo,
    free_energy,
    heat_capacity,
    log_Z,
    mean_energy,
    partition_function,
)
from .magnetics import (
    MagneticReport,
    magnetic_report,
    magnetization_finite_T,
    magnetization_zero_T,
    persistent_current,
    susceptibility_finite_T,
    susceptibility_zero_T,
)
from .infoentropy import (
    BBM_BOUND,
    STANDARD_CONVENTION,
    DensityConvention,
    EntropyReport,
    MomentumGrid,
    bbm_check,
    calibrate_convention,
    entropy_report,
    momentum_entropy,
    position_entropy,
    reproduce_table,
)

__version__ = "0.1.0"
