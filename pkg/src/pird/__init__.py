"""Partial information rate decomposition for networks of Gaussian
(vector autoregressive) random processes.

The information rate shared by a target process and a set of source
processes is split into unique, redundant and synergistic components, per
frequency, within configurable spectral bands, and in the time domain.
"""

from .baselines import (
    StaticPidResult,
    TePidResult,
    default_submodel_order,
    gaussian_mi,
    instantaneous_info,
    mir_decomposition,
    static_pid,
    submodel_innovation,
    te_pid,
    transfer_entropy,
)
from .decomposition import (
    CoarseDecomposition,
    aggregate_coarse,
    CoarseTerms,
    DecompositionResult,
    coarse_grained,
    decompose,
    smmi_argmin_elements,
    smmi_redundancy_profile,
    spectral_pird,
    time_pird,
    write_atoms_csv,
    write_coarse_csv,
    write_profiles_csv,
)
from .errors import (
    ArgumentError,
    CapabilityError,
    EstimationError,
    FormatError,
    NumericalError,
    PirdError,
    SpectralSingularityError,
    UnstableModelError,
)
from .lattice import (
    Atom,
    RedundancyLattice,
    enumerate_antichains,
    moebius_invert,
    precedes,
)
from .spectral import (
    Band,
    FrequencyGrid,
    SpectralMatrix,
    SpectralProfile,
    integrate_band,
    integrate_full,
    parse_bands,
    psd_from_var,
    spectral_mir,
    transfer_function,
)
from .var import (
    Scenario,
    TimeSeriesMatrix,
    VarModel,
    autocovariance_sequence,
    build_scenario,
    fit_ols,
    is_stable,
    poles_to_coeffs,
    random_stable_var,
    select_order_aic,
    simulate,
    simulate_ensemble,
    zero_lag_covariance,
)

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "Band",
    "CoarseDecomposition",
    "CoarseTerms",
    "DecompositionResult",
    "FrequencyGrid",
    "RedundancyLattice",
    "Scenario",
    "SpectralMatrix",
    "SpectralProfile",
    "StaticPidResult",
    "TePidResult",
    "TimeSeriesMatrix",
    "VarModel",
    "ArgumentError",
    "CapabilityError",
    "EstimationError",
    "FormatError",
    "NumericalError",
    "PirdError",
    "SpectralSingularityError",
    "UnstableModelError",
    "aggregate_coarse",
    "autocovariance_sequence",
    "build_scenario",
    "coarse_grained",
    "decompose",
    "default_submodel_order",
    "enumerate_antichains",
    "fit_ols",
    "gaussian_mi",
    "instantaneous_info",
    "integrate_band",
    "integrate_full",
    "is_stable",
    "mir_decomposition",
    "moebius_invert",
    "parse_bands",
    "poles_to_coeffs",
    "precedes",
    "psd_from_var",
    "random_stable_var",
    "select_order_aic",
    "simulate",
    "simulate_ensemble",
    "smmi_argmin_elements",
    "smmi_redundancy_profile",
    "spectral_mir",
    "spectral_pird",
    "static_pid",
    "submodel_innovation",
    "te_pid",
    "time_pird",
    "transfer_entropy",
    "transfer_function",
    "write_atoms_csv",
    "write_coarse_csv",
    "write_profiles_csv",
    "zero_lag_covariance",
]
