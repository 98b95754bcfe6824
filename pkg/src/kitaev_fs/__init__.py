"""Fidelity susceptibility and bond-bond correlations of the Kitaev honeycomb model."""

from .correlation import (
    CorrelationProfile,
    DecayFit,
    bond_expectation,
    connected_correlation,
    connected_correlation_many,
    correlation_length_theory,
    correlation_profile_fast,
    fit_exponential,
    fit_power_law,
    four_point_naive,
    long_range_witness,
)
from .errors import (
    CollapseError,
    DegeneracyError,
    DomainError,
    FitError,
    InvalidArgumentError,
    KitaevError,
    OracleError,
)
from .fidelity import (
    MetricTensor,
    chi_f,
    chi_finite_difference,
    chi_line_closed_form,
    fidelity,
    log_fidelity,
    metric_tensor,
    theta_gradient,
)
from .model import (
    Couplings,
    EvolutionLine,
    LineKind,
    MomentumGrid,
    Phase,
    SpectralPoint,
    gap,
    ground_energy,
    line_point,
    line_tangent,
    lowest_excitations,
    momentum_grid,
    phase_of,
    spectral,
)
from .scaling import CollapseResult, PeakSet, SweepRecord, collapse, find_peaks, fit_mu, sweep

__version__ = "0.1.0"
