"""Decay and amplification of a discrete state coupled to a non-Hermitian lattice."""
from .closedform import (
    AsymmetricModel,
    AsymmetricRegime,
    degenerate_solution,
    exact_self_energy,
    gauge_transform,
    hermitize,
    pole_exact,
    pole_weak,
    rabi_frequencies,
    rabi_solution,
    regime,
)
from .dynamics import (
    SimConfig,
    Trajectory,
    evolve,
    evolve_bare_continuum,
    fit_decay_rate,
    growth_diagnostic,
    plateau_estimate,
)
from .exceptions import (
    ConvergenceError,
    NHDecayError,
    OnCutError,
    OnLoopError,
    RegimeError,
    SaddleSearchError,
    UnderResolvedError,
)
from .lattice import (
    Dispersion,
    EnergyLoop,
    Location,
    asymmetric,
    asymmetric_from_deltas,
    check_balanced,
    eval_dispersion,
    eval_group_velocity,
    loop_contains,
)
from .spectral import (
    CouplingProfile,
    SpectralResult,
    cut_asymptote,
    density_of_states,
    find_pole,
    jump_formula,
    outer_self_energy,
    self_energy,
    self_energy_continued,
    self_energy_jump,
)
from .stability import Regime, RegimeClass, SaddlePoint, classify, drift_asymptote, find_saddle_points

__version__ = "0.1.0"
