"""rbcavity: a polarised single-photon source simulator.

Models a single 87Rb atom strongly coupled to a two-polarisation optical
cavity in an intermediate magnetic field: hyperfine/Zeeman structure with
level mixing, master-equation photon production, and two-photon (HOM)
interference statistics.
"""

__version__ = "0.1.0"

from ._kernels import backend as kernel_backend
from .angular import HalfInt, clebsch_gordan, coupling_zero_field, wigner_3j, wigner_6j
from .atomstruct import (
    Atom,
    FineLevel,
    PhysicalConstants,
    TransitionLine,
    ZeemanSolution,
    build_hyperfine_hamiltonian,
    build_zeeman_hamiltonian,
    default_atom,
    diagonalize_level,
    load_atom,
    mixed_coupling,
    zeeman_field_from_splitting,
)
from .cavitysys import (
    CavityParams,
    CavitySystem,
    EmissionResult,
    Pulse,
    build_interaction,
    build_system,
    cavity_params_from_geometry,
    run_cw_scattering,
    run_depopulation,
    run_photon_production,
)
from .experiments import (
    Scenario,
    SweepResult,
    conditional_imbalance,
    scenario_presets,
    sweep_cavity_detuning,
)
from .hom import (
    CorrelationCurve,
    WavepacketModel,
    contaminated_params,
    contamination_probability,
    fit_emission_model,
    gaussian_wavepacket,
    hom_correlations,
    model_emission_profile,
    spontaneous_timing,
    visibility,
    weighted_pair_interference,
)
from .mesolve import (
    ChannelKind,
    CollapseChannel,
    Trajectory,
    evolve,
    expectation,
    integrate_channel_flux,
)

__all__ = [
    "__version__",
    "kernel_backend",
    # angular
    "HalfInt", "clebsch_gordan", "coupling_zero_field", "wigner_3j", "wigner_6j",
    # atomic structure
    "Atom", "FineLevel", "PhysicalConstants", "TransitionLine", "ZeemanSolution",
    "build_hyperfine_hamiltonian", "build_zeeman_hamiltonian", "default_atom",
    "diagonalize_level", "load_atom", "mixed_coupling", "zeeman_field_from_splitting",
    # master equation
    "ChannelKind", "CollapseChannel", "Trajectory", "evolve", "expectation",
    "integrate_channel_flux",
    # cavity system
    "CavityParams", "CavitySystem", "EmissionResult", "Pulse", "build_interaction",
    "build_system", "cavity_params_from_geometry", "run_cw_scattering",
    "run_depopulation", "run_photon_production",
    # experiments
    "Scenario", "SweepResult", "conditional_imbalance", "scenario_presets",
    "sweep_cavity_detuning",
    # wavepackets / interference
    "CorrelationCurve", "WavepacketModel", "contaminated_params",
    "contamination_probability", "fit_emission_model", "gaussian_wavepacket",
    "hom_correlations", "model_emission_profile", "spontaneous_timing",
    "visibility", "weighted_pair_interference",
]
