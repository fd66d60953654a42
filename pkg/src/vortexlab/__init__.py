"""Point-vortex dynamics, background profiles, and Gross-Pitaevskii field
solvers for critically scaled inhomogeneous backgrounds."""

from .core_profile import CoreProfile, radial_core_profile
from .dynamics import (
    Trajectory, dissipation_check, hamiltonian_drift, integrate,
    load_trajectory_csv, save_trajectory_csv, vortex_velocity,
)
from .energy import (
    EnergyBreakdown, GreensData, canonical_phase_current, grad_h0,
    grad_renormalized_energy, interaction_hamiltonian, renormalized_energy,
)
from .fields import (
    ComplexField, boundary_winding, jacobian, plaquette_windings, supercurrent,
)
from .flatnorm import flat_norm_distance
from .geometry import (
    AtomicMeasure, Domain, VortexConfig, load_config, pair_configurations,
    save_config, separation_radius,
)
from .gp import (
    EnergyReport, GPStepper, build_initial_data, discrete_energy, energy_report,
    evolve, jacobian_flux_residual, lassoued_mironescu_defect, stability_limit,
    step_gradient_flow, step_schrodinger, weighted_mass,
)
from .grid import (
    Grid2D, export_complex_csv, export_scalar_csv, load_complex_field,
    load_scalar_field, save_complex_field, save_scalar_field,
)
from .potentials import (
    AnalyticPotential, builtin_potential, bump_potential,
    polynomial_bump_potential, potential_from_callables, scaled_potential,
    zero_potential,
)
from .thomasfermi import (
    GridProfile, solve_thomas_fermi, tf_convergence_report, tf_energy,
    tf_residual, uniform_profile,
)
from .tracking import (
    ComparisonSeries, DetectionResult, detect_vortices, equipartition_residual,
    save_detection_csv, trajectory_compare,
)

__version__ = "0.1.0"
