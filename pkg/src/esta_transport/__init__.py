"""Enhanced shortcuts to adiabaticity for single-site atom transport in an optical lattice."""

from .control import FAMILIES, ControlFunction, CorrectionBasis, SmoothingSpec, build_basis, sta_trajectory
from .deviation import DeviationReport, control_deviation, deviation_upper_bound, epsilon_delta_derivative
from .dynamics import Grid, Numerics, SplitOperator, ground_state, simulate_transport
from .esta import EstaDesign, EstaInputs, compute_epsilon, design
from .lattice import ERROR_KINDS, HarmonicShape, LatticeShape, lattice_for
from .noise import NOISE_KINDS, adiabatic_constant_approx, adiabatic_constant_exact, noise_report, noise_sensitivity
from .robustness import error_bound, robustness_report, sensitivity_fd, sensitivity_tdpt
from .units import PhysicalParams, default_problem, derive_units, nondimensionalize, tau_to_internal

__version__ = "0.1.0"
