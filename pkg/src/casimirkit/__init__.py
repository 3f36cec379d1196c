"""Sphere-plate Casimir forces for layered stacks and AFM force-curve analysis.

The package computes finite-temperature Lifshitz free energies and PFA
sphere-plate forces for planar material stacks, builds permittivities on the
imaginary frequency axis from models or tabulated optical data, applies
roughness averaging, and processes force-distance measurements
(electrostatic calibration, Casimir extraction, error budget).
"""

from .electrostatics import (
    CalibrationParams,
    PolynomialX,
    electrostatic_force,
    exact_sphere_plane_force,
    fit_polynomial_x,
    reconstruct_separation,
)
from .exceptions import ConfigError, ConvergenceError, DataError
from .kramers_kronig import (
    ExtrapolationSpec,
    KKPermittivity,
    OpticalDataTable,
    PermittivityCurve,
    build_curve,
    first_matsubara_ratio,
    kk_transform,
)
from .lifshitz import (
    Layer,
    LayerStack,
    MatsubaraSpec,
    QuadratureSpec,
    force_curve,
    free_energy_per_area,
    fresnel_r,
    matsubara_frequency,
    pfa_sphere_plate_force,
    stack_reflection,
    tabulated_force,
)
from .materials import (
    Composite,
    DrudeParams,
    IdealMetal,
    NinhamParsegianParams,
    OscillatorParams,
    PlasmaParams,
    ZeroFrequencyResponse,
    drude_eps_imag_axis,
    drude_im_eps,
    ninham_parsegian_eps,
    oscillator_eps_imag_axis,
    oscillator_im_eps,
    plasma_eps_imag_axis,
)
from .measurement import (
    ErrorBudget,
    ExtractionResult,
    ForceDistanceCurve,
    GaussianStats,
    error_budget,
    extract_casimir,
    fit_calibration,
    gaussian_stats,
    load_curves,
    synthesize_curves,
)
from .roughness import (
    RoughnessProfile,
    rough_force,
    roughness_correction,
    zero_roughness_level,
)

__version__ = "0.1.0"
