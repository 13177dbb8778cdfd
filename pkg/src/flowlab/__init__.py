"""Numerical laboratory for gradient-flow asymptotics near critical points."""

from .errors import (
    ConfigError,
    EvaluationError,
    ExpressionError,
    FlowError,
    FlowLabError,
    GaugeFixError,
    InsufficientDataError,
    LatticeLogError,
    NewtonError,
    ReductionError,
)
from .fields import AnalyticField, Jet2, RadialSplit, eval_jet2, radial_angular
from .flow import FlowSpec, FlowSample, StopReason, Trajectory, integrate, remaining_length_check
from .reduction import (
    ReducedModel,
    SpectralSplit,
    build_reduced,
    compat_check,
    project_onto_slice,
    spectral_split,
    to_reduced_coords,
)
from .asymptotics import (
    AnalyticCurve,
    ConeParams,
    ExponentReport,
    SecantTrace,
    asymptotic_critical_value,
    bochnak_constant,
    cone_membership,
    critical_distance_check,
    critical_value_envelope,
    estimate_char_exponent,
    estimate_loj_exponent,
    exponent_report,
    monitor_scaled_energy,
    puiseux_fit,
    secant_trace,
    sigma_ratio,
)
from .gauge import GaugeFixResult, GroupAction, gauge_fix_point, gauge_fixed_secant, rotation_generator
from .lattice import (
    LatticeGauge,
    discrete_h1_secant,
    lattice_flow,
    lattice_gauge_fix,
    load_lattice,
    save_lattice,
    wilson_action,
)

__version__ = "0.1.0"
