"""Fundamental limits of delayed-feedback stick balancing.

Plant structure (poles, zeros, state space), achievable-sensitivity analysis
(fragility, Poisson-weighted Bode integrals, waterbed trade-offs, Nyquist
stability), parameter sweeps, and a stochastic delayed-loop simulator, plus a
CLI binding it all to config files and CSV/JSON output.
"""

from .errors import (
    ClosedLoopPoleError,
    EmptySweepError,
    FraglimError,
    FragilitySingularityError,
    InconclusiveStabilityError,
    IntegrandSingularityError,
    InterpolationNotApplicableError,
    ParameterError,
    PoleEvaluationError,
    RealizationError,
)
from .lti import (
    DelayLoop,
    FactorValues,
    FrequencyResponse,
    RationalTF,
    allpass_minphase_at,
    constant_tf,
    default_omega_grid,
    eval_rational,
    frequency_response_csv,
    hinf_estimate,
    loop_response,
    st_at,
)
from .plant import (
    Orientation,
    PendulumParams,
    PoleZeroSet,
    RawParams,
    StateSpaceUp,
    effective_params,
    plant_tf,
    poles_zeros,
    rhp_pole_zero,
    state_space_up,
)
from .robustness import (
    ConstructedT,
    FragilityResult,
    InterpolationReport,
    NyquistResult,
    PoissonKernel,
    QuadratureConfig,
    Regime,
    WaterbedReport,
    bode_integral,
    constructed_T,
    fragility,
    interpolation_check,
    nyquist_analysis,
    nyquist_stable,
    poisson_weight,
    waterbed_check,
    waterbed_constants,
)
from .sweep import (
    FragilityCurve,
    FragilitySurface,
    SweepSpec,
    Vary,
    curve_csv,
    fragility_curve,
    fragility_heatmap,
    heatmap_csv,
    heatmap_matrix_csv,
)
from .timesim import (
    SimConfig,
    Spectrum,
    Trajectory,
    parse_trajectory_csv,
    psd,
    simulate,
    spectrum_csv,
    tf_to_ss,
    trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ClosedLoopPoleError", "EmptySweepError", "FraglimError",
    "FragilitySingularityError", "InconclusiveStabilityError",
    "IntegrandSingularityError", "InterpolationNotApplicableError",
    "ParameterError", "PoleEvaluationError", "RealizationError",
    "DelayLoop", "FactorValues", "FrequencyResponse", "RationalTF",
    "allpass_minphase_at", "constant_tf", "default_omega_grid", "eval_rational",
    "frequency_response_csv", "hinf_estimate", "loop_response", "st_at",
    "Orientation", "PendulumParams", "PoleZeroSet", "RawParams", "StateSpaceUp",
    "effective_params", "plant_tf", "poles_zeros", "rhp_pole_zero", "state_space_up",
    "ConstructedT", "FragilityResult", "InterpolationReport", "NyquistResult",
    "PoissonKernel", "QuadratureConfig", "Regime", "WaterbedReport",
    "bode_integral", "constructed_T", "fragility", "interpolation_check",
    "nyquist_analysis", "nyquist_stable", "poisson_weight", "waterbed_check",
    "waterbed_constants",
    "FragilityCurve", "FragilitySurface", "SweepSpec", "Vary", "curve_csv",
    "fragility_curve", "fragility_heatmap", "heatmap_csv", "heatmap_matrix_csv",
    "SimConfig", "Spectrum", "Trajectory", "parse_trajectory_csv", "psd",
    "simulate", "spectrum_csv", "tf_to_ss", "trajectory_csv",
    "__version__",
]
