"""Semi-analytic laboratory for anomalous localized resonance in 2-D elastostatics."""

__version__ = "0.1.0"

from .errors import BoundViolationError, ConvexityError, DivergentIntegralError, NearSingularError
from .params import LameParameters, RadialProfile, check_convexity, plasmon_constant
from .fields import AngularFunction, PiecewiseModeField, TrigPoly
from .elasticity import (
    bilinear_P,
    conormal,
    dissipated_energy,
    energy_norm_sq,
    green_identity_residual,
    kelvin_matrix,
    lame_apply,
)
from .plasmon_waves import SHELL_INSIDE, SHELL_OUTSIDE, base_V_hat, base_v_hat, perfect_wave, perfect_wave_energy
from .mode_solver import (
    SourceSpectrum,
    configuration_field,
    freespace_traction_solve,
    real_imag_split,
    solve_configuration,
    solve_mode,
)
from .variational import (
    core_dual_trial,
    dual_J,
    duality_table,
    nocore_dual_trial,
    nonresonant_primal_trial,
    primal_I,
    sandwich_check,
    select_k_delta,
    select_k_star,
)
from .resonance_lab import Classification, EnergySweep, Thresholds, classify, critical_radius_scan, sweep
from .threed_check import conormal_first_component, eval_B, proportionality_test
