"""Tempered fractional derivatives and drifted Brownian motion numerics.

A numerical library around the tempered fractional calculus of order
alpha in (0, 1) with tempering rate eta >= 0: pointwise Marchaud/Weyl/Riesz
operators, order-1/2 time-fractional derivatives, the spectral solver for
the tempered Riesz diffusion, closed-form transition densities of drifted
and folded drifted Brownian motion, Monte Carlo samplers, and residual
checks of the governing fractional equations.
"""

from .core import (
    DriftSpec,
    Grid1D,
    NumericalError,
    QuadConfig,
    SampledField,
    TemperParams,
    make_grid,
    sample_on_grid,
)
from .montecarlo import (
    EstimateWithError,
    RejectionInfo,
    SampleBatch,
    drifted_batch,
    empirical_laplace,
    inverse_half_batch,
    ks_critical_value,
    ks_statistic,
    reflected_batch,
    sample_drifted_endpoint,
    sample_inverse_stable_half,
    sample_positive_stable,
    sample_reflected_endpoint,
    sample_stable_half,
    sample_tempered_subordinator,
    stable_half_batch,
    tempered_subordinator_batch,
)
from .operators import (
    TimeSeries,
    caputo_half,
    evaluate_on_grid,
    marchaud_tempered,
    riesz_tempered_pointwise,
    rl_half,
    tempered_rl_half,
    weyl_minus_tempered,
    weyl_plus_tempered,
)
from .processes import (
    EvalPoint,
    drifted_density,
    folded_drifted_density,
    g_laplace,
    heat_kernel,
    mittag_leffler_half,
    sign_weight,
)
from .spectral import (
    SpectralField,
    diffusion_grid,
    laplace_symbol,
    riesz_apply,
    riesz_constant,
    riesz_multiplier,
    riesz_multiplier_expanded,
    solve_riesz_diffusion,
    spectral_field,
)
from .verify import (
    ResidualReport,
    check_g_half_derivative,
    check_initial_concentration,
    check_weyl_decomposition,
    residual_theorem1,
    residual_theorem2,
)

__version__ = "0.1.0"
