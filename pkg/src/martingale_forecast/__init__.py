"""Arbitrage-free pricing and martingale audits of binary election forecasts."""

from .errors import AlignmentError, ConvergenceError, DomainError, PreconditionError
from .numerics import QuadratureResult, SeedSpec, erf, erfc, erfinv, gaussian_stream, integrate
from .pricing import (
    BinaryPrice,
    PricingInputs,
    VolSpec,
    price_binary,
    price_binary_from_s,
    price_binary_xspace,
    price_curve,
    s_from_sigma,
    sigma_from_s,
)
from .process import (
    MartingaleSide,
    PathEnsemble,
    ShadowState,
    SigmoidVariant,
    dual_drift,
    instantaneous_vol,
    sample_y_exact,
    sigmoid_inverse,
    sigmoid_map,
    simulate_x_paths,
    simulate_y_paths,
    x_transition_sample,
)
from .density import (
    TimeSliceParams,
    density_mean,
    density_variance,
    price_by_quadrature,
    timeslice_density,
)
from .audit import (
    AuditReport,
    ForecastPoint,
    ForecastSeries,
    brier_score,
    dutch_book_pnl,
    fair_value_series,
    l1_score,
    martingale_audit,
    realized_forecast_vol,
)
from .multicandidate import ShareVector, simulate_shares, win_probabilities

__version__ = "0.1.0"
