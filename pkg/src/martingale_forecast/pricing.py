"""Closed-form arbitrage value of a binary election forecast.

A share ``y0`` is mapped to the shadow state ``x0 = erfinv(2 y0 - 1)``; the
binary pays when ``X_T`` ends above ``x_l = erfinv(2 l - 1)``, where ``l``
is the winning threshold expressed as a vote share.  With
``k = sigma^2 tau``,

    B = 1/2 erfc((x_l - x0 e^k) / sqrt(e^{2k} - 1)).

The implementation divides through by ``e^k``,
``(x_l e^{-k} - x0) / sqrt(1 - e^{-2k})``, which is the same number but
never overflows, so very large ``k`` needs no special branch.

Vote-share volatility ``s`` enters through the delta-method link with
``sigma``.  Here ``s`` is the standard deviation of the share accumulated
over the remaining horizon; see :func:`sigma_from_s`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .errors import DomainError
from .numerics import SHARE_EPS, clamp_share
from .process import SigmoidVariant, sigmoid_inverse

TWO_PI = 2.0 * math.pi


def _share(y, name):
    arr = np.asarray(y, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError(f"{name} must lie strictly inside (0, 1), got {y!r}")
    return clamp_share(arr, SHARE_EPS)


def _nonneg(v, name):
    arr = np.asarray(v, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be >= 0, got {v!r}")
    return arr


def _positive(v, name):
    arr = np.asarray(v, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be a finite number > 0, got {v!r}")
    return arr


def _shadow(y):
    return sigmoid_inverse(SigmoidVariant.ERF, y)


def _out(arr, *inputs):
    if all(np.ndim(v) == 0 for v in inputs):
        return float(arr)
    return arr


@dataclass(frozen=True)
class VolSpec:
    """Either the vote-share vol ``s`` or the shadow vol ``sigma``, not both."""

    vote_vol: Optional[float] = None
    shadow_vol: Optional[float] = None

    def __post_init__(self):
        given = [v for v in (self.vote_vol, self.shadow_vol) if v is not None]
        if len(given) != 1:
            raise DomainError("exactly one of vote_vol / shadow_vol must be set")
        if not given[0] >= 0:
            raise DomainError("volatility must be >= 0")

    def sigma(self, y0, horizon):
        if self.shadow_vol is not None:
            return self.shadow_vol
        return sigma_from_s(self.vote_vol, y0, horizon)


@dataclass(frozen=True)
class BinaryPrice:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise DomainError(f"price {self.value} outside [0, 1]")

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class PricingInputs:
    y0: float
    horizon: float
    vol: VolSpec
    threshold: float = 0.5

    def __post_init__(self):
        _share(self.y0, "y0")
        _share(self.threshold, "threshold")
        _positive(self.horizon, "horizon")

    @property
    def sigma(self) -> float:
        return float(self.vol.sigma(self.y0, self.horizon))

    def price(self) -> BinaryPrice:
        return BinaryPrice(price_binary(self.y0, self.sigma, self.horizon, self.threshold))


def _survival(x0, x_l, k):
    """P(X_T >= x_l) for the shadow process after total variance budget ``k``.

    ``k == 0`` is the step function with ties at one half.
    """
    x0, x_l, k = np.broadcast_arrays(np.asarray(x0, float), np.asarray(x_l, float),
                                     np.asarray(k, float))
    with np.errstate(divide="ignore", invalid="ignore"):
        decay = np.exp(-k)
        scale = np.sqrt(-np.expm1(-2.0 * k))
        arg = (x_l * decay - x0) / scale
        price = 0.5 * special.erfc(arg)
    step = np.where(x0 > x_l, 1.0, np.where(x0 < x_l, 0.0, 0.5))
    return np.where(k > 0, price, step)


def price_binary(y0, sigma, horizon, threshold=0.5):
    """Arbitrage value of the binary paying if the share ends >= ``threshold``.

    ``sigma`` is the annualized shadow volatility and ``horizon`` the time
    to the election in years.  ``sigma == 0`` or ``horizon == 0`` returns
    the step ``1{y0 > threshold}`` (one half on a tie).  Accepts scalars or
    broadcastable arrays.
    """
    y = _share(y0, "y0")
    l = _share(threshold, "threshold")
    s = _nonneg(sigma, "sigma")
    t = _nonneg(horizon, "horizon")
    out = _survival(_shadow(y), _shadow(l), s * s * t)
    return _out(out, y0, sigma, horizon, threshold)


def price_binary_xspace(x0, sigma, horizon, x_threshold):
    """P(X_T > x_threshold) for the Gaussian X slice (mean x0 e^k, var (e^{2k}-1)/2)."""
    x0a = np.asarray(x0, dtype=float)
    xl = np.asarray(x_threshold, dtype=float)
    if not (np.all(np.isfinite(x0a)) and np.all(np.isfinite(xl))):
        raise DomainError("shadow states must be finite")
    s = _nonneg(sigma, "sigma")
    t = _nonneg(horizon, "horizon")
    out = _survival(x0a, xl, s * s * t)
    return _out(out, x0, sigma, horizon, x_threshold)


def sigma_from_s(s, y0, horizon):
    """Shadow vol implied by the vote-share vol ``s`` over ``horizon``.

    ``sigma = sqrt(log(1 + 2 pi s^2 exp(2 x0^2))) / (sqrt(2) sqrt(tau))``
    with ``x0 = erfinv(2 y0 - 1)``.  The product ``sigma^2 tau`` depends on
    ``s`` and ``y0`` only.
    """
    s = _nonneg(s, "s")
    x0 = _shadow(_share(y0, "y0"))
    t = _positive(horizon, "horizon")
    out = np.sqrt(np.log1p(TWO_PI * s * s * np.exp(2.0 * x0 * x0)) / (2.0 * t))
    return _out(out, s, y0, horizon)


def s_from_sigma(sigma, y0, horizon):
    """Delta-method vote-share vol: ``sqrt(exp(-2 x0^2) (exp(2 sigma^2 tau) - 1) / (2 pi))``."""
    sig = _nonneg(sigma, "sigma")
    x0 = _shadow(_share(y0, "y0"))
    t = _positive(horizon, "horizon")
    out = np.sqrt(np.exp(-2.0 * x0 * x0) * np.expm1(2.0 * sig * sig * t) / TWO_PI)
    return _out(out, sigma, y0, horizon)


def total_variance_from_s(s, y0):
    """``sigma^2 tau`` implied by ``s``; defined even at zero horizon."""
    s = _nonneg(s, "s")
    x0 = _shadow(_share(y0, "y0"))
    return _out(0.5 * np.log1p(TWO_PI * s * s * np.exp(2.0 * x0 * x0)), s, y0)


def price_binary_from_s(y0, s, horizon, threshold=0.5):
    """:func:`price_binary` with ``sigma`` taken from :func:`sigma_from_s`."""
    return price_binary(y0, sigma_from_s(s, y0, horizon), horizon, threshold)


def price_curve(s, horizon, threshold=0.5, y_grid: Sequence[float] = ()):
    """``(y0, price)`` pairs over ``y_grid`` for one vote-share vol."""
    ys = np.asarray(list(y_grid), dtype=float)
    if ys.size == 0:
        return []
    prices = price_binary_from_s(ys, s, horizon, threshold)
    return [(float(y), float(p)) for y, p in zip(ys, np.atleast_1d(prices))]


def slope_at(s, horizon, y=0.5, threshold=0.5, h=1e-5):
    """Central-difference slope of the price curve in ``y0``."""
    up = price_binary_from_s(y + h, s, horizon, threshold)
    dn = price_binary_from_s(y - h, s, horizon, threshold)
    return (up - dn) / (2.0 * h)
