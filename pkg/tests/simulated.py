"""Synthetic elections: daily vote-share paths and their fair-value paths."""

import math
from datetime import date, timedelta

import numpy as np

from martingale_forecast.audit import DAYS_PER_YEAR
from martingale_forecast.numerics import SeedSpec, generator
from martingale_forecast.pricing import price_binary
from martingale_forecast.process import simulate_y_paths

START = date(2016, 8, 9)


def elections(n, y0=0.55, sigma=1.0, days=91, steps_per_day=10, seed=1):
    """Daily shares on days 0..days-1 and the outcome on election day.

    Returns ``(dates, election_date, shares, horizons, outcomes)`` with
    ``shares`` of shape ``(n, days)``.
    """
    tau = days / DAYS_PER_YEAR
    dt = tau / (days * steps_per_day)
    ens = simulate_y_paths(y0, sigma, tau, dt, n, SeedSpec(seed), record_every=steps_per_day)
    shares = np.concatenate([np.full((n, 1), y0), ens.paths[:, :-1]], axis=1)
    outcomes = (ens.terminal_values >= 0.5).astype(int)
    dates = [START + timedelta(days=i) for i in range(days)]
    election = START + timedelta(days=days)
    horizons = np.array([(election - d).days / DAYS_PER_YEAR for d in dates])
    return dates, election, shares, horizons, outcomes


def fair_paths(shares, horizons, sigma):
    return price_binary(shares, sigma, horizons[None, :])


def biased(fair, delta, seed=7):
    """Publish fair value plus a random +/- delta, clipped to [0, 1]."""
    gen = generator(SeedSpec(seed, stream_id=5))
    eps = np.where(gen.random(fair.shape) < 0.5, -1.0, 1.0)
    return np.clip(fair + delta * eps, 0.0, 1.0)


def fair_vol_along(shares, horizons, sigma, threshold=0.5):
    """Model vol of the fair value at each point, by the chain rule.

    ``dB = B'(y) s(y) dW`` and for the erf sigmoid the product collapses to
    ``sigma exp(-z^2) / (sqrt(pi) sqrt(1 - exp(-2k)))`` with ``z`` the
    standardized distance to the threshold in X space.
    """
    from scipy import special

    k = sigma * sigma * horizons
    x = special.erfinv(2.0 * shares - 1.0)
    xl = special.erfinv(2.0 * threshold - 1.0)
    d = np.sqrt(-np.expm1(-2.0 * k))
    z = (xl * np.exp(-k) - x) / d
    return sigma * np.exp(-z * z) / (math.sqrt(math.pi) * d)
