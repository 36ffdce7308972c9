"""Time-slice law of the vote share and quadrature against it.

With ``k = sigma^2 tau`` the shadow state at the horizon is Gaussian with
mean ``x0 e^k`` and variance ``(e^{2k} - 1)/2``.  Pushing that law
through ``S`` gives the share density

    phi(y) = exp(x^2 - (coth(k) - 1)/2 * (x - x0 e^k)^2) / sqrt(e^{2k} - 1),
    x = erfinv(2y - 1).

For ``e^{2k} > 2`` the density blows up (integrably) at both ends of
(0, 1).  Expectations past that point are computed in X space against the
Gaussian, where the integrand stays smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import integrate
from .process import SigmoidVariant, sigmoid_inverse, sigmoid_map

X_SPACE_ABOVE = math.log(2.0) / 2.0
QUAD_TOL = 1e-10
_TAIL_SDS = 12.0
_ERF = SigmoidVariant.ERF


@dataclass(frozen=True)
class TimeSliceParams:
    y0: float
    sigma: float
    tau: float

    def __post_init__(self):
        if not 0.0 < self.y0 < 1.0:
            raise DomainError(f"y0 must lie in (0, 1), got {self.y0}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"sigma must be > 0, got {self.sigma}")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise DomainError(f"tau must be > 0, got {self.tau}")

    @property
    def k(self) -> float:
        return self.sigma * self.sigma * self.tau

    @property
    def x0(self) -> float:
        return sigmoid_inverse(_ERF, self.y0)

    @property
    def mean_x(self) -> float:
        return self.x0 * math.exp(self.k)

    @property
    def var_x(self) -> float:
        return math.expm1(2.0 * self.k) / 2.0

    @property
    def sd_x(self) -> float:
        return math.sqrt(self.var_x)


def _inside(y):
    y = np.asarray(y, dtype=float)
    if np.any((y < 0.0) | (y > 1.0)):
        raise DomainError("y must lie in [0, 1]")
    inside = (y > 0.0) & (y < 1.0)
    return y, inside, np.where(inside, y, 0.5)


def timeslice_density(y, params: TimeSliceParams):
    """phi(y) in the closed form above; 0 at y in {0, 1}.

    ``(coth(k) - 1)/2`` is evaluated as ``1/(e^{2k} - 1)``, its exact
    equivalent that survives large ``k``.
    """
    y, inside, safe = _inside(y)
    x = sigmoid_inverse(_ERF, safe)
    k = params.k
    em1 = math.expm1(2.0 * k)
    half_coth_m1 = 1.0 / em1
    expo = x * x - half_coth_m1 * (x - params.x0 * math.exp(k)) ** 2
    with np.errstate(over="ignore"):
        out = np.where(inside, np.exp(expo) / math.sqrt(em1), 0.0)
    return float(out) if out.ndim == 0 else out


def timeslice_density_cov(y, params: TimeSliceParams):
    """phi(y) rebuilt as Gaussian pdf of X at S^{-1}(y) times dS^{-1}/dy."""
    y, inside, safe = _inside(y)
    x = sigmoid_inverse(_ERF, safe)
    v = params.var_x
    gauss = np.exp(-((x - params.mean_x) ** 2) / (2.0 * v)) / math.sqrt(2.0 * math.pi * v)
    with np.errstate(over="ignore"):
        jac = math.sqrt(math.pi) * np.exp(x * x)
        out = np.where(inside, gauss * jac, 0.0)
    return float(out) if out.ndim == 0 else out


def _expect(g, params: TimeSliceParams, y_lower=None, tol=QUAD_TOL):
    """E[g(Y_tau); Y_tau >= y_lower] by adaptive quadrature."""
    m, sd = params.mean_x, params.sd_x
    lo, hi = m - _TAIL_SDS * sd, m + _TAIL_SDS * sd
    if y_lower is not None:
        lo = max(lo, sigmoid_inverse(_ERF, y_lower))
    if lo >= hi:
        return 0.0
    if params.k > X_SPACE_ABOVE:
        v = params.var_x
        norm = 1.0 / math.sqrt(2.0 * math.pi * v)

        def fx(x):
            return g(sigmoid_map(_ERF, x)) * norm * math.exp(-((x - m) ** 2) / (2.0 * v))

        return integrate(fx, lo, hi, tol=tol, points=[m]).value

    # y-space, split at 1/2; the upper half runs in u = 1 - y against the
    # mirrored slice so shares near 1 keep full resolution.
    total = 0.0
    if lo < 0.0:
        a, b = sigmoid_map(_ERF, lo), sigmoid_map(_ERF, min(hi, 0.0))
        if a < b:
            total += integrate(lambda y: g(y) * timeslice_density(y, params), a, b,
                               tol=tol, points=[sigmoid_map(_ERF, m)]).value
    if hi > 0.0:
        mirror = TimeSliceParams(1.0 - params.y0, params.sigma, params.tau)
        a, b = sigmoid_map(_ERF, -hi), sigmoid_map(_ERF, -max(lo, 0.0))
        if a < b:
            total += integrate(lambda u: g(1.0 - u) * timeslice_density(u, mirror), a, b,
                               tol=tol, points=[sigmoid_map(_ERF, -m)]).value
    return total


def total_mass(params: TimeSliceParams) -> float:
    return _expect(lambda y: 1.0, params)


def density_mean(params: TimeSliceParams) -> float:
    """E[Y_tau] by quadrature; the martingale property makes it ``y0``."""
    return _expect(lambda y: y, params)


def density_variance(params: TimeSliceParams) -> float:
    """Var[Y_tau] around ``y0`` by quadrature (no closed form exists)."""
    y0 = params.y0
    return _expect(lambda y: (y - y0) ** 2, params)


def price_by_quadrature(params: TimeSliceParams, threshold=0.5) -> float:
    """``int_threshold^1 phi(y) dy``: the binary price without erfc."""
    if not 0.0 < threshold < 1.0:
        raise DomainError(f"threshold must lie in (0, 1), got {threshold}")
    return min(1.0, max(0.0, _expect(lambda y: 1.0, params, y_lower=threshold)))


def density_mode(params: TimeSliceParams, n=20001) -> float:
    """Location of the interior maximum of phi on a dense grid in X space."""
    m, sd = params.mean_x, params.sd_x
    x = np.linspace(m - 8 * sd, m + 8 * sd, n)
    y = sigmoid_map(_ERF, x)
    ok = (y > 0) & (y < 1)
    vals = timeslice_density(y[ok], params)
    return float(y[ok][np.argmax(vals)])
