"""The shadow process X, its bounded dual Y = S(X), and their simulation.

X follows the mean-repelling diffusion ``dX = sigma^2 X dt + sigma dW``.
Under the erf sigmoid ``S(x) = 1/2 + erf(x)/2`` the image ``Y = S(X)`` is
driftless, ``dY = s(Y) dW`` with ``s(y) = sigma/sqrt(pi) exp(-S^{-1}(y)^2)``.

Simulations split paths into fixed blocks of :data:`BLOCK_PATHS`.  Block
``b`` draws from ``generator(seed, block=b, lane=lane)``, so the output
depends on the seed alone and not on how many workers consumed the
blocks.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from .errors import DomainError
from .numerics import SHARE_EPS, SeedSpec, generator

BLOCK_PATHS = 1 << 16
DEFAULT_DT = 1e-4
_SQRT_PI = math.sqrt(math.pi)


class SigmoidVariant(enum.Enum):
    ERF = "erf"
    LOGISTIC = "logistic"


class MartingaleSide(enum.Enum):
    X_IS_MARTINGALE = "x"
    Y_IS_MARTINGALE = "y"


@dataclass(frozen=True)
class ShadowState:
    x: float
    time: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.x):
            raise DomainError("shadow state must be finite")

    def share(self, variant=SigmoidVariant.ERF) -> float:
        return sigmoid_map(variant, self.x)


@dataclass
class PathEnsemble:
    """Terminal vote shares of a batch of simulated paths.

    ``times``/``paths`` are filled when intermediate states were recorded;
    ``brownian`` holds each path's summed Wiener increment ``W_T`` when
    requested (used as a control variate in drift estimation).
    """

    terminal_values: np.ndarray
    n_paths: int
    dt: float
    seed: SeedSpec
    scheme: str
    y0: float
    sigma: float
    horizon: float
    times: Optional[np.ndarray] = None
    paths: Optional[np.ndarray] = None
    brownian: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        tv = self.terminal_values
        if len(tv) != self.n_paths:
            raise ValueError("n_paths does not match terminal_values")
        if np.any((tv < 0.0) | (tv > 1.0)):
            raise ValueError("terminal values must lie in [0, 1]")

    def mean(self) -> float:
        return float(self.terminal_values.mean())

    def std_error(self) -> float:
        return float(self.terminal_values.std(ddof=1) / math.sqrt(self.n_paths))

    def prob_at_least(self, level: float) -> float:
        return float(np.mean(self.terminal_values >= level))


@dataclass
class ShadowEnsemble:
    """Terminal values of stepped X paths (not clamped, not mapped)."""

    terminal_values: np.ndarray
    brownian: np.ndarray
    x0: float
    sigma: float
    horizon: float
    dt: float
    seed: SeedSpec
    drift: str


def _check_share(y, name="y"):
    arr = np.asarray(y, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError(f"{name} must lie strictly inside (0, 1), got {y!r}")
    return arr


def _check_nonneg(value, name):
    if not math.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be a finite number >= 0, got {value!r}")


def sigmoid_map(variant, x):
    """S(x): the erf sigmoid (variant a) or the logistic (variant b)."""
    variant = SigmoidVariant(variant)
    arr = np.asarray(x, dtype=float)
    if variant is SigmoidVariant.ERF:
        out = 0.5 * special.erfc(-arr)
    else:
        out = special.expit(arr)
    return float(out) if np.ndim(x) == 0 else out


def sigmoid_inverse(variant, y):
    """S^{-1}(y) for ``y`` in (0, 1).

    The erf branch evaluates ``erfinv(2y - 1)`` through ``erfcinv`` on
    whichever side of 1/2 keeps the argument exact, so shares near 0 or 1
    keep full relative precision.
    """
    variant = SigmoidVariant(variant)
    arr = _check_share(y)
    if variant is SigmoidVariant.ERF:
        lo = arr < 0.5
        out = np.where(lo, -special.erfcinv(2.0 * np.where(lo, arr, 0.25)),
                       special.erfcinv(2.0 * (1.0 - np.where(lo, 0.75, arr))))
    else:
        out = special.logit(arr)
    return float(out) if np.ndim(y) == 0 else out


def instantaneous_vol(y, sigma, variant=SigmoidVariant.ERF):
    """Diffusion coefficient s(y) of the driftless share process.

    Variant a gives ``sigma/sqrt(pi) * exp(-S^{-1}(y)^2)``; variant b gives
    ``sigma * y (1 - y)``.  Both vanish continuously at 0 and 1.
    """
    variant = SigmoidVariant(variant)
    arr = np.asarray(y, dtype=float)
    inside = (arr > 0.0) & (arr < 1.0)
    safe = np.where(inside, arr, 0.5)
    if variant is SigmoidVariant.ERF:
        x = special.erfinv(2.0 * safe - 1.0)
        out = sigma / _SQRT_PI * np.exp(-x * x)
    else:
        out = sigma * safe * (1.0 - safe)
    out = np.where(inside, out, 0.0)
    return float(out) if np.ndim(y) == 0 else out


def dual_drift(variant, martingale_side, value, sigma):
    """Ito drift of one side of ``Y = S(X)`` when the other side is driftless.

    ``Y_IS_MARTINGALE``: ``value`` is x, returns the drift of X
    (``sigma^2 x`` or ``sigma^2/2 tanh(x/2)``).
    ``X_IS_MARTINGALE``: ``value`` is y, returns the drift of Y, which is
    ``sigma^2/2 * S''(S^{-1}(y))``: ``-sigma^2 x exp(-x^2)/sqrt(pi)`` with
    ``x = S^{-1}(y)`` for the erf sigmoid, ``sigma^2/2 y (y-1)(2y-1)`` for
    the logistic.
    """
    variant = SigmoidVariant(variant)
    side = MartingaleSide(martingale_side)
    s2 = sigma * sigma
    if side is MartingaleSide.Y_IS_MARTINGALE:
        x = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError("x must be finite")
        out = s2 * x if variant is SigmoidVariant.ERF else 0.5 * s2 * np.tanh(x / 2.0)
    else:
        y = _check_share(value)
        if variant is SigmoidVariant.ERF:
            x = sigmoid_inverse(variant, y)
            out = -s2 * x * np.exp(-x * x) / _SQRT_PI
        else:
            out = 0.5 * s2 * y * (y - 1.0) * (2.0 * y - 1.0)
    return float(out) if np.ndim(value) == 0 else out


def quadratic_vol_gap(variant=SigmoidVariant.ERF, lo=0.05, hi=0.95, n=181):
    """Largest gap between ``s(y)/s(1/2)`` and ``4 y (1 - y)`` on [lo, hi]."""
    y = np.linspace(lo, hi, n)
    ratio = instantaneous_vol(y, 1.0, variant) / instantaneous_vol(0.5, 1.0, variant)
    return float(np.max(np.abs(ratio - 4.0 * y * (1.0 - y))))


def _n_steps(horizon, dt):
    if not (horizon > 0 and math.isfinite(horizon)):
        raise DomainError(f"horizon must be > 0, got {horizon!r}")
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt!r}")
    if dt > horizon:
        raise DomainError(f"dt={dt} exceeds horizon={horizon}")
    return max(1, math.ceil(horizon / dt - 1e-9))


def _blocks(n_paths):
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    starts = range(0, n_paths, BLOCK_PATHS)
    return [(b, s, min(BLOCK_PATHS, n_paths - s)) for b, s in enumerate(starts)]


def _run_blocks(fn, n_paths, workers):
    blocks = _blocks(n_paths)
    if workers and workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda blk: fn(*blk), blocks))
    return [fn(*blk) for blk in blocks]


def block_normals(seed: SeedSpec, n_paths: int, lane: int = 0) -> np.ndarray:
    """One standard normal per path, drawn block by block."""
    parts = _run_blocks(
        lambda b, _s, size: generator(seed, block=b, lane=lane).standard_normal(size),
        n_paths, 1,
    )
    return np.concatenate(parts)


def x_transition_sample(x0, sigma, horizon, n_paths, seed: SeedSpec, lane=0):
    """Exact draws of X_T given X_0 = x0.

    X_T is Gaussian with mean ``x0 exp(sigma^2 tau)`` and variance
    ``(exp(2 sigma^2 tau) - 1)/2``.
    """
    _check_nonneg(sigma, "sigma")
    if not horizon > 0:
        raise DomainError("horizon must be > 0")
    k = sigma * sigma * horizon
    mean = x0 * math.exp(k)
    sd = math.sqrt(math.expm1(2.0 * k) / 2.0)
    return mean + sd * block_normals(seed, n_paths, lane)


def sample_y_exact(y0, sigma, horizon, n_paths, seed: SeedSpec, lane=0) -> PathEnsemble:
    """Terminal shares by exact X sampling mapped through S."""
    _check_share(y0, "y0")
    x0 = sigmoid_inverse(SigmoidVariant.ERF, y0)
    x = x_transition_sample(x0, sigma, horizon, n_paths, seed, lane)
    y = np.clip(sigmoid_map(SigmoidVariant.ERF, x), SHARE_EPS, 1.0 - SHARE_EPS)
    return PathEnsemble(y, n_paths, horizon, seed, "exact_x_mapped", y0, sigma, horizon)


def _euler_y_block(y0, sigma, h, n_steps, gen, size, variant, record_every, keep_brownian):
    y = np.full(size, float(y0))
    sq = math.sqrt(h)
    w = np.zeros(size) if keep_brownian else None
    snaps = []
    erf_variant = variant is SigmoidVariant.ERF
    coef = sigma * sq / _SQRT_PI if erf_variant else sigma * sq
    for step in range(1, n_steps + 1):
        z = gen.standard_normal(size)
        if erf_variant:
            x = special.erfinv(2.0 * y - 1.0)
            y += coef * np.exp(-x * x) * z
        else:
            y += coef * y * (1.0 - y) * z
        np.clip(y, SHARE_EPS, 1.0 - SHARE_EPS, out=y)
        if w is not None:
            w += z
        if record_every and step % record_every == 0:
            snaps.append(y.copy())
    if w is not None:
        w *= sq
    return y, w, snaps


def simulate_y_paths(
    y0,
    sigma,
    horizon,
    dt=DEFAULT_DT,
    n_paths=10_000,
    seed: SeedSpec = SeedSpec(0),
    variant=SigmoidVariant.ERF,
    record_every: Optional[int] = None,
    keep_brownian=False,
    lane=0,
    workers=1,
) -> PathEnsemble:
    """Euler-Maruyama paths of ``dY = s(Y) dW``.

    The horizon is cut into ``ceil(horizon/dt)`` equal steps, so the step
    used never exceeds ``dt``.  After each step shares are clipped to
    ``[1e-12, 1 - 1e-12]``.  ``record_every=m`` stores the state every
    ``m`` steps (the terminal state is always the last column when
    ``m`` divides the step count).
    """
    variant = SigmoidVariant(variant)
    _check_share(y0, "y0")
    _check_nonneg(sigma, "sigma")
    n_steps = _n_steps(horizon, dt)
    h = horizon / n_steps

    def run(block, _start, size):
        gen = generator(seed, block=block, lane=lane)
        return _euler_y_block(y0, sigma, h, n_steps, gen, size, variant,
                              record_every, keep_brownian)

    parts = _run_blocks(run, n_paths, workers)
    terminal = np.concatenate([p[0] for p in parts])
    brownian = np.concatenate([p[1] for p in parts]) if keep_brownian else None
    times = paths = None
    if record_every:
        paths = np.concatenate([np.stack(p[2], axis=1) for p in parts], axis=0)
        times = h * record_every * np.arange(1, paths.shape[1] + 1)
    return PathEnsemble(terminal, n_paths, h, seed, "euler_y", float(y0), sigma,
                        horizon, times, paths, brownian)


def simulate_x_paths(
    x0,
    sigma,
    horizon,
    dt=DEFAULT_DT,
    n_paths=10_000,
    seed: SeedSpec = SeedSpec(0),
    drift="mean_repelling",
    lane=0,
    workers=1,
) -> ShadowEnsemble:
    """Euler-Maruyama paths of X.

    ``drift="mean_repelling"`` steps ``dX = sigma^2 X dt + sigma dW``;
    ``drift="none"`` steps the driftless ``dX = sigma dW``.
    """
    if drift not in ("mean_repelling", "none"):
        raise DomainError(f"unknown drift {drift!r}")
    _check_nonneg(sigma, "sigma")
    n_steps = _n_steps(horizon, dt)
    h = horizon / n_steps
    sq = math.sqrt(h)
    growth = 1.0 + sigma * sigma * h if drift == "mean_repelling" else 1.0

    def run(block, _start, size):
        gen = generator(seed, block=block, lane=lane)
        x = np.full(size, float(x0))
        w = np.zeros(size)
        for _ in range(n_steps):
            z = gen.standard_normal(size)
            x = growth * x + sigma * sq * z
            w += z
        return x, w * sq

    parts = _run_blocks(run, n_paths, workers)
    return ShadowEnsemble(
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
        float(x0), sigma, horizon, h, seed, drift,
    )
