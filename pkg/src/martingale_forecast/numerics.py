"""Special functions, quadrature and the seeded Gaussian source.

The error-function family is evaluated through :mod:`scipy.special`
(Cephes/Boost kernels) behind argument validation.  Quadrature goes
through QUADPACK's adaptive Gauss-Kronrod driver.  Random numbers come
from the Philox counter-based generator keyed by ``(master_seed,
stream_id)``, so a stream is addressed rather than advanced and the
draws do not depend on how work is split between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _quadpack
from scipy import special

from .errors import ConvergenceError, DomainError

#: Vote shares are kept this far from {0, 1} before inverting the sigmoid.
SHARE_EPS = 1e-12

_U64 = 1 << 64


def _as_float_array(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return arr


def _scalar_or_array(out, like):
    if np.ndim(like) == 0:
        return float(out)
    return out


def erf(x):
    """Error function, ``2/sqrt(pi) * int_0^x exp(-t^2) dt``."""
    arr = _as_float_array(x, "x")
    return _scalar_or_array(special.erf(arr), x)


def erfc(x):
    """Complementary error function without the ``1 - erf`` cancellation."""
    arr = _as_float_array(x, "x")
    return _scalar_or_array(special.erfc(arr), x)


def erfinv(p):
    """Inverse of :func:`erf` on the open interval (-1, 1)."""
    arr = _as_float_array(p, "p")
    if np.any(np.abs(arr) >= 1.0):
        raise DomainError(f"erfinv needs |p| < 1, got {p!r}")
    return _scalar_or_array(special.erfinv(arr), p)


def erfcinv(q):
    """Inverse of :func:`erfc` on (0, 2); accurate for ``q`` near 0."""
    arr = _as_float_array(q, "q")
    if np.any((arr <= 0.0) | (arr >= 2.0)):
        raise DomainError(f"erfcinv needs 0 < q < 2, got {q!r}")
    return _scalar_or_array(special.erfcinv(arr), q)


def clamp_share(y, eps=SHARE_EPS):
    """Clip vote shares into ``[eps, 1 - eps]``."""
    arr = np.clip(np.asarray(y, dtype=float), eps, 1.0 - eps)
    return _scalar_or_array(arr, y)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    points=None,
    limit: int = 500,
) -> QuadratureResult:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``.

    The 21-point Kronrod rule never samples the interval ends, so
    integrable endpoint singularities are tolerated.  ``points`` are
    interior breakpoints (peaks, kinks) handed to the subdivision.

    Raises :class:`ConvergenceError` when the subdivision budget runs out
    before the error estimate falls under ``tol``; the exception carries
    the best estimate reached.
    """
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise DomainError(f"integrate needs finite a < b, got ({a}, {b})")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if points is not None:
        points = sorted(p for p in points if a < p < b) or None
    out = _quadpack.quad(
        f, a, b, epsabs=tol, epsrel=tol, limit=limit, points=points, full_output=1
    )
    value, err, info = out[0], out[1], out[2]
    if len(out) > 3 and err > max(tol, tol * abs(value)):
        raise ConvergenceError(
            f"quadrature did not reach tol={tol:g}: {out[3]}", best=value, abs_error=err
        )
    return QuadratureResult(float(value), float(abs(err)), int(info["neval"]))


@dataclass(frozen=True)
class SeedSpec:
    """Address of a Gaussian stream: ``(master_seed, stream_id)``."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= v < _U64:
                raise DomainError(f"{name} must be an integer in [0, 2**64), got {v!r}")

    def child(self, stream_id: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, stream_id)


def generator(seed: SeedSpec, block: int = 0, lane: int = 0) -> np.random.Generator:
    """Generator positioned at ``(block, lane)`` inside the stream of ``seed``.

    Blocks and lanes occupy the two high words of Philox's 256-bit
    counter; the low words are left for the draws themselves, so
    distinct ``(block, lane)`` pairs never overlap in practice.
    """
    key = np.array([seed.master_seed, seed.stream_id], dtype=np.uint64)
    counter = np.array([0, 0, block, lane], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def gaussian_stream(seed: SeedSpec, n: int) -> np.ndarray:
    """First ``n`` standard normals of the stream addressed by ``seed``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return generator(seed).standard_normal(int(n))
