"""Nested-residual share processes for contests with more than two candidates.

Candidate 1's share follows the bounded share diffusion on [0, 1].
Candidate ``i`` (``1 < i < n``) takes a fraction ``f_i`` of what the
earlier candidates left over, ``share_i = remaining_i * f_i``, where
``f_i`` follows the same diffusion on its own random stream.  The last
candidate gets the residual.  The construction depends on the order
candidates are listed in, and reports keep that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence

import numpy as np

from .errors import DomainError
from .numerics import SeedSpec
from .process import DEFAULT_DT, simulate_y_paths

SUM_TOL = 1e-9


@dataclass(frozen=True)
class ShareVector:
    shares: Sequence[float]
    candidate_ids: Optional[Sequence[str]] = None

    def __post_init__(self):
        shares = tuple(float(s) for s in self.shares)
        object.__setattr__(self, "shares", shares)
        ids = self.candidate_ids
        if ids is None:
            ids = tuple(f"c{i + 1}" for i in range(len(shares)))
        object.__setattr__(self, "candidate_ids", tuple(str(c) for c in ids))
        if len(self.candidate_ids) != len(shares):
            raise DomainError("one candidate id per share")
        if any(not 0.0 <= s <= 1.0 for s in shares):
            raise DomainError("shares must lie in [0, 1]")
        if abs(sum(shares) - 1.0) > SUM_TOL:
            raise DomainError(f"shares sum to {sum(shares)!r}, not 1")

    def __len__(self):
        return len(self.shares)


@dataclass
class ShareEnsemble:
    """Terminal share vectors, one row per path."""

    shares: np.ndarray
    candidate_ids: tuple
    seed: SeedSpec
    dt: float

    def __iter__(self) -> Iterator[ShareVector]:
        for row in self.shares:
            yield ShareVector(row, self.candidate_ids)

    def __len__(self):
        return self.shares.shape[0]


@dataclass
class WinReport:
    candidate_ids: tuple
    probabilities: np.ndarray
    std_errors: np.ndarray
    rule: str
    n_paths: int

    def to_dict(self):
        return {
            "ordering": list(self.candidate_ids),
            "rule": self.rule,
            "n_paths": self.n_paths,
            "probabilities": dict(zip(self.candidate_ids, map(float, self.probabilities))),
            "std_errors": dict(zip(self.candidate_ids, map(float, self.std_errors))),
        }


def _fraction_paths(f0, sigma, horizon, dt, n_paths, seed, lane, workers):
    if f0 <= 0.0 or f0 >= 1.0:
        # s(0) = s(1) = 0: the fraction never moves
        return np.full(n_paths, float(min(max(f0, 0.0), 1.0)))
    ens = simulate_y_paths(f0, sigma, horizon, dt, n_paths, seed, lane=lane, workers=workers)
    return ens.terminal_values


def simulate_shares(
    initial: ShareVector,
    sigma,
    horizon,
    dt=DEFAULT_DT,
    n_paths=10_000,
    seed: SeedSpec = SeedSpec(0),
    workers=1,
) -> ShareEnsemble:
    n = len(initial)
    if n < 2:
        raise DomainError("need at least two candidates")
    init = initial.shares
    out = np.empty((n_paths, n))
    remaining = np.ones(n_paths)
    remaining0 = 1.0
    for i in range(n - 1):
        f0 = init[i] / remaining0 if remaining0 > 0 else 0.0
        f = _fraction_paths(f0, sigma, horizon, dt, n_paths, seed, i, workers)
        out[:, i] = remaining * f
        remaining = remaining * (1.0 - f)
        remaining0 -= init[i]
    out[:, n - 1] = remaining
    return ShareEnsemble(out, initial.candidate_ids, seed, dt)


def win_probabilities(
    initial: ShareVector,
    sigma,
    horizon,
    dt=DEFAULT_DT,
    n_paths=10_000,
    seed: SeedSpec = SeedSpec(0),
    rule="plurality",
    threshold=0.5,
    workers=1,
) -> WinReport:
    """Monte Carlo win probabilities under ``plurality`` or ``majority``.

    Plurality credits the strict maximum; a tie splits the path evenly
    among the tied candidates.  Majority credits every candidate whose
    share reaches ``threshold``.
    """
    ens = simulate_shares(initial, sigma, horizon, dt, n_paths, seed, workers)
    x = ens.shares
    if rule == "plurality":
        top = x.max(axis=1, keepdims=True)
        is_top = x == top
        credit = is_top / is_top.sum(axis=1, keepdims=True)
        label = "plurality"
    elif rule == "majority":
        if not 0.0 < threshold < 1.0:
            raise DomainError("majority threshold must lie in (0, 1)")
        credit = (x >= threshold).astype(float)
        label = f"majority>={threshold:g}"
    else:
        raise DomainError(f"unknown rule {rule!r}")
    p = credit.mean(axis=0)
    se = credit.std(axis=0, ddof=1) / math.sqrt(n_paths) if n_paths > 1 else np.zeros_like(p)
    return WinReport(ens.candidate_ids, p, se, label, n_paths)
