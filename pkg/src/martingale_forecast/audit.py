"""Scoring and arbitrage audit of published forecast series.

A forecaster publishes a probability at each date and, optionally, the
vote-share estimate behind it.  The audit prices each share with the
closed-form binary value, compares published numbers to those fair
values, and measures how much a trader could take off a forecaster whose
revisions are out of line with martingale pricing.

Vote-share vol ``s`` in this module is *annualized*: at a point with
``tau`` years left the pricing formula receives ``s * sqrt(tau)``, the
share vol accumulated over the remaining horizon.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from datetime import date
from typing import List, Optional, Sequence

import numpy as np

from .errors import AlignmentError, DomainError, PreconditionError
from .pricing import price_binary, total_variance_from_s

DAYS_PER_YEAR = 365.25
DEFAULT_TOL = 0.05
CSV_HEADER = ("date", "published_prob", "vote_share_est")


class SeriesFormatError(DomainError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def year_fraction(start: date, end: date) -> float:
    return (end - start).days / DAYS_PER_YEAR


@dataclass(frozen=True)
class ForecastPoint:
    date: date
    published_prob: float
    vote_share_est: Optional[float] = None


@dataclass
class ForecastSeries:
    points: List[ForecastPoint]
    election_date: date
    outcome: Optional[int] = None

    def __post_init__(self):
        self.points = list(self.points)
        if not self.points:
            raise PreconditionError("a forecast series needs at least one point")
        prev = None
        for p in self.points:
            if prev is not None and not p.date > prev:
                raise DomainError(f"dates must be strictly increasing ({p.date} after {prev})")
            prev = p.date
            if not 0.0 <= p.published_prob <= 1.0:
                raise DomainError(f"published probability {p.published_prob} outside [0, 1]")
            if p.vote_share_est is not None and not 0.0 < p.vote_share_est < 1.0:
                raise DomainError(f"vote share {p.vote_share_est} outside (0, 1)")
        if prev > self.election_date:
            raise DomainError("forecast dated after the election")
        if self.outcome not in (None, 0, 1):
            raise DomainError("outcome must be 0, 1 or None")

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_arrays(cls, dates, published, shares=None, election_date=None, outcome=None):
        if shares is None:
            shares = [None] * len(dates)
        if not len(dates) == len(published) == len(shares):
            raise AlignmentError("dates, probabilities and shares differ in length")
        pts = [ForecastPoint(d, float(p), None if s is None else float(s))
               for d, p, s in zip(dates, published, shares)]
        return cls(pts, election_date if election_date is not None else dates[-1], outcome)

    @property
    def dates(self):
        return [p.date for p in self.points]

    @property
    def published(self) -> np.ndarray:
        return np.array([p.published_prob for p in self.points])

    @property
    def shares(self):
        return [p.vote_share_est for p in self.points]

    def horizons(self) -> np.ndarray:
        """Years left until the election at each point."""
        return np.array([year_fraction(p.date, self.election_date) for p in self.points])

    def times(self) -> np.ndarray:
        """Years elapsed since the first point."""
        t0 = self.points[0].date
        return np.array([year_fraction(t0, p.date) for p in self.points])


def read_series_csv(text_or_file, election_date: date, outcome=None) -> ForecastSeries:
    """Parse the ``date,published_prob,vote_share_est`` CSV schema.

    Dates are ISO-8601; ``vote_share_est`` may be empty.  Any malformed
    row raises :class:`SeriesFormatError` naming its line number.
    """
    fh = io.StringIO(text_or_file) if isinstance(text_or_file, str) else text_or_file
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise SeriesFormatError("empty file", line=1) from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise SeriesFormatError(f"expected header {','.join(CSV_HEADER)}", line=1)
    points = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise SeriesFormatError(f"expected 3 fields, got {len(row)}", line=line)
        try:
            d = date.fromisoformat(row[0].strip())
            p = float(row[1])
            s = float(row[2]) if row[2].strip() else None
        except ValueError as exc:
            raise SeriesFormatError(str(exc), line=line) from None
        if not (math.isfinite(p) and 0.0 <= p <= 1.0):
            raise SeriesFormatError(f"published_prob {row[1]!r} not in [0, 1]", line=line)
        if s is not None and not 0.0 < s < 1.0:
            raise SeriesFormatError(f"vote_share_est {row[2]!r} not in (0, 1)", line=line)
        if points and d <= points[-1].date:
            raise SeriesFormatError("dates must be strictly increasing", line=line)
        if d > election_date:
            raise SeriesFormatError("date after the election", line=line)
        points.append(ForecastPoint(d, p, s))
    if not points:
        raise SeriesFormatError("no data rows", line=reader.line_num)
    return ForecastSeries(points, election_date, outcome)


def write_series_csv(series: ForecastSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in series.points:
        w.writerow([p.date.isoformat(), repr(p.published_prob),
                    "" if p.vote_share_est is None else repr(p.vote_share_est)])
    return buf.getvalue()


# -- scoring ---------------------------------------------------------------

def quadratic_loss(forecasts, outcomes) -> float:
    """Mean of ``(outcome - forecast)^2``; outcomes broadcast against forecasts."""
    b = np.asarray(forecasts, dtype=float)
    o = np.broadcast_to(np.asarray(outcomes, dtype=float), b.shape)
    if b.size == 0:
        raise PreconditionError("no forecasts to score")
    return float(np.mean((o - b) ** 2))


def absolute_loss(forecasts, outcomes) -> float:
    b = np.asarray(forecasts, dtype=float)
    o = np.broadcast_to(np.asarray(outcomes, dtype=float), b.shape)
    if b.size == 0:
        raise PreconditionError("no forecasts to score")
    return float(np.mean(np.abs(o - b)))


def _outcome(series):
    if series.outcome is None:
        raise PreconditionError("series has no recorded outcome")
    return series.outcome


def brier_score(series: ForecastSeries) -> float:
    return quadratic_loss(series.published, _outcome(series))


def l1_score(series: ForecastSeries) -> float:
    return absolute_loss(series.published, _outcome(series))


# -- volatility ------------------------------------------------------------

def realized_vol(values, times) -> float:
    """Annualized root-mean-square of ``dv / sqrt(dt)`` over consecutive steps.

    Increments are not demeaned; a fair forecast is a martingale, so its
    increments have mean zero by construction.
    """
    v = np.asarray(values, dtype=float)
    t = np.asarray(times, dtype=float)
    if v.size < 2:
        raise PreconditionError("realized vol needs at least two points")
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise DomainError("times must be strictly increasing")
    return float(np.sqrt(np.mean(np.diff(v) ** 2 / dt)))


def realized_forecast_vol(series: ForecastSeries) -> float:
    return realized_vol(series.published, series.times())


def estimate_vote_vol(series: ForecastSeries) -> float:
    """Annualized vol of the vote-share estimates (points lacking one skipped)."""
    idx = [i for i, s in enumerate(series.shares) if s is not None]
    if len(idx) < 2:
        raise PreconditionError("need two or more vote-share estimates to estimate s")
    t = series.times()[idx]
    return realized_vol([series.shares[i] for i in idx], t)


# -- fair values -----------------------------------------------------------

def _resolve_vol(s, sigma):
    if (s is None) == (sigma is None):
        raise DomainError("give exactly one of s (annualized vote vol) or sigma")
    v = s if s is not None else sigma
    if not (math.isfinite(v) and v >= 0):
        raise DomainError("volatility must be a finite number >= 0")


def fair_value(share, horizon, threshold=0.5, s=None, sigma=None):
    """Binary value of one point given years left and an annualized vol."""
    _resolve_vol(s, sigma)
    if horizon < 0:
        raise DomainError("negative horizon")
    if horizon == 0:
        return price_binary(share, 0.0, 0.0, threshold)
    if sigma is None:
        k = total_variance_from_s(s * math.sqrt(horizon), share)
        sigma = math.sqrt(k / horizon)
    return price_binary(share, sigma, horizon, threshold)


def fair_value_series(series: ForecastSeries, s=None, threshold=0.5, sigma=None):
    """Fair value at each point; ``None`` where no vote share was given."""
    _resolve_vol(s, sigma)
    out = []
    for p, tau in zip(series.points, series.horizons()):
        if p.vote_share_est is None:
            out.append(None)
        else:
            out.append(fair_value(p.vote_share_est, float(tau), threshold, s=s, sigma=sigma))
    return out


# -- Dutch book ------------------------------------------------------------

def dutch_book_pnl(published, fair, outcome, published_dates=None, fair_dates=None) -> float:
    """P/L of trading one unit against the forecaster at each point.

    Buy at the published price when it sits below fair value, sell when
    above, stay flat when equal.  Each position is closed at the next
    published price; the last one settles at the outcome.
    """
    pub = np.asarray(published, dtype=float)
    fv = np.asarray(fair, dtype=float)
    if pub.shape != fv.shape:
        raise AlignmentError(f"series lengths differ ({pub.size} vs {fv.size})")
    if published_dates is not None and fair_dates is not None:
        if list(published_dates) != list(fair_dates):
            raise AlignmentError("published and fair series have different timestamps")
    if outcome not in (0, 1):
        raise PreconditionError("outcome must be 0 or 1")
    if pub.size == 0:
        return 0.0
    position = np.sign(fv - pub)
    exit_price = np.append(pub[1:], float(outcome))
    return float(np.sum(position * (exit_price - pub)))


def dutch_book_pnl_batch(published, fair, outcomes) -> np.ndarray:
    """Row-wise :func:`dutch_book_pnl` for ``(n_elections, n_points)`` arrays."""
    pub = np.asarray(published, dtype=float)
    fv = np.asarray(fair, dtype=float)
    if pub.shape != fv.shape:
        raise AlignmentError("published and fair arrays differ in shape")
    out = np.asarray(outcomes, dtype=float).reshape(-1, 1)
    exit_price = np.concatenate([pub[:, 1:], out], axis=1)
    return np.sum(np.sign(fv - pub) * (exit_price - pub), axis=1)


# -- the audit -------------------------------------------------------------

@dataclass
class AuditReport:
    dates: List[str]
    published: List[float]
    fair_value: List[Optional[float]]
    divergence: List[Optional[float]]
    violation_flag: List[bool]
    realized_forecast_vol: Optional[float]
    max_admissible_vol: Optional[float]
    vol_violation: bool
    share_vol: Optional[float]
    increment_ratio: Optional[float]
    dutch_book_pnl: Optional[float]
    brier: Optional[float]
    l1: Optional[float]
    threshold: float
    tol: float
    tol_is_default: bool
    vol_source: str
    s_used: Optional[float]
    sigma_used: Optional[float]
    skipped: List[int] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def n_flags(self) -> int:
        return int(sum(self.violation_flag))

    @property
    def any_violation(self) -> bool:
        return self.n_flags > 0 or self.vol_violation

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_flags"] = self.n_flags
        d["any_violation"] = self.any_violation
        return d


def martingale_audit(
    series: ForecastSeries,
    s=None,
    threshold=0.5,
    tol=None,
    sigma=None,
    estimate_s=False,
) -> AuditReport:
    """Compare a published series with its arbitrage-fair counterpart.

    A point is flagged when ``|published - fair| > tol``.  The whole series
    is also flagged when the published probabilities move more than the
    fair values do (realized vol above ``(1 + tol)`` times the fair
    series' realized vol).  ``estimate_s`` replaces ``s`` by the realized
    vol of the vote-share estimates.
    """
    notes = []
    tol_is_default = tol is None
    tol = DEFAULT_TOL if tol is None else float(tol)
    if tol < 0:
        raise DomainError("tol must be >= 0")
    if estimate_s:
        if s is not None or sigma is not None:
            raise DomainError("estimate_s excludes an explicit s or sigma")
        s = estimate_vote_vol(series)
        vol_source = "estimated"
    else:
        _resolve_vol(s, sigma)
        vol_source = "user"
    if tol_is_default:
        notes.append(f"tol defaulted to {DEFAULT_TOL} (operational default)")

    fair = fair_value_series(series, s=s, threshold=threshold, sigma=sigma)
    pub = series.published
    skipped = [i for i, f in enumerate(fair) if f is None]
    if skipped:
        notes.append(f"{len(skipped)} point(s) without vote_share_est skipped")
    divergence = [None if f is None else float(p - f) for p, f in zip(pub, fair)]
    flags = [d is not None and abs(d) > tol for d in divergence]

    keep = [i for i, f in enumerate(fair) if f is not None]
    times = series.times()
    rfv = adm = share_vol = ratio = None
    vol_violation = False
    if len(series) >= 2:
        rfv = realized_forecast_vol(series)
    else:
        notes.append("fewer than two points: volatility fields omitted")
    if len(keep) >= 2:
        adm = realized_vol([fair[i] for i in keep], times[keep])
        share_vol = realized_vol([series.shares[i] for i in keep], times[keep])
        rfv_kept = realized_vol(pub[keep], times[keep])
        vol_violation = bool(rfv_kept > (1.0 + tol) * adm)
        if share_vol > 0:
            ratio = rfv_kept / share_vol

    pnl = brier = l1 = None
    if series.outcome is not None:
        brier = brier_score(series)
        l1 = l1_score(series)
        if keep:
            pnl = dutch_book_pnl(pub[keep], [fair[i] for i in keep], series.outcome)

    return AuditReport(
        dates=[d.isoformat() for d in series.dates],
        published=[float(p) for p in pub],
        fair_value=fair,
        divergence=divergence,
        violation_flag=flags,
        realized_forecast_vol=rfv,
        max_admissible_vol=adm,
        vol_violation=vol_violation,
        share_vol=share_vol,
        increment_ratio=ratio,
        dutch_book_pnl=pnl,
        brier=brier,
        l1=l1,
        threshold=threshold,
        tol=tol,
        tol_is_default=tol_is_default,
        vol_source=vol_source,
        s_used=s,
        sigma_used=sigma,
        skipped=skipped,
        notes=notes,
    )
