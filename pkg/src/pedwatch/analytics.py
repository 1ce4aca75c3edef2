"""Hourly aggregation, box-plot statistics, outlier filtering, and correlation.

Quartiles throughout use linear interpolation on the sorted sample (the
fractional-rank (n-1)*q scheme, numpy's "linear" method). Outlier fences
are one-pass Tukey fences, [Q1 - 1.5*IQR, Q3 + 1.5*IQR], computed per
hour-of-day across days and never re-derived after removal.
"""

from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass

import numpy as np

from .model import ActivityEvent, BoardingRecord, VideoMeta, hour_bucket

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Window:
    """The covered recording window: which dates and which hours exist."""

    dates: tuple[dt.date, ...]
    hours: tuple[int, ...]

    def __post_init__(self):
        if list(self.dates) != sorted(set(self.dates)):
            raise ValueError("dates must be sorted and unique")
        if list(self.hours) != sorted(set(self.hours)):
            raise ValueError("hours must be sorted and unique")
        if any(not 0 <= h <= 23 for h in self.hours):
            raise ValueError("hours outside 0-23")

    def __contains__(self, key: tuple[dt.date, int]) -> bool:
        date, hour = key
        return date in self.dates and hour in self.hours

    @classmethod
    def from_metas(
        cls, metas: list[VideoMeta], tz: dt.tzinfo | None = None
    ) -> "Window":
        """Union of the dates and hours the given recordings cover.

        Recording windows are half-open [start, start + frame_count / fps);
        an hour is covered when the window intersects [h:00, h+1:00).
        """
        dates: set[dt.date] = set()
        hours: set[int] = set()
        for meta in metas:
            start = meta.start_ts.astimezone(tz) if tz else meta.start_ts
            end = meta.end_ts.astimezone(tz) if tz else meta.end_ts
            cursor = start.replace(minute=0, second=0, microsecond=0)
            while cursor < end:
                dates.add(cursor.date())
                hours.add(cursor.hour)
                cursor += dt.timedelta(hours=1)
        return cls(dates=tuple(sorted(dates)), hours=tuple(sorted(hours)))


@dataclass(frozen=True)
class DailyHourMatrix:
    """Per-hour event weights for each covered date, explicit zeros included."""

    dates: tuple[dt.date, ...]
    hours: tuple[int, ...]
    counts: tuple[tuple[int, ...], ...]  # one row per date, one column per hour

    def cell(self, date: dt.date, hour: int) -> int:
        return self.counts[self.dates.index(date)][self.hours.index(hour)]

    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def daily_totals(self) -> dict[dt.date, int]:
        return {d: sum(row) for d, row in zip(self.dates, self.counts)}

    def hour_values(self, hour: int) -> tuple[int, ...]:
        col = self.hours.index(hour)
        return tuple(row[col] for row in self.counts)


@dataclass(frozen=True)
class HourlySeries:
    """One hour-of-day's values across dates (CRO, #SB, #NB, or #BOTH)."""

    hour: int
    dates: tuple[dt.date, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values must be the same length")


@dataclass(frozen=True)
class BoxStats:
    """Five-number summary after Tukey exclusion, plus the all-values mean."""

    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float
    outliers: tuple[float, ...]


@dataclass(frozen=True)
class OutlierRemoval:
    date: dt.date
    hour: int
    value: float
    fence_low: float
    fence_high: float


@dataclass(frozen=True)
class FilterResult:
    """Outlier-filtered per-hour series plus the removal log."""

    series: dict[int, HourlySeries]
    removals: tuple[OutlierRemoval, ...]
    skipped_hours: tuple[int, ...]  # passed through untouched (< 4 points)


@dataclass(frozen=True)
class CorrelationCell:
    r: float | None
    classification: str
    reason: str | None = None


@dataclass(frozen=True)
class CorrelationTable:
    """Pearson r per (hour, series) pair, hour columns by series rows."""

    hours: tuple[int, ...]
    rows: dict[str, dict[int, CorrelationCell]]


@dataclass(frozen=True)
class Residual:
    date: dt.date
    hour: int
    estimate: float
    reference: float


@dataclass(frozen=True)
class AccuracyReport:
    """Inference vs. operator reference, joined on (date, hour)."""

    mae: float
    joined_pairs: int
    residuals: tuple[Residual, ...]
    unmatched_estimates: int
    unmatched_reference: int


def hourly_counts(events: list[ActivityEvent], window: Window) -> DailyHourMatrix:
    """Sum event person weights into (date, hour) cells over the window."""
    acc: dict[tuple[dt.date, int], int] = {}
    for ev in events:
        if (ev.date, ev.hour) not in window:
            raise ValueError(
                f"event {ev.event_id} at ({ev.date}, {ev.hour}) outside window"
            )
        acc[(ev.date, ev.hour)] = acc.get((ev.date, ev.hour), 0) + ev.count
    counts = tuple(
        tuple(acc.get((d, h), 0) for h in window.hours) for d in window.dates
    )
    return DailyHourMatrix(dates=window.dates, hours=window.hours, counts=counts)


def hour_series(matrix: DailyHourMatrix) -> dict[int, HourlySeries]:
    """Split a matrix into one across-days series per hour of day."""
    return {
        h: HourlySeries(
            hour=h,
            dates=matrix.dates,
            values=tuple(float(v) for v in matrix.hour_values(h)),
        )
        for h in matrix.hours
    }


def _quartiles(values: np.ndarray) -> tuple[float, float, float]:
    q1, med, q3 = np.quantile(values, [0.25, 0.5, 0.75], method="linear")
    return float(q1), float(med), float(q3)


def tukey_fences(values: list[float] | np.ndarray) -> tuple[float, float]:
    """[Q1 - 1.5*IQR, Q3 + 1.5*IQR] of the given sample."""
    arr = np.asarray(values, dtype=float)
    q1, _, q3 = _quartiles(arr)
    iqr = q3 - q1
    return q1 - 1.5 * iqr, q3 + 1.5 * iqr


def box_stats(values: list[float]) -> BoxStats:
    """Box-plot statistics with one-pass Tukey outlier exclusion.

    Fences come from the raw sample's quartiles; the five-number summary
    is then recomputed on the retained values. The mean covers all values,
    outliers included.
    """
    if len(values) == 0:
        raise ValueError("box_stats requires at least one value")
    arr = np.asarray(values, dtype=float)
    lo, hi = tukey_fences(arr)
    outliers = arr[(arr < lo) | (arr > hi)]
    retained = arr[(arr >= lo) & (arr <= hi)]
    q1, med, q3 = _quartiles(retained)
    return BoxStats(
        min=float(retained.min()),
        q1=q1,
        median=med,
        q3=q3,
        max=float(retained.max()),
        mean=float(arr.mean()),
        outliers=tuple(float(v) for v in outliers),
    )


def outlier_filter(
    series: dict[int, HourlySeries] | DailyHourMatrix,
) -> FilterResult:
    """Remove values outside each hour's Tukey fences, once.

    Hours with fewer than 4 points pass through untouched with a warning.
    Every removal is logged with its fence.
    """
    if isinstance(series, DailyHourMatrix):
        series = hour_series(series)
    filtered: dict[int, HourlySeries] = {}
    removals: list[OutlierRemoval] = []
    skipped: list[int] = []
    for hour in sorted(series):
        s = series[hour]
        if len(s.values) < 4:
            log.warning(
                "hour %02d: only %d points, outlier filter skipped", hour, len(s.values)
            )
            skipped.append(hour)
            filtered[hour] = s
            continue
        lo, hi = tukey_fences(s.values)
        kept_dates: list[dt.date] = []
        kept_values: list[float] = []
        for date, value in zip(s.dates, s.values):
            if value < lo or value > hi:
                removals.append(
                    OutlierRemoval(date=date, hour=hour, value=value,
                                   fence_low=lo, fence_high=hi)
                )
            else:
                kept_dates.append(date)
                kept_values.append(value)
        filtered[hour] = HourlySeries(
            hour=hour, dates=tuple(kept_dates), values=tuple(kept_values)
        )
    return FilterResult(
        series=filtered, removals=tuple(removals), skipped_hours=tuple(skipped)
    )


def pearson(x: list[float], y: list[float]) -> float | None:
    """Sample Pearson correlation, or None when either side has zero variance."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("pearson requires at least 2 points")
    ax = np.asarray(x, dtype=float)
    ay = np.asarray(y, dtype=float)
    dx = ax - ax.mean()
    dy = ay - ay.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        return None
    r = float(np.dot(dx, dy)) / (sxx * syy) ** 0.5
    return max(-1.0, min(1.0, r))


STRONG_MIN = 0.7
MODERATE_MIN = 0.3


def classify_correlation(r: float | None) -> str:
    """Band a correlation: strong [0.7, 1.0], moderate [0.3, 0.7), else weak.

    Negative r is reported as weak; the raw value always travels with the
    class. None maps to "undefined".
    """
    if r is None:
        return "undefined"
    if STRONG_MIN <= r <= 1.0:
        return "strong"
    if MODERATE_MIN <= r < STRONG_MIN:
        return "moderate"
    return "weak"


def align_series(a: HourlySeries, b: HourlySeries) -> tuple[list[float], list[float]]:
    """Pair two same-hour series on their shared dates, in date order."""
    if a.hour != b.hour:
        raise ValueError(f"hour mismatch: {a.hour} vs {b.hour}")
    b_by_date = dict(zip(b.dates, b.values))
    xs: list[float] = []
    ys: list[float] = []
    for date, value in zip(a.dates, a.values):
        if date in b_by_date:
            xs.append(value)
            ys.append(b_by_date[date])
    return xs, ys


def sum_series(a: HourlySeries, b: HourlySeries) -> HourlySeries:
    """Elementwise sum on shared dates (builds #BOTH from #SB and #NB)."""
    if a.hour != b.hour:
        raise ValueError(f"hour mismatch: {a.hour} vs {b.hour}")
    b_by_date = dict(zip(b.dates, b.values))
    dates = tuple(d for d in a.dates if d in b_by_date)
    values = tuple(
        av + b_by_date[d] for d, av in zip(a.dates, a.values) if d in b_by_date
    )
    return HourlySeries(hour=a.hour, dates=dates, values=values)


def correlation_table(
    cro: dict[int, HourlySeries],
    named: dict[str, dict[int, HourlySeries]],
) -> CorrelationTable:
    """Correlate the crossing series against each named series, per hour.

    `named` maps a row label (e.g. "#SB") to its per-hour series. Cells
    with fewer than 2 shared dates, or zero variance on either side, are
    undefined with a reason.
    """
    hours = tuple(sorted(cro))
    rows: dict[str, dict[int, CorrelationCell]] = {}
    for label, per_hour in named.items():
        row: dict[int, CorrelationCell] = {}
        for hour in hours:
            if hour not in per_hour:
                row[hour] = CorrelationCell(None, "undefined", "no data")
                continue
            xs, ys = align_series(cro[hour], per_hour[hour])
            if len(xs) < 2:
                row[hour] = CorrelationCell(
                    None, "undefined", f"only {len(xs)} shared dates"
                )
                continue
            r = pearson(xs, ys)
            if r is None:
                row[hour] = CorrelationCell(None, "undefined", "zero variance")
            else:
                row[hour] = CorrelationCell(r, classify_correlation(r))
        rows[label] = row
    return CorrelationTable(hours=hours, rows=rows)


def mae(
    estimates: dict[int, HourlySeries],
    reference: list[BoardingRecord],
) -> AccuracyReport:
    """Mean absolute error of estimates against boarding records.

    Joins on (date, hour); unmatched keys on either side are excluded
    from the error and counted in the report.
    """
    est: dict[tuple[dt.date, int], float] = {}
    for hour, series in estimates.items():
        for date, value in zip(series.dates, series.values):
            est[(date, hour)] = value
    ref = {(r.date, r.hour): float(r.boardings) for r in reference}
    joined = sorted(set(est) & set(ref))
    if not joined:
        raise ValueError("no joinable (date, hour) keys between estimates and reference")
    residuals = tuple(
        Residual(date=d, hour=h, estimate=est[(d, h)], reference=ref[(d, h)])
        for d, h in joined
    )
    total = sum(abs(r.estimate - r.reference) for r in residuals)
    return AccuracyReport(
        mae=total / len(residuals),
        joined_pairs=len(residuals),
        residuals=residuals,
        unmatched_estimates=len(est) - len(joined),
        unmatched_reference=len(ref) - len(joined),
    )


DAY_PERIODS = (
    ("am_peak", 7, 10),
    ("midday", 10, 13),
    ("afternoon", 13, 16),
    ("pm_peak", 16, 19),
)


def period_bucket(ts: dt.datetime, tz: dt.tzinfo | None = None) -> str:
    """Day-period band of a timestamp; half-open bands, outside them "other"."""
    _, hour = hour_bucket(ts, tz)
    for name, start, end in DAY_PERIODS:
        if start <= hour < end:
            return name
    return "other"
