"""The W126 seasonal ozone exposure index."""

import csv
from dataclasses import dataclass

import numpy as np

HOURS_PER_DAY = 12
N_MONTHS = 7
THRESHOLD = 21.0
# April..October
CALENDAR_MONTH_DAYS = (30, 31, 30, 31, 31, 30, 31)


@dataclass(frozen=True)
class HourlyOzoneSeries:
    """``q[day, hour]`` in ppm over the twelve daylight hours; ``month_of_day`` in 1..7."""

    q: np.ndarray
    month_of_day: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        months = np.asarray(self.month_of_day, dtype=int).ravel()
        if q.ndim != 2 or q.shape[1] != HOURS_PER_DAY:
            raise ValueError(f"q must have shape (days, {HOURS_PER_DAY})")
        if len(months) != q.shape[0]:
            raise ValueError("month_of_day must give one month per day")
        if not np.all(np.isfinite(q)) or np.any(q < 0):
            raise ValueError("concentrations must be finite and non-negative")
        present = set(months.tolist())
        if not present <= set(range(1, N_MONTHS + 1)):
            raise ValueError("months must lie in 1..7")
        missing = set(range(1, N_MONTHS + 1)) - present
        if missing:
            raise ValueError(f"months {sorted(missing)} have no days")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "month_of_day", months)

    @classmethod
    def calendar(cls, q):
        """Series over the 214 days of April..October."""
        return cls(q, calendar_months())


def calendar_months():
    return np.repeat(np.arange(1, N_MONTHS + 1), CALENDAR_MONTH_DAYS)


def w126_weight(q):
    """Sigmoid-weighted hourly value q / (1 + 4403 exp(-126 q))."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0) or np.any(np.isnan(q)):
        raise ValueError("ozone concentration must be non-negative")
    out = q / (1.0 + 4403.0 * np.exp(-126.0 * q))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class W126Result:
    index: float
    exceeds: bool
    daily: np.ndarray
    monthly: np.ndarray
    running: np.ndarray


def w126_annual(series, threshold=THRESHOLD):
    """Maximum three-month running total of the monthly sums of daily weighted values."""
    daily = w126_weight(series.q).sum(axis=1)
    monthly = np.bincount(series.month_of_day - 1, weights=daily, minlength=N_MONTHS)
    running = np.array([monthly[j - 2:j + 1].sum() for j in range(2, N_MONTHS)])
    index = float(running.max())
    return W126Result(index, index >= threshold, daily, monthly, running)


def read_hourly_csv(path):
    """Series from a CSV with header ``day,hour,q_ppm[,month]``; hours are 1..12."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = [f.strip() for f in reader.fieldnames or []]
        if fields[:3] != ["day", "hour", "q_ppm"] or fields[3:] not in ([], ["month"]):
            raise ValueError(f"{path}: header must be day,hour,q_ppm[,month]")
        recs = []
        for lineno, row in enumerate(reader, start=2):
            try:
                rec = (int(row["day"]), int(row["hour"]), float(row["q_ppm"]),
                       int(row["month"]) if "month" in fields else 0)
            except (TypeError, ValueError):
                raise ValueError(f"{path}: row {lineno}: malformed value") from None
            recs.append(rec)
    if not recs:
        raise ValueError(f"{path}: no data rows")
    days = sorted({r[0] for r in recs})
    index = {d: i for i, d in enumerate(days)}
    q = np.full((len(days), HOURS_PER_DAY), np.nan)
    months = np.zeros(len(days), dtype=int)
    for d, h, v, m in recs:
        if not 1 <= h <= HOURS_PER_DAY:
            raise ValueError(f"{path}: hour {h} outside 1..{HOURS_PER_DAY}")
        q[index[d], h - 1] = v
        months[index[d]] = m
    if np.isnan(q).any():
        raise ValueError(f"{path}: some day is missing hours")
    if "month" not in fields:
        if len(days) != sum(CALENDAR_MONTH_DAYS):
            raise ValueError(f"{path}: without a month column exactly {sum(CALENDAR_MONTH_DAYS)} days are required")
        months = calendar_months()
    return HourlyOzoneSeries(q, months)


def write_hourly_csv(series, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["day", "hour", "q_ppm", "month"])
        for d in range(series.q.shape[0]):
            for h in range(HOURS_PER_DAY):
                w.writerow([d + 1, h + 1, repr(float(series.q[d, h])), int(series.month_of_day[d])])
