"""Data CSV reading and writing, and coordinate scaling."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from ..model import Dataset

DATA_COLUMNS = ("s1", "s2", "t", "y")
COVARIATE_COLUMN = "x_cmaq"


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class Scaling:
    """Per-coordinate centering and scaling of (s1, s2, t); optional log response."""

    center: np.ndarray
    scale: np.ndarray
    log_response: bool = False

    @classmethod
    def fit(cls, points, log_response=False):
        pts = np.asarray(points, dtype=float)
        center = pts.mean(axis=0)
        scale = pts.std(axis=0, ddof=1) if len(pts) > 1 else np.ones(pts.shape[1])
        scale = np.where(scale > 0, scale, 1.0)
        return cls(center, scale, log_response)

    def apply(self, points):
        return (np.asarray(points, dtype=float) - self.center) / self.scale

    def invert(self, points):
        return np.asarray(points, dtype=float) * self.scale + self.center


@dataclass(frozen=True)
class PreparedData:
    """Model-scale ``dataset``, the raw one it came from and the scaling between them."""

    dataset: Dataset
    raw: Dataset
    scaling: Scaling

    def to_raw_points(self, points):
        return self.scaling.invert(points)

    def to_model_points(self, points):
        return self.scaling.apply(points)


def prepare(raw, mode=None):
    """
    Centre and scale the coordinates. In regression mode (covariate present,
    or ``mode="regression"``) the response and covariate are log-transformed.
    """
    regression = raw.covariate is not None if mode is None else mode == "regression"
    if regression and raw.covariate is None:
        raise ParseError("regression mode needs the covariate column")
    sc = Scaling.fit(raw.points, log_response=regression)
    if regression:
        if np.any(raw.y <= 0) or np.any(raw.covariate <= 0):
            raise ParseError("log-scale regression needs positive y and covariate")
        ds = Dataset(sc.apply(raw.points), np.log(raw.y), np.log(raw.covariate))
    else:
        ds = Dataset(sc.apply(raw.points), raw.y)
    return PreparedData(ds, raw, sc)


def read_dataset_csv(path):
    """Raw dataset from a CSV with header ``s1,s2,t,y[,x_cmaq]``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if tuple(header[:4]) != DATA_COLUMNS or header[4:] not in ([], [COVARIATE_COLUMN]):
            raise ParseError(f"{path}: header must be s1,s2,t,y[,{COVARIATE_COLUMN}]")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: row {lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise ParseError(f"{path}: row {lineno}: non-numeric value") from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError(f"{path}: row {lineno}: NaN or infinite value")
            rows.append(vals)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    arr = np.array(rows)
    cov = arr[:, 4] if arr.shape[1] == 5 else None
    return Dataset(arr[:, :3], arr[:, 3], cov)


def load_dataset(path, mode=None):
    return prepare(read_dataset_csv(path), mode)


def write_dataset_csv(dataset, path):
    cols = list(DATA_COLUMNS) + ([COVARIATE_COLUMN] if dataset.covariate is not None else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for i in range(len(dataset)):
            row = list(dataset.points[i]) + [dataset.y[i]]
            if dataset.covariate is not None:
                row.append(dataset.covariate[i])
            w.writerow([repr(float(v)) for v in row])


SWEEP_COLUMNS = ("separation", "estimate", "std_error")


def write_corr_sweep_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([repr(float(r.separation)), repr(float(r.estimate)), repr(float(r.std_error))])


def read_corr_sweep_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [tuple(float(r[c]) for c in SWEEP_COLUMNS) for r in csv.DictReader(fh)]
