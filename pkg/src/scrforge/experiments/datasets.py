"""Univariate benchmark series: CSV ingestion, month-based splits, standardization."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from ..errors import IngestionError
from ..reservoir import InputStream

DAYS_PER_MONTH = 30


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    column: str
    samples_per_day: int
    months: tuple[int, int, int]  # train / validation / test
    url: str

    def split_lengths(self) -> tuple[int, int, int]:
        per_month = self.samples_per_day * DAYS_PER_MONTH
        return tuple(m * per_month for m in self.months)


DATASETS = {
    "ett": DatasetSpec("ett", "OT", 96, (12, 4, 4), "https://github.com/zhouhaoyi/ETDataset"),
    "ecl": DatasetSpec("ecl", "MT_320", 24, (15, 3, 4),
                       "https://archive.ics.uci.edu/dataset/321/electricityloaddiagrams20112014"),
}


@dataclass(frozen=True)
class Series:
    """Standardized stream with train/validation/test index ranges."""

    stream: InputStream
    splits: tuple[slice, slice, slice]
    mean: float
    std: float
    name: str
    column: str

    @property
    def values(self) -> np.ndarray:
        return self.stream.samples[:, 0]

    @property
    def bound(self) -> float:
        return self.stream.bound

    @property
    def train(self) -> slice:
        return self.splits[0]


def _parse_number(cell: str, decimal_comma: bool) -> float:
    cell = cell.strip().strip('"')
    if decimal_comma:
        cell = cell.replace(",", ".")
    return float(cell)


def read_column(path, column: str) -> np.ndarray:
    """One numeric column of a delimited text file with a header row.

    Comma- and semicolon-separated files are both accepted; semicolon
    files may use a decimal comma.
    """
    if not os.path.isfile(path):
        raise IngestionError(f"data file not found: {os.fspath(path)} (column {column!r})")
    with open(path, encoding="utf-8", newline="") as fh:
        head = fh.readline()
        delim = ";" if head.count(";") > head.count(",") else ","
        header = [h.strip().strip('"') for h in next(csv.reader([head], delimiter=delim))]
        # the UCI export leaves the timestamp column unnamed
        aliases = {column, column.replace("_", " ")}
        idx = next((i for i, h in enumerate(header) if h in aliases), None)
        if idx is None:
            raise IngestionError(f"column {column!r} not found in {os.fspath(path)}", line=1)
        values = []
        for lineno, row in enumerate(csv.reader(fh, delimiter=delim), start=2):
            if not row:
                continue
            if idx >= len(row):
                raise IngestionError(f"row too short for column {column!r}", line=lineno)
            try:
                v = _parse_number(row[idx], delim == ";")
            except ValueError:
                raise IngestionError(f"non-numeric value {row[idx]!r} in column {column!r}", line=lineno) from None
            if not math.isfinite(v):
                raise IngestionError(f"non-finite value in column {column!r}", line=lineno)
            values.append(v)
    return np.asarray(values, dtype=float)


def standardize(x: np.ndarray, train: slice, splits: tuple[slice, slice, slice], name: str, column: str,
                scale: float = 1.0) -> Series:
    """Zero mean, unit variance on ``x[train]``; the bound is the resulting max magnitude."""
    mu = float(np.mean(x[train]))
    sd = float(np.std(x[train]))
    if not sd > 0:
        raise IngestionError(f"column {column!r} has zero variance on the training split")
    z = scale * (x - mu) / sd
    bound = float(np.max(np.abs(z)))
    return Series(InputStream(z[:, None], bound), splits, mu, sd, name, column)


def load_series(path, dataset: str, column: str | None = None, scale: float = 1.0) -> Series:
    """Load ETTm2 or ECL, keep the first train+validation+test samples and standardize."""
    if dataset not in DATASETS:
        raise IngestionError(f"unknown dataset {dataset!r}; expected one of {sorted(DATASETS)}")
    info = DATASETS[dataset]
    column = column or info.column
    x = read_column(path, column)
    n_tr, n_va, n_te = info.split_lengths()
    total = n_tr + n_va + n_te
    if x.size < total:
        raise IngestionError(f"{dataset}: need {total} samples for the {info.months} month split, found {x.size}")
    x = x[:total]
    splits = (slice(0, n_tr), slice(n_tr, n_tr + n_va), slice(n_tr + n_va, total))
    return standardize(x, splits[0], splits, dataset, column, scale)


def synthetic_series(length: int = 3000, seed: int = 0, scale: float = 1.0) -> Series:
    """Noisy two-tone signal, split 60/20/20 and standardized like the real data."""
    rng = np.random.default_rng(seed)
    t = np.arange(length)
    x = np.sin(2 * np.pi * t / 96) + 0.5 * np.sin(2 * np.pi * t / 672 + 1.0) + 0.2 * rng.standard_normal(length)
    a, b = int(0.6 * length), int(0.8 * length)
    splits = (slice(0, a), slice(a, b), slice(b, length))
    return standardize(x, splits[0], splits, "synthetic", "x", scale)
