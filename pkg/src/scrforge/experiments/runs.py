"""Dilation-dimension sweep and cycle-dimension survey, with CSV summaries."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import stats

from ..cyclic import cyclic_approximate, matching_angles, min_cycle_dimension, theoretical_dimension
from ..dilation import dilate_with_order, truncation_bound
from ..errors import InvalidInputError, SCRError
from ..linalg import canonical_form, operator_norm, random_orthogonal
from ..reservoir import InputStream
from .datasets import Series
from .reference import fit_forecast_readout, make_reference_system

log = logging.getLogger(__name__)

DILATION_ORDERS = (2, 6, 10, 15, 19, 24, 28, 33, 37, 42)
MATCHING_SIZES = tuple(range(20, 161, 20))


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "ett"
    column: str | None = None
    rho: float = 0.9
    input_scale: float = 1.0
    horizon: int = 300
    ridge: float = 1e-9
    orders: tuple[int, ...] = DILATION_ORDERS
    seeds: tuple[int, ...] = tuple(range(15))
    n: int = 5
    washout: int | None = None
    max_steps: int | None = None
    max_cycle_dim: int = 20_000
    # matching survey
    sizes: tuple[int, ...] = MATCHING_SIZES
    samples: int = 10
    delta: float = 0.1
    seed: int = 0
    out_dir: Path = field(default_factory=lambda: Path("."))

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise InvalidInputError("rho must lie in (0, 1)")
        if not self.delta > 0:
            raise InvalidInputError("delta must be positive")
        if any(N < 1 for N in self.orders):
            raise InvalidInputError("dilation orders must be >= 1")
        if any(n < 1 for n in self.sizes) or self.samples < 1:
            raise InvalidInputError("sizes and sample count must be positive")
        if self.horizon < 1 or self.ridge < 0:
            raise InvalidInputError("horizon must be >= 1 and ridge >= 0")


@dataclass(frozen=True)
class DilationRow:
    seed: int
    N: int
    n_U: int
    n_C: int
    mse: float
    max_gap: float
    bound: float  # analytic sup state gap: dilation tail plus cyclic tolerance
    status: str = "ok"


@dataclass(frozen=True)
class MatchingRow:
    n: int
    sample: int
    rotations: int
    matched_angles: int
    n_C: int
    n1: int


def write_rows(path, header, rows) -> Path:
    """CSV with a header row, LF endings and round-trip float formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return path


def read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def state_differences(R, u: np.ndarray, N: int, washout: int, max_dim: int | None = None):
    """Per-step ``x_t - P_n(P^T x_C,t)`` after the washout, plus the order-N analytic bound.

    The cyclic stage runs with state tolerance equal to the order-N
    truncation bound, so the sup gap is at most twice that bound.
    """
    R_U = dilate_with_order(R, N)
    tail = truncation_bound(R.lam, R.input_bound, operator_norm(R.V), N)
    cyc = cyclic_approximate(R_U, tail, max_dim=max_dim)
    x = R.drive(u, washout)
    Pn = cyc.state_map(R.n)
    x_c = cyc.simulate(u, washout, observe=lambda X: Pn @ X)[0]
    return x - x_c, 2.0 * tail, R_U.n, cyc.n_C


def _cell(R, series: Series, N: int, washout: int, max_dim: int) -> DilationRow:
    diff, bound, n_U, n_C = state_differences(R, series.stream.samples, N, washout, max_dim)
    return DilationRow(seed=-1, N=N, n_U=n_U, n_C=n_C, mse=float(np.mean(diff**2)),
                       max_gap=float(np.linalg.norm(diff, axis=1).max()), bound=bound)


def run_dilation_experiment(config: ExperimentConfig, series: Series) -> list[DilationRow]:
    """State MSE between the reference system and its cyclic dilation, per (seed, N).

    Each seed gives a reference system whose forecast readout is fitted on
    the training range. For every order N the system is dilated to order N
    and cycle-approximated with state tolerance equal to the order-N
    truncation bound; both are driven by the full stream.
    """
    if config.max_steps is not None:
        vals = series.stream.samples[: config.max_steps]
        series = replace(series, stream=InputStream(vals, series.bound))
    rows = []
    for seed in sorted(config.seeds):
        R = make_reference_system(seed, n=config.n, rho=config.rho, input_bound=series.bound)
        washout = R.default_washout() if config.washout is None else config.washout
        try:
            R = fit_forecast_readout(R, series.values, series.train, config.horizon, config.ridge, washout)
        except SCRError as err:
            log.warning("seed %d: readout fit failed (%s); keeping identity readout", seed, err)
        for N in sorted(config.orders):
            try:
                row = replace(_cell(R, series, N, washout, config.max_cycle_dim), seed=seed)
            except SCRError as err:
                log.warning("seed %d, N=%d failed: %s", seed, N, err)
                row = DilationRow(seed, N, R.n * (N + 1), 0, math.nan, math.nan, math.nan,
                                  f"failed:{type(err).__name__}")
            rows.append(row)
    return rows


def summarize_dilation(rows: list[DilationRow], confidence: float = 0.95) -> list[tuple]:
    """Per N: count, mean MSE and the t-interval for the mean."""
    out = []
    for N in sorted({r.N for r in rows}):
        vals = np.array([r.mse for r in rows if r.N == N and r.status == "ok"])
        failed = sum(1 for r in rows if r.N == N and r.status != "ok")
        if vals.size == 0:
            out.append((N, 0, failed, math.nan, math.nan, math.nan))
            continue
        mean = float(vals.mean())
        if vals.size > 1:
            half = float(stats.t.ppf(0.5 + confidence / 2, vals.size - 1) * vals.std(ddof=1) / math.sqrt(vals.size))
        else:
            half = 0.0
        out.append((N, int(vals.size), failed, mean, mean - half, mean + half))
    return out


DILATION_SUMMARY_HEADER = ("N", "count", "failed", "mean_mse", "ci_low", "ci_high")


def run_matching_experiment(config: ExperimentConfig) -> list[MatchingRow]:
    """Minimal cycle length for Haar orthogonal matrices versus the closed-form bound."""
    rows = []
    for n in sorted(config.sizes):
        for s in range(config.samples):
            seed = int(np.random.SeedSequence([config.seed, n, s]).generate_state(1)[0])
            cf = canonical_form(random_orthogonal(n, seed))
            angles = matching_angles(cf)
            n_C, _ = min_cycle_dimension(angles, config.delta)
            rows.append(MatchingRow(n, s, len(cf.angles), len(angles), n_C,
                                    theoretical_dimension(len(angles), config.delta)))
    return rows


def summarize_matching(rows: list[MatchingRow]) -> list[tuple]:
    """Per n: median and geometric mean of n_C and n1."""
    out = []
    for n in sorted({r.n for r in rows}):
        nc = np.array([r.n_C for r in rows if r.n == n], dtype=float)
        n1 = np.array([r.n1 for r in rows if r.n == n], dtype=float)
        out.append((n, int(nc.size), float(np.median(nc)), float(np.exp(np.log(nc).mean())),
                    float(np.median(n1)), float(np.exp(np.log(n1).mean()))))
    return out


MATCHING_SUMMARY_HEADER = ("n", "count", "median_n_C", "geomean_n_C", "median_n1", "geomean_n1")
