"""Reservoir -> orthogonal dilation -> cycle -> simple cycle reservoir, in one call."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .binarize import SCRSystem, scr_construct
from .cyclic import cyclic_approximate
from .dilation import choose_order, dilate_system
from .errors import InvalidInputError, ResourceLimitError, SCRError
from .linalg import operator_norm
from .reservoir import InputStream, LinearReservoir, output_distance

log = logging.getLogger(__name__)

DEFAULT_BUDGET = (0.5, 0.25, 0.25)


@dataclass(frozen=True)
class Limits:
    max_dilation_order: int = 2_000
    max_cycle_dim: int = 20_000
    max_scr_dim: int = 5_000_000


@dataclass
class ApproximationReport:
    epsilon_requested: float
    delta_dilation: float
    delta_cyclic: float
    delta_binarize: float
    N: int
    n_U: int
    n_C: int
    n1: int
    k: int
    N_avg: int
    n_scr: int
    lam: float
    match_tolerance: float
    delta0: float
    binarize_max_entry_error: float
    empirical_output_gap: float
    n_validation_streams: int
    seconds: dict = field(default_factory=dict)

    TIMING_KEYS = ("dilation", "cyclic", "binarize", "validation")

    def deterministic_items(self) -> list[tuple[str, object]]:
        return [(k, v) for k, v in asdict(self).items() if k != "seconds"]

    def items(self) -> list[tuple[str, object]]:
        out = self.deterministic_items()
        out += [(f"seconds_{k}", self.seconds.get(k, float("nan"))) for k in self.TIMING_KEYS]
        return out

    def to_text(self) -> str:
        """Flat ``key=value`` lines, wall-clock timings included."""
        return "".join(f"{k}={_fmt(v)}\n" for k, v in self.items())

    def csv_header(self, timing: bool = False) -> list[str]:
        return [k for k, _ in (self.items() if timing else self.deterministic_items())]

    def to_csv_row(self, timing: bool = False) -> str:
        """Header plus one row. Timings are left out by default so reruns compare bit-identical."""
        items = self.items() if timing else self.deterministic_items()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([k for k, _ in items])
        w.writerow([_fmt(v) for _, v in items])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def uniform_streams(m: int, bound: float, count: int = 20, length: int = 500, seed: int = 0) -> list[InputStream]:
    """i.i.d. samples uniform in the Euclidean ball of radius ``bound``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        g = rng.standard_normal((length, m))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = bound * rng.uniform(size=(length, 1)) ** (1.0 / m)
        out.append(InputStream(g * r, bound))
    return out


def _staged(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except SCRError as err:
        err.stage = stage
        if err.args and not str(err.args[0]).startswith(f"[{stage}]"):
            err.args = (f"[{stage}] {err.args[0]}",) + err.args[1:]
        raise


def approximate_scr(R: LinearReservoir, epsilon: float, validation=None, *,
                    budget: tuple[float, float, float] = DEFAULT_BUDGET, limits: Limits = Limits(),
                    washout: int | None = None) -> tuple[SCRSystem, ApproximationReport]:
    """SCR that is ``epsilon``-close to ``R`` in output, plus a construction report.

    The output tolerance is split over the three stages by ``budget`` and
    turned into state tolerances through the readout's Lipschitz constant
    (``||A||``; every stage keeps it). ``validation`` defaults to 20 uniform
    streams of length 500 at the input bound.
    """
    if not epsilon > 0:
        raise InvalidInputError("epsilon must be positive")
    if len(budget) != 3 or any(b <= 0 for b in budget) or sum(budget) > 1 + 1e-12:
        raise InvalidInputError("budget must be three positive fractions summing to at most 1")
    if validation is None:
        validation = uniform_streams(R.m, R.input_bound)
    validation = list(validation)
    for s in validation:
        if s.bound > R.input_bound * (1 + 1e-12):
            raise InvalidInputError("validation stream exceeds the reservoir's input bound")

    lip = R.readout.lipschitz
    scale = lip if lip > 0 else 1.0
    d_dil, d_cyc, d_bin = (b * epsilon / scale for b in budget)
    v_norm = operator_norm(R.V)
    if R.lam > 0 and v_norm > 0:
        N = choose_order(R.lam, R.input_bound, v_norm, d_dil)
        if N > limits.max_dilation_order:
            raise ResourceLimitError(f"dilation order N = {N} exceeds the limit {limits.max_dilation_order}",
                                     quantity="N", value=N)
    seconds = {}
    t0 = time.perf_counter()
    R_U, plan = _staged("dilation", dilate_system, R, d_dil)
    t1 = time.perf_counter()
    cyc = _staged("cyclic", cyclic_approximate, R_U, d_cyc, max_dim=limits.max_cycle_dim)
    t2 = time.perf_counter()
    scr, b = _staged("binarize", scr_construct, cyc, d_bin, max_dim=limits.max_scr_dim)
    t3 = time.perf_counter()
    gap = output_distance(R, scr, validation, washout) if validation else math.nan
    t4 = time.perf_counter()
    seconds.update(dilation=t1 - t0, cyclic=t2 - t1, binarize=t3 - t2, validation=t4 - t3)

    report = ApproximationReport(
        epsilon_requested=float(epsilon), delta_dilation=d_dil, delta_cyclic=d_cyc, delta_binarize=d_bin,
        N=plan.N, n_U=R_U.n, n_C=cyc.n_C, n1=cyc.theoretical_bound, k=b.k, N_avg=b.N_avg, n_scr=scr.n,
        lam=R.lam, match_tolerance=cyc.match_tolerance, delta0=cyc.delta0,
        binarize_max_entry_error=b.max_entry_error, empirical_output_gap=gap,
        n_validation_streams=len(validation), seconds=seconds,
    )
    if validation and not gap < epsilon:
        log.warning("empirical output gap %.3e is not below epsilon %.3e", gap, epsilon)
    return scr, report
