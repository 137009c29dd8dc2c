"""Deterministic SVG line charts drawn from the summary CSVs."""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .runs import (  # noqa: E402
    DILATION_SUMMARY_HEADER,
    MATCHING_SUMMARY_HEADER,
    read_rows,
    summarize_dilation,
    summarize_matching,
    write_rows,
)

log = logging.getLogger(__name__)

_RC = {
    "svg.hashsalt": "scrforge",
    "svg.fonttype": "path",
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _columns(path) -> dict[str, list[float]]:
    header, rows = read_rows(path)
    return {h: [float(r[i]) for r in rows] for i, h in enumerate(header)}


def _save(fig, path: Path) -> Path:
    with plt.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def dilation_figure(csv_path, title: str = ""):
    """Mean state MSE with its confidence band against dilation order N, log y."""
    c = _columns(csv_path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        ax.plot(c["N"], c["mean_mse"], marker="o", color="C0", label="mean")
        # a t-interval can dip below zero; clip so the log axis stays valid
        lo = [max(l, m * 1e-3) for l, m in zip(c["ci_low"], c["mean_mse"])]
        ax.fill_between(c["N"], lo, c["ci_high"], color="C0", alpha=0.25, linewidth=0, label="95% CI")
        ax.set_yscale("log")
        ax.set_xlabel("dilation order N")
        ax.set_ylabel("state MSE")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
    return fig


def matching_figure(csv_path, title: str = ""):
    """Median matched cycle length and closed-form bound against n, log y."""
    c = _columns(csv_path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        ax.plot(c["n"], c["median_n1"], marker="s", color="C3", label="bound $2\\ell_0(k+1)$")
        ax.plot(c["n"], c["median_n_C"], marker="o", color="C0", label="maximum matching $n_C$")
        ax.set_yscale("log")
        ax.set_xlabel("initial dimension n")
        ax.set_ylabel("cycle dimension")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
    return fig


def emit_plots(rows, kind: str, out_dir, title: str = "") -> list[Path]:
    """Write the summary CSV for ``rows`` and the chart drawn from that CSV.

    ``kind`` is ``"dilation"`` or ``"matching"``. Returns the written paths;
    empty ``rows`` writes nothing.
    """
    if not rows:
        log.warning("no rows to plot")
        return []
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if kind == "dilation":
        csv_path = write_rows(out / "dilation_summary.csv", DILATION_SUMMARY_HEADER, summarize_dilation(rows))
        svg = _save(dilation_figure(csv_path, title), out / "dilation_mse.svg")
    elif kind == "matching":
        csv_path = write_rows(out / "matching_summary.csv", MATCHING_SUMMARY_HEADER, summarize_matching(rows))
        svg = _save(matching_figure(csv_path, title), out / "matching_dimension.svg")
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    return [csv_path, svg]
