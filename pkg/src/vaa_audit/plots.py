"""Figure rendering for audit reports.

Renders PNG summaries next to the delimited output: per-cell change rates
for single-cell bumps, row/overall bumps, question drops, and the top-k
rank-stability sweep.  Uses the Agg backend so it works headless.
"""

from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .engine import Importance
from .simulate import LEVEL_CANDIDATE, LEVEL_PARTY, AuditReport

_LEVEL_TITLES = {LEVEL_CANDIDATE: "Candidate level", LEVEL_PARTY: "Party level"}


def _yerr(rows) -> tuple[list[float], list[float]]:
    low = [r.mean_change_pct - r.ci_low for r in rows]
    high = [r.ci_high - r.mean_change_pct for r in rows]
    return low, high


def _save(fig, path: Path) -> None:
    tmp = path.with_name(f".{path.name}.tmp-{os.getpid()}")
    try:
        fig.savefig(tmp, format="png", dpi=120)
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if tmp.exists():
            tmp.unlink(missing_ok=True)


def _plot_single(report: AuditReport, level: str, path: Path) -> None:
    rows = [r for r in report.change_rates if r.kind == "single" and r.level == level]
    deltas = sorted({r.delta for r in rows})
    fig, axes = plt.subplots(1, len(Importance), figsize=(12, 3.6), sharey=True)
    for ax, imp in zip(axes, Importance):
        for delta in deltas:
            cells = sorted(
                (r for r in rows if r.importance == imp.label and r.delta == delta),
                key=lambda r: r.distance,
            )
            xs = [r.distance for r in cells]
            ys = [r.mean_change_pct for r in cells]
            ax.errorbar(xs, ys, yerr=_yerr(cells), marker="o", capsize=3,
                        label=f"+{delta}")
        ax.set_title(imp.label.replace("_", " "))
        ax.set_xlabel("answer distance")
        ax.set_xticks(range(5))
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel("outcome change rate (%)")
    axes[0].legend(title="bump", fontsize="small")
    fig.suptitle(f"Single weight-cell bumps: {_LEVEL_TITLES[level].lower()}")
    fig.tight_layout()
    _save(fig, path)


def _plot_drops(report: AuditReport, path: Path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 3.6), sharey=True)
    for ax, level in zip(axes, (LEVEL_CANDIDATE, LEVEL_PARTY)):
        rows = [r for r in report.change_rates if r.kind == "drop" and r.level == level]
        for label in sorted({r.importance for r in rows}):
            cells = sorted((r for r in rows if r.importance == label),
                           key=lambda r: r.n)
            xs = [r.n for r in cells]
            ys = [r.mean_change_pct for r in cells]
            ax.errorbar(xs, ys, yerr=_yerr(cells), marker="o", capsize=3,
                        label=label.replace("_", " "))
        ax.set_title(_LEVEL_TITLES[level])
        ax.set_xlabel("questions dropped")
        ax.grid(True, alpha=0.3)
        ax.legend(title="marked as", fontsize="small")
    axes[0].set_ylabel("outcome change rate (%)")
    fig.suptitle("Question drops")
    fig.tight_layout()
    _save(fig, path)


def _plot_row_overall(report: AuditReport, path: Path) -> None:
    rows = [r for r in report.change_rates if r.kind in ("row", "overall")]
    labels = []
    for r in rows:
        if r.level != LEVEL_CANDIDATE:
            continue
        name = "all rows" if r.kind == "overall" else r.importance.replace("_", " ")
        labels.append(f"{name} +{r.delta}")
    fig, axes = plt.subplots(1, 2, figsize=(11, 3.8), sharey=True)
    for ax, level in zip(axes, (LEVEL_CANDIDATE, LEVEL_PARTY)):
        cells = [r for r in rows if r.level == level]
        xs = range(len(cells))
        ys = [r.mean_change_pct for r in cells]
        ax.bar(xs, ys, yerr=_yerr(cells), capsize=3, color="#4878a8")
        ax.set_xticks(list(xs))
        ax.set_xticklabels(labels, rotation=45, ha="right", fontsize="small")
        ax.set_title(_LEVEL_TITLES[level])
        ax.grid(True, axis="y", alpha=0.3)
    axes[0].set_ylabel("outcome change rate (%)")
    fig.suptitle("Whole-row and whole-table bumps")
    fig.tight_layout()
    _save(fig, path)


def _plot_topk(report: AuditReport, path: Path) -> None:
    rows = list(report.topk)
    fig, axes = plt.subplots(1, len(Importance), figsize=(12, 3.6), sharey=True)
    for ax, imp in zip(axes, Importance):
        for distance in sorted({r.distance for r in rows}):
            cells = sorted(
                (r for r in rows if r.importance == imp.label and r.distance == distance),
                key=lambda r: r.k,
            )
            xs = [r.k for r in cells]
            ys = [r.mean_rho for r in cells]
            err = ([r.mean_rho - r.ci_low for r in cells],
                   [r.ci_high - r.mean_rho for r in cells])
            ax.errorbar(xs, ys, yerr=err, marker=".", capsize=2,
                        label=f"d={distance}")
        ax.set_title(imp.label.replace("_", " "))
        ax.set_xlabel("k")
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel("mean top-k rank correlation")
    axes[0].legend(fontsize="x-small", ncol=2)
    fig.suptitle("Top-k ranking stability under single-cell bumps")
    fig.tight_layout()
    _save(fig, path)


def render_report_figures(
    report: AuditReport, out_dir: str | os.PathLike, stem: str = "audit"
) -> dict[str, Path]:
    """Render all report figures into out_dir; returns name -> path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "single_candidate": out / f"{stem}_single_candidate.png",
        "single_party": out / f"{stem}_single_party.png",
        "drops": out / f"{stem}_drops.png",
        "row_overall": out / f"{stem}_row_overall.png",
        "topk": out / f"{stem}_topk.png",
    }
    _plot_single(report, LEVEL_CANDIDATE, paths["single_candidate"])
    _plot_single(report, LEVEL_PARTY, paths["single_party"])
    _plot_drops(report, paths["drops"])
    _plot_row_overall(report, paths["row_overall"])
    if report.topk:
        _plot_topk(report, paths["topk"])
    else:
        paths.pop("topk")
    return paths
