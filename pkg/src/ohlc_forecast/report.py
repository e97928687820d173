"""Aggregation of backtest outputs into text tables, tidy CSV, and figures.

The tidy CSV (`q,m,price,metric,value`) is the plotting-library-agnostic
interface; the rendered figures are a convenience layer on top of it.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .metrics import PRICES, EvalReport

PER_PRICE_METRICS = ("mape", "sd", "rmse")
SCALAR_METRICS = ("rmseh", "ar")


@dataclass(frozen=True)
class GridCell:
    """Metrics for one (q, m) setting of one tagged series."""

    tag: str
    q: int
    m: int
    report: EvalReport
    model_counts: dict[str, int] | None = None


def tidy_rows(cells: list[GridCell]) -> list[tuple]:
    """Long-format rows `tag,q,m,price,metric,value` for plotting tools."""
    rows = []
    for c in sorted(cells, key=lambda c: (c.tag, c.q, c.m)):
        for metric in PER_PRICE_METRICS:
            for price in PRICES:
                rows.append((c.tag, c.q, c.m, price, metric, getattr(c.report, metric)[price]))
        rows.append((c.tag, c.q, c.m, "", "rmseh", c.report.rmseh))
        rows.append((c.tag, c.q, c.m, "", "ar", c.report.ar))
    return rows


def write_tidy_csv(cells: list[GridCell], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["tag", "q", "m", "price", "metric", "value"])
        for row in tidy_rows(cells):
            writer.writerow(row)


def format_table(cells: list[GridCell]) -> str:
    """Aligned text table, one block per tag, columns per (q, m)."""
    blocks = []
    by_tag: dict[str, list[GridCell]] = defaultdict(list)
    for c in cells:
        by_tag[c.tag].append(c)
    for tag in sorted(by_tag):
        group = sorted(by_tag[tag], key=lambda c: (c.q, c.m))
        headers = [f"q={c.q},m={c.m}" for c in group]
        width = max(12, max(len(h) for h in headers) + 2)
        lines = [f"== {tag} ==", "metric".ljust(18) + "".join(h.rjust(width) for h in headers)]
        for metric in PER_PRICE_METRICS:
            for price in PRICES:
                vals = [getattr(c.report, metric)[price] for c in group]
                if metric == "mape":
                    cellstr = [f"{v:.2f}%" for v in vals]
                else:
                    cellstr = [f"{v:.3f}" for v in vals]
                lines.append(
                    f"{metric.upper()} {price}".ljust(18) + "".join(s.rjust(width) for s in cellstr)
                )
        for metric in SCALAR_METRICS:
            vals = [getattr(c.report, metric) for c in group]
            lines.append(
                metric.upper().ljust(18) + "".join(f"{v:.3f}".rjust(width) for v in vals)
            )
        counts = [c.model_counts for c in group]
        if all(counts):
            for name in ("VAR", "VEC", "DIFF_VAR"):
                lines.append(
                    f"count {name}".ljust(18)
                    + "".join(str(c.get(name, 0)).rjust(width) for c in counts)
                )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def render_figures(cells: list[GridCell], out_dir) -> list[Path]:
    """Metric-vs-q line plots, one figure per (tag, metric), lines per m."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    by_tag: dict[str, list[GridCell]] = defaultdict(list)
    for c in cells:
        by_tag[c.tag].append(c)

    for tag, group in sorted(by_tag.items()):
        ms = sorted({c.m for c in group})
        for metric in PER_PRICE_METRICS:
            fig, axes = plt.subplots(2, 2, figsize=(9, 7), sharex=True)
            for ax, price in zip(axes.ravel(), PRICES):
                for m in ms:
                    pts = sorted((c.q, getattr(c.report, metric)[price]) for c in group if c.m == m)
                    if len(pts) < 1:
                        continue
                    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"m={m}")
                ax.set_title(price)
                ax.set_xlabel("q")
                ax.set_ylabel(metric.upper() + (" (%)" if metric == "mape" else ""))
                ax.legend(fontsize=8)
            fig.suptitle(f"{tag}: {metric.upper()} vs window length")
            fig.tight_layout()
            path = out_dir / f"{tag}_{metric}.png"
            fig.savefig(path, dpi=120)
            plt.close(fig)
            written.append(path)
        fig, axes = plt.subplots(1, 2, figsize=(9, 4))
        for ax, metric in zip(axes, SCALAR_METRICS):
            for m in ms:
                pts = sorted((c.q, getattr(c.report, metric)) for c in group if c.m == m)
                ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"m={m}")
            ax.set_title(metric.upper())
            ax.set_xlabel("q")
            ax.legend(fontsize=8)
        fig.suptitle(f"{tag}: interval metrics vs window length")
        fig.tight_layout()
        path = out_dir / f"{tag}_interval.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
