"""Figure and table export for session logs and courses.

The latency report answers "how long from sensor ingest to the state
broadcast of the tick that consumed it": a CSV of per-tick latencies, a
histogram rendered to PNG, and a summary dict. Course plots draw centerline,
corridor, and coins for operator inspection.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .scenario import CoinSet, CourseGeometry
from .telemetry import latency_rows, read_log


def _percentile(sorted_vals: list[float], q: float) -> float:
    if not sorted_vals:
        return math.nan
    pos = q * (len(sorted_vals) - 1)
    lo = int(pos)
    hi = min(lo + 1, len(sorted_vals) - 1)
    return sorted_vals[lo] + (sorted_vals[hi] - sorted_vals[lo]) * (pos - lo)


def latency_report(log_path: str | Path, out_dir: str | Path) -> dict:
    """Export latency.csv and latency_hist.png; returns the summary."""
    header, records = read_log(log_path)
    rows = latency_rows(records)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    csv_path = out / "latency.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tick", "latency_ms"])
        writer.writerows(rows)

    tick_ms = 1000.0 / header["config"]["tick_rate"]
    values = sorted(v for _, v in rows)
    summary = {
        "ticks_with_input": len(values),
        "tick_interval_ms": tick_ms,
        "median_ms": _percentile(values, 0.5),
        "p95_ms": _percentile(values, 0.95),
        "max_ms": values[-1] if values else math.nan,
        "csv": str(csv_path),
    }

    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    if values:
        ax.hist(values, bins=40, color="tab:blue", alpha=0.85)
        ax.axvline(summary["median_ms"], color="tab:red", linestyle="--",
                   label=f"median {summary['median_ms']:.2f} ms")
        ax.axvline(tick_ms, color="tab:gray", linestyle=":",
                   label=f"tick interval {tick_ms:.1f} ms")
        ax.legend(fontsize=8)
    else:
        ax.text(0.5, 0.5, "no input ticks in log", ha="center", va="center",
                transform=ax.transAxes)
    ax.set_xlabel("ingest to state latency [ms]")
    ax.set_ylabel("ticks")
    fig.tight_layout()
    png_path = out / "latency_hist.png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    summary["figure"] = str(png_path)
    return summary


def plot_course(course: CourseGeometry, coins: CoinSet, path: str | Path,
                title: str = "") -> None:
    """Top-down figure: centerline, corridor band, coin positions."""
    xs = [p[0] for p in course.centerline.points]
    ys = [p[1] for p in course.centerline.points]
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    ax.plot(xs, ys, color="tab:gray", linewidth=0.8)
    # corridor drawn as a fat stroke under the centerline; linewidth is in
    # points, so scale from data units via the axes transform after autoscale
    ax.set_aspect("equal")
    ax.autoscale_view()
    fig.canvas.draw()
    per_data = (ax.transData.transform((1.0, 0.0))
                - ax.transData.transform((0.0, 0.0)))[0]
    ax.plot(xs, ys, color="tab:blue", alpha=0.15, solid_capstyle="round",
            linewidth=2.0 * course.corridor_half_width * per_data * 72.0 / fig.dpi)
    ax.scatter([c.x for c in coins.coins], [c.y for c in coins.coins],
               s=12, color="goldenrod", zorder=3, label=f"{coins.total} coins")
    start = course.centerline.points[0]
    ax.scatter([start[0]], [start[1]], marker="^", color="tab:green",
               s=40, zorder=4, label="start")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
