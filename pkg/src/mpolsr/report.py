"""Delimited output and figures for scenario runs and sweeps.

A report row is the flattened scenario configuration followed by the run
metrics, so every CSV line is self-describing and reruns are comparable
column by column.  Floats are written with repr() to keep the output
bit-identical across processes for the same inputs.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import fields
from typing import IO, Iterable, Sequence

from .scenario import ScenarioConfig, config_echo
from .simulator import MetricsReport

_METRIC_FIELDS = tuple(
    f.name for f in fields(MetricsReport) if f.name != "protocol"
)

REPORT_COLUMNS: tuple[str, ...] = tuple(config_echo(ScenarioConfig())) \
    + _METRIC_FIELDS

# sweep rows carry the swept key and its value ahead of the echo so the
# grouping column survives whatever parameter was swept
SWEEP_COLUMNS: tuple[str, ...] = ("parameter", "value") + REPORT_COLUMNS

SUMMARY_COLUMNS: tuple[str, ...] = (
    "protocol",
    "parameter",
    "value",
    "seeds",
    "delivery_ratio_mean",
    "delivery_ratio_std",
    "mean_delay_mean",
    "mean_delay_std",
    "control_overhead_bytes_mean",
    "recoveries_mean",
)


def report_row(config: ScenarioConfig, metrics: MetricsReport) -> dict:
    """One flat mapping per run, keyed exactly by REPORT_COLUMNS."""
    row = config_echo(config)
    for name in _METRIC_FIELDS:
        row[name] = getattr(metrics, name)
    return row


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows(out: IO[str], rows: Iterable[dict],
               columns: Sequence[str] = REPORT_COLUMNS) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[name]) for name in columns])


def _mean_std(samples: list[float]) -> tuple[float | None, float | None]:
    if not samples:
        return None, None
    mean = statistics.fmean(samples)
    std = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return mean, std


def summarize(rows: Sequence[dict], parameter: str) -> list[dict]:
    """Collapse seed replicates into one row per (protocol, value).

    Groups keep first-appearance order so the summary reads in the same
    order the sweep ran.  Delay means skip runs that delivered nothing.
    """
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["protocol"], row["value"]), []).append(row)
    out = []
    for (protocol, value), members in groups.items():
        ratio_mean, ratio_std = _mean_std(
            [r["delivery_ratio"] for r in members])
        delay_mean, delay_std = _mean_std(
            [r["mean_delay"] for r in members if r["mean_delay"] is not None])
        out.append({
            "protocol": protocol,
            "parameter": parameter,
            "value": value,
            "seeds": len(members),
            "delivery_ratio_mean": ratio_mean,
            "delivery_ratio_std": ratio_std,
            "mean_delay_mean": delay_mean,
            "mean_delay_std": delay_std,
            "control_overhead_bytes_mean": statistics.fmean(
                [r["control_overhead_bytes"] for r in members]),
            "recoveries_mean": statistics.fmean(
                [r["recoveries"] for r in members]),
        })
    return out


_FIGURES = (
    ("delivery_ratio_mean", "delivery ratio", "delivery_ratio.png"),
    ("mean_delay_mean", "mean end-to-end delay (s)", "mean_delay.png"),
    ("control_overhead_bytes_mean", "control overhead (bytes)",
     "control_overhead.png"),
)


def render_figures(summary: Sequence[dict], parameter: str,
                   directory: str) -> list[str]:
    """Render one line chart per headline metric into ``directory``.

    Returns the written file paths.  Uses the Agg backend so it works
    without a display.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from pathlib import Path

    outdir = Path(directory)
    outdir.mkdir(parents=True, exist_ok=True)
    protocols: list[str] = []
    for row in summary:
        if row["protocol"] not in protocols:
            protocols.append(row["protocol"])
    written = []
    for key, label, filename in _FIGURES:
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        plotted = False
        for protocol in protocols:
            points = [(row["value"], row[key]) for row in summary
                      if row["protocol"] == protocol
                      and row[key] is not None]
            if not points:
                continue
            xs, ys = zip(*points)
            ax.plot(xs, ys, marker="o", label=protocol)
            plotted = True
        ax.set_xlabel(parameter)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.4)
        if plotted:
            ax.legend()
        fig.tight_layout()
        path = outdir / filename
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(str(path))
    return written
