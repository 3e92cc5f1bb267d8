"""CSV report shape, aggregation, and figure rendering."""

import csv
import io
from pathlib import Path

from mpolsr.report import (
    REPORT_COLUMNS,
    SUMMARY_COLUMNS,
    SWEEP_COLUMNS,
    render_figures,
    report_row,
    summarize,
    write_rows,
)
from mpolsr.scenario import ScenarioConfig, apply_overrides, config_echo
from mpolsr.simulator import run_scenario


def small_run(**extra):
    cfg = ScenarioConfig()
    apply_overrides(cfg, ["node_count=5", "duration=6", "warmup=1",
                          "traffic.n_sources=2", "speed.min=1",
                          "speed.max=2",
                          *[f"{k}={v}" for k, v in extra.items()]])
    return cfg, run_scenario(cfg)


def test_report_row_covers_config_and_metrics():
    cfg, metrics = small_run()
    row = report_row(cfg, metrics)
    assert tuple(row) == REPORT_COLUMNS
    assert row["protocol"] == "OLSR"
    assert row["node_count"] == 5
    assert row["sent_app_packets"] == metrics.sent_app_packets
    # config echo keys all come first, in echo order
    echo = tuple(config_echo(cfg))
    assert REPORT_COLUMNS[:len(echo)] == echo

def test_write_rows_emits_repr_floats_and_blank_none():
    cfg, metrics = small_run()
    row = report_row(cfg, metrics)
    row["mean_delay"] = None
    row["packet_interval"] = 0.1
    buf = io.StringIO()
    write_rows(buf, [row])
    parsed = list(csv.DictReader(io.StringIO(buf.getvalue())))
    assert len(parsed) == 1
    assert parsed[0]["mean_delay"] == ""
    # repr keeps the float exact so re-parsing is lossless
    assert parsed[0]["packet_interval"] == "0.1"
    assert float(parsed[0]["delivery_ratio"]) == metrics.delivery_ratio

def test_summarize_groups_by_protocol_and_value():
    rows = []
    for proto, value, ratio, delay in [
        ("OLSR", "2", 0.5, 0.010), ("OLSR", "2", 0.7, 0.014),
        ("OLSR", "4", 0.4, None), ("RE_MPOLSR", "2", 0.9, 0.020),
    ]:
        rows.append({"parameter": "speed.max", "value": value,
                     "protocol": proto, "delivery_ratio": ratio,
                     "mean_delay": delay, "control_overhead_bytes": 100,
                     "recoveries": 1})
    summary = summarize(rows, "speed.max")
    assert all(tuple(r) == SUMMARY_COLUMNS for r in summary)
    first = summary[0]
    assert (first["protocol"], first["value"]) == ("OLSR", "2")
    assert first["seeds"] == 2
    assert round(first["delivery_ratio_mean"], 12) == 0.6
    assert round(first["delivery_ratio_std"], 12) == round(0.02 ** 0.5, 12)
    # a group with no measurable delay reports a blank, not a crash
    none_delay = [r for r in summary if r["value"] == "4"][0]
    assert none_delay["mean_delay_mean"] is None

def test_render_figures_writes_three_charts(tmp_path):
    rows = []
    for proto in ("OLSR", "RE_MPOLSR"):
        for value in ("2", "4", "6"):
            rows.append({"parameter": "speed.max", "value": value,
                         "protocol": proto,
                         "delivery_ratio": 0.9 if proto == "OLSR" else 0.95,
                         "mean_delay": 0.05, "control_overhead_bytes": 10,
                         "recoveries": 0})
    summary = summarize(rows, "speed.max")
    written = [Path(p) for p in render_figures(summary, "speed.max",
                                               str(tmp_path))]
    names = sorted(p.name for p in written)
    assert names == ["control_overhead.png", "delivery_ratio.png",
                     "mean_delay.png"]
    for p in written:
        assert p.stat().st_size > 1000

def test_sweep_columns_prefix():
    assert SWEEP_COLUMNS[:2] == ("parameter", "value")
    assert SWEEP_COLUMNS[2:] == REPORT_COLUMNS
