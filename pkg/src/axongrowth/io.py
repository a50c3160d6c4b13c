"""Run outputs: time-series CSV, event log (JSON lines) and metrics JSON."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .simulation import COLUMNS, RunResult


def _fmt(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return "%.17g" % value


def write_timeseries(result: RunResult, path):
    """One row per recorded step; missing values (e.g. gamma_p outside PETC) are empty."""
    table = result.table()
    flag_col = COLUMNS.index("event_flag")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in table:
            cells = [_fmt(v) for v in row]
            cells[flag_col] = str(int(row[flag_col]))
            writer.writerow(cells)


def write_events(result: RunResult, path):
    key = "gamma_p" if result.mode == "petc" else "d2_minus_gamma_m"
    with open(path, "w") as fh:
        for ev in result.events.events:
            rec = {"t": ev.t, "U_held": ev.u_held, key: ev.trigger_value, "check_index": ev.check_index}
            fh.write(json.dumps(rec) + "\n")


def _clean(obj):
    # json has no NaN/inf
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(obj, path):
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def write_run(result: RunResult, metrics: dict, out_dir):
    """Write the three run files plus an ``ABORTED`` marker when the run stopped early."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_timeseries(result, out / "timeseries.csv")
    write_events(result, out / "events.jsonl")
    write_json({**metrics, "config_fingerprint": result.fingerprint}, out / "metrics.json")
    marker = out / "ABORTED"
    if result.aborted:
        marker.write_text(f"{result.status} at t={result.t_end:.17g}\n")
    elif marker.exists():
        marker.unlink()
    return out


def read_timeseries(path):
    """Inverse of :func:`write_timeseries`; empty cells come back as NaN."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {name: [] for name in header}
        for row in reader:
            for name, cell in zip(header, row):
                cols[name].append(float(cell) if cell else math.nan)
    return cols
