"""JSON analysis reports with a fixed key order, and the horizon-diagram CSV."""
import csv
import dataclasses
import json
import logging
from enum import Enum

import numpy as np

from lib.errors import ConfhorError
from lib.mass_geometry import classify, horizon_profile
from lib.types import RegionTag

logger = logging.getLogger('confhor.report')

SCHEMA_VERSION = 1
REPORT_KEYS = ("schema", "config", "stages", "provenance", "timing")
DIAGRAM_COLUMNS = ("omega1", "omega0_horizon", "dm_dt", "region_above", "region_below",
                   "is_apparent_candidate", "chart_excluded")
DIAGRAM_OFFSET = 1e-3


def to_jsonable(value):
    """Plain JSON data for dataclasses, enums and numpy values; fields declared repr=False are dropped."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value) if f.repr}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return repr(value)


def build_report(config, stages, provenance, timing):
    values = {"schema": SCHEMA_VERSION, "config": config, "stages": stages,
              "provenance": provenance, "timing": timing}
    return {key: to_jsonable(values[key]) for key in REPORT_KEYS}


def dumps_report(report):
    missing = [key for key in REPORT_KEYS if key not in report]
    if missing:
        raise ValueError(f"Invalid report: missing {missing}")
    ordered = {key: report[key] for key in REPORT_KEYS}
    return json.dumps(ordered, indent=2, ensure_ascii=False) + "\n"


def write_report(report, path):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps_report(report))
    logger.info(f"Report written to {path}")


def read_report(path):
    with open(path, encoding="utf-8") as handle:
        report = json.load(handle)
    if list(report) != list(REPORT_KEYS):
        raise ValueError(f"Invalid report keys in {path}: {list(report)}")
    return report


# Diagram

@dataclasses.dataclass(frozen=True)
class DiagramRow:
    omega1: float
    omega0_horizon: float
    dm_dt: float
    region_above: str
    region_below: str
    is_apparent_candidate: bool
    chart_excluded: bool = False


def _region(metric, y):
    try:
        return classify(metric, np.asarray(y, dtype=float)).tag.value
    except (ConfhorError, FloatingPointError) as e:
        logger.warning(f"Region sample failed at {list(y)}: {e}")
        return ""


def diagram_rows(entry, n, offset=DIAGRAM_OFFSET, threads=None):
    """Horizon curve in the (ω¹, ω⁰) plane with the regions just above and below it."""
    profile = horizon_profile(entry.metric, entry.horizon_grid(n), threads)
    rows = []
    for node in profile.nodes:
        if node.status == "chart-invalid":
            rows.append(DiagramRow(node.omega1, float('nan'), float('nan'), "", "", False, True))
            continue
        if node.status not in ("ok", "degenerate"):
            logger.warning(f"No horizon row at ω¹ = {node.omega1:.6g} ({node.status})")
            continue
        X = node.X
        above = min(X + offset, 1.0)
        below = X - offset if X > offset else 0.5 * X
        base = [node.rho] + list(node.angles)
        rows.append(DiagramRow(node.omega1, X, node.dm_dt,
                               _region(entry.metric, [np.log(above)] + base),
                               _region(entry.metric, [np.log(below)] + base),
                               node.tag is RegionTag.HORIZON_APPARENT))
    logger.info(f"{entry.name}: {len(rows)} diagram rows, "
                f"{sum(row.chart_excluded for row in rows)} outside the chart")
    return rows


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, float):
        return "" if not np.isfinite(value) else repr(value)
    return str(value)


def write_diagram(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(DIAGRAM_COLUMNS)
        for row in rows:
            writer.writerow([_cell(getattr(row, column)) for column in DIAGRAM_COLUMNS])
    logger.info(f"Diagram written to {path}")


def read_diagram(path):
    with open(path, encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))
