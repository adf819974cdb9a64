import json
import math

import numpy as np
import pytest

from lib.config import AnalysisConfig
from lib.report import (DIAGRAM_COLUMNS, REPORT_KEYS, DiagramRow, build_report, diagram_rows, dumps_report,
                        read_diagram, read_report, to_jsonable, write_diagram, write_report)
from lib.types import Stage, Verdict


def test_to_jsonable():
    value = {"verdict": Verdict.NOT_NAKED, "grid": np.arange(3), "ok": np.bool_(True), "x": np.float64(0.5),
             "n": np.int64(7), "stages": (Stage.MASS,), 1: None}
    assert to_jsonable(value) == {"verdict": Verdict.NOT_NAKED.value, "grid": [0, 1, 2], "ok": True,
                                  "x": 0.5, "n": 7, "stages": ["mass"], "1": None}
    assert json.dumps(to_jsonable(value))


def test_to_jsonable_dataclass():
    row = DiagramRow(0.5, 0.25, -1.0, "Exterior", "Interior", False)
    assert to_jsonable(row) == {"omega1": 0.5, "omega0_horizon": 0.25, "dm_dt": -1.0, "region_above": "Exterior",
                                "region_below": "Interior", "is_apparent_candidate": False,
                                "chart_excluded": False}


def test_report_key_order(tmp_path):
    config = AnalysisConfig()
    report = build_report(config, {"mass": {"status": "ok"}}, {"version": "test"}, {"mass": 0.1})
    assert tuple(report) == REPORT_KEYS
    assert report["config"]["stages"] == [stage.value for stage in Stage]
    path = tmp_path / "report.json"
    write_report(report, path)
    assert read_report(path) == report
    assert list(json.loads(path.read_text(encoding="utf-8"))) == list(REPORT_KEYS)


def test_dumps_report_orders_keys():
    report = {key: {} for key in reversed(REPORT_KEYS)}
    assert list(json.loads(dumps_report(report))) == list(REPORT_KEYS)
    with pytest.raises(ValueError, match="missing"):
        dumps_report({"schema": 1})


def test_read_report_rejects_foreign_layout(tmp_path):
    path = tmp_path / "report.json"
    path.write_text(json.dumps({"config": {}, "schema": 1}), encoding="utf-8")
    with pytest.raises(ValueError, match="Invalid report keys"):
        read_report(path)


def test_diagram_csv_cells(tmp_path):
    rows = [DiagramRow(0.5, 0.25, -1.0, "Exterior", "Interior", True),
            DiagramRow(0.75, float("nan"), float("nan"), "", "", False, True)]
    path = tmp_path / "diagram.csv"
    write_diagram(rows, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(DIAGRAM_COLUMNS)
    assert lines[1] == "0.5,0.25,-1.0,Exterior,Interior,true,false"
    assert lines[2] == "0.75,,,,,false,true"
    assert read_diagram(path)[1]["chart_excluded"] == "true"


def test_diagram_rows_for_schwarzschild(schwarzschild):
    rows = diagram_rows(schwarzschild, 6)
    assert rows
    solved = [row for row in rows if not row.chart_excluded]
    assert solved
    for row in solved:
        assert 0 < row.omega0_horizon < 1
        assert row.region_above in ("Exterior", "Interior", "HorizonActual", "HorizonApparent", "")
    assert all(math.isnan(row.omega0_horizon) for row in rows if row.chart_excluded)
