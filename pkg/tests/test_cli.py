import json

import pytest

import api.analyze
from api.cli import EXIT_CONFIG, EXIT_OK, EXIT_STAGE, build_parser, main
from lib.errors import HypothesisViolated
from lib.report import DIAGRAM_COLUMNS, REPORT_KEYS, read_report
from lib.types import Stage


def test_parser_maps_flags_to_config_keys():
    args = build_parser().parse_args(["analyze", "--tol", "1e-12", "--depth", "20", "--quad-nodes", "8"])
    assert (args.root_tol, args.refine_depth, args.quad_nodes) == ("1e-12", "20", "8")
    args = build_parser().parse_args(["diagram", "--out", "rows.csv"])
    assert args.diagram_out == "rows.csv"


def test_missing_command_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_invalid_mass_exits_with_config_error(caplog, tmp_path):
    assert main(["analyze", "--M=-1", "--out", str(tmp_path / "r.json")]) == EXIT_CONFIG
    assert "M must be positive" in caplog.text
    assert not (tmp_path / "r.json").exists()


def test_config_file_errors_name_the_line(caplog, tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("metric = rn\nresolution = 4\n", encoding="utf-8")
    assert main(["diagram", "--config", str(path)]) == EXIT_CONFIG
    assert "line 2, field 'resolution': unknown key" in caplog.text


def test_unknown_verify_suite(caplog):
    assert main(["verify", "everything"]) == EXIT_CONFIG
    assert "Invalid verify suite" in caplog.text


def test_verify_writes_results(capsys, tmp_path):
    out = tmp_path / "checks.json"
    assert main(["verify", "remark33", "--out", str(out)]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "[PASS] remark33/gaussian" in printed
    assert "4/4 checks passed" in printed
    checks = json.loads(out.read_text(encoding="utf-8"))
    assert [check["name"] for check in checks] == ["reciprocal-r", "reciprocal-r2", "gaussian", "rational"]


def test_analyze_mass_stage(tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", "--metric", "schwarzschild", "--stages", "mass", "--grid", "4", "--out", str(out)]) \
        == EXIT_OK
    report = read_report(out)
    assert tuple(report) == REPORT_KEYS
    assert report["config"]["stages"] == ["mass"]
    assert report["provenance"]["metric"] == "Schwarzschild"
    mass = report["stages"]["mass"]
    assert mass["status"] == "completed"
    assert mass["source"] == "generic"
    assert mass["closed_form_ratio"]["positive"] is True
    assert list(report["timing"]) == ["mass"]


def test_analyze_skips_penrose_without_temporal_gauge(tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", "--stages", "penrose", "--out", str(out)]) == EXIT_OK
    assert read_report(out)["stages"]["penrose"]["status"] == "skipped"


def test_analyze_reports_stages_left_after_a_failure(monkeypatch, tmp_path):
    def broken(entry, config, state):
        raise HypothesisViolated("no horizon node")

    monkeypatch.setitem(api.analyze.STAGES, Stage.HORIZON, broken)
    out = tmp_path / "report.json"
    assert main(["analyze", "--metric", "schwarzschild", "--stages", "penrose,horizon,mass", "--grid", "4",
                 "--out", str(out)]) == EXIT_STAGE
    stages = read_report(out)["stages"]
    assert list(stages) == ["mass", "horizon", "penrose"]
    assert stages["mass"]["status"] == "completed"
    assert stages["horizon"] == {"status": "failed", "error": "HypothesisViolated", "message": "no horizon node"}
    assert stages["penrose"] == {"status": "skipped", "reason": "an earlier stage failed"}


def test_diagram_command(tmp_path):
    out = tmp_path / "diagram.csv"
    assert main(["diagram", "--grid", "6", "--out", str(out)]) == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(DIAGRAM_COLUMNS)
    assert 1 < len(lines) <= 7
