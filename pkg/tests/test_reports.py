import csv
import json

import pytest

from edsrestore.pipeline import run_scenario
from edsrestore.reports import (comparison_block, emit_reports, load_schedule_document, read_step_rows,
                                row_at)
from edsrestore.milp import verify_schedule
from edsrestore.rolling import ReportRow, Timeline
from edsrestore.scenario import resolve_scenario


@pytest.fixture(scope="module")
def path13_run():
    return run_scenario(resolve_scenario("path13"))


def read(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_files_and_headers(path13_run, tmp_path):
    emit_reports(path13_run, tmp_path, "path13")
    assert read(tmp_path / "timeline.csv")[0] == ["t_c", "sum_pg", "sum_pl1", "sum_pl2", "sum_pl3"]
    assert read(tmp_path / "consensus_cost.csv")[0] == ["t_c", "iterations", "ms"]
    assert [float(x) for x in read(tmp_path / "timeline.csv")[1]] == [0.0] * 5
    for name in ("steps.csv", "summary.json", "ccp_0.json", "ccp_20.json", "schedule_0_1.json",
                 "consensus_trace_0.csv", "timeline.png", "consensus_0.png"):
        assert (tmp_path / name).exists(), name
    ccp = json.loads((tmp_path / "ccp_0.json").read_text())
    assert ccp["ccps"][0]["members"] == list(range(1, 14))


def test_reemission_is_byte_identical(path13_run, tmp_path):
    emit_reports(path13_run, tmp_path / "a", "path13")
    emit_reports(path13_run, tmp_path / "b", "path13")
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes(), f.name


def test_empty_timeline_headers_only(tmp_path):
    emit_reports(Timeline(0.0, 5.0, 30.0, 120.0), tmp_path, figures=True)
    assert read(tmp_path / "timeline.csv") == [["t_c", "sum_pg", "sum_pl1", "sum_pl2", "sum_pl3"]]
    assert read(tmp_path / "consensus_cost.csv") == [["t_c", "iterations", "ms"]]


def test_schedule_documents_reverify(path13_run, tmp_path):
    emit_reports(path13_run, tmp_path, figures=False)
    for f in tmp_path.glob("schedule_*.json"):
        sched, view, net, grid, cfg = load_schedule_document(f)
        assert verify_schedule(sched, view, net, grid, config=cfg).ok


def test_step_rows_roundtrip(path13_run, tmp_path):
    emit_reports(path13_run, tmp_path, figures=False)
    rows = read_step_rows(tmp_path)
    assert row_at(rows, 40.0).sum_pl1 == pytest.approx(path13_run.step_rows()[-1].sum_pl1, abs=1e-8)
    with pytest.raises(KeyError):
        row_at(rows, 41.0)


def test_comparison_block():
    a = ReportRow(90.0, 500.0, 300.0, 150.0, 20.0)
    b = ReportRow(90.0, 400.0, 250.0, 100.0, 30.0)
    block = comparison_block([("T_r=30", 30.0, a), ("T_r=45", 45.0, b)], 90.0)
    assert block["at_min"] == 90.0
    assert [r["total_load"] for r in block["runs"]] == [470.0, 380.0]
    assert block["difference"] == {"sum_pl1": 50.0, "sum_pl2": 50.0, "sum_pl3": -10.0, "total_load": 90.0}
