import csv
import io
import json
import subprocess
import sys

import pytest

from conftest import SCENARIOS
from gaspower.cli import run

EX1_TPA = str(SCENARIOS / "example1_tpa.json")
EX2 = str(SCENARIOS / "example2.json")


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_ok(capsys):
    assert call(capsys, "validate", EX2)[:2] == (0, "ok\n")


def test_pff_csv(capsys):
    code, out, _ = call(capsys, "pff", EX1_TPA, "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["partition", "coalition", "value", "phi", "internal_profit", "external_profit"]
    assert len({r["partition"] for r in rows}) == 5
    c_row = next(r for r in rows if r["partition"] == "{A,B},{C}" and r["coalition"] == "{C}")
    assert float(c_row["value"]) == 12 and float(c_row["external_profit"]) == 12


def test_shapley_json(capsys):
    code, out, _ = call(capsys, "shapley", EX1_TPA, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc == [{"method": "cff_shapley", "A": 41, "B": 33, "C": 12}]


def test_minimal_claim_shapley(capsys):
    code, out, _ = call(capsys, "shapley", EX1_TPA, "--method", "minimal-claim", "--format", "csv")
    assert code == 0 and out.splitlines()[1] == "pff_minimal_claim_shapley,39,31,16"


def test_extended_shapley(capsys):
    code, out, _ = call(capsys, "extended-shapley", EX1_TPA, "--format", "csv")
    assert out.splitlines()[1] == "pff_extended_shapley,39,31,16"


def test_report_example2(capsys):
    code, out, _ = call(capsys, "report", EX2)
    assert code == 0
    lines = {ln.split("  ")[0].strip(): ln for ln in out.splitlines()}
    assert "Shapley values based on CFF" in lines
    cff = lines["Shapley values based on CFF"].split()[-5:]
    pff = lines["Shapley values based on PFF"].split()[-5:]
    assert cff == ["400.4", "182.7", "247.9", "663.0", "1263.7"]
    assert pff == ["400.4", "134.3", "179.0", "894.7", "1149.2"]


def test_output_is_deterministic(capsys, tmp_path):
    outs = []
    for k in range(2):
        target = tmp_path / f"run{k}.json"
        assert call(capsys, "report", EX1_TPA, "--format", "json", "--out", str(target))[0] == 0
        outs.append(target.read_text())
    assert outs[0] == outs[1]


def test_trace_flows(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, _, _ = call(capsys, "pff", EX1_TPA, "--trace-flows", str(trace))
    assert code == 0
    lines = trace.read_text().splitlines()
    assert lines[0] == "partition,coalition,member,edge_or_source,direction,quantity,cost,fee_paid_to"
    assert len(lines) > 1


def test_order_override(capsys):
    path = str(SCENARIOS / "shared_bottleneck.json")
    rows = {}
    for order in ("demand", "explicit:A,B,C,D,E,F"):
        _, out, _ = call(capsys, "pff", path, "--order", order, "--format", "csv")
        rows[order] = [r for r in csv.DictReader(io.StringIO(out)) if r["partition"] == "{A,B},{C,D},{E},{F}"]
    assert rows["demand"] != rows["explicit:A,B,C,D,E,F"]


def test_unknown_player_in_order(capsys):
    assert call(capsys, "pff", EX1_TPA, "--order", "explicit:Z")[0] == 4


def test_unreadable_file(capsys, tmp_path):
    assert call(capsys, "cff", str(tmp_path / "missing.json"))[0] == 3


def test_schema_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"players": []')
    code, _, err = call(capsys, "cff", str(bad))
    assert code == 4 and err.startswith("error:")


def test_validation_error(capsys, tmp_path):
    doc = json.loads((SCENARIOS / "example1.json").read_text())
    doc["edges"][1]["owners"]["C"]["fee"] = 0.4
    path = tmp_path / "fee.json"
    path.write_text(json.dumps(doc))
    code, _, err = call(capsys, "validate", str(path))
    assert code == 1 and "fee below cost at (3,2)" in err


def test_unservable_demand(capsys, tmp_path):
    doc = json.loads((SCENARIOS / "example1.json").read_text())
    doc["sources"] = [s for s in doc["sources"] if s["node"] != "B"]
    doc["edges"] = []
    path = tmp_path / "dry.json"
    path.write_text(json.dumps(doc))
    code, _, err = call(capsys, "cff", str(path))
    assert code == 2 and "unservable demand" in err


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        run(["bogus-mode", EX2])
    assert info.value.code == 64


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gaspower", "cff", EX1_TPA, "--format", "csv"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert '"{A,B}","{A,B}",58,42,0,0' in res.stdout.splitlines()
