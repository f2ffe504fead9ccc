import csv
import json

import pytest

from complementarity.optimize import SweepGrid, complementarity_sweep
from complementarity.report import analyze, csv_text, export_csv, fmt
from complementarity.reproduce import fig3_curves
from complementarity.rules import Exemplar
from complementarity.scenario import load_scenario


def test_table3_text():
    text = analyze(load_scenario("table3")).text()
    assert "complementary: yes (gap 0.050)" in text
    assert "n2-threshold: 0.500 < 0.700 (holds)" in text
    assert "Regime 1      1.15       0.20      0.44    0.25" in text
    assert "Average       0.75       0.50      0.45    0.50" in text


def test_table1_text():
    report = analyze(load_scenario("table1"))
    assert "complementary: no" in report.text()
    assert report.combined.average == pytest.approx(0.785)


def test_table6_text_carries_containment_note():
    report = analyze(load_scenario("table6"))
    assert report.fairness.eps_c == pytest.approx(0.845)
    assert "precondition failed" in report.text()


def test_machine_readable_output_is_json():
    d = analyze(load_scenario("table3")).to_dict()
    round_tripped = json.loads(json.dumps(d))
    assert round_tripped["complementarity"]["satisfied"] is True
    assert round_tripped["rows"][-1]["combined"] == pytest.approx(0.45)
    assert {r["condition_id"] for r in d["conditions"]} >= {"n2-threshold", "covariance"}


def test_analyses_filter():
    s = load_scenario("table3")
    s = type(s)(s.name, s.regimes, s.combiner, ("complementarity",))
    report = analyze(s)
    assert report.screen is None and report.fairness is None and not report.conditions


def test_analysis_is_deterministic():
    assert analyze(load_scenario("table5")).text() == analyze(load_scenario("table5")).text()


def test_fmt():
    assert fmt(0.1 + 0.2) == "0.3"
    assert fmt(-0.0) == "0"
    assert fmt(float("nan")) == ""
    assert fmt(1 / 3) == "0.333333333"


def test_table_csv_shape(tmp_path):
    path = export_csv(analyze(load_scenario("table3")), tmp_path / "t3.csv")
    raw = path.read_bytes()
    assert raw.count(b"\r\n") == 4 and b"\n" not in raw.replace(b"\r\n", b"")
    rows = list(csv.reader(raw.decode().splitlines()))
    assert rows[0] == ["regime", "human", "algorithm", "combined", "weight"]
    assert [r[0] for r in rows[1:]] == ["regime1", "regime2", "average"]
    assert all(len(r) == 5 for r in rows)
    assert rows[1][3] == "0.4375"


def test_sweep_csv_shape_and_determinism(tmp_path):
    grid = SweepGrid((-0.7, 0.7, 50), (-0.7, 0.7, 50), 0.75, 0.5, 0.5, Exemplar(0.5, 0.5))
    first = export_csv(complementarity_sweep(grid), tmp_path / "a.csv").read_bytes()
    second = export_csv(complementarity_sweep(grid), tmp_path / "b.csv").read_bytes()
    assert first == second
    lines = first.decode().split("\r\n")
    assert lines[-1] == ""
    assert len(lines) - 2 == 2500
    # row-major: delta_h varies fastest
    assert lines[1].split(",")[0] == lines[2].split(",")[0]


def test_curve_csv():
    text = csv_text(fig3_curves())
    header = text.split("\r\n")[0]
    assert header == "gap,min,prob_trust,two_stage,exemplar"


def test_unsupported_export():
    with pytest.raises(TypeError):
        csv_text(object())


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        export_csv(analyze(load_scenario("table3")), tmp_path / "missing" / "x.csv")
