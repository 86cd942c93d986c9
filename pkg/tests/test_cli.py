"""Command-line behavior: outputs, exit codes, error prefixes."""

import json

import pytest

from optoweak.cli import main


def test_table1_to_csv(tmp_path, capsys):
    out = tmp_path / "table1.csv"
    assert main(["table1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "delta,weak_value_one_photon,alpha2,p_success_pct"
    assert len(lines) == 7
    first = lines[1].split(",")
    assert float(first[0]) == 0.1 and float(first[1]) == 5.0


def test_table1_stdout_default(capsys):
    assert main(["table1"]) == 0
    captured = capsys.readouterr().out
    assert captured.startswith("delta,")


def test_figure2_with_svg(tmp_path):
    csv = tmp_path / "fig2.csv"
    svg = tmp_path / "fig2.svg"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"axes": {"delta": {"start": 0.001, "stop": 0.12,
                                                  "count": 40}}}))
    assert main(["figure2", "--config", str(cfg), "--out", str(csv),
                 "--svg", str(svg)]) == 0
    assert csv.read_text().startswith("delta,q_no_postselection,")
    body = svg.read_text()
    assert body.startswith("<svg") and "polyline" in body


def test_figure3_csv(tmp_path):
    out = tmp_path / "fig3.csv"
    assert main(["figure3", "--out", str(out)]) == 0
    header = out.read_text().splitlines()[0]
    assert header.split(",")[0] == "delta"
    assert "alpha2_p0.001_k0.005" in header


def test_sweep_requires_axes(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mode": "sweep"}))
    code = main(["sweep", "--config", str(cfg)])
    assert code == 2
    assert capsys.readouterr().err.startswith("optoweak: config-error:")


def test_mode_conflict_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mode": "figure3"}))
    assert main(["figure2", "--config", str(cfg)]) == 2


def test_bad_engine_flag_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["figure2", "--engine", "quantum"])
    assert exc.value.code == 2


def test_sweep_exact_single_point(tmp_path):
    out = tmp_path / "sweep.csv"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "axes": {"delta": [0.005]},
        "fixed": {"alpha2": 1.0},
        "cutoffs": {"optical": 9, "mirror": 6},
        "engine": "exact"}))
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert row["engine"] == "exact"
    assert float(row["q_diff"]) == pytest.approx(1.0, rel=0.05)


def test_verify_with_crippled_mirror_cutoff(tmp_path, capsys):
    # a mirror cutoff of 1 must surface truncation failures and exit nonzero,
    # without aborting the rest of the suite
    report = tmp_path / "verify.json"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"cutoffs": {"optical": 9, "mirror": 1},
                               "out": str(report)}))
    code = main(["verify", "--config", str(cfg)])
    assert code == 1
    out = capsys.readouterr().out
    assert "TruncationError" in out or "truncation" in out.lower()
    payload = json.loads(report.read_text())
    assert isinstance(payload, list) and len(payload) >= 9
    assert any(not entry["passed"] for entry in payload)
    assert any(entry["passed"] for entry in payload)
