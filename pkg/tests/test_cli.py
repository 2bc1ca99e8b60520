import json
import os

import pytest

from iwk.cli import (
    CurveRecord,
    analyze_curve,
    cache_traces,
    ingest_curves,
    main,
    parse_curve,
    parse_module_literal,
    parse_n_range,
    parse_poly_literal,
)
from iwk.ecq import EllipticCurveQ
from iwk.zpmod import FgZpModule


# ---------------------------------------------------------------------------
# Literal parsing.


def test_parse_curve():
    assert parse_curve("0,0,1,-7,6") == EllipticCurveQ(0, 0, 1, -7, 6)
    with pytest.raises(ValueError):
        parse_curve("1,2,3")
    with pytest.raises(ValueError):
        parse_curve("a,b,c,d,e")
    with pytest.raises(ValueError):
        parse_curve("0,0,0,0,0")  # singular


def test_parse_module_literal():
    assert parse_module_literal("7:3,1#0") == FgZpModule(7, 0, (3, 1))
    assert parse_module_literal("7:3,1") == FgZpModule(7, 0, (3, 1))
    assert parse_module_literal("7:#2") == FgZpModule(7, 2)
    assert parse_module_literal("5:") == FgZpModule(5)
    assert parse_module_literal("5:1,3,2") == FgZpModule(5, 0, (3, 2, 1))
    with pytest.raises(ValueError):
        parse_module_literal("nonsense")


def test_parse_poly_literal():
    assert parse_poly_literal("T^2+3*T+3") == [3, 3, 1]
    assert parse_poly_literal("T") == [0, 1]
    assert parse_poly_literal("T^3") == [0, 0, 0, 1]
    assert parse_poly_literal("5") == [5]
    assert parse_poly_literal("T^2-3T+9") == [9, -3, 1]
    with pytest.raises(ValueError):
        parse_poly_literal("")


def test_parse_n_range():
    assert parse_n_range("2..5") == [2, 3, 4, 5]
    assert parse_n_range("1,4,2") == [1, 4, 2]


# ---------------------------------------------------------------------------
# Exit codes.


def test_exit_zero_all_holds(capsys):
    code = main(
        [
            "analyze", "--curve", "0,0,1,-7,6", "--p", "7",
            "--mu", "0", "--lambda", "2", "--rank", "3",
        ]
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["class_number_growth"]["lambda_hat"] == "4"
    assert report["discrepancy_flags"]
    assert report["mordell_weil_bound"]["lambda_lower"] == 2


def test_exit_two_on_fails(capsys):
    assert main(["analyze", "--curve", "0,-1,1,-10,-20", "--p", "7"]) == 2


def test_exit_three_on_inconclusive_only(capsys):
    code = main(["analyze", "--curve", "0,0,1,-7,6", "--p", "7", "--ap-bound", "0"])
    assert code == 3


def test_exit_one_on_bad_input(capsys):
    assert main(["analyze", "--curve", "0,0,1,-7,6", "--p", "2"]) == 1
    assert main(["analyze", "--curve", "1,2", "--p", "7"]) == 1
    assert main(["analyze", "--curve", "0,-1,1,-10,-20", "--p", "11"]) == 1
    assert main(["nonsense"]) == 1
    assert main(["analyze", "--curve", "0,0,1,-7,6", "--p", "7", "--mu", "1"]) == 1


def test_exit_four_on_search_exhausted(capsys):
    code = main(
        ["twist", "--curve", "0,-1,1,-10,-20", "--p", "3", "--search-bound", "4"]
    )
    assert code == 4


def test_report_determinism(capsys):
    args = ["analyze", "--curve", "0,0,1,-7,6", "--p", "7", "--mu", "0", "--lambda", "2"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    second = capsys.readouterr().out
    assert first == second


# ---------------------------------------------------------------------------
# Subcommand output.


def test_twist_command(capsys):
    code = main(["twist", "--curve", "0,-1,1,-10,-20", "--p", "3"])
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    assert data["certificate"]["d"] == -55
    assert data["certificate"]["q"] == 5


def test_fitting_command(capsys):
    assert main(["fitting", "--module", "7:3,1", "--i", "1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["phi"] == 1
    assert data["cross_checks"]["bruteforce"]["agrees"]
    assert data["cross_checks"]["minors"]["agrees"]

    assert main(["fitting", "--module", "7:#2", "--i", "0"]) == 0
    assert json.loads(capsys.readouterr().out)["phi"] == "INFINITY"

    assert main(["fitting", "--module", "5:", "--i", "0"]) == 0
    assert json.loads(capsys.readouterr().out)["phi"] == 0


def test_fitting_presentation_file(tmp_path, capsys):
    path = tmp_path / "pres.json"
    path.write_text(
        json.dumps({"p": 5, "precision": 4, "matrix": [["5", "0"], ["0", "25"]]})
    )
    assert main(["fitting", "--presentation-file", str(path), "--i", "0"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["phi"] == 3
    assert data["module"]["exponents"] == [2, 1]


def test_growth_command(capsys):
    assert main(["growth", "--p", "7", "--mu", "0", "--lambda", "2"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["growth"]["lambda_hat"] == "4"
    assert data["discrepancy_flags"]

    assert main(
        ["growth", "--p", "5", "--mu", "1", "--lambda", "0", "--compare", "5,0,25"]
    ) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["compare"]["relation"] == "A_DOMINATES"


def test_coinv_command(capsys):
    assert main(["coinv", "--poly", "T^2", "--mu", "0", "--p", "3", "--n-range", "1..4"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert [row["order"] for row in data["table"]] == [1, 3, 5, 7]
    assert data["bounded_tail"] is True


# ---------------------------------------------------------------------------
# Ingestion.


def test_ingest_two_line_csv(tmp_path, capsys):
    path = tmp_path / "curves.csv"
    path.write_text("label,a1,a2,a3,a4,a6\n5077.a1,0,0,1,-7,6\n11.a1,0,-1,1,-10,-20\n")
    records = ingest_curves(str(path))
    assert len(records) == 2
    assert records[0].label == "5077.a1"
    assert records[0].curve() == EllipticCurveQ(0, 0, 1, -7, 6)
    # idempotent: same file, same records
    assert ingest_curves(str(path)) == records
    assert main(["ingest", "--path", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["count"] == 2


def test_ingest_errors(tmp_path):
    bad_header = tmp_path / "bad1.csv"
    bad_header.write_text("name,a1,a2,a3,a4,a6\nx,0,0,1,-7,6\n")
    with pytest.raises(ValueError, match="header"):
        ingest_curves(str(bad_header))

    bad_row = tmp_path / "bad2.csv"
    bad_row.write_text("label,a1,a2,a3,a4,a6\nx,0,0,one,-7,6\n")
    with pytest.raises(ValueError, match="bad2.csv:2"):
        ingest_curves(str(bad_row))

    assert main(["ingest", "--path", str(bad_row)]) == 1


def test_curve_record_rejects_singular():
    with pytest.raises(ValueError):
        CurveRecord("x", (0, 0, 0, 0, 0))


# ---------------------------------------------------------------------------
# Trace cache.


def test_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv("IWK_CACHE_DIR", str(tmp_path))
    E = EllipticCurveQ(0, 0, 1, -7, 6)
    first = cache_traces(E, 100)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    blob = files[0].read_text()
    second = cache_traces(E, 100)
    assert [(r.prime, r.a_ell) for r in first] == [(r.prime, r.a_ell) for r in second]
    assert files[0].read_text() == blob  # untouched on a pure cache hit
    # reloaded records are byte-identical, timestamps included
    assert [r.computed_at for r in first] == [r.computed_at for r in second]


def test_cache_poisoning_recovers(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("IWK_CACHE_DIR", str(tmp_path))
    E = EllipticCurveQ(0, 0, 1, -7, 6)
    good = {(r.prime, r.a_ell) for r in cache_traces(E, 60)}
    path = next(tmp_path.iterdir())
    lines = path.read_text().splitlines()
    lines[0] = '{"broken'
    lines[1] = json.dumps({"curve": [0, 0, 1, -7, 6], "ell": 5, "ap": 99, "computed_at": 0})
    path.write_text("\n".join(lines) + "\n")
    recovered = {(r.prime, r.a_ell) for r in cache_traces(E, 60)}
    err = capsys.readouterr().err
    assert "discarding corrupt cache entry" in err
    assert recovered == good


def test_cache_transparency(tmp_path, monkeypatch):
    # verdicts never depend on the cache contents
    E = EllipticCurveQ(0, 0, 1, -7, 6)
    monkeypatch.setenv("IWK_CACHE_DIR", str(tmp_path / "a"))
    with_cache = analyze_curve(E, 7, ap_bound=200).data
    monkeypatch.setenv("IWK_CACHE_DIR", str(tmp_path / "b"))
    without = analyze_curve(E, 7, ap_bound=200).data
    assert with_cache == without


def test_text_format(capsys):
    assert main(["growth", "--p", "3", "--mu", "0", "--lambda", "1", "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "lambda_hat: 2" in out


def test_cli_subprocess_smoke():
    import subprocess
    import sys

    run = lambda *args: subprocess.run(
        [sys.executable, "-m", "iwk.cli", *args], capture_output=True, text=True
    )
    ok = run("fitting", "--module", "7:3,1", "--i", "1")
    assert ok.returncode == 0 and json.loads(ok.stdout)["phi"] == 1
    bad = run("analyze", "--curve", "0,0,1,-7,6", "--p", "2")
    assert bad.returncode == 1
    usage = run("analyze", "--curve", "0,0,1,-7,6")  # missing --p
    assert usage.returncode == 1
