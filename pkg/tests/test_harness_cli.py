import csv
import io
import json

import pytest

from kapfree.harness_cli import (
    COMMANDS,
    ExperimentConfig,
    main,
    render,
    run,
    strip_runtime,
)


def report_of(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_endtoend_example(capsys):
    code, rep = report_of(capsys, ["endtoend", "--p", "5", "--k", "3", "--n", "3", "--s", "4",
                                   "--trials", "100", "--seed", "42"])
    assert code == 0
    agg = rep["aggregate"]
    assert agg["trials"] == 100
    assert agg["pass_rate_among_independent"] == 1.0
    assert agg["warning_floor"] == "1/25"
    assert rep["failures"] == []
    assert rep["monomial_order"] == "lex-desc-v1"
    for rec in rep["records"]:
        if rec["independent"]:
            assert rec["verdict"] == {"ok": True}
            assert rec["zero_in_A"] and rec["warning_floor_ok"]
            assert rec["A_size"] >= 5


@pytest.mark.parametrize("argv", [
    ["endtoend", "--p", "2", "--k", "3", "--n", "2", "--s", "2", "--trials", "1"],
    ["endtoend", "--p", "5", "--k", "3", "--n", "2", "--s", "0", "--trials", "1"],
    ["endtoend", "--p", "6", "--k", "3", "--n", "2", "--s", "2", "--trials", "1"],
    ["endtoend", "--p", "5", "--k", "3", "--n", "2", "--s", "2", "--trials", "0"],
    ["endtoend", "--p", "5", "--k", "3", "--n", "6", "--s", "2", "--trials", "1", "--cap-enum", "1000"],
    ["rank-audit", "--p", "2", "--n", "0", "--d", "3"],
    ["rank-audit", "--p", "2", "--n", "3", "--d", "3"],
    ["independence", "--p", "2", "--n", "2", "--k", "3", "--s", "2"],
    ["bounds", "--p", "3", "--k", "5", "--n", "9"],
    ["monomials", "--n", "0", "--d", "2"],
])
def test_config_errors_exit_2(capsys, argv):
    assert main(argv) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config"


def test_rank_audit_examples(capsys):
    code, rep = report_of(capsys, ["rank-audit", "--p", "2", "--n", "2", "--d", "3"])
    assert code == 0
    assert len(rep["records"]) == 256
    assert rep["aggregate"]["arank_le_prank_violations"] == 0
    assert [row["count"] for row in rep["aggregate"]["low_prank_counts"]] == [1, 82, 256]
    code, rep = report_of(capsys, ["rank-audit", "--p", "3", "--n", "2", "--d", "2"])
    assert code == 0
    assert len(rep["records"]) == 81
    assert rep["aggregate"]["arank_equals_matrix_rank"] is True


def test_independence_example(capsys):
    code, rep = report_of(capsys, ["independence", "--p", "2", "--n", "2", "--k", "3", "--s", "2",
                                   "--exact", "--trials", "5000", "--seed", "3"])
    assert code == 0
    rec = rep["records"][0]
    assert rec["exact"] == "3/8"
    assert rec["lemma_bound"] == "1/4"
    assert rec["ci_low"] <= rec["mc_estimate"] <= rec["ci_high"]


def test_bounds_example(capsys):
    code, rep = report_of(capsys, ["bounds", "--p", "3", "--k", "3", "--n", "9", "--beta", "1",
                                   "--epsilon", "zero"])
    assert code == 0
    assert rep["records"][0]["s_max"] == 27
    code, rep = report_of(capsys, ["bounds", "--p", "3", "--k", "3", "--n", *map(str, range(4, 65)),
                                   "--calibrate"])
    assert rep["aggregate"]["calibrated_beta"] == pytest.approx(31.21)


def test_verify_lemmas(capsys):
    code, rep = report_of(capsys, ["verify-lemmas"])
    assert code == 0
    assert rep["aggregate"]["checks"] == rep["aggregate"]["passed"] == 15


def test_monomials(capsys):
    code, rep = report_of(capsys, ["monomials", "--n", "2", "--d", "2"])
    assert code == 0
    assert [r["exponent"] for r in rep["records"]] == [[2, 0], [1, 1], [0, 2]]


def test_report_layout_and_hash():
    cfg = ExperimentConfig("monomials", n=3, d=2)
    rep = run(cfg)
    assert set(rep) == {"tool", "version", "monomial_order", "subcommand", "config", "input_hash",
                        "records", "aggregate", "failures", "runtime"}
    assert "workers" not in rep["config"]
    other = run(ExperimentConfig("monomials", n=3, d=2, workers=4, format="csv"))
    assert other["input_hash"] == rep["input_hash"]
    assert run(ExperimentConfig("monomials", n=3, d=3))["input_hash"] != rep["input_hash"]


def test_csv_output(tmp_path):
    out = tmp_path / "r.csv"
    code = main(["endtoend", "--p", "5", "--k", "3", "--n", "2", "--s", "2", "--trials", "6",
                 "--seed", "1", "--format", "csv", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# kapfree-endtoend schema=1 input_hash=")
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert len(rows) == 6
    assert {"trial", "independent", "verdict", "density", "warning_floor_ok"} <= set(rows[0])


def test_failure_exit_code(capsys, monkeypatch):
    import kapfree.harness_cli as cli

    def broken(cfg):
        rep = cli.cmd_monomials(cfg)
        rep["failures"] = [{"check": "forced"}]
        return rep

    monkeypatch.setitem(cli.COMMANDS, "monomials", broken)
    assert main(["monomials", "--n", "2", "--d", "2"]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["failures"] == [{"check": "forced"}]


def test_render_json_is_sorted():
    rep = run(ExperimentConfig("monomials", n=2, d=2))
    text = render(rep, "json")
    assert json.loads(text) == json.loads(json.dumps(rep))
    assert text.index('"aggregate"') < text.index('"config"')


def test_every_subcommand_registered():
    assert set(COMMANDS) == {"endtoend", "rank-audit", "independence", "bounds", "verify-lemmas", "monomials"}


def test_rerun_identical():
    cfg = ExperimentConfig("independence", p=3, n=2, k=3, s=3, trials=9000, seed=11, exact=True)
    assert render(strip_runtime(run(cfg)) | {"runtime": None}, "json") == \
        render(strip_runtime(run(cfg)) | {"runtime": None}, "json")
