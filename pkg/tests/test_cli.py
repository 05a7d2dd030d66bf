import json

import pytest

from invh.cli import main

from conftest import FIG1_SRC


@pytest.fixture()
def fig1_file(tmp_path):
    path = tmp_path / "fig1.mw"
    path.write_text(FIG1_SRC)
    return str(path)


def test_decide_fig1(fig1_file, capsys):
    code = main(["decide", fig1_file, "--target", "x != 145@E",
                 "--candidate", "x % 7 == 3@B"])
    out = capsys.readouterr().out
    assert code == 0
    assert "outcome: T" in out
    assert "DEC-PROP" in out


def test_verify_budget_one_inconclusive(fig1_file, capsys):
    code = main(["verify", fig1_file, "--prop", "x != 145@E", "--budget", "1"])
    out = capsys.readouterr().out
    assert code == 1
    assert "verdict: U" in out


def test_verify_conclusive(fig1_file, capsys):
    code = main(["verify", fig1_file, "--prop", "x != 145@E"])
    assert code == 0
    assert "verdict: T" in capsys.readouterr().out


def test_verify_with_assume_and_backend(fig1_file, capsys):
    code = main(["verify", fig1_file, "--prop", "x != 145@E",
                 "--assume", "x % 7 == 3@B", "--backend", "explicit"])
    assert code == 0
    assert "explicit" in capsys.readouterr().out


def test_verify_refuted_is_conclusive(fig1_file, capsys):
    code = main(["verify", fig1_file, "--prop", "x < 150@B"])
    out = capsys.readouterr().out
    assert code == 0
    assert "verdict: F" in out
    assert "counterexample" in out


def test_hoare_fig1(fig1_file, capsys):
    code = main(["hoare", fig1_file, "--loop", "B", "--pre", "x == 3",
                 "--inv", "x % 7 == 3", "--post", "x != 145"])
    assert code == 0
    assert "holds" in capsys.readouterr().out


def test_hoare_failure_still_conclusive(fig1_file, capsys):
    code = main(["hoare", fig1_file, "--loop", "B", "--pre", "x == 3",
                 "--inv", "x < 150", "--post", "x != 145"])
    assert code == 0
    assert "consecution" in capsys.readouterr().out


def test_race_from_text_candidates(fig1_file, tmp_path, capsys):
    cands = tmp_path / "cands.txt"
    cands.write_text("# candidates\nx % 9 == 3@B\nx % 7 == 3@B\n")
    code = main(["race", fig1_file, "--target", "x % 5 == 0@E",
                 "--candidates", str(cands)])
    out = capsys.readouterr().out
    assert code == 0
    assert "winner: candidate 1" in out


def test_race_from_json_candidates(fig1_file, tmp_path, capsys):
    cands = tmp_path / "cands.json"
    cands.write_text(json.dumps([
        {"pred": "x % 7 == 3", "label": "B", "gen_time_s": 0.1},
    ]))
    code = main(["race", fig1_file, "--target", "x != 145@E",
                 "--candidates", str(cands), "--workers", "2"])
    assert code == 0


def test_race_no_winner_exit_one(fig1_file, tmp_path, capsys):
    cands = tmp_path / "cands.txt"
    cands.write_text("x % 9 == 3@B\n")
    code = main(["race", fig1_file, "--target", "x % 5 == 0@E",
                 "--candidates", str(cands)])
    assert code == 1


def test_json_output_matches_human(fig1_file, capsys):
    main(["decide", fig1_file, "--target", "x != 145@E",
          "--candidate", "x % 7 == 3@B", "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["outcome"] == "T"
    assert payload["rule"] == "DEC-PROP"
    assert payload["d_a"]["verdict"] == "T"
    assert payload["d_b"]["verdict"] == "T"
    assert payload["total_cost"] > 0

    main(["verify", fig1_file, "--prop", "x != 145@E", "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "T"
    assert "wall_time_s" in payload and "cost" in payload


def test_verify_external_stub(fig1_file, tmp_path, capsys):
    stub = tmp_path / "stub.py"
    stub.write_text("print('VERDICT:TRUE')\n")
    code = main(["verify", fig1_file, "--prop", "x != 145@E",
                 "--backend", f"external:python3 {stub} {{program_path}}"])
    out = capsys.readouterr().out
    assert code == 0
    assert "verdict: T" in out


def test_bench_and_report(fig1_file, tmp_path, capsys):
    taskdir = tmp_path / "tasks"
    taskdir.mkdir()
    (taskdir / "fig1.json").write_text(json.dumps({
        "id": "fig1",
        "program": fig1_file,
        "width": 8,
        "target": {"pred": "x != 145", "label": "E"},
        "candidates": [{"pred": "x % 7 == 3", "label": "B"}],
    }))
    out_json = tmp_path / "report.json"
    code = main(["bench", str(taskdir), "--out", str(out_json),
                 "--format", "json"])
    assert code == 0
    assert out_json.exists()
    capsys.readouterr()

    code = main(["report", str(out_json), "--summary"])
    out = capsys.readouterr().out
    assert code == 0
    assert "% correct invariant: 100.0%" in out

    out_csv = tmp_path / "report.csv"
    assert main(["bench", str(taskdir), "--out", str(out_csv)]) == 0
    header = out_csv.read_text().splitlines()[0]
    assert header.startswith("task_id,split,baseline_verdict")


USAGE_CASES = [
    ["decide", "/nonexistent.mw", "--target", "x@E", "--candidate", "y@B"],
    ["verify", "FILE_PLACEHOLDER", "--prop", "no-label-marker"],
    ["verify", "FILE_PLACEHOLDER", "--prop", "y > 0@E"],       # unknown var
    ["verify", "FILE_PLACEHOLDER", "--prop", "x > 0@NOPE"],    # unknown label
    ["decide", "FILE_PLACEHOLDER", "--target", "x != 145@E",
     "--candidate", "x +% 7@B"],                               # syntax error
    ["verify", "FILE_PLACEHOLDER"],                            # missing --prop
    ["frobnicate"],                                            # unknown command
]


@pytest.mark.parametrize("argv", USAGE_CASES)
def test_usage_errors_exit_two(argv, fig1_file, capsys):
    argv = [fig1_file if a == "FILE_PLACEHOLDER" else a for a in argv]
    assert main(argv) == 2


def test_exit_code_contract_table(fig1_file, tmp_path, capsys):
    cases = [
        (["verify", fig1_file, "--prop", "x != 145@E"], 0),
        (["verify", fig1_file, "--prop", "x < 150@B"], 0),   # F is conclusive
        (["verify", fig1_file, "--prop", "x != 145@E", "--budget", "1"], 1),
        (["hoare", fig1_file, "--loop", "B", "--pre", "x == 3",
          "--inv", "x % 7 == 3", "--post", "x != 145"], 0),
        (["hoare", fig1_file, "--loop", "NOPE", "--pre", "true",
          "--inv", "true", "--post", "true"], 2),
    ]
    for argv, expected in cases:
        assert main(argv) == expected, argv
        capsys.readouterr()
