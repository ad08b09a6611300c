import json
import subprocess
import sys

import pytest

from fieldbv.cli import main


@pytest.fixture
def jolt_file(tmp_path):
    path = tmp_path / "jolt1.smt"
    assert main(["gen", "jolt-or", "--bits", "1", "--field", "7", "-o", str(path)]) == 0
    return path


def test_verify_valid(jolt_file, capsys):
    assert main(["verify", str(jolt_file), "--format", "lines"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "status=valid"


def test_verify_invalid_exit_code(tmp_path, capsys):
    path = tmp_path / "m.smt"
    main(["gen", "jolt-or", "--bits", "1", "--field", "7", "--mutate", "-o", str(path)])
    assert main(["verify", str(path), "--format", "lines"]) == 1
    out = capsys.readouterr().out
    assert "cex.x0=1" in out and "cex.y0=1" in out


def test_verify_unknown_exit_code(tmp_path, capsys):
    path = tmp_path / "m.smt"
    main(["gen", "jolt-or", "--bits", "1", "--field", "7", "--mutate", "-o", str(path)])
    assert main(["verify", str(path), "--strict-range"]) == 2


def test_parse_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.smt"
    path.write_text("(set-field 8)\n")
    assert main(["verify", str(path)]) == 3
    assert "not prime" in capsys.readouterr().out


def test_missing_file(tmp_path):
    assert main(["verify", str(tmp_path / "nope.smt")]) == 3


def test_trace_file(jolt_file, tmp_path):
    trace = tmp_path / "t.jsonl"
    assert main(["verify", str(jolt_file), "--trace", str(trace), "--no-case-splits"]) == 0
    rows = [json.loads(l) for l in trace.read_text().splitlines()]
    assert rows and {"stage", "rule", "measure_before", "measure_after"} <= set(rows[0])
    assert any(r["rule"] == "distNatSubOvrflw" for r in rows)


def test_dimacs_output(jolt_file, tmp_path):
    cnf = tmp_path / "out.cnf"
    assert main(["verify", str(jolt_file), "--dimacs", str(cnf)]) == 0
    assert cnf.read_text().startswith("p cnf ")


def test_oracle_check_flag(jolt_file, capsys):
    assert main(["verify", str(jolt_file), "--oracle-check", "--format", "lines"]) == 0
    assert "stats.oracle=valid" in capsys.readouterr().out


def test_oracle_command(jolt_file, capsys):
    assert main(["oracle", str(jolt_file)]) == 0
    assert "status=valid" in capsys.readouterr().out


def test_gen_random_to_stdout(capsys):
    assert main(["gen", "random", "--seed", "0", "--field", "7", "--depth", "2", "--vars", "2"]) == 0
    assert capsys.readouterr().out.startswith("(set-field 7)")


def test_gen_rejects_small_field(capsys):
    assert main(["gen", "jolt-or", "--bits", "1", "--field", "2"]) == 3


def test_batch_mode(tmp_path, capsys):
    paths = []
    for i, mutate in enumerate([False, True]):
        path = tmp_path / f"p{i}.smt"
        args = ["gen", "jolt-or", "--bits", "1", "--field", "7", "-o", str(path)] + (["--mutate"] if mutate else [])
        main(args)
        paths.append(str(path))
    assert main(["verify", *paths, "--format", "lines", "-j", "2"]) == 1
    out = capsys.readouterr().out
    assert out.count("file=") == 2


def test_console_script_runs(jolt_file):
    out = subprocess.run([sys.executable, "-m", "fieldbv.cli", "verify", str(jolt_file)],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("status: valid")
