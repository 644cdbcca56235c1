import csv
from fractions import Fraction
import io
import json

import pytest

from lssd.cli import main, parse_grid
from lssd.game import bsc_game, save_game

from oracles import single_bsc, three_fold_ns, two_fold_classical, two_fold_ns


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_parse_grid():
    assert parse_grid("0:1/2:3") == [0, Fraction(1, 4), Fraction(1, 2)]
    assert parse_grid("0.1:0.1:1", "float") == [0.1]


def test_solve_single_bsc(capsys):
    code, out = run(capsys, "solve", "--alpha", "1/3")
    assert code == 0
    data = json.loads(out)
    assert data["results"]["classical"]["value"] == "1/2"
    assert data["results"]["ns"]["value"] == "1/2"
    assert data["scalar"] == "rational"


def test_solve_game_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    save_game(bsc_game(Fraction(3, 10), 2), path)
    code, out = run(capsys, "solve", str(path), "--modes", "classical,ns")
    assert code == 0
    res = json.loads(out)["results"]
    assert Fraction(res["classical"]["value"]) == two_fold_classical(Fraction(3, 10))
    assert Fraction(res["ns"]["value"]) == two_fold_ns(Fraction(3, 10))


@pytest.mark.parametrize("payload", ["{not json", '{"x_size": 2}', "[]"])
def test_malformed_game_exit_2(tmp_path, capsys, payload):
    path = tmp_path / "bad.json"
    path.write_text(payload)
    code, out = run(capsys, "solve", str(path))
    assert code == 2
    body = json.loads(out)
    assert body["error"] == "GameFormatError"


@pytest.mark.parametrize("argv", [
    ["sweep", "--alpha-grid", "0:1:3"],
    ["sweep", "--alpha-grid", "0:0.5"],
    ["solve", "--alpha", "0.7"],
    ["solve"],
    ["nosuchcommand"],
    ["solve", "--alpha", "0.1", "--modes", "magic"],
    ["solve", "missing-file.json"],
])
def test_input_errors_exit_2(capsys, argv):
    code, out = run(capsys, *argv)
    assert code == 2
    assert "error" in json.loads(out)


def test_sweep_one_copy(capsys):
    code, out = run(capsys, "sweep", "--copies", "1", "--alpha-grid", "0:1/2:6")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r for r in rows[0]] == ["alpha", "n", "w_classical", "w_ns", "w_npa", "strategy", "error"]
    for r in rows:
        ref = float(single_bsc(Fraction(r["alpha"])))
        assert float(r["w_classical"]) == ref and float(r["w_ns"]) == ref
        assert r["w_npa"] == "" and r["error"] == ""


def test_sweep_two_copies_with_npa(capsys):
    code, out = run(capsys, "sweep", "--copies", "2", "--alpha-grid", "3/10:3/10:1", "--npa")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["w_classical"]) == float(two_fold_classical(Fraction(3, 10)))
    assert float(row["w_classical"]) - 1e-6 <= float(row["w_npa"]) <= float(row["w_classical"]) + 1e-4


def test_sweep_three_copies_ns_only(capsys):
    code, out = run(capsys, "sweep", "--copies", "3", "--alpha-grid", "0.3:0.38:2", "--scalar", "float")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    for r in rows:
        assert r["w_classical"] == ""
        assert abs(float(r["w_ns"]) - float(three_fold_ns(Fraction(r["alpha"])))) < 1e-9


def test_sweep_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["sweep", "--copies", "2", "--alpha-grid", "0:1/2:5", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--copies", "2", "--alpha-grid", "0:1/2:4", "--out", str(a)]) == 0
    assert main(["sweep", "--copies", "2", "--alpha-grid", "0:1/2:4", "--jobs", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_npa_command_and_dump(tmp_path, capsys):
    dump = tmp_path / "sdp.txt"
    code, out = run(capsys, "npa", "--alpha", "0.2", "--dump-sdp", str(dump))
    assert code == 0
    data = json.loads(out)["npa"]
    assert 0.64 <= float(data["bound"]) <= 0.6401
    assert data["dimension"] == 25
    assert dump.read_text().startswith("dim 25\n")


def test_vertices_command(tmp_path, capsys):
    path = tmp_path / "v.json"
    code, out = run(capsys, "vertices", "--dump-vertices", str(path))
    assert code == 0
    data = json.loads(out)
    assert data["vertices"] == 24 and data["deterministic"] == 16
    assert len(json.loads(path.read_text())) == 24


def test_exponent_command(capsys):
    code, out = run(capsys, "exponent", "--n-list", "1,2,4,8", "--alpha-grid", "0.1:0.4:4")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 16
    assert {int(r["n"]) for r in rows} == {1, 2, 4, 8}


def test_codes_command(capsys):
    code, out = run(capsys, "codes", "--alpha-grid", "0.1:0.1:1", "--scalar", "float")
    assert code == 0
    rows = {r["code"]: r for r in csv.DictReader(io.StringIO(out))}
    assert set(rows) == {"constant", "identity", "repetition", "hamming74"}
    assert float(rows["hamming74"]["value"]) > float(rows["repetition"]["value"]) > float(rows["constant"]["value"])
