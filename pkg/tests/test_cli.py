import csv
import io
import json
import subprocess
import sys

import pytest

from fracspec.cli import run
from fracspec.io import atomic_write, dec, dumps


def out(capsys, argv):
    code = run(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_graph_level_zero(capsys):
    code, text, _ = out(capsys, ["graph", "--fractal", "sg", "--level", "0"])
    assert code == 0
    assert len(json.loads(text)["vertices"]) == 3


def test_limit_interval(capsys):
    code, text, _ = out(capsys, ["limit", "--fractal", "interval", "--bc", "dirichlet", "--count", "3", "--format", "csv"])
    rows = list(csv.DictReader(io.StringIO(text)))
    from mpmath import mp, mpf, pi

    mp.prec = 128
    assert code == 0
    assert [abs(mpf(r["eigenvalue"]) / (pi**2 * k * k) - 1) < 1e-9 for k, r in enumerate(rows, 1)] == [True] * 3


def test_criterion_sg3(capsys):
    code, text, _ = out(capsys, ["criterion", "--fractal", "sg3"])
    d = json.loads(text)
    assert code == 0
    assert d["verdict"] == "ZeroInfimum" and d["c_delta"] == "90/7"
    assert d["zero_criterion"]["witnesses"]["zeta_enclosure"][0].startswith("1.3005726757")


def test_strict_inconclusive_exit(capsys):
    code, _, _ = out(capsys, ["criterion", "--fractal", "sg", "--D0", "0,6", "--strict"])
    assert code == 3
    code, _, _ = out(capsys, ["criterion", "--fractal", "sg", "--D0", "0,6"])
    assert code == 0


@pytest.mark.parametrize("argv,flag", [
    (["graph", "--precision", "32"], "--precision"),
    (["graph", "--tol", "0"], "--tol"),
    (["graph", "--level", "50"], "--level"),
    (["spectrum", "--fractal", "koch"], "--fractal"),
    (["spectrum", "--registry", "/nonexistent.json"], "--registry"),
    (["witness", "--x1", "abc"], "--x1"),
    (["limit", "--fractal", "sg"], "--count"),
    (["reproduce", "99"], "example-id"),
])
def test_validation_errors(capsys, argv, flag):
    code, _, err = out(capsys, argv)
    assert code == 2
    assert flag in err and len(err.strip().splitlines()) == 1


def test_unknown_flag_exit_two(capsys):
    assert run(["graph", "--bogus"]) == 2


def test_output_file_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(["spectrum", "--fractal", "sg3", "--level", "2", "--output", str(p)]) == 0
    assert a.read_text() == b.read_text()
    assert json.loads(a.read_text())["convention"] == "probabilistic"
    assert not [p for p in tmp_path.iterdir() if p.name.endswith(".tmp")]


def test_formats(capsys):
    for fmt in ("json", "csv", "text"):
        code, text, _ = out(capsys, ["decimate-verify", "--fractal", "sg", "--level", "2", "--format", fmt])
        assert code == 0 and text
    code, text, _ = out(capsys, ["wielandt", "--trials", "5", "--format", "csv", "--seed", "3"])
    assert code == 0 and text.splitlines()[1].startswith("3,")


def test_spacing_and_witness(capsys):
    code, text, _ = out(capsys, ["spacing", "--fractal", "sg", "--level", "2", "--bc", "neumann"])
    assert code == 0 and float(json.loads(text)["min_spacing"]) > 0
    code, text, _ = out(capsys, ["witness", "--m-max", "3"])
    pts = json.loads(text)["points"]
    assert code == 0 and [p["m"] for p in pts] == [0, 1, 2, 3]


def test_reproduce_single(capsys):
    code, text, _ = out(capsys, ["reproduce", "1"])
    assert code == 0 and text.startswith("PASS")
    code, text, _ = out(capsys, ["reproduce", "2"])
    assert code == 1 and text.startswith("FAIL")


def test_registry_override(tmp_path, capsys):
    reg = tmp_path / "r.json"
    reg.write_text(json.dumps({"systems": [{
        "name": "mysg", "fractal": "sg", "convention": "combinatorial",
        "numerator": ["0", "5", "-1"], "denominator": ["1"], "x_r": "6", "exceptional": ["6"],
    }]}))
    code, text, _ = out(capsys, ["spectrum", "--registry", str(reg), "--fractal", "mysg", "--level", "1"])
    assert code == 0 and json.loads(text)["fractal"] == "sg"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fracspec", "graph", "--level", "0", "--format", "csv"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.splitlines()[0] == "u,v"


def test_io_helpers(tmp_path):
    from fractions import Fraction

    from mpmath import mpf

    assert dec(Fraction(3, 1)) == "3"
    assert dec(Fraction(1, 3), 64).startswith("0.3333333333333333")
    assert json.loads(dumps({"x": mpf(2), "y": [Fraction(1, 2)]}))["y"] == ["0.5"]
    p = tmp_path / "sub" / "f.txt"
    atomic_write(p, "hello")
    atomic_write(p, "again")
    assert p.read_text() == "again"
