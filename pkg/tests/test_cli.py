import json
import math

import numpy as np
import pytest

from idepcag import bundled_system_path, load_bundled_system, w_local
from idepcag.cli import main
from conftest import scalar_doc, sin_doc

TWO_PI = 2.0 * math.pi


def _spec(name):
    return str(bundled_system_path(name))


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _analyze_json(capsys, path, *flags):
    code = main(["analyze", path, *flags])
    out = capsys.readouterr().out
    return code, json.loads(out.replace('"inf"', "1e999"))


# ----------------------------------------------------------------- analyze


@pytest.mark.parametrize(
    "c, verdict, lyapunov",
    [
        (-0.8, "ExponentiallyStable", math.log(0.8)),
        (1.1, "Unbounded", math.log(1.1)),
        (-1.0, "PeriodicNOmega(2)", 0.0),
        (1.0, "PeriodicOmega", 0.0),
    ],
)
def test_analyze_sin_quartet(tmp_path, capsys, c, verdict, lyapunov):
    path = _write(tmp_path, f"sin_{c}.json", sin_doc(c))
    code, report = _analyze_json(capsys, path)
    assert code == 0
    assert report["verdict"] == verdict
    assert report["lyapunov"][0] == pytest.approx(lyapunov, abs=1e-9)
    assert report["monodromy"][0][0][0] == pytest.approx(c, abs=1e-9)


def test_analyze_oscillation_annotation(tmp_path, capsys):
    path = _write(tmp_path, "osc.json", sin_doc(-1.0))
    _, report = _analyze_json(capsys, path)
    assert report["oscillatory"] is True


def test_analyze_byte_identical_reruns(capsys):
    code1 = main(["analyze", _spec("sin_impulse")])
    out1 = capsys.readouterr().out
    code2 = main(["analyze", _spec("sin_impulse")])
    out2 = capsys.readouterr().out
    assert code1 == code2 == 0
    assert out1 == out2


def test_analyze_writes_file(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    assert main(["analyze", _spec("scalar_impulse"), "--out", str(out_path)]) == 0
    report = json.loads(out_path.read_text())
    assert report["verdict"] == "PeriodicNOmega(2)"


def test_analyze_strict_h_exit_code(capsys):
    # the scalar example violates the sufficient invertibility bounds
    assert main(["analyze", _spec("scalar_impulse"), "--strict-h"]) == 2
    assert main(["analyze", _spec("sin_impulse"), "--strict-h"]) == 0


def test_analyze_invalid_document_exit_1(tmp_path, capsys):
    bad = _write(tmp_path, "bad.json", "{not json")
    assert main(["analyze", bad]) == 1
    doc = json.loads(scalar_doc(-0.3, 10 / 3))
    doc["args"] = [2.0]
    assert main(["analyze", _write(tmp_path, "grid.json", json.dumps(doc))]) == 1


def test_analyze_missing_file_exit_1(capsys):
    assert main(["analyze", "/nonexistent/system.json"]) == 1


def test_analyze_singular_anchor_exit_3(tmp_path, capsys):
    # B = -1 zeroes J at the right anchor: numerical failure, not input error
    path = _write(tmp_path, "singular.json", scalar_doc(0.0, 2.0))
    assert main(["analyze", path]) == 3


def test_unknown_flag_exit_1(capsys):
    assert main(["analyze", _spec("sin_impulse"), "--frobnicate"]) == 1


def test_invalid_log_level_exit_1(monkeypatch, capsys):
    monkeypatch.setenv("FLOQUET_LOG", "verbose")
    assert main(["analyze", _spec("sin_impulse")]) == 1


# ---------------------------------------------------------------- simulate


def test_simulate_csv_stdout(capsys):
    code = main(["simulate", _spec("scalar_impulse"), "--x0", "6",
                 "--t-end", "2", "--dt-out", "0.5"])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,kind,re_x1,im_x1"
    row = dict(zip(("t", "kind", "re", "im"), lines[2].split(",")))
    assert float(row["re"]) == pytest.approx(2.1, abs=1e-9)


def test_simulate_single_interval_matches_w_local(capsys):
    system = load_bundled_system("rotation_2x2")
    code = main(["simulate", _spec("rotation_2x2"), "--x0", "1,0",
                 "--t-end", "0.5", "--dt-out", "0.25"])
    out = capsys.readouterr().out
    assert code == 0
    for line in out.strip().splitlines()[1:]:
        cells = line.split(",")
        t = float(cells[0])
        x = np.array([float(cells[2]) + 1j * float(cells[3]),
                      float(cells[4]) + 1j * float(cells[5])])
        expected = w_local(system, 0, 0.0, t) @ np.array([1.0, 0.0])
        assert np.abs(x - expected).max() <= 1e-9


def test_simulate_both_reports_discrepancy(tmp_path, capsys):
    out_base = tmp_path / "traj.csv"
    code = main(["simulate", _spec("rotation_2x2"), "--x0", "1,1",
                 "--t-end", str(2 * TWO_PI), "--dt-out", "0.5",
                 "--method", "both", "--out", str(out_base)])
    err = capsys.readouterr().err
    assert code == 0
    assert (tmp_path / "traj_cauchy.csv").exists()
    assert (tmp_path / "traj_direct.csv").exists()
    line = [l for l in err.splitlines() if "max discrepancy" in l][0]
    assert float(line.rsplit(":", 1)[1]) <= 1e-7


def test_simulate_complex_x0(capsys):
    code = main(["simulate", _spec("sin_impulse"), "--x0", "1+2i",
                 "--t-end", "1.0", "--dt-out", "0.5"])
    out = capsys.readouterr().out
    assert code == 0
    first = out.strip().splitlines()[1].split(",")
    assert float(first[2]) == 1.0 and float(first[3]) == 2.0


def test_simulate_x0_dimension_mismatch(capsys):
    assert main(["simulate", _spec("rotation_2x2"), "--x0", "1",
                 "--t-end", "1"]) == 1


# --------------------------------------------------------------- factorize


def test_factorize_sin_nonimpulsive(tmp_path, capsys):
    path = _write(tmp_path, "sin1.json", sin_doc(1.0))
    code = main(["factorize", path, "--samples", "8"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert abs(out["P"][0][0][0]) <= 1e-9 and abs(out["P"][0][0][1]) <= 1e-9
    for t, matrix in zip(out["q_samples"]["times"], out["q_samples"]["matrices"]):
        expected = 1.0 + (1.0 - math.cos(2.0 * math.pi * t)) / (2.0 * math.pi)
        assert matrix[0][0][0] == pytest.approx(expected, abs=1e-7)
    assert out["residuals"]["q_periodicity"] <= 1e-6


def test_factorize_constant_system_recovers_generator(tmp_path, capsys):
    from conftest import constant_doc

    path = _write(tmp_path, "const.json", constant_doc(a=-0.2, c=0.0))
    code = main(["factorize", path, "--samples", "4"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["P"][0][0][0] == pytest.approx(-0.2, abs=1e-10)
    for matrix in out["q_samples"]["matrices"]:
        assert matrix[0][0][0] == pytest.approx(1.0, abs=1e-8)


def test_factorize_real_two_periodic(capsys):
    code = main(["factorize", _spec("scalar_impulse"), "--real", "--samples", "6"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["real"] is True
    assert out["q_period"] == pytest.approx(2.0)
    assert abs(out["P"][0][0][0]) <= 1e-10
    assert out["residuals"]["q_periodicity"] <= 1e-8


def test_factorize_csv_output(capsys):
    code = main(["factorize", _spec("sin_impulse"), "--samples", "5",
                 "--format", "csv"])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,re_q11,im_q11"
    assert len(lines) == 6


# ------------------------------------------------------------------ verify


def test_verify_bundled_systems_pass(capsys):
    for name in ("scalar_impulse", "sin_impulse", "markus_yamabe"):
        assert main(["verify", _spec(name)]) == 0
        out = capsys.readouterr().out
        assert "all checks passed" in out


def test_verify_json_format(capsys):
    assert main(["verify", _spec("sin_impulse"), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is True
    assert any(c["name"] == "biperiodicity_e" for c in doc["checks"])


def test_verify_loose_tolerances_exit_4(tmp_path, capsys):
    # a valid document whose integrator budget is far too loose to meet
    # the residual thresholds
    doc = json.loads(bundled_system_path("rotation_2x2").read_text())
    doc["tolerances"] = {"ode_abs": 1e-3, "ode_rel": 1e-3, "alg": 1e-9}
    path = _write(tmp_path, "sloppy.json", json.dumps(doc))
    assert main(["verify", path]) == 4
    assert "FAIL" in capsys.readouterr().out


# ------------------------------------------------------------------- sweep


def test_sweep_reproduces_behavior_table(capsys):
    code = main(["sweep", _spec("scalar_table_template"), "--param", "AC",
                 "--range=-1.5:1.5", "--steps", "7"])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "value,multipliers,lyapunov,verdict,oscillatory"
    rows = {}
    for line in lines[1:]:
        cells = line.split(",")
        rows[round(float(cells[0]), 6)] = (cells[3], cells[4])
    assert rows[-1.5] == ("Unbounded", "true")
    assert rows[-1.0] == ("PeriodicNOmega(2)", "true")
    assert rows[-0.5] == ("ExponentiallyStable", "true")
    assert rows[0.5] == ("ExponentiallyStable", "false")
    assert rows[1.0] == ("PeriodicOmega", "false")
    assert rows[1.5] == ("Unbounded", "false")
    assert rows[0.0][0].startswith("Error")


def test_sweep_requires_token_in_template(tmp_path, capsys):
    path = _write(tmp_path, "plain.json", sin_doc(0.5))
    assert main(["sweep", path, "--param", "AC", "--range=0:1", "--steps", "3"]) == 1


def test_sweep_bad_range_exit_1(capsys):
    assert main(["sweep", _spec("scalar_table_template"), "--param", "AC",
                 "--range", "nonsense", "--steps", "3"]) == 1
