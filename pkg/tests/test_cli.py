import csv
import io
import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from limop.band_ops import BlockBandOperator
from limop.cli import EXIT_DISAGREE, EXIT_NOT_FREDHOLM, EXIT_OK, EXIT_SPEC, main, run_suite
from limop.oracle import P_INDEPENDENCE_NOTE
from limop.specfile import dump_spec
from limop.symbols import LaurentSymbol

SPECS = Path(__file__).resolve().parent.parent / "specs"


def run_report(tmp_path, name, *extra):
    out = tmp_path / f"{name}.json"
    code = main(["index", str(SPECS / f"{name}.yaml"), "--out", str(out), *extra])
    return code, json.loads(out.read_text())


def read_curve(path):
    rows = list(csv.reader(io.StringIO(Path(path).read_text())))
    assert rows[0] == ["parameter", "re", "im", "modulus", "cumulative_argument"]
    return np.array([[float(v) for v in r] for r in rows[1:]])


def test_forward_shift_report(tmp_path):
    code, rep = run_report(tmp_path, "forward_shift")
    assert code == EXIT_OK
    assert rep["ind"] == -1 and rep["fredholm"] is True
    assert rep["oracle_check"]["agree"] and rep["oracle_check"]["dims"] == [0, 1]
    assert rep["p_note"] == P_INDEPENDENCE_NOTE


def test_not_fredholm_exit(tmp_path):
    code, rep = run_report(tmp_path, "not_fredholm_symbol")
    assert code == EXIT_NOT_FREDHOLM and rep["fredholm"] is False


def test_stabilizing_pipeline(tmp_path):
    code, rep = run_report(tmp_path, "stabilizing_shift")
    assert code == EXIT_OK
    assert (rep["ind"], rep["ind_plus"], rep["ind_minus"]) == (-1, -1, 0)
    assert rep["oracle_check"]["agree"] is True
    assert {r["side"] for r in rep["per_limit_op"]} == {"plus", "minus"}


def test_convolution_report(tmp_path):
    code, rep = run_report(tmp_path, "onesided_exponential")
    assert code == EXIT_OK
    assert rep["ind_plus"] == -1 and rep["wiener_hopf"]["continuous_ind_plus"] == -1
    assert rep["discretization"]["dropped_mass"] < 1e-8


def test_reports_are_deterministic(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    main(["index", str(SPECS / "stabilizing_shift.yaml"), "--out", str(a)])
    main(["index", str(SPECS / "stabilizing_shift.yaml"), "--out", str(b)])
    assert a.read_text() == b.read_text()


def test_spec_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("schema_version: 1\ntoeplitz:\n  coefficients: 3\n")
    assert main(["index", str(bad)]) == EXIT_SPEC
    assert "bad.yaml:3" in capsys.readouterr().err


def test_disagreement_exit(tmp_path):
    # slow cokernel decay cannot stabilize on tiny sections
    spec = tmp_path / "slow.yaml"
    spec.write_text(dump_spec(LaurentSymbol.from_dict({0: -0.97, 1: 1.0}),
                              oracle={"sizes": [8, 16, 32]}))
    code = main(["index", str(spec), "--out", str(tmp_path / "r.json")])
    assert code == EXIT_DISAGREE
    assert main(["index", str(spec), "--no-oracle", "--out", str(tmp_path / "r.json")]) == EXIT_OK


def test_oracle_size_cap_env(tmp_path, monkeypatch):
    monkeypatch.setenv("LIMOP_ORACLE_MAXSIZE", "128")
    code, rep = run_report(tmp_path, "forward_shift")
    assert code == EXIT_DISAGREE and "NotStabilized" in rep["oracle_check"]["error"]


def test_curve_constant_and_shift(tmp_path):
    const = tmp_path / "one.yaml"
    const.write_text(dump_spec(LaurentSymbol.constant(1.0)))
    out = tmp_path / "one.csv"
    assert main(["curve", str(const), "--samples", "36", "--out", str(out)]) == EXIT_OK
    rows = read_curve(out)
    assert np.all(rows[:, 4] == 0) and np.all(rows[:, 1] == 1)
    out = tmp_path / "t.csv"
    assert main(["curve", str(SPECS / "forward_shift.yaml"), "--samples", "360",
                 "--out", str(out)]) == EXIT_OK
    rows = read_curve(out)
    assert len(rows) == 361
    assert abs(rows[-1, 4] - 2 * np.pi) < 1e-9


def test_curve_kernel(tmp_path):
    out = tmp_path / "k.csv"
    assert main(["curve", str(SPECS / "onesided_exponential.yaml"), "--out", str(out)]) == EXIT_OK
    rows = read_curve(out)
    assert np.isinf(rows[0, 0]) and np.isinf(rows[-1, 0])
    # with k^(xi) = int k exp(+i xi x) dx the curve 1 + k^ winds +1; see README
    assert abs(rows[-1, 4] - 2 * np.pi) < 1e-9


def test_curve_rejects_operator_spec(tmp_path):
    assert main(["curve", str(SPECS / "stabilizing_shift.yaml")]) == EXIT_SPEC
    assert main(["curve", str(SPECS / "not_fredholm_symbol.yaml")]) == EXIT_NOT_FREDHOLM


def test_suite_empty_and_corpus(tmp_path, capsys):
    assert run_suite(tmp_path) == ([], EXIT_OK)
    rows, code = run_suite(SPECS)
    assert code == EXIT_OK
    by_name = {r["name"]: r for r in rows}
    assert by_name["not_fredholm_symbol.yaml"]["status"] == "not fredholm"
    assert all(r["agree"] is True for n, r in by_name.items() if n != "not_fredholm_symbol.yaml")
    _, strict = run_suite(SPECS, strict=True)
    assert strict == EXIT_NOT_FREDHOLM


def test_suite_parallel_and_csv(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    shutil.copytree(SPECS, corpus)
    (corpus / "broken.yaml").write_text("schema_version: 1\n")
    out = tmp_path / "summary.csv"
    code = main(["suite", str(corpus), "--jobs", "2", "--out", str(out)])
    assert code == EXIT_SPEC
    table = capsys.readouterr().out
    assert table.splitlines()[0].split()[:4] == ["name", "ind_analytic", "ind_oracle", "agree"]
    assert len(out.read_text().strip().splitlines()) == 7


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "limop.cli", "index",
                           str(SPECS / "forward_shift.yaml"), "--no-oracle"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["ind"] == -1
    spec_text = dump_spec(BlockBandOperator.shift(-1))
    assert "operator" in spec_text
