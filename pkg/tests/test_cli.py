import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from heegnerspec.cli import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OK,
    ConfigError,
    RunConfig,
    cache_admin,
    emit_report,
    main,
    run,
)
from heegnerspec.errors import CacheError, DomainError
from heegnerspec.specialfns import BRANCH_FILE
from heegnerspec.zeros import CSV_FIELDS, constant_term_zeros


def _stderr_json(capsys):
    err = capsys.readouterr().err.strip().splitlines()[-1]
    return json.loads(err)


# --- emit_report -------------------------------------------------------------


def test_empty_csv_has_header(capsys):
    text = emit_report([], "csv", empty_ok=True)
    assert text == ",".join(CSV_FIELDS) + "\n"
    with pytest.raises(DomainError):
        emit_report([], "csv")


def test_json_roundtrip(tmp_path):
    recs = constant_term_zeros(2.0, 5.0, 20.0)
    path = tmp_path / "z.json"
    emit_report(recs, "json", path)
    back = json.loads(path.read_text())
    assert len(back) == len(recs)
    assert back[0]["kind"] == "constant_term"
    assert back[0]["t"] == pytest.approx(recs[0].t, rel=1e-14)
    assert list(back[0]) == ["kind", "t", "a", "residual", "bracket"]


def test_csv_row_count(tmp_path):
    recs = constant_term_zeros(2.0, 5.0, 40.0)
    path = tmp_path / "z.csv"
    emit_report(recs, "csv", path)
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert len(rows) == len(recs)


def test_fifteen_significant_digits(capsys):
    text = emit_report({"x": 1 / 3, "w": complex(2 / 3, -1 / 7)}, "json")
    data = json.loads(text)
    assert data["x"] == float(f"{1 / 3:.15g}")
    assert data["w"] == [float(f"{2 / 3:.15g}"), float(f"{-1 / 7:.15g}")]


def test_emit_report_io_error_surfaces(tmp_path):
    with pytest.raises(OSError):
        emit_report({"x": 1.0}, "json", tmp_path / "missing" / "r.json")


# --- configuration -----------------------------------------------------------


def test_run_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig("bogus")
    with pytest.raises(ConfigError):
        RunConfig("ct-zeros", a=1.0)
    with pytest.raises(ConfigError):
        RunConfig("ct-zeros", window=(10.0, 5.0))
    with pytest.raises(ConfigError):
        RunConfig("ct-zeros", format="xml")
    with pytest.raises(ConfigError):
        RunConfig("ct-zeros", out=str(tmp_path / "nope" / "x.csv"))


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["ct-zeros", "--a", "0.5"],
    ["ct-zeros", "--window", "5", "1"],
    ["theta-zeros", "--disc", "-12"],
    ["determinant", "--tmax", "-1"],
])
def test_config_errors_exit_4(argv, capsys):
    assert main(argv) == EXIT_CONFIG
    err = _stderr_json(capsys)
    assert err["exit_code"] == EXIT_CONFIG and err["message"]


# --- subcommands -------------------------------------------------------------


def test_pair_corr(capsys):
    assert main(["pair-corr", "--beta", "0.5"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert abs(rep["pair_fraction"] - 0.11315) < 5e-5


def test_ct_zeros_csv(tmp_path):
    out = tmp_path / "ct.csv"
    assert main(["ct-zeros", "--a", "2", "--window", "5", "30", "--format", "csv", "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == len(constant_term_zeros(2.0, 5.0, 30.0))


def test_eigen_one_per_interval(tmp_path):
    out = tmp_path / "eig.csv"
    assert main(["eigen", "--disc", "-7", "--a", "2", "--window", "15", "25", "--format", "csv", "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    cts = constant_term_zeros(2.0, 15.0, 25.0)
    assert len(rows) == len(cts) - 1
    for z0, z1, r in zip(cts, cts[1:], rows):
        assert r["kind"] == "eigenvalue" and z0.t < float(r["t"]) < z1.t


def test_determinant(capsys):
    assert main(["determinant", "--disc", "-7", "--a", "3", "--w", "0.6+8i"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["F"] == pytest.approx([-0.773251260549, 0.343337782121], abs=1e-6)


def test_deterministic_reports(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["theta-zeros", "--disc", "-7", "--disc", "-23:0.5", "--window", "2", "40", "--out", str(p)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


# --- cache administration ----------------------------------------------------


def test_cache_clear_warm_status(tmp_path):
    d = tmp_path / "cache"
    warm = cache_admin(d, "warm")
    assert warm["anchor_count"] == round((200 - 0.5) / 0.05) + 1 == 3991
    status = cache_admin(d, "status")
    assert [f["kind"] for f in status["files"]] == ["PSIBR001"]
    cleared = cache_admin(d, "clear")
    assert cleared["removed"] == [BRANCH_FILE]
    assert cache_admin(d, "status")["files"] == []


def test_cache_corrupt_magic(tmp_path, capsys):
    d = tmp_path / "cache"
    cache_admin(d, "warm")
    path = d / BRANCH_FILE
    path.write_bytes(b"CORRUPT!" + path.read_bytes()[8:])
    before = path.read_bytes()
    with pytest.raises(CacheError):
        cache_admin(d, "status")
    with pytest.raises(CacheError):
        cache_admin(d, "warm")
    assert path.read_bytes() == before
    assert main(["cache", "status", "--cache-dir", str(d)]) == EXIT_NUMERIC
    assert _stderr_json(capsys)["error"] == "CacheError"


def test_cache_unknown_action(tmp_path):
    with pytest.raises(ConfigError):
        cache_admin(tmp_path, "defrag")


def test_run_restores_cache_settings(tmp_path):
    from heegnerspec import spectral

    before = spectral.settings.cache_dir
    assert run(RunConfig("cache", cache_dir=str(tmp_path), action="status")) == EXIT_OK
    assert spectral.settings.cache_dir == before


def test_selfcheck_exit_0(capsys):
    assert main(["selfcheck"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["passed"] and len(rep["checks"]) >= 10
    modules = {c["check"].split(".")[0] for c in rep["checks"]}
    assert modules == {"specialfns", "heegner", "eisenstein", "spectral", "zeros", "analysis"}


@pytest.mark.skipif(shutil.which("heegnerspec") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["heegnerspec", "pair-corr", "--format", "csv"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "key,value"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "heegnerspec.cli", "ct-zeros", "--a", "0.5"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == EXIT_CONFIG
    assert json.loads(proc.stderr)["error"] == "ConfigError"
