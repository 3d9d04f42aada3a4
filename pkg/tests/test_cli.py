#!/usr/bin/env python3
"""
Tests for the bounds command line (locinfo.cli)
Sweeps, figures, state files, sdp-check and report, including exit codes
"""

import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

# Add parent directory to path to import locinfo
sys.path.insert(0, str(Path(__file__).parent.parent))

from locinfo.cli import (
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    EXIT_USAGE,
    SdpCheckReport,
    SweepConfig,
    format_table,
    load_state_file,
    main,
    run_figure,
    run_sweep,
    state_file_payload,
)
from locinfo.config import SWEEP_COLUMNS
from locinfo.errors import ParameterRangeError, StateFileError
from locinfo.operator_core import BipartiteDims
from locinfo.sdp_solver import SdpResiduals
from locinfo.state_families import werner


def write_state(tmp_path: Path, matrix, dims=(2, 2), name="state.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(state_file_payload(np.asarray(matrix), BipartiteDims(*dims))))
    return path


# --- sweep ---

def test_sweep_csv_layout(capsys):
    code = main(["sweep", "--family", "werner", "--d", "2", "--from", "-1", "--to", "0", "--step", "0.5",
                 "--threads", "1"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    lines = out.split("\r\n")
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert lines[-1] == ""
    assert len(lines) == 5  # header, three rows, trailing terminator
    first = dict(zip(SWEEP_COLUMNS, lines[1].split(",")))
    assert first["family"] == "werner"
    assert float(first["param"]) == -1.0
    assert float(first["I"]) == pytest.approx(2.0)
    assert float(first["B1"]) == pytest.approx(1.0)
    assert float(first["rP"]) == pytest.approx(1.0)


def test_sweep_grid_is_inclusive():
    config = SweepConfig("isotropic", 3, 0.0, 1.0, 0.1)
    grid = config.grid()
    assert len(grid) == 11
    assert grid[-1] == 1.0
    assert grid[3] == 0.3


def test_sweep_json_and_column_subset(tmp_path):
    out = tmp_path / "sweep.json"
    code = main(["sweep", "--family", "isotropic", "--d", "3", "--from", "0.5", "--to", "1", "--step", "0.25",
                 "--columns", "B2,rP", "--format", "json", "--out", str(out)])
    assert code == EXIT_OK
    rows = json.loads(out.read_text())
    assert [set(r) for r in rows] == [{"family", "d", "param", "B2", "rP"}] * 3
    assert rows[-1]["param"] == 1.0
    assert rows[-1]["B2"] == pytest.approx(np.log2(3), abs=1e-9)


def test_sweep_rows_are_in_grid_order_with_threads():
    config = SweepConfig("werner", 3, -1.0, 1.0, 0.1, threads=4)
    df = run_sweep(config)
    assert list(df["param"]) == config.grid()
    assert (df["d"] == 3).all()


def test_sweep_csv_leaves_undefined_cells_empty():
    df = pd.DataFrame([{"family": "werner", "d": 2, "param": 0.5, "rP": float("nan"), "B2": float("inf")}])
    text = format_table(df, "csv")
    assert text.split("\r\n")[1] == "werner,2,0.5,,inf"
    rows = json.loads(format_table(df, "json"))
    assert rows[0]["rP"] is None
    assert rows[0]["B2"] == "inf"


def test_sweep_values_use_twelve_significant_digits():
    df = pd.DataFrame([{"param": 1.0 / 3.0}])
    assert format_table(df, "csv").split("\r\n")[1] == "0.333333333333"
    assert json.loads(format_table(df, "json"))[0]["param"] == 0.333333333333


@pytest.mark.parametrize("argv", [
    ["sweep", "--family", "werner", "--d", "1", "--from", "0", "--to", "1", "--step", "0.1"],
    ["sweep", "--family", "werner", "--d", "3", "--from", "0.5", "--to", "0", "--step", "0.1"],
    ["sweep", "--family", "werner", "--d", "3", "--from", "-2", "--to", "0", "--step", "0.1"],
    ["sweep", "--family", "isotropic", "--d", "3", "--from", "0", "--to", "1", "--step", "0"],
    ["sweep", "--family", "werner", "--d", "3", "--from", "0", "--to", "1", "--step", "0.5", "--columns", "XYZ"],
])
def test_sweep_validation_errors_exit_1(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_sweep_config_rejects_bad_family():
    with pytest.raises(ParameterRangeError):
        SweepConfig("ghz", 3, 0.0, 1.0, 0.1)


def test_usage_errors_exit_1():
    with pytest.raises(SystemExit) as excinfo:
        main(["sweep", "--family", "werner"])
    assert excinfo.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as excinfo:
        main(["figure", "--id", "5"])
    assert excinfo.value.code == EXIT_USAGE


# --- figures ---

def test_figure_1_columns_and_range():
    df = run_figure(1, step=0.25, threads=1)
    assert list(df.columns) == ["family", "d", "param", "I", "B1", "B2", "rP"]
    assert df["param"].iloc[0] == -1.0
    assert df["param"].iloc[-1] == 1.0
    assert (df["B2"] <= df["B1"] + 1e-9).all()
    assert (df["rP"] <= df["B2"] + 1e-9).all()


def test_figure_4_covers_three_dimensions():
    df = run_figure(4, step=0.25)
    assert sorted(df["d"].unique()) == [3, 4, 5]
    for d, group in df.groupby("d"):
        assert group["param"].iloc[0] == pytest.approx(-1.0 / (d * d - 1))
        assert group["param"].iloc[-1] == 1.0


def test_figure_8_has_formation_curves(capsys):
    assert main(["figure", "--id", "8", "--step", "0.25"]) == EXIT_OK
    header = capsys.readouterr().out.split("\r\n")[0]
    assert header == "family,d,param,deltaB,deltaP,ER,EF,g_raw"


# --- state files ---

def test_load_state_file_normalises_noise(tmp_path):
    rho = werner(2, -0.5)
    noisy = rho + 1e-11 * np.eye(4)
    spec = load_state_file(write_state(tmp_path, noisy))
    assert spec.variant == "explicit"
    assert np.trace(spec.matrix).real == pytest.approx(1.0, abs=1e-15)
    assert spec.describe() == "file:state.json"


@pytest.mark.parametrize("matrix, kind", [
    (np.array([[0.5, 0.1, 0, 0], [0, 0.5, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]), "hermiticity"),
    (np.diag([1.5, -0.5, 0.0, 0.0]), "positivity"),
    (np.eye(4) / 2, "trace"),
])
def test_load_state_file_error_kinds(tmp_path, matrix, kind):
    with pytest.raises(StateFileError) as excinfo:
        load_state_file(write_state(tmp_path, matrix))
    assert excinfo.value.kind == kind


def test_load_state_file_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(StateFileError) as excinfo:
        load_state_file(bad)
    assert excinfo.value.kind == "parse"
    wrong_shape = write_state(tmp_path, np.eye(4) / 4, dims=(3, 3), name="shape.json")
    with pytest.raises(StateFileError) as excinfo:
        load_state_file(wrong_shape)
    assert excinfo.value.kind == "parse"


# --- report ---

def test_report_named_state(capsys):
    assert main(["report", "--state", "singlet"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["dims"] == [2, 2]
    assert payload["info_content"] == pytest.approx(2.0)
    assert payload["b2"] == pytest.approx(1.0, abs=1e-9)
    assert payload["r_protocol"] == pytest.approx(1.0)
    assert payload["er"] == pytest.approx(1.0)


def test_report_state_file_without_protocol_bound(tmp_path, capsys):
    p00 = np.zeros((4, 4))
    p00[0, 0] = 1.0
    path = write_state(tmp_path, p00)
    assert main(["report", "--file", str(path)]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["r_protocol"] is None
    assert payload["delta_p"] is None
    assert payload["state"] == "file:state.json"


def test_report_written_to_file(tmp_path, capsys):
    out = tmp_path / "reports" / "singlet.json"
    assert main(["report", "--state", "singlet", "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    payload = json.loads(out.read_text())
    assert payload["b1"] == pytest.approx(1.0, abs=1e-9)


def test_report_bad_inputs_exit_1(tmp_path, capsys):
    assert main(["report", "--state", "werner:3:5"]) == EXIT_USAGE
    path = write_state(tmp_path, np.eye(4) / 2)
    assert main(["report", "--file", str(path)]) == EXIT_USAGE
    assert "trace" in capsys.readouterr().err


# --- sdp-check ---

def test_sdp_check_singlet_passes(capsys):
    code = main(["sdp-check", "--state", "singlet", "--K", "1", "--tol", "1e-4",
                 "--bank-size", "10", "--max-iterations", "5000", "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["oracle"] == pytest.approx(0.5)
    assert payload["oracle_symmetry"] == "uu"
    assert payload["primal"] <= payload["dual"] + 1e-4
    assert code == EXIT_OK
    assert payload["passed"] is True


@pytest.mark.parametrize("state, K, expected", [("singlet", "1", 0.5), ("werner:3:-1", "4.5", 0.75)])
def test_sdp_check_converges_with_default_options(state, K, expected, capsys):
    code = main(["sdp-check", "--state", state, "--K", K, "--bank-size", "10", "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["converged"] is True
    assert payload["primal"] == pytest.approx(expected, abs=1e-6)
    assert payload["oracle"] == pytest.approx(expected, abs=1e-12)
    assert code == EXIT_OK


def test_sdp_check_from_rate():
    # rate 1 on d = 2 gives K = 2^{2-1} = 2
    assert main(["sdp-check", "--state", "singlet", "--rate", "1", "--tol", "1e-4",
                 "--bank-size", "5", "--max-iterations", "5000"]) == EXIT_OK


def test_sdp_check_mixed_infeasible_exits_1(capsys):
    code = main(["sdp-check", "--state", "singlet", "--K", "3", "--mixed", "--ks", "2"])
    assert code == EXIT_USAGE
    assert "infeasible" in capsys.readouterr().err


def test_sdp_check_rejects_oversized_problem():
    assert main(["sdp-check", "--state", "werner:3:-0.5", "--K", "2", "--copies", "2"]) == EXIT_USAGE


def test_sdp_check_report_exit_codes():
    residuals = SdpResiduals(0.0, 0.0, 0.0, 0.0)
    base = dict(state="s", K=1.0, variant="local_only", Ks=1.0, copies=1, primal=0.5, dual=0.5, gap=0.0,
                residuals=residuals, iterations=1, feasible=True)
    assert SdpCheckReport(converged=True, passed=True, **base).exit_code == EXIT_OK
    assert SdpCheckReport(converged=True, passed=False, **base).exit_code == EXIT_USAGE
    assert SdpCheckReport(converged=False, passed=True, **base).exit_code == EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
