import json
import subprocess
import sys

import pytest

from kproper.cli import main, parse_report, render_report
from kproper.properness import (
    KClassSetup,
    StabilizerAlpha,
    check_properness,
)
from kproper.toric import ToricDivisor, anticanonical_divisor, dp6_fan


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_fan_validate_builtin(capsys):
    code, out, _ = run_cli(capsys, "fan", "validate", "dp6")
    assert code == 0
    assert json.loads(out) == {"smooth": True, "complete": True}


def test_fan_validate_from_file(capsys, tmp_path):
    path = tmp_path / "fan.json"
    path.write_text(json.dumps({
        "dim": 2,
        "rays": [[1, 0], [0, 1], [-1, -1]],
        "max_cones": [[0, 1], [1, 2], [0, 2]],
    }))
    code, out, _ = run_cli(capsys, "fan", "validate", str(path))
    assert code == 0
    assert json.loads(out)["complete"] is True


def test_unknown_builtin_is_input_error(capsys):
    code, _, err = run_cli(capsys, "fan", "validate", "dp7")
    assert code == 1
    assert "unknown fan" in err


def test_malformed_json_reports_position(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"rays": [[1, 0],')
    code, _, err = run_cli(capsys, "fan", "validate", str(path))
    assert code == 1
    assert "line" in err and "column" in err


def test_fan_autos(capsys):
    code, out, _ = run_cli(capsys, "fan", "autos", "dp6")
    data = json.loads(out)
    assert code == 0 and data["order"] == 12
    assert [[1, 0], [0, 1]] in data["matrices"]


def test_divisor_ample(capsys):
    code, out, _ = run_cli(capsys, "divisor", "ample", "dp6", "--coeffs", "1,1,1,1,1,1")
    assert code == 0
    assert json.loads(out) == {"ample": True, "nef": True}


def test_non_canonical_rational_rejected(capsys):
    code, _, err = run_cli(capsys, "divisor", "ample", "dp6", "--coeffs", "1,2/4,1,1,1,1")
    assert code == 1
    assert '"1/2"' in err


def test_polytope_info(capsys):
    code, out, _ = run_cli(capsys, "polytope", "info", "dp6", "--coeffs", "1,1,1,1,1,1")
    data = json.loads(out)
    assert code == 0
    assert data["volume"] == "3"
    assert data["boundary_measure"] == "6"
    assert data["barycenter"] == ["0", "0"]
    assert ["'", "'"] not in data["vertices"]
    assert len(data["vertices"]) == 6


def test_polytope_info_from_polytope_file(capsys, tmp_path):
    path = tmp_path / "poly.json"
    path.write_text(json.dumps({
        "dim": 2,
        "hrep": [
            {"normal": [1, 0], "offset": "0"},
            {"normal": [-1, 0], "offset": "-1"},
            {"normal": [0, 1], "offset": "0"},
            {"normal": [0, -1], "offset": "-1"},
        ],
    }))
    code, out, _ = run_cli(capsys, "polytope", "info", str(path))
    assert code == 0
    assert json.loads(out)["volume"] == "1"


def test_alpha_command_with_oracle(capsys):
    code, out, _ = run_cli(
        capsys, "alpha", "dp6", "--coeffs", "1,6/5,1,6/5,1,6/5",
        "--group", "full", "--oracle-depth", "2",
    )
    data = json.loads(out)
    assert code == 0
    assert data["alpha"] == "5/6"
    assert data["stabilizer_order"] == 6
    assert data["oracle_depth"] == 2


def test_alpha_explicit_group(capsys, tmp_path):
    group = tmp_path / "group.json"
    group.write_text(json.dumps({"matrices": [[[0, -1], [1, -1]]]}))
    code, out, _ = run_cli(
        capsys, "alpha", "dp6", "--coeffs", "1,6/5,1,6/5,1,6/5",
        "--group", "explicit", "--group-file", str(group),
    )
    data = json.loads(out)
    assert code == 0
    assert data["alpha"] == "5/6"
    assert data["stabilizer_order"] == 3

    code, _, err = run_cli(
        capsys, "alpha", "dp6", "--coeffs", "1,6/5,1,6/5,1,6/5", "--group", "explicit",
    )
    assert code == 1 and "--group-file" in err


def test_intersect_command(capsys):
    code, out, _ = run_cli(capsys, "intersect", "dp6", "--coeffs", "1,1,1,1,1,1")
    data = json.loads(out)
    assert code == 0
    assert data == {
        "self_intersection": "6",
        "anticanonical_pairing": "6",
        "mu": "1",
        "rbar": "2",
    }


def test_check_failing_verdict_still_exits_zero(capsys):
    code, out, _ = run_cli(
        capsys, "--format", "text", "check", "--builtin", "dp6",
        "--coeffs", "2,2,2,2,2,2", "--epsilon", "1",
    )
    assert code == 0
    assert "condition (1): FAIL" in out
    assert "verdict: criterion not satisfied" in out


def test_check_json_round_trips(capsys):
    code, out, _ = run_cli(
        capsys, "check", "--builtin", "dp6", "--coeffs", "5/4,5/4,5/4,5/4,5/4,5/4",
    )
    assert code == 0
    report = parse_report(out)
    assert render_report(report, "json") == out


def test_check_picard_backend(capsys):
    code, out, _ = run_cli(
        capsys, "check", "--builtin", "dp1",
        "--coeffs", "15/4,5/4,5/4,5/4,5/4,5/4,5/4,5/4,5/4",
        "--alpha", "4/5",
    )
    data = json.loads(out)
    assert code == 0
    assert data["verdict"] == "proper"
    assert data["scope"] == "all potentials"


def test_check_fano_mode(capsys):
    code, out, _ = run_cli(
        capsys, "check", "--builtin", "dp6", "--coeffs", "1,1,1,1,1,1", "--mode", "fano",
    )
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "proper"


def test_check_negative_c1_slice_mode(capsys, tmp_path):
    path = tmp_path / "slice.json"
    path.write_text(json.dumps({
        "n": 2,
        "l_pow_n": "1",
        "k_dot_l_nm1": "1",
        "k_pow_n": "1",
        "test_curves": [{"name": "canonical test curve", "L": "1", "K": "1"}],
    }))
    code, out, _ = run_cli(capsys, "check", "--mode", "negative-c1", "--slice", str(path))
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "proper"


def test_byte_identical_reruns(capsys):
    argv = ("check", "--builtin", "dp6", "--coeffs", "5/4,5/4,5/4,5/4,5/4,5/4")
    _, first, _ = run_cli(capsys, *argv)
    _, second, _ = run_cli(capsys, *argv)
    assert first == second


def test_sweep_cli(capsys, tmp_path):
    config = tmp_path / "sweep.json"
    config.write_text(json.dumps({
        "family": "dp6",
        "epsilon": "1",
        "lambda_min": "11/10",
        "lambda_max": "13/10",
        "step": "1/20",
        "refine_tol": "1/1000",
        "conjectured_endpoints": ["6/5"],
    }))
    code, out, _ = run_cli(capsys, "sweep", "--config", str(config))
    data = json.loads(out)
    assert code == 0
    assert len(data["intervals"]) == 1
    assert data["endpoint_checks"][0]["confirmed"] is True
    report = parse_report(out)
    assert render_report(report, "json") == out


def test_sweep_env_var_overrides_parallel(capsys, tmp_path, monkeypatch):
    config = tmp_path / "sweep.json"
    config.write_text(json.dumps({
        "family": "dp6",
        "lambda_min": "19/20",
        "lambda_max": "21/20",
        "step": "1/20",
        "refine_tol": "1/100",
    }))
    monkeypatch.setenv("KPROPER_PARALLEL", "1")
    code, out, _ = run_cli(capsys, "sweep", "--config", str(config))
    assert code == 0
    monkeypatch.setenv("KPROPER_PARALLEL", "0")
    code, out2, _ = run_cli(capsys, "sweep", "--config", str(config))
    assert code == 0
    assert out == out2


def test_picard_curves_cli(capsys):
    code, out, _ = run_cli(capsys, "picard", "curves", "--r", "8")
    data = json.loads(out)
    assert code == 0
    assert data["count"] == 240
    assert data["census"] == {"0": 8, "1": 28, "2": 56, "3": 56, "4": 56, "5": 28, "6": 8}


def test_approx_flag_marks_decimals(capsys):
    code, out, _ = run_cli(
        capsys, "--format", "text", "--approx", "alpha", "dp6",
        "--coeffs", "1,6/5,1,6/5,1,6/5",
    )
    assert code == 0
    assert "5/6 (~0.833333)" in out


def test_text_report_renders_for_library_report():
    from fractions import Fraction

    report = check_properness(
        KClassSetup(
            backend=Fraction(5, 4) * anticanonical_divisor(dp6_fan()),
            epsilon=1,
            alpha_source=StabilizerAlpha("full"),
        )
    )
    text = render_report(report, "text")
    assert "condition (1)" in text and "verdict: proper" in text


def test_module_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "kproper", "fan", "validate", "p2"],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert json.loads(result.stdout) == {"smooth": True, "complete": True}
