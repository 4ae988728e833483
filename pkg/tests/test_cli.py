from __future__ import annotations

import json

import pytest

from marginal_metrics.cli import EXIT_CONFIG, EXIT_OK, EXIT_VIOLATION, main
from marginal_metrics.models import SuiteReport
from tools import validate_measure


def _run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_metrics_on_sample_files(capsys, sample_data):
    code, out, _ = _run(capsys, "metrics", str(sample_data / "p_co.json"), str(sample_data / "p_ind.json"), "--p", "1")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["marginals_common"] is True
    assert report["m1"] == pytest.approx(0.25, abs=1e-12)
    assert report["bl1"] == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert report["c0"] == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert report["theorem2_bound"] == 1.0
    assert report["config"]["p"] == "1"
    assert len(report["support"]) == len(report["witness"]) == 4


def test_metrics_same_file_twice(capsys, sample_data):
    path = str(sample_data / "p_anti.csv")
    code, out, _ = _run(capsys, "metrics", path, path)
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["m1"] == 0.0
    assert report["bl1"] == pytest.approx(0.0, abs=1e-12)


def test_metrics_without_common_marginals(capsys, sample_data, tmp_path):
    shifted = tmp_path / "shifted.json"
    shifted.write_text(json.dumps({"atoms": [[0, 0], [2, 2]]}))
    code, out, _ = _run(capsys, "metrics", str(sample_data / "p_co.json"), str(shifted))
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["marginals_common"] is False
    assert report["m1"] is None
    assert report["survival_sup"] == pytest.approx(0.5)


def test_metrics_writes_out_file(capsys, sample_data, tmp_path):
    target = tmp_path / "reports" / "metrics.json"
    code, out, _ = _run(
        capsys, "metrics", str(sample_data / "p_co.json"), str(sample_data / "p_ind.json"), "--out", str(target)
    )
    assert code == EXIT_OK
    assert out == ""
    assert "out" not in json.loads(target.read_text())["config"]


def test_malformed_json_is_a_config_error(capsys, sample_data, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    code, _, err = _run(capsys, "metrics", str(broken), str(sample_data / "p_co.json"))
    assert code == EXIT_CONFIG
    assert "malformed JSON" in err


def test_missing_file_is_a_config_error(capsys, tmp_path):
    code, _, err = _run(capsys, "copula", str(tmp_path / "nowhere.json"))
    assert code == EXIT_CONFIG
    assert "not found" in err


def test_bad_p_is_a_config_error(capsys, sample_data):
    path = str(sample_data / "p_co.json")
    code, _, _ = _run(capsys, "metrics", path, path, "--p", "0.5")
    assert code == EXIT_CONFIG


def test_verify_theorem2_small(capsys):
    code, out, _ = _run(capsys, "verify-theorem2", "--trials", "20", "--workers", "1", "--p", "inf")
    assert code == EXIT_OK
    report = SuiteReport.model_validate(json.loads(out))
    assert report.trials == 20 and report.ok
    assert report.config["p"] == "inf"


def test_verify_theorem2_scaled_reports_violations(capsys):
    code, out, _ = _run(capsys, "verify-theorem2", "--trials", "40", "--workers", "1", "--scale", "0.001")
    assert code == EXIT_VIOLATION
    assert json.loads(out)["violations"] > 0


def test_zero_trials_is_a_config_error(capsys):
    code, _, err = _run(capsys, "verify-theorem2", "--trials", "0")
    assert code == EXIT_CONFIG
    assert "trials" in err


def test_verify_cor1_and_cov(capsys):
    code, out, _ = _run(capsys, "verify-cor1", "--trials", "15", "--workers", "1")
    assert code == EXIT_OK
    assert json.loads(out)["suite"] == "cor1"
    code, out, _ = _run(capsys, "verify-cov", "--trials", "15", "--workers", "1")
    assert code == EXIT_OK
    assert json.loads(out)["config"]["tol"] == 1e-12


def test_cov_bounds_on_comonotone_sample(capsys, sample_data):
    identity = str(sample_data / "identity_step.json")
    code, out, _ = _run(capsys, "cov-bounds", str(sample_data / "p_co.json"), identity, identity)
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["cov"] == pytest.approx(0.25)
    assert report["alpha"] == pytest.approx(0.5)
    assert report["rio_bound"] == pytest.approx(1.0)
    assert report["cor2_bound"] == pytest.approx(1.0)
    assert report["d_bl"] == pytest.approx(1.0 / 3.0, abs=1e-9)


def test_cov_bounds_with_threshold(capsys, sample_data):
    code, out, _ = _run(
        capsys,
        "cov-bounds",
        str(sample_data / "p_anti.csv"),
        str(sample_data / "threshold_step.json"),
        str(sample_data / "identity_step.json"),
    )
    assert code == EXIT_OK
    assert json.loads(out)["cov"] == pytest.approx(-0.25)


def test_cov_bounds_rejects_3d_law(capsys, sample_data, tmp_path):
    cube = tmp_path / "cube.json"
    cube.write_text(json.dumps({"atoms": [[0, 0, 0], [1, 1, 1]]}))
    identity = str(sample_data / "identity_step.json")
    code, _, err = _run(capsys, "cov-bounds", str(cube), identity, identity)
    assert code == EXIT_CONFIG
    assert "2-D" in err


def test_linear_process_csv(capsys):
    code, out, _ = _run(
        capsys, "linear-process", "--lags", "1-3", "--samples", "50", "--truncation", "12", "--workers", "1"
    )
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == "n,coupling_bound_emp,coupling_bound_se,analytic_bound,survival_sup,theorem2_of_coupling"
    assert [line.split(",")[0] for line in lines[1:]] == ["1", "2", "3"]


def test_linear_process_rejects_bad_lags(capsys):
    with pytest.raises(SystemExit):
        main(["linear-process", "--lags", "0-2"])


def test_lp_selftest(capsys):
    code, out, _ = _run(capsys, "lp-selftest", "--trials", "10", "--max-vars", "4", "--workers", "1")
    assert code == EXIT_OK
    assert json.loads(out)["trials"] == 10


def test_lp_selftest_max_vars_range(capsys):
    code, _, _ = _run(capsys, "lp-selftest", "--trials", "1", "--max-vars", "11")
    assert code == EXIT_CONFIG


def test_copula_command(capsys, sample_data):
    code, out, _ = _run(capsys, "copula", str(sample_data / "p_co.json"))
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["dim"] == 2
    assert [c["weight"] for c in payload["components"]] == [0.5, 0.5]


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "marginal-metrics" in capsys.readouterr().out


def test_validate_measure_tool(capsys, sample_data, tmp_path):
    assert validate_measure.main([str(sample_data / "p_ind.json")]) == 0
    assert "OK: 4 atoms in dimension 2" in capsys.readouterr().out

    target = tmp_path / "normalized.json"
    assert validate_measure.main([str(sample_data / "p_anti.csv"), "--normalize", "--output", str(target)]) == 0
    assert json.loads(target.read_text())["weights"] == [0.5, 0.5]


def test_validate_measure_tool_rejects_bad_weights(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"atoms": [[0], [1]], "weights": [0.5, 0.6]}))
    with pytest.raises(SystemExit, match="INVALID"):
        validate_measure.main([str(bad)])


def test_copula_against_written_mixture(capsys, sample_data, tmp_path):
    mixture = tmp_path / "ind_copula.json"
    code, _, _ = _run(capsys, "copula", str(sample_data / "p_ind.json"), "--out", str(mixture))
    assert code == EXIT_OK

    code, out, _ = _run(capsys, "copula", str(sample_data / "p_co.json"), "--against", str(mixture))
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["sup_distance"] == pytest.approx(0.25, abs=1e-12)
    assert report["copula"]["dim"] == 2

    code, out, _ = _run(capsys, "copula", str(sample_data / "p_ind.json"), "--against", str(mixture))
    assert json.loads(out)["sup_distance"] == 0.0


def test_copula_against_invalid_mixture(capsys, sample_data, tmp_path):
    mixture = tmp_path / "bad.json"
    mixture.write_text(json.dumps({"dim": 1, "components": [{"lower": [0.0], "upper": [0.5], "weight": 1.0}]}))
    code, _, err = _run(capsys, "copula", str(sample_data / "p_co.json"), "--against", str(mixture))
    assert code == EXIT_CONFIG
    assert "uniform" in err
