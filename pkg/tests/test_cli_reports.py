"""CLI tests: config handling, payload schemas, exit codes, file outputs."""

from __future__ import annotations

import json
import math
from datetime import datetime
from pathlib import Path

import jsonschema
import mpmath
import pytest

import orbittail
from orbittail.cli_reports import (
    SCENARIO_NAMES,
    _grid_row,
    _schema,
    build_analyze_report,
    laws_for,
    load_config,
    main,
    regime_map_rows,
    run_validate,
)
from orbittail.errors import DomainError

REPORT_SCHEMA = _schema("report.schema.json")


def write_config(path: Path, **body) -> str:
    path.write_text(json.dumps(body), "utf-8")
    return str(path)


def expo_config(path: Path, lam1: float, lam2: float, nu=1.0, **extra) -> str:
    return write_config(
        path,
        model={"kind": "exponential", "mu": 1.0},
        params={"lambda1": lam1, "lambda2": lam2, "nu": nu},
        **extra,
    )


@pytest.fixture()
def case3_cfg(tmp_path):
    return expo_config(tmp_path / "case3.json", 0.25, 0.25)


@pytest.fixture()
def noqueue_cfg(tmp_path):
    return expo_config(tmp_path / "noqueue.json", 0.0, 0.5, n_max=60)


class TestLoadConfig:
    def test_defaults_fill_in(self, case3_cfg):
        cfg = load_config(case3_cfg)
        assert cfg["n_max"] == 100
        assert cfg["digits"] == 50
        assert cfg["grid"]["steps"] == 50

    def test_file_overrides_defaults(self, tmp_path):
        path = expo_config(tmp_path / "c.json", 0.1, 0.1, n_max=17, digits=33)
        cfg = load_config(path)
        assert cfg["n_max"] == 17
        assert cfg["digits"] == 33

    def test_flags_override_file(self, tmp_path):
        path = expo_config(tmp_path / "c.json", 0.1, 0.1, n_max=17)
        cfg = load_config(path, {"n_max": 25, "grid_steps": 7, "digits": None})
        assert cfg["n_max"] == 25
        assert cfg["grid"]["steps"] == 7
        assert cfg["digits"] == 50

    def test_partial_grid_merges(self, tmp_path):
        path = write_config(tmp_path / "c.json", grid={"steps": 9})
        cfg = load_config(path)
        assert cfg["grid"]["steps"] == 9
        assert cfg["grid"]["mu"] == 1.0

    def test_unknown_key_rejected(self, tmp_path):
        path = write_config(tmp_path / "c.json", mystery=1)
        with pytest.raises(DomainError, match="mystery"):
            load_config(path)

    def test_unknown_model_kind_rejected(self, tmp_path):
        path = write_config(
            tmp_path / "c.json",
            model={"kind": "uniform", "lo": 0.0, "hi": 1.0},
            params={"lambda1": 0.1, "lambda2": 0.1, "nu": 1.0},
        )
        with pytest.raises(DomainError):
            load_config(path)

    def test_bad_json_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json", "utf-8")
        with pytest.raises(DomainError, match="not valid JSON"):
            load_config(str(path))

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(DomainError, match="cannot read"):
            load_config(str(tmp_path / "absent.json"))

    def test_nu_inf_string(self, tmp_path):
        path = expo_config(tmp_path / "c.json", 0.1, 0.3, nu="inf")
        cfg = load_config(path)
        assert cfg["params"]["nu"] == "inf"


class TestAnalyze:
    def test_boundary_report(self, case3_cfg, capsys):
        assert main(["analyze", case3_cfg]) == 0
        payload = json.loads(capsys.readouterr().out)
        jsonschema.validate(payload, REPORT_SCHEMA)
        assert payload["regime"] == "Case3_Boundary"
        assert payload["laws"]["p2"]["decay_rate"] == pytest.approx(2.0, abs=1e-10)
        assert payload["laws"]["p2"]["power_exponent"] == -0.5
        assert payload["profile"]["case_tag"] == payload["regime"]

    def test_pareto_report(self, tmp_path, capsys):
        path = write_config(
            tmp_path / "c.json",
            model={"kind": "pareto", "p": 1.5, "x0": 1.0},
            params={"lambda1": 0.1, "lambda2": 0.1, "nu": 1.0},
        )
        assert main(["analyze", path]) == 0
        payload = json.loads(capsys.readouterr().out)
        jsonschema.validate(payload, REPORT_SCHEMA)
        assert payload["regime"] == "Type3Dominant"
        assert payload["laws"]["p2"]["power_exponent"] == -1.5
        assert payload["service"]["lst"]["type_tag"] == "Type3"

    def test_unstable_config_exits_2(self, tmp_path, capsys):
        path = expo_config(tmp_path / "c.json", 0.7, 0.5)
        assert main(["analyze", path]) == 2
        assert "unstable" in capsys.readouterr().err

    def test_deterministic_payload_bytes(self, case3_cfg, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert main(["analyze", case3_cfg, "--out", str(out1)]) == 0
        assert main(["analyze", case3_cfg, "--out", str(out2)]) == 0
        assert (out1 / "analyze.json").read_bytes() == (out2 / "analyze.json").read_bytes()

    def test_meta_sidecar(self, case3_cfg, tmp_path):
        out = tmp_path / "r"
        assert main(["analyze", case3_cfg, "--out", str(out)]) == 0
        meta = json.loads((out / "analyze.meta.json").read_text("utf-8"))
        jsonschema.validate(meta, REPORT_SCHEMA)
        assert meta["meta_for"] == "analyze.json"
        assert meta["package_version"] == orbittail.__version__
        datetime.fromisoformat(meta["created_utc"])
        payload = json.loads((out / "analyze.json").read_text("utf-8"))
        assert "created_utc" not in json.dumps(payload)

    def test_nu_inf_round_trip(self, tmp_path, capsys):
        path = expo_config(tmp_path / "c.json", 0.1, 0.3, nu="inf")
        assert main(["analyze", path]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["params"]["nu"] == "inf"
        assert payload["regime"] == "Case1_RetrialRegime"

    def test_missing_config_usage_error(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["analyze"])
        assert exc_info.value.code == 2


@pytest.fixture(scope="module")
def coeffs_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("coeffs")
    cfg = expo_config(tmp / "noqueue.json", 0.0, 0.5, n_max=60)
    out = tmp / "out"
    code = main(["coeffs", cfg, "--out", str(out)])
    return code, out


class TestCoeffs:
    def test_exit_and_files(self, coeffs_run):
        code, out = coeffs_run
        assert code == 0
        for name in ("coeffs_Q.csv", "coeffs_R.csv", "coeffs_P2.csv",
                     "coeffs_closed_Q.csv", "coeffs_closed_R.csv",
                     "coeffs_closed_P2.csv", "coeffs.json", "coeffs.meta.json"):
            assert (out / name).exists()

    def test_row_count_is_n_max_plus_one(self, coeffs_run):
        _, out = coeffs_run
        lines = (out / "coeffs_Q.csv").read_text("utf-8").splitlines()
        assert lines[0] == "n,coeff,usable,est_abs_error"
        assert len(lines) == 1 + 61

    def test_contour_matches_closed_at_12_digits(self, coeffs_run):
        _, out = coeffs_run
        for target in ("Q", "R", "P2"):
            got = (out / f"coeffs_{target}.csv").read_text("utf-8").splitlines()[1:]
            ref = (out / f"coeffs_closed_{target}.csv").read_text("utf-8").splitlines()[1:]
            assert len(got) == len(ref)
            for row_g, row_r in zip(got, ref):
                n_g, c_g, ok_g, _ = row_g.split(",")
                n_r, c_r, ok_r, _ = row_r.split(",")
                assert (n_g, ok_g) == (n_r, ok_r)
                assert mpmath.nstr(mpmath.mpf(c_g), 12) == mpmath.nstr(mpmath.mpf(c_r), 12)

    def test_payload_blocks(self, coeffs_run):
        _, out = coeffs_run
        payload = json.loads((out / "coeffs.json").read_text("utf-8"))
        jsonschema.validate(payload, REPORT_SCHEMA)
        assert payload["tables"]["Q"]["first_unusable_n"] is None
        assert payload["ratios"]["P2"]["law"]["decay_rate"] == pytest.approx(2.0)
        last = payload["ratios"]["P2"]["rows"][-1]
        assert last[0] == 60
        assert abs(last[3] - 1.0) < 0.05

    def test_no_closed_twin_away_from_closed_form(self, tmp_path):
        cfg = expo_config(tmp_path / "c.json", 0.25, 0.25, n_max=20, digits=40)
        out = tmp_path / "out"
        assert main(["coeffs", cfg, "--out", str(out)]) == 0
        assert not (out / "coeffs_closed_Q.csv").exists()

    def test_precision_exhausted_exits_3(self, tmp_path, capsys):
        cfg = expo_config(
            tmp_path / "c.json", 0.25, 0.25,
            n_max=120, digits=30, radius_factor=0.45,
        )
        assert main(["coeffs", cfg, "--out", str(tmp_path / "out")]) == 3
        err = capsys.readouterr().err
        assert "PrecisionExhausted" in err
        assert "first unusable n" in err

    def test_requires_out(self, case3_cfg, capsys):
        assert main(["coeffs", case3_cfg]) == 2
        assert "--out" in capsys.readouterr().err


@pytest.fixture(scope="module")
def sim_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sim")
    cfg = expo_config(
        tmp / "c.json", 0.0, 0.5,
        n_cap=16, warmup_events=20_000, measure_events=200_000, batches=5,
    )
    out = tmp / "out"
    code = main(["simulate", cfg, "--out", str(out)])
    return code, cfg, out


class TestSimulate:
    def test_exit_and_files(self, sim_run):
        code, _, out = sim_run
        assert code == 0
        assert (out / "simulate.csv").exists()
        assert (out / "simulate.json").exists()

    def test_csv_shape(self, sim_run):
        _, _, out = sim_run
        lines = (out / "simulate.csv").read_text("utf-8").splitlines()
        assert lines[0] == "n,q_emp,q_hw,r_emp,r_hw,p2_emp,p2_hw"
        assert len(lines) == 1 + 17

    def test_summary(self, sim_run):
        _, _, out = sim_run
        payload = json.loads((out / "simulate.json").read_text("utf-8"))
        jsonschema.validate(payload, REPORT_SCHEMA)
        s = payload["summary"]
        assert s["rho"] == 0.5
        assert abs(s["utilization"] - 0.5) < 0.02
        assert 0.97 < s["mass_p2"] <= 1.0 + 1e-12
        assert s["arrivals2"] > 0
        meta = json.loads((out / "simulate.meta.json").read_text("utf-8"))
        assert meta["engine"] in ("compiled", "pure")

    def test_deterministic_payload_bytes(self, sim_run, tmp_path):
        _, cfg, out = sim_run
        out2 = tmp_path / "again"
        assert main(["simulate", cfg, "--out", str(out2)]) == 0
        assert (out / "simulate.json").read_bytes() == (out2 / "simulate.json").read_bytes()
        assert (out / "simulate.csv").read_bytes() == (out2 / "simulate.csv").read_bytes()

    def test_seed_flag_changes_output(self, sim_run, tmp_path):
        _, cfg, out = sim_run
        out2 = tmp_path / "seeded"
        assert main(["simulate", cfg, "--out", str(out2), "--seed", "99"]) == 0
        assert (out / "simulate.csv").read_bytes() != (out2 / "simulate.csv").read_bytes()


class TestRegimeMap:
    def test_spec_grid_points(self):
        lam1, lam2, d, d_case, profile_case, agree = _grid_row((0.25, 0.25, 1.0))
        assert abs(d) <= 1e-6
        assert (d_case, agree) == ("Case3_Boundary", "band")
        assert profile_case == "Case3_Boundary"
        row = _grid_row((0.1, 0.3, 1.0))
        assert row[2] > 1e-6
        assert (row[3], row[4], row[5]) == (
            "Case1_RetrialRegime", "Case1_RetrialRegime", "agree")
        row = _grid_row((0.4, 0.05, 1.0))
        assert row[2] < -1e-6
        assert (row[3], row[4], row[5]) == (
            "Case2_PriorityRegime", "Case2_PriorityRegime", "agree")

    def test_rows_cover_stable_triangle(self):
        rows = regime_map_rows({"steps": 8, "mu": 1.0,
                                "lambda1_max": 1.0, "lambda2_max": 1.0})
        assert all(lam1 + lam2 < 1.0 for lam1, lam2, *_ in rows)
        assert len(rows) == sum(
            1 for i in range(1, 9) for j in range(1, 9) if (i + j) / 9 < 1.0
        )

    def test_workers_preserve_order(self):
        grid = {"steps": 6, "mu": 1.0, "lambda1_max": 1.0, "lambda2_max": 1.0}
        assert regime_map_rows(grid, workers=2) == regime_map_rows(grid, workers=1)

    def test_cli_output(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", grid={"steps": 10})
        out = tmp_path / "out"
        assert main(["regime-map", str(cfg), "--out", str(out)]) == 0
        lines = (out / "regime_map.csv").read_text("utf-8").splitlines()
        assert lines[0] == "lambda1,lambda2,D,d_case,profile_case,agree"
        for line in lines[1:]:
            lam1, lam2, d, d_case, profile_case, agree = line.split(",")
            if abs(float(d)) > 1e-6:
                assert agree == "agree"
                assert d_case == profile_case
            else:
                assert agree == "band"
        meta = json.loads((out / "regime_map.meta.json").read_text("utf-8"))
        jsonschema.validate(meta, REPORT_SCHEMA)
        assert meta["stability_border"] == {
            "mu": 1.0, "relation": "lambda1 + lambda2 = mu"}

    def test_grid_flag_overrides_steps(self, tmp_path):
        out = tmp_path / "out"
        assert main(["regime-map", "--out", str(out), "--grid", "4"]) == 0
        lines = (out / "regime_map.csv").read_text("utf-8").splitlines()
        stable = sum(1 for i in range(1, 5) for j in range(1, 5) if (i + j) / 5 < 1.0)
        assert len(lines) == 1 + stable

    def test_requires_out(self, capsys):
        assert main(["regime-map"]) == 2
        assert "--out" in capsys.readouterr().err


@pytest.fixture(scope="module")
def validate_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("validate")
    code = main(["validate", "--out", str(out)])
    doc = json.loads((out / "validate.json").read_text("utf-8"))
    return code, doc


class TestValidate:
    def test_all_scenarios_pass(self, validate_run):
        code, doc = validate_run
        assert code == 0
        jsonschema.validate(doc, REPORT_SCHEMA)
        assert doc["ok"] is True
        assert tuple(s["name"] for s in doc["scenarios"]) == SCENARIO_NAMES
        assert all(c["ok"] for s in doc["scenarios"] for c in s["checks"])

    def test_check_inventory(self, validate_run):
        _, doc = validate_run
        by_name = {s["name"]: {c["name"] for c in s["checks"]} for s in doc["scenarios"]}
        core = {"sum_q", "sum_p2", "kernel_at_one", "kernel_slope",
                "law_ratio_q", "law_ratio_p2"}
        for name, checks in by_name.items():
            assert core <= checks
        assert "sim_tv" in by_name["noqueue_expo"]
        assert "sim_utilization" in by_name["noqueue_expo"]
        assert "kernel_slope_fd" in by_name["case2_expo"]
        assert "kernel_slope_fd" not in by_name["type3_pareto"]


class TestHelpers:
    def test_build_analyze_report_direct(self, case3_cfg):
        report = build_analyze_report(load_config(case3_cfg))
        assert report["params"]["rho"] == 0.5
        assert report["profile"]["r_h"] == pytest.approx(2.0, abs=1e-8)
        assert report["service"]["mean"] == 1.0

    def test_laws_for_matches_report(self, case3_cfg):
        from orbittail import ModelParams, Exponential, build_profile

        params = ModelParams(0.25, 0.25, 1.0, 1.0)
        model = Exponential(1.0)
        q, r, p2 = laws_for(build_profile(params, model), params, model)
        report = build_analyze_report(load_config(case3_cfg))
        assert report["laws"]["q"] == q.as_json_dict()
        assert report["laws"]["r"] == r.as_json_dict()
        assert report["laws"]["p2"] == p2.as_json_dict()

    def test_run_validate_worker_pool_matches_serial(self):
        one = run_validate(seed=7, workers=1)
        two = run_validate(seed=7, workers=2)
        assert one == two
