"""Command-line front end: config parsing, analysis orchestration, reports.

Subcommands
-----------
analyze
    Dominant-singularity profile and the three tail laws for one model,
    emitted as a single JSON report.
coeffs
    High-precision coefficient tables as CSV plus coefficient/law ratio
    diagnostics (and closed-form twin tables when they exist).
simulate
    Discrete-event estimates of the orbit-size distribution as CSV with a
    JSON summary.
regime-map
    CSV grid over the arrival-rate plane comparing the sign of the regime
    indicator D against the profile case tag.
validate
    Built-in cross-check suite: normalization identities, kernel identities,
    law/oracle tail agreement, and a simulation spot check.

A run is configured by one JSON document, validated against the shipped
schema (unknown keys rejected); CLI flags override config fields with
precedence defaults < config < flags. Report payloads are deterministic
byte-for-byte for a given config; timestamps and environment notes go to a
``<stem>.meta.json`` sidecar instead. Exit codes: 0 success, 2 invalid
configuration or domain error, 3 numerical failure or failed validation
checks, with the failing operation named on stderr.
"""

from __future__ import annotations

import argparse
import functools
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema
import mpmath

from . import __version__
from .errors import DomainError, OrbittailError
from .implicit_map import ModelParams, SingularityProfile, _h_derivs, build_profile, h_eval
from .retrial_sim import SimConfig, simulate
from .series_oracle import (
    CoefficientTable,
    RatioReport,
    coeffs_closed_noqueue,
    coeffs_contour_all,
    ratio_report,
)
from .service_models import (
    Deterministic,
    Erlang,
    Exponential,
    GammaShape,
    HyperExponential,
    Pareto,
    PowerLawCutoff,
    ServiceModel,
    classify_lst,
    mean_service_time,
)
from .tail_asymptotics import (
    CASE1,
    CASE2,
    CASE3,
    TYPE2_DOMINANT,
    TYPE3_DOMINANT,
    AsymptoticLaw,
    p2_law,
    q_law,
    r_law,
    regime_D,
    type2_laws,
    type3_laws,
)

__all__ = [
    "SCENARIO_NAMES",
    "build_analyze_report",
    "laws_for",
    "load_config",
    "main",
    "regime_map_rows",
    "run_validate",
]

_DEFAULTS = {
    "n_max": 100,
    "digits": 50,
    "radius_factor": 0.95,
    "seed": 12345,
    "n_cap": 64,
    "warmup_events": 1_000_000,
    "measure_events": 10_000_000,
    "batches": 20,
    "workers": 1,
    "grid": {"steps": 50, "mu": 1.0, "lambda1_max": 1.0, "lambda2_max": 1.0},
}

_D_BAND = 1e-6

_KIND_NAMES: dict[type, str] = {
    Exponential: "exponential",
    Erlang: "erlang",
    HyperExponential: "hyperexponential",
    Deterministic: "deterministic",
    GammaShape: "gamma",
    PowerLawCutoff: "power_law_cutoff",
    Pareto: "pareto",
}

_MODEL_BUILDERS = {
    "exponential": lambda d: Exponential(mu=d["mu"]),
    "erlang": lambda d: Erlang(shape=d["shape"], mu=d["mu"]),
    "hyperexponential": lambda d: HyperExponential(
        weights=tuple(d["weights"]), rates=tuple(d["rates"])
    ),
    "deterministic": lambda d: Deterministic(duration=d["duration"]),
    "gamma": lambda d: GammaShape(shape=d["shape"], mu=d["mu"]),
    "power_law_cutoff": lambda d: PowerLawCutoff(
        p=d["p"], cutoff_rate=d["cutoff_rate"], x0=d.get("x0", 1.0)
    ),
    "pareto": lambda d: Pareto(p=d["p"], x0=d.get("x0", 1.0)),
}


@functools.lru_cache(maxsize=None)
def _schema(name: str) -> dict:
    text = resources.files("orbittail.schemas").joinpath(name).read_text("utf-8")
    return json.loads(text)


def load_config(path: str | Path | None, overrides: dict | None = None) -> dict:
    """Effective run configuration: defaults, then a JSON file, then flag overrides.

    The merged document is validated against the shipped config schema;
    unknown keys are rejected. ``overrides`` entries with value None are
    ignored; the key ``grid_steps`` targets ``grid.steps``.

    Raises
    ------
    DomainError
        If the file cannot be read, is not JSON, or the merged config is
        rejected by the schema.
    """
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text("utf-8"))
        except OSError as exc:
            raise DomainError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DomainError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise DomainError(f"config {path} must be a JSON object")
    cfg: dict = {k: (dict(v) if isinstance(v, dict) else v) for k, v in _DEFAULTS.items()}
    for key, val in raw.items():
        if key == "grid" and isinstance(val, dict):
            cfg["grid"].update(val)
        else:
            cfg[key] = val
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key == "grid_steps":
            cfg["grid"]["steps"] = val
        else:
            cfg[key] = val
    try:
        jsonschema.validate(cfg, _schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "top level"
        raise DomainError(f"config rejected at {where}: {exc.message}") from exc
    return cfg


def _model_from_config(cfg: dict) -> ServiceModel:
    if "model" not in cfg:
        raise DomainError("config lacks a model section")
    spec = cfg["model"]
    return _MODEL_BUILDERS[spec["kind"]](spec)


def _params_from_config(cfg: dict, model: ServiceModel) -> ModelParams:
    if "params" not in cfg:
        raise DomainError("config lacks a params section")
    p = cfg["params"]
    nu = math.inf if p["nu"] == "inf" else float(p["nu"])
    return ModelParams(
        lambda1=float(p["lambda1"]),
        lambda2=float(p["lambda2"]),
        nu=nu,
        b=mean_service_time(model),
    )


def _step(name: str, fn, *args, **kwargs):
    """Run one pipeline stage, prefixing numerical failures with its name."""
    try:
        return fn(*args, **kwargs)
    except DomainError:
        raise
    except OrbittailError as exc:
        exc.args = (f"{name}: {exc.args[0]}",) + exc.args[1:]
        raise


def laws_for(
    profile: SingularityProfile, params: ModelParams, model: ServiceModel
) -> tuple[AsymptoticLaw, AsymptoticLaw, AsymptoticLaw]:
    """The (q, r, p2) law triple for whichever regime the profile reports."""
    if profile.case_tag == TYPE2_DOMINANT:
        return type2_laws(profile, params, model)
    if profile.case_tag == TYPE3_DOMINANT:
        return type3_laws(profile, params, model)
    q_data, q = q_law(profile, params, model)
    return (
        q,
        r_law(profile, params, model, q_data),
        p2_law(profile, params, model, q_data),
    )


def _num(x):
    """JSON-safe scalar: None passes through, infinities become \"inf\"."""
    if x is None:
        return None
    x = float(x)
    return "inf" if math.isinf(x) else x


def _params_block(params: ModelParams) -> dict:
    rho1 = params.lambda1 * params.b
    rho2 = params.lambda2 * params.b
    return {
        "lambda1": params.lambda1,
        "lambda2": params.lambda2,
        "nu": _num(params.nu),
        "b": params.b,
        "lambda_total": params.lambda1 + params.lambda2,
        "rho": rho1 + rho2,
        "rho1": rho1,
        "rho2": rho2,
    }


def _service_block(model: ServiceModel) -> dict:
    lst = classify_lst(model)
    return {
        "kind": _KIND_NAMES[type(model)],
        "fields": asdict(model),
        "mean": mean_service_time(model),
        "lst": {
            "r_bstar": _num(lst.r_bstar),
            "type_tag": lst.type_tag,
            "alpha_bstar": lst.alpha_bstar,
            "c_bstar": lst.c_bstar,
            "regular_derivs": (
                None if lst.regular_derivs is None else list(lst.regular_derivs)
            ),
        },
    }


def build_analyze_report(cfg: dict) -> dict:
    """The full analyze payload for an effective config (see ``load_config``)."""
    model = _model_from_config(cfg)
    params = _params_from_config(cfg, model)
    profile = _step("build_profile", build_profile, params, model)
    q, r, p2 = _step("tail_laws", laws_for, profile, params, model)
    return {
        "command": "analyze",
        "config": cfg,
        "params": _params_block(params),
        "service": _service_block(model),
        "profile": asdict(profile),
        "regime": profile.case_tag,
        "laws": {
            "q": q.as_json_dict(),
            "r": r.as_json_dict(),
            "p2": p2.as_json_dict(),
        },
    }


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def _write_meta(out: Path, stem: str, meta_for: str, command: str, elapsed: float,
                extra: dict | None = None) -> None:
    meta = {
        "meta_for": meta_for,
        "command": command,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "package_version": __version__,
        "elapsed_seconds": round(elapsed, 3),
    }
    meta.update(extra or {})
    jsonschema.validate(meta, _schema("report.schema.json"))
    (out / f"{stem}.meta.json").write_text(_dump(meta), "utf-8")


def _emit(payload: dict, out: Path | None, stem: str, elapsed: float,
          extra_meta: dict | None = None) -> None:
    """Schema-check a payload, then write it to ``out`` or stdout.

    With an output directory the payload goes to ``<stem>.json`` and the
    volatile metadata (timestamp, version, timing) to ``<stem>.meta.json``,
    keeping the payload bytes a pure function of the config.
    """
    jsonschema.validate(payload, _schema("report.schema.json"))
    text = _dump(payload)
    if out is None:
        sys.stdout.write(text)
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.json").write_text(text, "utf-8")
    _write_meta(out, stem, f"{stem}.json", payload["command"], elapsed, extra_meta)


def _table_block(table: CoefficientTable) -> dict:
    return {
        "target": table.target,
        "n_max": table.n_max,
        "digits": table.digits,
        "radius": mpmath.nstr(mpmath.mpf(table.radius), table.digits),
        "max_est_abs_error": float(max(table.est_by_n)),
        "first_unusable_n": next(
            (n for n, ok in enumerate(table.usable) if not ok), None
        ),
    }


def _ratio_block(rep: RatioReport, law: AsymptoticLaw) -> dict:
    return {
        "target": rep.target,
        "law": law.as_json_dict(),
        "tail_lo": rep.tail_lo,
        "tail_hi": rep.tail_hi,
        "tail_max_dev": rep.tail_max_dev,
        "rows": [list(row) for row in rep.rows],
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _out_dir(args) -> Path | None:
    return None if args.out is None else Path(args.out)


def _require_out(args) -> Path:
    if args.out is None:
        raise DomainError("this command writes files: pass --out DIR")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _overrides(args) -> dict:
    ov = {k: getattr(args, k, None) for k in ("seed", "n_max", "digits", "workers")}
    ov["grid_steps"] = getattr(args, "grid", None)
    return ov


def _cmd_analyze(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config, _overrides(args))
    report = build_analyze_report(cfg)
    _emit(report, _out_dir(args), "analyze", time.perf_counter() - t0)
    return 0


def _cmd_coeffs(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config, _overrides(args))
    out = _require_out(args)
    model = _model_from_config(cfg)
    params = _params_from_config(cfg, model)
    profile = _step("build_profile", build_profile, params, model)
    laws = _step("tail_laws", laws_for, profile, params, model)
    tables = _step(
        "coeffs_contour_all",
        coeffs_contour_all,
        params,
        model,
        cfg["n_max"],
        cfg["digits"],
        cfg["radius_factor"],
    )
    files: list[str] = []
    table_blocks: dict[str, dict] = {}
    ratio_blocks: dict[str, dict] = {}
    for table, law in zip(tables, laws):
        name = f"coeffs_{table.target}.csv"
        (out / name).write_text(table.to_csv(), "utf-8")
        files.append(name)
        table_blocks[table.target] = _table_block(table)
        ratio_blocks[table.target] = _ratio_block(ratio_report(table, law), law)
    if params.lambda1 == 0.0 and isinstance(model, Exponential):
        for target in ("Q", "R", "P2"):
            closed = _step(
                "coeffs_closed_noqueue",
                coeffs_closed_noqueue,
                params,
                model,
                target,
                cfg["n_max"],
            )
            name = f"coeffs_closed_{target}.csv"
            (out / name).write_text(closed.to_csv(), "utf-8")
            files.append(name)
    payload = {
        "command": "coeffs",
        "config": cfg,
        "files": files,
        "tables": table_blocks,
        "ratios": ratio_blocks,
    }
    _emit(payload, out, "coeffs", time.perf_counter() - t0)
    return 0


def _cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config, _overrides(args))
    out = _require_out(args)
    model = _model_from_config(cfg)
    params = _params_from_config(cfg, model)
    sim_cfg = SimConfig(
        params=params,
        model=model,
        seed=cfg["seed"],
        warmup_events=cfg["warmup_events"],
        measure_events=cfg["measure_events"],
        batches=cfg["batches"],
    )
    emp = _step("simulate", simulate, sim_cfg, cfg["n_cap"])
    (out / "simulate.csv").write_text(emp.to_csv(), "utf-8")
    pasta = emp.pasta_busy_fraction
    rho = (params.lambda1 + params.lambda2) * params.b
    payload = {
        "command": "simulate",
        "config": cfg,
        "files": ["simulate.csv"],
        "summary": {
            "n_cap": cfg["n_cap"],
            "seed": cfg["seed"],
            "warmup_events": cfg["warmup_events"],
            "measure_events": cfg["measure_events"],
            "batches": cfg["batches"],
            "total_time": emp.total_time,
            "utilization": emp.utilization,
            "utilization_hw": emp.utilization_hw,
            "rho": rho,
            "arrivals2": emp.arrivals2,
            "arrivals2_busy": emp.arrivals2_busy,
            "pasta_busy_fraction": None if math.isnan(pasta) else pasta,
            "mass_q": float(sum(emp.q_emp)),
            "mass_p2": float(sum(emp.p2_emp)),
        },
    }
    from .retrial_sim import ENGINE

    _emit(payload, out, "simulate", time.perf_counter() - t0, {"engine": ENGINE})
    return 0


def _grid_row(task: tuple[float, float, float]) -> tuple:
    """One regime-map row: (lambda1, lambda2, D, d_case, profile_case, agree)."""
    lam1, lam2, mu = task
    params = ModelParams(lambda1=lam1, lambda2=lam2, nu=1.0, b=1.0 / mu)
    d = regime_D(params, mu)
    profile = build_profile(params, Exponential(mu))
    if d > _D_BAND:
        d_case = CASE1
    elif d < -_D_BAND:
        d_case = CASE2
    else:
        d_case = CASE3
    if abs(d) <= _D_BAND:
        agree = "band"
    else:
        agree = "agree" if d_case == profile.case_tag else "disagree"
    return lam1, lam2, d, d_case, profile.case_tag, agree


def regime_map_rows(grid: dict, workers: int = 1) -> list[tuple]:
    """Regime-map rows over the open grid, skipping unstable rate pairs.

    Grid points are ``lambda_i = i * lambda_max / (steps + 1)`` for
    ``i = 1..steps`` on each axis, so the axes themselves are excluded.
    Rows are ordered by grid index regardless of worker scheduling.
    """
    steps = grid["steps"]
    mu = grid["mu"]
    tasks = []
    for i in range(1, steps + 1):
        lam1 = i * grid["lambda1_max"] / (steps + 1)
        for j in range(1, steps + 1):
            lam2 = j * grid["lambda2_max"] / (steps + 1)
            if (lam1 + lam2) / mu < 1.0:
                tasks.append((lam1, lam2, mu))
    if workers > 1:
        chunk = max(1, len(tasks) // (8 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_grid_row, tasks, chunksize=chunk))
    return [_grid_row(t) for t in tasks]


def _cmd_regime_map(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config, _overrides(args))
    out = _require_out(args)
    grid = cfg["grid"]
    rows = _step("regime_map", regime_map_rows, grid, cfg["workers"])
    lines = ["lambda1,lambda2,D,d_case,profile_case,agree"]
    for lam1, lam2, d, d_case, profile_case, agree in rows:
        lines.append(f"{lam1!r},{lam2!r},{d!r},{d_case},{profile_case},{agree}")
    (out / "regime_map.csv").write_text("\n".join(lines) + "\n", "utf-8")
    _write_meta(
        out,
        "regime_map",
        "regime_map.csv",
        "regime-map",
        time.perf_counter() - t0,
        {
            "workers": cfg["workers"],
            "stability_border": {"mu": grid["mu"], "relation": "lambda1 + lambda2 = mu"},
        },
    )
    return 0


# ---------------------------------------------------------------------------
# validate: built-in cross-check scenarios
# ---------------------------------------------------------------------------

# name -> (params, model, n_max, digits, q end-ratio bound, p2 end-ratio bound,
#          finite-difference slope check, simulation spot check)
_SCENARIOS: dict[str, tuple] = {
    "noqueue_expo": (
        ModelParams(0.0, 0.5, 1.0, 1.0), Exponential(1.0), 100, 50, 0.01, 0.03, True, True,
    ),
    "case1_expo": (
        ModelParams(0.1, 0.3, 1.0, 1.0), Exponential(1.0), 100, 50, 0.03, 0.05, True, False,
    ),
    "case2_expo": (
        ModelParams(0.4, 0.05, 1.0, 1.0), Exponential(1.0), 100, 40, 0.02, 0.05, True, False,
    ),
    "case3_expo": (
        ModelParams(0.25, 0.25, 1.0, 1.0), Exponential(1.0), 100, 40, 0.01, 0.01, True, False,
    ),
    "type3_pareto": (
        ModelParams(0.1, 0.1, 1.0, 3.0), Pareto(1.5, 1.0), 200, 50, 0.02, 0.01, False, False,
    ),
}

SCENARIO_NAMES = tuple(_SCENARIOS)


def _law_tail_sum_bound(law: AsymptoticLaw, n_from: int) -> float:
    """Upper bound on ``sum_{n > n_from} law(n)`` for truncation allowances.

    Geometric laws are summed numerically with a geometric remainder; decay
    rate 1 (pure power laws, exponent < -1) gets an integral remainder.
    """
    total = 0.0
    n = n_from + 1
    last = 0.0
    for _ in range(2000):
        last = law.value(n)
        total += last
        n += 1
    if law.decay_rate > 1.0 + 1e-12:
        step = law.value(n) / last if last > 0.0 else 0.0
        if step < 1.0:
            total += law.value(n) / (1.0 - step)
    else:
        beta = float(law.power_exponent)
        if beta < -1.0:
            total += law.prefactor * n ** (beta + 1.0) / (-beta - 1.0)
    return total


def _check(name: str, value: float, bound: float, detail: str = "") -> dict:
    entry = {
        "name": name,
        "ok": bool(value <= bound),
        "value": float(value),
        "bound": float(bound),
    }
    if detail:
        entry["detail"] = detail
    return entry


def _run_scenario(task: tuple[str, int]) -> dict:
    name, seed = task
    params, model, n_max, digits, q_rtol, p2_rtol, do_fd, do_sim = _SCENARIOS[name]
    profile = build_profile(params, model)
    q, r, p2 = laws_for(profile, params, model)
    tq, tr, tp2 = coeffs_contour_all(params, model, n_max, digits)
    rho = (params.lambda1 + params.lambda2) * params.b
    rho1 = params.lambda1 * params.b
    rho2 = params.lambda2 * params.b
    checks: list[dict] = []

    with mpmath.workdps(2 * digits):
        gap_q = abs(mpmath.fsum(tq.coeffs) - (1 - mpmath.mpf(rho)))
        gap_p2 = abs(mpmath.fsum(tp2.coeffs) - 1)
    checks.append(
        _check(
            "sum_q",
            float(gap_q),
            sum(tq.est_by_n) + 2.0 * _law_tail_sum_bound(q, n_max),
            "|sum of Q coefficients - (1 - rho)| within aliasing plus truncation",
        )
    )
    checks.append(
        _check(
            "sum_p2",
            float(gap_p2),
            sum(tp2.est_by_n) + 2.0 * _law_tail_sum_bound(p2, n_max),
            "|sum of P2 coefficients - 1| within aliasing plus truncation",
        )
    )
    checks.append(
        _check("kernel_at_one", abs(float(h_eval(params, model, 1.0)) - 1.0), 1e-9,
               "|h(1) - 1|")
    )
    slope = _h_derivs(params, model, 1.0, order=1)[1]
    slope_ref = rho2 / (1.0 - rho1)
    checks.append(
        _check("kernel_slope", abs(slope - slope_ref), 1e-6,
               "|h'(1) - rho2/(1 - rho1)|, series formula")
    )
    if do_fd:
        eps = 1e-5
        fd = (
            float(h_eval(params, model, 1.0 + eps))
            - float(h_eval(params, model, 1.0 - eps))
        ) / (2.0 * eps)
        checks.append(
            _check("kernel_slope_fd", abs(fd - slope_ref), 1e-6,
                   "|h'(1) - rho2/(1 - rho1)|, central difference")
        )
    rq = ratio_report(tq, q)
    rp2 = ratio_report(tp2, p2)
    checks.append(
        _check("law_ratio_q", abs(rq.rows[-1][3] - 1.0), q_rtol,
               f"|q({rq.rows[-1][0]})/law - 1|")
    )
    checks.append(
        _check("law_ratio_p2", abs(rp2.rows[-1][3] - 1.0), p2_rtol,
               f"|p2({rp2.rows[-1][0]})/law - 1|")
    )
    if do_sim:
        emp = simulate(
            SimConfig(
                params,
                model,
                seed=seed,
                warmup_events=100_000,
                measure_events=1_000_000,
                batches=10,
            ),
            n_cap=31,
        )
        tv = 0.5 * sum(
            abs(emp.p2_emp[n] - float(tp2.coeffs[n])) for n in range(16)
        )
        checks.append(_check("sim_tv", tv, 0.02,
                             "total variation, simulated vs oracle p2 for n <= 15"))
        checks.append(
            _check("sim_utilization", abs(emp.utilization - rho),
                   3.0 * emp.utilization_hw, "|utilization - rho| within 3 half-widths")
        )
    return {
        "name": name,
        "ok": all(c["ok"] for c in checks),
        "params": {
            "lambda1": params.lambda1,
            "lambda2": params.lambda2,
            "nu": _num(params.nu),
        },
        "model_kind": _KIND_NAMES[type(model)],
        "checks": checks,
    }


def run_validate(seed: int = 12345, workers: int = 1) -> dict:
    """The validate payload: every built-in scenario with its check results."""
    tasks = [(name, seed) for name in SCENARIO_NAMES]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            scenarios = list(pool.map(_run_scenario, tasks))
    else:
        scenarios = [_run_scenario(t) for t in tasks]
    return {
        "command": "validate",
        "ok": all(s["ok"] for s in scenarios),
        "scenarios": scenarios,
    }


def _cmd_validate(args) -> int:
    t0 = time.perf_counter()
    cfg = load_config(args.config, _overrides(args))
    payload = _step("validate", run_validate, cfg["seed"], cfg["workers"])
    _emit(payload, _out_dir(args), "validate", time.perf_counter() - t0,
          {"workers": cfg["workers"]})
    if not payload["ok"]:
        failing = ", ".join(
            f"{s['name']}.{c['name']}"
            for s in payload["scenarios"]
            for c in s["checks"]
            if not c["ok"]
        )
        print(f"error: validation checks failed: {failing}", file=sys.stderr)
        return 3
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _add_common(sub, config_required: bool):
    sub.add_argument(
        "config",
        nargs=None if config_required else "?",
        default=None,
        help="path to a JSON run configuration",
    )
    sub.add_argument("--out", default=None, help="output directory for CSV/JSON")
    sub.add_argument("--seed", type=int, default=None, help="override config seed")
    sub.add_argument("--n-max", type=int, default=None, dest="n_max",
                     help="override config n_max")
    sub.add_argument("--digits", type=int, default=None, help="override config digits")
    sub.add_argument("--grid", type=int, default=None,
                     help="override grid steps per axis")
    sub.add_argument("--workers", type=int, default=None,
                     help="override worker count for grid/suite fan-out")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="orbittail",
        description="Tail asymptotics, coefficient oracles, and simulation "
        "for a two-class priority retrial queue.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    specs = [
        ("analyze", _cmd_analyze, True, "singularity profile and tail laws as JSON"),
        ("coeffs", _cmd_coeffs, True, "coefficient tables and law ratios"),
        ("simulate", _cmd_simulate, True, "discrete-event orbit distribution"),
        ("regime-map", _cmd_regime_map, False, "regime partition grid as CSV"),
        ("validate", _cmd_validate, False, "run the built-in cross-check suite"),
    ]
    for name, fn, config_required, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        _add_common(p, config_required)
        p.set_defaults(func=fn)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OrbittailError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
