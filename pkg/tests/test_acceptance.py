"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS`` line with the measured
numbers once its assertions hold, so a verbose run reads as a checklist:
dual-oracle exactness, law convergence in every geometric regime, the
regime partition map, retrial-rate invariance, heavy-tail power laws, the
simulation cross-check, normalization identities, and the finite-branch
heavy-tail regime.
"""

from __future__ import annotations

import math
import time

import mpmath
import pytest

from orbittail import (
    CASE1,
    CASE3,
    TYPE2_DOMINANT,
    TYPE3_DOMINANT,
    Exponential,
    ModelParams,
    Pareto,
    PowerLawCutoff,
    SimConfig,
    build_profile,
    classify_lst,
    coeffs_closed_noqueue,
    coeffs_contour,
    coeffs_contour_all,
    h_eval,
    loglog_slope,
    mean_service_time,
    ratio_report,
    simulate,
    special_nonretrial,
)
from orbittail.cli_reports import laws_for, regime_map_rows, run_validate

EXPO = Exponential(1.0)
NOQUEUE = ModelParams(0.0, 0.5, 1.0, 1.0)


def law_dev(table, law, n: int) -> float:
    """|coeff(n)/law(n) - 1| formed in log space."""
    return abs(float(mpmath.exp(mpmath.log(table.coeffs[n]) - law.log_value(n))) - 1.0)


def test_criterion_01_dual_oracle_exactness():
    t0 = time.perf_counter()
    contour = coeffs_contour(NOQUEUE, EXPO, "Q", 100, digits=50)
    closed = coeffs_closed_noqueue(NOQUEUE, EXPO, "Q", 100)
    elapsed = time.perf_counter() - t0
    with mpmath.workdps(120):
        rel = max(
            float(abs(a - b) / b)
            for a, b in zip(contour.coeffs, closed.coeffs)
        )
    assert rel < 1e-10
    assert elapsed < 30.0
    print(f"criterion 1: PASS - max relative error {rel:.3e} over n <= 100, "
          f"{elapsed:.1f}s")


def test_criterion_02_case1_law_convergence():
    profile = build_profile(NOQUEUE, EXPO)
    q, _, _ = laws_for(profile, NOQUEUE, EXPO)
    table = coeffs_contour(NOQUEUE, EXPO, "Q", 400, digits=400)
    devs = {n: law_dev(table, q, n) for n in (50, 100, 200, 400)}
    assert devs[400] < 0.01
    assert devs[50] > devs[100] > devs[200] > devs[400]
    print(f"criterion 2: PASS - q/law deviation {devs[400]:.5f} at n=400, "
          f"monotone over {sorted(devs)}: "
          + " > ".join(f"{devs[n]:.5f}" for n in (50, 100, 200, 400)))


def test_criterion_03_case3_boundary():
    params = ModelParams(0.25, 0.25, 1.0, 1.0)
    profile = build_profile(params, EXPO)
    assert profile.case_tag == CASE3
    assert profile.r_star == pytest.approx(2.0, abs=1e-8)
    assert profile.r_h == pytest.approx(2.0, abs=1e-8)
    assert profile.r_star == pytest.approx(profile.r_h, abs=1e-8)
    _, _, p2 = laws_for(profile, params, EXPO)
    assert float(p2.power_exponent) == -0.5
    table = coeffs_contour(params, EXPO, "P2", 300, digits=250)
    dev = law_dev(table, p2, 300)
    assert dev < 0.05
    print(f"criterion 3: PASS - r_star = r_h = 2, p2 exponent -1/2, "
          f"p2/law deviation {dev:.5f} at n=300")


def test_criterion_04_case2_priority_regime():
    params = ModelParams(0.4, 0.05, 1.0, 1.0)
    profile = build_profile(params, EXPO)
    _, _, p2 = laws_for(profile, params, EXPO)
    assert float(p2.power_exponent) == -1.5
    # exact decay for this model; the coarser rounded figure sometimes
    # quoted for it is off at the 4th decimal (see the sqrt(0.4) note in
    # the repo history)
    assert p2.decay_rate == pytest.approx(3.7017787186529653, abs=1e-4)
    table = coeffs_contour(params, EXPO, "P2", 200, digits=250)
    dev = law_dev(table, p2, 200)
    assert dev < 0.05
    print(f"criterion 4: PASS - p2 exponent -3/2, decay {p2.decay_rate:.10f}, "
          f"p2/law deviation {dev:.5f} at n=200")


def test_criterion_05_regime_map():
    t0 = time.perf_counter()
    rows = regime_map_rows(
        {"steps": 50, "mu": 1.0, "lambda1_max": 1.0, "lambda2_max": 1.0},
        workers=8,
    )
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    assert len(rows) > 1000
    firm = [r for r in rows if abs(r[2]) > 1e-6]
    assert firm, "every grid point fell in the indicator band"
    assert all(r[5] == "agree" for r in firm)
    print(f"criterion 5: PASS - {len(firm)}/{len(rows)} firm grid points all "
          f"agree, {elapsed:.1f}s with 8 workers")


def test_criterion_06_nu_invariance():
    decays = []
    for nu in (0.1, 1.0, 10.0, math.inf):
        params = ModelParams(0.1, 0.3, nu, 1.0)
        profile = build_profile(params, EXPO)
        assert profile.case_tag == CASE1
        _, _, p2 = laws_for(profile, params, EXPO)
        decays.append(p2.decay_rate)
    assert max(decays) - min(decays) <= 1e-12
    params = ModelParams(0.1, 0.3, math.inf, 1.0)
    profile = build_profile(params, EXPO)
    _, _, p2 = laws_for(profile, params, EXPO)
    corollary = special_nonretrial(profile, params, EXPO)
    rel = abs(p2.prefactor - corollary.prefactor) / corollary.prefactor
    assert rel <= 1e-6
    assert p2.decay_rate == corollary.decay_rate
    print(f"criterion 6: PASS - decay {decays[0]!r} invariant over nu "
          f"(spread {max(decays) - min(decays):.1e}), instant-retrial "
          f"prefactor matches the direct formula to {rel:.1e}")


def test_criterion_07_type3_power_law():
    model = Pareto(1.5, 1.0)
    params = ModelParams(0.1, 0.1, 1.0, mean_service_time(model))
    profile = build_profile(params, model)
    assert profile.case_tag == TYPE3_DOMINANT
    q, _, p2 = laws_for(profile, params, model)
    assert float(p2.power_exponent) == -1.5
    assert float(q.power_exponent) == -2.5
    tq, _, tp2 = coeffs_contour_all(params, model, 200, digits=50)
    dev = law_dev(tp2, p2, 200)
    assert dev < 0.10
    slope = loglog_slope(tq, 50, 200, decay=1.0)
    assert slope == pytest.approx(-2.5, abs=0.1)
    print(f"criterion 7: PASS - p2 exponent -1.5 (deviation {dev:.5f} at "
          f"n=200), q log-log slope {slope:.4f} on [50, 200]")


def test_criterion_08_simulation_cross_check():
    oracle = coeffs_closed_noqueue(NOQUEUE, EXPO, "P2", 40)
    emp = simulate(
        SimConfig(
            NOQUEUE,
            EXPO,
            seed=12345,
            warmup_events=1_000_000,
            measure_events=10_000_000,
            batches=20,
        ),
        n_cap=31,
    )
    tv = 0.5 * sum(
        abs(emp.p2_emp[n] - float(oracle.coeffs[n])) for n in range(16)
    )
    assert tv < 0.01
    util_dev = abs(emp.utilization - 0.5)
    assert util_dev <= emp.utilization_hw
    print(f"criterion 8: PASS - total variation {tv:.6f} over n <= 15 after "
          f"1e7 events, |utilization - rho| = {util_dev:.6f} <= "
          f"half-width {emp.utilization_hw:.6f}")


def test_criterion_09_normalization_properties():
    payload = run_validate(seed=12345, workers=2)
    assert payload["ok"] is True
    for scenario in payload["scenarios"]:
        by_name = {c["name"]: c for c in scenario["checks"]}
        for check in ("sum_q", "sum_p2", "kernel_at_one", "kernel_slope"):
            assert by_name[check]["ok"], (scenario["name"], check)
    worst = max(
        (c["value"] / c["bound"], s["name"], c["name"])
        for s in payload["scenarios"]
        for c in s["checks"]
        if c["bound"]
    )
    print(f"criterion 9: PASS - {len(payload['scenarios'])} scenarios, all "
          f"normalization and kernel checks hold (tightest: {worst[1]}."
          f"{worst[2]} at {worst[0]:.2f} of bound)")


def test_criterion_10_type2_regime():
    model = PowerLawCutoff(2.5, 1.0, 1.0)
    params = ModelParams(0.02, 0.05, 1.0, mean_service_time(model))
    profile = build_profile(params, model)
    # pre-check: rates small enough that the transform branch point is the
    # strictly dominant singularity
    assert profile.case_tag == TYPE2_DOMINANT
    lst = classify_lst(model)
    _, _, p2 = laws_for(profile, params, model)
    assert float(p2.power_exponent) == lst.alpha_bstar - 1.0 == -2.5
    # the decay rate solves: service argument at the radius hits the
    # transform branch point
    radius = profile.r_hstar
    assert p2.decay_rate == radius
    arg = params.lambda1 * (1.0 - float(h_eval(params, model, radius))) \
        + params.lambda2 * (1.0 - radius)
    assert arg == pytest.approx(-model.cutoff_rate, abs=1e-8)
    _, _, tp2 = coeffs_contour_all(params, model, 200, digits=50)
    rep = ratio_report(tp2, p2)
    n_last, _, _, ratio = rep.rows[-1]
    assert n_last == 200, "largest usable n should be the full table"
    assert abs(ratio - 1.0) < 0.10
    print(f"criterion 10: PASS - p2 exponent -2.5, decay {radius:.10f} solves "
          f"the branch-hit equation, p2/law deviation {abs(ratio - 1.0):.5f} "
          f"at n={n_last}")
