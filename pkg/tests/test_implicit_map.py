"""Kernel root, fold and fixed-point location, case tagging."""

from __future__ import annotations

import cmath
import math

import pytest

from orbittail.errors import AmbiguousProfile, DomainError
from orbittail.implicit_map import (
    CASE1,
    CASE2,
    CASE3,
    TYPE2_DOMINANT,
    TYPE3_DOMINANT,
    ModelParams,
    SingularityProfile,
    build_profile,
    find_r_h,
    find_r_hstar,
    find_r_star,
    h_eval,
)
from orbittail.implicit_map import _h_derivs, _solve_u_real
from orbittail.service_models import (
    Deterministic,
    Erlang,
    Exponential,
    GammaShape,
    HyperExponential,
    Pareto,
    PowerLawCutoff,
    lst_eval,
)

EXPO = Exponential(1.0)


def expo_h_closed(lam1: float, lam2: float, mu: float, z: complex) -> complex:
    """Principal root of lam1 w^2 - (mu+lam1+lam2(1-z)) w + mu = 0."""
    a = mu + lam1 + lam2 * (1.0 - z)
    disc = a * a - 4.0 * lam1 * mu
    return (a - cmath.sqrt(disc)) / (2.0 * lam1)


class TestModelParams:
    def test_derived_loads(self):
        p = ModelParams.for_model(0.1, 0.3, 1.0, EXPO)
        assert p.b == 1.0
        assert p.lambda_total == 0.4
        assert p.rho1 == pytest.approx(0.1)
        assert p.rho2 == pytest.approx(0.3)
        assert p.rho == pytest.approx(0.4)

    def test_instability_rejected(self):
        with pytest.raises(DomainError):
            ModelParams.for_model(0.6, 0.5, 1.0, EXPO)
        with pytest.raises(DomainError):
            ModelParams.for_model(0.2, 0.2, 1.0, Pareto(1.5, 2.0))  # b = 6

    def test_bad_rates_rejected(self):
        with pytest.raises(DomainError):
            ModelParams.for_model(-0.1, 0.3, 1.0, EXPO)
        with pytest.raises(DomainError):
            ModelParams.for_model(0.1, 0.3, 0.0, EXPO)
        with pytest.raises(DomainError):
            ModelParams.for_model(0.0, 0.0, 1.0, EXPO)

    def test_infinite_retrial_rate_accepted(self):
        p = ModelParams.for_model(0.1, 0.3, math.inf, EXPO)
        assert math.isinf(p.nu)

    def test_zero_lambda2_blocks_orbit_ops(self):
        p = ModelParams.for_model(0.3, 0.0, 1.0, EXPO)
        with pytest.raises(DomainError):
            build_profile(p, EXPO)


class TestHEval:
    def test_unit_fixed_point(self):
        p = ModelParams.for_model(0.25, 0.25, 1.0, EXPO)
        assert h_eval(p, EXPO, 1.0) == pytest.approx(1.0, abs=1e-14)

    def test_noqueue_explicit_form(self):
        p = ModelParams.for_model(0.0, 0.5, 1.0, EXPO)
        assert h_eval(p, EXPO, 0.5) == pytest.approx(0.8, rel=1e-14)
        for m in (EXPO, GammaShape(1.7, 2.0), Deterministic(0.8)):
            pm = ModelParams.for_model(0.0, 0.5, 1.0, m)
            for z in (0.0, 0.4, 0.9, 1.3):
                assert h_eval(pm, m, z) == pytest.approx(
                    lst_eval(m, 0.5 * (1.0 - z))[0], rel=1e-14
                )

    def test_matches_quadratic_closed_form_on_real_grid(self):
        p = ModelParams.for_model(0.25, 0.25, 1.0, EXPO)
        for k in range(100):
            z = 2.0 * k / 100.0  # r_dominant is 2 here
            got = h_eval(p, EXPO, z)
            want = expo_h_closed(0.25, 0.25, 1.0, z).real
            assert got == pytest.approx(want, rel=1e-10), z

    def test_matches_quadratic_closed_form_on_complex_grid(self):
        p = ModelParams.for_model(0.25, 0.25, 1.0, EXPO)
        for k in range(24):
            z = 1.5 * cmath.exp(2j * math.pi * k / 24)
            got = h_eval(p, EXPO, z)
            want = expo_h_closed(0.25, 0.25, 1.0, z)
            assert abs(got - want) < 1e-10, z

    def test_derivative_at_one(self):
        for m, (l1, l2) in [
            (EXPO, (0.4, 0.05)),
            (Erlang(3, 2.0), (0.2, 0.3)),
            (HyperExponential((0.3, 0.7), (1.0, 5.0)), (0.5, 0.4)),
        ]:
            p = ModelParams.for_model(l1, l2, 1.0, m)
            d = 1e-6
            fd = (h_eval(p, m, 1.0 + d) - h_eval(p, m, 1.0 - d)) / (2.0 * d)
            want = p.rho2 / (1.0 - p.rho1)
            assert fd == pytest.approx(want, abs=1e-6)
            assert _h_derivs(p, m, 1.0, order=1)[1] == pytest.approx(want, rel=1e-12)

    def test_increasing_and_convex(self):
        for m, (l1, l2) in [
            (EXPO, (0.1, 0.3)),
            (Deterministic(0.8), (0.5, 0.2)),
            (GammaShape(1.7, 2.0), (0.3, 0.2)),
        ]:
            p = ModelParams.for_model(l1, l2, 1.0, m)
            prof = build_profile(p, m)
            zs = [prof.r_dominant * k / 100.0 for k in range(100)]
            hs = [h_eval(p, m, z) for z in zs]
            dz = zs[1] - zs[0]
            for i in range(1, 99):
                assert hs[i + 1] > hs[i]
                assert (hs[i + 1] - 2 * hs[i] + hs[i - 1]) / dz**2 >= -1e-8

    def test_beyond_branch_point_raises(self):
        p = ModelParams.for_model(0.4, 0.05, 1.0, EXPO)
        with pytest.raises(DomainError):
            h_eval(p, EXPO, 3.8)

    def test_branch_containment(self):
        p = ModelParams.for_model(0.4, 0.05, 1.0, EXPO)
        r_h, h_at_rh, _ = find_r_h(p, EXPO)
        for k in range(50):
            z = r_h * k / 49.0
            w = h_eval(p, EXPO, z)
            assert 0.0 < w <= h_at_rh + 1e-12


class TestFindRH:
    def test_exponential_closed_form_boundary(self):
        p = ModelParams.for_model(0.25, 0.25, 1.0, EXPO)
        r_h, h_at_rh, c_h = find_r_h(p, EXPO)
        assert r_h == pytest.approx(2.0, rel=1e-10)
        assert h_at_rh == pytest.approx(2.0, rel=1e-10)
        assert c_h == pytest.approx(math.sqrt(0.25) / 0.25**0.75, rel=1e-10)

    def test_exponential_closed_form_priority(self):
        p = ModelParams.for_model(0.4, 0.05, 1.0, EXPO)
        r_h, h_at_rh, c_h = find_r_h(p, EXPO)
        assert r_h == pytest.approx(1.0 + (1.0 - math.sqrt(0.4)) ** 2 / 0.05, rel=1e-12)
        assert r_h == pytest.approx(3.7017787186529653, rel=1e-12)
        assert h_at_rh == pytest.approx(math.sqrt(1.0 / 0.4), rel=1e-12)
        assert c_h == pytest.approx(math.sqrt(0.05) / 0.4**0.75, rel=1e-12)

    def test_characteristic_residuals(self):
        for m, (l1, l2) in [
            (EXPO, (0.4, 0.05)),
            (Erlang(2, 1.5), (0.3, 0.2)),
            (Deterministic(0.8), (0.5, 0.2)),
            (GammaShape(1.7, 2.0), (0.3, 0.2)),
            (PowerLawCutoff(1.5, 0.5, 2.0), (0.1, 0.05)),
        ]:
            p = ModelParams.for_model(l1, l2, 1.0, m)
            r_h, w, _ = find_r_h(p, m)
            u = l1 * (1.0 - w) + l2 * (1.0 - r_h)
            vals = lst_eval(m, u, order=1)
            assert abs(vals[0] - w) < 1e-10
            assert abs(-l1 * vals[1] - 1.0) < 1e-10

    def test_absent_cases(self):
        assert find_r_h(ModelParams.for_model(0.0, 0.5, 1.0, EXPO), EXPO) is None
        par = Pareto(1.5, 1.0)
        assert find_r_h(ModelParams.for_model(0.1, 0.1, 1.0, par), par) is None
        plc = PowerLawCutoff(2.5, 1.0, 1.0)
        assert find_r_h(ModelParams.for_model(0.05, 0.05, 1.0, plc), plc) is None

    def test_cutoff_power_law_fold_appears_with_enough_priority_load(self):
        # tau at the edge is -lambda1*B*'(-Rc) - 1; B*'(-1) is about -15.81
        # for these cutoff parameters, so the fold exists iff lambda1 > 0.0632
        plc = PowerLawCutoff(2.5, 1.0, 1.0)
        assert find_r_h(ModelParams.for_model(0.1, 0.05, 1.0, plc), plc) is not None
        assert find_r_h(ModelParams.for_model(0.05, 0.05, 1.0, plc), plc) is None


class TestFindRStar:
    def test_retrial_regime_root(self):
        p = ModelParams.for_model(0.1, 0.3, 1.0, EXPO)
        r = find_r_star(p, EXPO, find_r_h(p, EXPO))
        assert r == pytest.approx(2.5, rel=1e-12)

    def test_priority_regime_absent(self):
        # the scalar equation z = B*(lambda(1-z)) has root mu/lambda = 2.22
        # but it lies on the other branch; the principal branch has none
        p = ModelParams.for_model(0.4, 0.05, 1.0, EXPO)
        assert find_r_star(p, EXPO, find_r_h(p, EXPO)) is None

    def test_boundary_root_equals_fold(self):
        p = ModelParams.for_model(0.25, 0.25, 1.0, EXPO)
        r = find_r_star(p, EXPO, find_r_h(p, EXPO))
        assert r == pytest.approx(2.0, rel=1e-12)

    def test_noqueue_root(self):
        p = ModelParams.for_model(0.0, 0.5, 1.0, EXPO)
        assert find_r_star(p, EXPO, None) == pytest.approx(2.0, rel=1e-12)

    def test_fixed_point_residual_and_ordering(self):
        for m, (l1, l2) in [
            (EXPO, (0.1, 0.3)),
            (Erlang(2, 1.5), (0.05, 0.2)),
            (HyperExponential((0.3, 0.7), (1.0, 5.0)), (0.1, 0.4)),
        ]:
            p = ModelParams.for_model(l1, l2, 1.0, m)
            r_h_opt = find_r_h(p, m)
            r = find_r_star(p, m, r_h_opt)
            if r is None:
                continue
            assert abs(h_eval(p, m, r) - r) < 1e-9
            if r_h_opt is not None:
                assert r <= r_h_opt[0] + 1e-12


class TestFindRHStar:
    def test_type3_is_one(self):
        par = Pareto(1.5, 1.0)
        p = ModelParams.for_model(0.1, 0.1, 1.0, par)
        assert find_r_hstar(p, par) == 1.0

    def test_type1_absent(self):
        assert find_r_hstar(ModelParams.for_model(0.1, 0.3, 1.0, EXPO), EXPO) is None

    def test_cutoff_power_law_value_and_consistency(self):
        plc = PowerLawCutoff(2.5, 1.0, 1.0)
        p = ModelParams.for_model(0.05, 0.05, 1.0, plc)
        r = find_r_hstar(p, plc)
        b_edge = 5.270599721067687
        assert r == pytest.approx(1.0 + (1.0 + 0.05 * (1.0 - b_edge)) / 0.05, rel=1e-12)
        assert r == pytest.approx(16.7294002789323, rel=1e-11)
        # path consistency: u(z) must hit the LST edge -Rc exactly at z = r
        u = _solve_u_real(p, plc, r)
        assert u == pytest.approx(-1.0, rel=1e-10)


class TestBuildProfile:
    def test_case1(self):
        prof = build_profile(ModelParams.for_model(0.1, 0.3, 1.0, EXPO), EXPO)
        assert prof.case_tag == CASE1
        assert prof.r_dominant == pytest.approx(2.5, rel=1e-12)
        assert prof.r_star == pytest.approx(2.5, rel=1e-12)
        assert prof.r_h == pytest.approx(2.5584815598877473, rel=1e-10)

    def test_case2(self):
        prof = build_profile(ModelParams.for_model(0.4, 0.05, 1.0, EXPO), EXPO)
        assert prof.case_tag == CASE2
        assert prof.r_star is None
        assert prof.r_dominant == pytest.approx(3.7017787186529653, rel=1e-12)

    def test_case3(self):
        prof = build_profile(ModelParams.for_model(0.25, 0.25, 1.0, EXPO), EXPO)
        assert prof.case_tag == CASE3
        assert prof.r_dominant == pytest.approx(2.0, rel=1e-10)

    def test_type3(self):
        par = Pareto(1.5, 1.0)
        prof = build_profile(ModelParams.for_model(0.1, 0.1, 1.0, par), par)
        assert prof.case_tag == TYPE3_DOMINANT
        assert prof.r_dominant == 1.0
        assert prof.r_h is None and prof.r_star is None
        assert prof.r_hstar == 1.0

    def test_type2_dominant(self):
        plc = PowerLawCutoff(2.5, 1.0, 1.0)
        prof = build_profile(ModelParams.for_model(0.05, 0.05, 1.0, plc), plc)
        assert prof.case_tag == TYPE2_DOMINANT
        assert prof.r_dominant == pytest.approx(16.7294002789323, rel=1e-11)
        assert prof.r_star is None

    def test_type2_with_fold_uses_fold_not_endpoint(self):
        # enough priority load folds the curve before the LST edge; the
        # endpoint image then sits on the far side of the fold and must not
        # be reported as a singularity
        plc = PowerLawCutoff(2.5, 1.0, 1.0)
        prof = build_profile(ModelParams.for_model(0.1, 0.05, 1.0, plc), plc)
        assert prof.case_tag in (CASE1, CASE2, CASE3)
        assert prof.r_h is not None
        assert prof.r_hstar is None
        formula_value = find_r_hstar(ModelParams.for_model(0.1, 0.05, 1.0, plc), plc)
        assert formula_value < prof.r_h  # the shadowed value is smaller

    def test_noqueue_case1(self):
        prof = build_profile(ModelParams.for_model(0.0, 0.5, 1.0, EXPO), EXPO)
        assert prof.case_tag == CASE1
        assert prof.r_dominant == pytest.approx(2.0, rel=1e-12)
        assert prof.r_h is None

    def test_deterministic_profiles(self):
        det = Deterministic(0.8)
        prof = build_profile(ModelParams.for_model(0.5, 0.2, 1.0, det), det)
        assert prof.case_tag == CASE2
        assert prof.h_at_rh == pytest.approx(2.5, rel=1e-12)  # 1/rho1
        prof0 = build_profile(ModelParams.for_model(0.0, 0.5, 1.0, det), det)
        assert prof0.case_tag == CASE1

    def test_type2_tie_is_ambiguous(self):
        # choose lambda2 so the fixed point lands on the endpoint singularity
        plc = PowerLawCutoff(2.5, 1.0, 1.0)
        b_edge = lst_eval(plc, -1.0 + 1e-13)[0]
        lam2 = (1.0 + 1e-10) / (b_edge - 1.0)
        p = ModelParams.for_model(0.0, lam2, 1.0, plc)
        with pytest.raises(AmbiguousProfile):
            build_profile(p, plc)

    def test_profile_is_frozen(self):
        prof = build_profile(ModelParams.for_model(0.1, 0.3, 1.0, EXPO), EXPO)
        assert isinstance(prof, SingularityProfile)
        with pytest.raises(AttributeError):
            prof.r_dominant = 3.0
