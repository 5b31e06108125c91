"""First-order tail laws for the orbit-size distributions.

Input is a SingularityProfile; output is one AsymptoticLaw per distribution,
normalized as ``law(n) = prefactor * n**power_exponent * decay_rate**(-n)``:

* ``q(n)``: n customers in orbit, server idle (coefficients of Q).
* ``r(n)``: n customers in orbit, server busy (coefficients of R).
* ``p2(n)``: n customers in orbit (coefficients of P2 = Q + R); always
  asymptotically equal to r(n).

All quadratures run in the curve parameter ``u`` (see implicit_map): the
substitution ``x = z(u)`` makes every integrand an explicit rational
expression of LST values, unfolds the square-root endpoint of the boundary
case into a smooth function, and lets the fixed-point pole of the retrial
case be removed algebraically rather than by delicate float cancellation.

The infinite-retrial limit is symbolic: ``nu = inf`` means ``lambda/nu = 0``
exactly, so ``f2 == 0`` and the idle-orbit law degenerates to prefactor 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from .errors import (
    CaseMismatch,
    DivergentIntegral,
    DomainError,
    QuadratureFailure,
)
from .implicit_map import (
    CASE1,
    CASE2,
    CASE3,
    TYPE2_DOMINANT,
    TYPE3_DOMINANT,
    ModelParams,
    SingularityProfile,
    _find_fold,
    _solve_u_real,
    build_profile,
)
from .service_models import ServiceModel, endpoint_expansion, lst_eval, lst_increment

__all__ = [
    "F1Expansion",
    "QExpansionData",
    "AsymptoticLaw",
    "f1_expand",
    "f2_eval",
    "q_law",
    "r_law",
    "p2_law",
    "special_nonretrial",
    "regime_D",
    "type2_laws",
    "type3_laws",
]

_TYPE1_CASES = (CASE1, CASE2, CASE3)


@dataclass(frozen=True)
class F1Expansion:
    """Local data of ``f1 = (1-h)/(h-z)`` at its dominant singularity.

    Exactly the constants demanded by the case are set: the retrial case has
    the residue scale ``c1`` of the simple pole; the priority case has the
    square-root coefficient ``c2`` and the finite value ``f1_at_r``; the
    boundary case has the inverse-square-root coefficient ``c3``.
    """

    case_tag: str
    r_f1: float
    c1: float | None = None
    c2: float | None = None
    c3: float | None = None
    f1_at_r: float | None = None


@dataclass(frozen=True)
class QExpansionData:
    """Constants of the singular expansion of Q at its dominant singularity."""

    r_q: float
    q_at_r: float | None = None
    f2_at_r: float | None = None
    c_q1: float | None = None
    c_q2: float | None = None
    c_q3: float | None = None


@dataclass(frozen=True)
class AsymptoticLaw:
    """One tail law ``n -> prefactor * n**power_exponent * decay_rate**(-n)``.

    ``power_exponent`` is an exact Fraction where the catalog makes it
    rational, a float otherwise; ``decay_rate`` is 1 for pure power laws.
    The prefactor is positive except in the degenerate idle-orbit law at
    ``nu = inf``, where it is 0.
    """

    prefactor: float
    power_exponent: Fraction | float
    decay_rate: float
    regime_note: str

    def log_value(self, n: int) -> float:
        """``log law(n)``; -inf for a zero prefactor."""
        if n <= 0:
            raise DomainError("law values are defined for n >= 1")
        if self.prefactor == 0.0:
            return -math.inf
        return (
            math.log(self.prefactor)
            + float(self.power_exponent) * math.log(n)
            - n * math.log(self.decay_rate)
        )

    def value(self, n: int) -> float:
        return math.exp(self.log_value(n)) if self.prefactor != 0.0 else 0.0

    def as_json_dict(self) -> dict:
        return {
            "prefactor": self.prefactor,
            "power_exponent": float(self.power_exponent),
            "decay_rate": self.decay_rate,
            "regime": self.regime_note,
        }


def _lam_over_nu(params: ModelParams) -> float:
    return 0.0 if math.isinf(params.nu) else params.lambda_total / params.nu


def f1_expand(
    profile: SingularityProfile, params: ModelParams, model: ServiceModel
) -> F1Expansion:
    """Singular expansion constants of f1 for the three fold-type cases."""
    lam1, lam2, lam = params.lambda1, params.lambda2, params.lambda_total
    if profile.case_tag == CASE1:
        r = profile.r_star
        u_r = lam * (1.0 - r)  # h(r) = r makes u explicit here
        b1 = lst_eval(model, u_r, order=1)[1]
        c1 = (1.0 - r) * (1.0 + lam1 * b1) / (1.0 + lam * b1)
        return F1Expansion(case_tag=CASE1, r_f1=r, c1=c1)
    if profile.case_tag == CASE2:
        r, w, c_h = profile.r_h, profile.h_at_rh, profile.c_h
        return F1Expansion(
            case_tag=CASE2,
            r_f1=r,
            c2=(r - 1.0) * c_h / (w - r) ** 2,
            f1_at_r=(1.0 - w) / (w - r),
        )
    if profile.case_tag == CASE3:
        r, c_h = profile.r_h, profile.c_h
        return F1Expansion(case_tag=CASE3, r_f1=r, c3=(r - 1.0) / c_h)
    raise CaseMismatch(
        f"f1_expand handles the fold-type cases only, got {profile.case_tag}"
    )


def _curve_pieces(params: ModelParams, model: ServiceModel, u: float):
    """(B*, B*', tau, phi) at u, the raw ingredients of every integrand."""
    lam1, lam2 = params.lambda1, params.lambda2
    v = lst_eval(model, u, order=1)
    tau = -lam1 * v[1] - 1.0
    z = 1.0 + (lam1 * (1.0 - v[0]) - u) / lam2
    return v[0], v[1], tau, v[0] - z


def _f2_integrand(params: ModelParams, model: ServiceModel):
    """u-space integrand of ``integral f1 dx``: ``(1-B*) tau / (lambda2 phi)``.

    Returns a callable patched near u = 0 (where the 0/0 limit is
    ``b (rho1 - 1)/(1 - rho)``) and near the fold (where tau/phi is replaced
    by its derivative ratio).
    """
    lam1, lam2, lam = params.lambda1, params.lambda2, params.lambda_total
    b = params.b
    limit0 = b * (params.rho1 - 1.0) / (1.0 - params.rho)
    u_star = _find_fold(params, model)
    fold_data = None
    if u_star is not None:
        d = lst_eval(model, u_star, order=3)
        # tau' = -lam1 B*'', tau'' = -lam1 B*'''; phi' = B*'(u*) = -1/lam1;
        # phi'' = B*'' * lam/lam2
        fold_data = (
            u_star,
            (-lam1 * d[2], -lam1 * d[3]),
            (d[1], d[2] * lam / lam2),
        )

    def integrand(u: float) -> float:
        if abs(u) < 1e-8:
            return limit0
        if fold_data is not None:
            us, (t1, t2), (p1, p2) = fold_data
            du = u - us
            if abs(du) < 1e-7 * max(1.0, abs(us)):
                ratio = (t1 + 0.5 * t2 * du) / (p1 + 0.5 * p2 * du)
                b0 = lst_eval(model, u)[0]
                return (1.0 - b0) * ratio / lam2
        b0, _, tau, phi = _curve_pieces(params, model, u)
        return (1.0 - b0) * tau / (lam2 * phi)

    return integrand


_GL12 = np.polynomial.legendre.leggauss(12)
_GL16 = np.polynomial.legendre.leggauss(16)


def _graded_gl_quad(fn, a: float, b: float, what: str) -> float:
    """Composite Gauss-Legendre over [a, b], panels halving toward both ends.

    Meant for integrands analytic on the closed interval whose float
    evaluation is noisy near removable endpoint singularities: a fixed rule
    keeps endpoint noise weighted by vanishing panel widths instead of
    letting it stall adaptive subdivision. The 16-versus-12 point difference
    per panel is the error estimate.
    """
    graded = [2.0**-k for k in range(32, 2, -1)]
    ts = (
        [0.0]
        + graded
        + [0.25, 0.375, 0.5, 0.625, 0.75]
        + [1.0 - t for t in reversed(graded)]
        + [1.0]
    )
    span = b - a
    total = 0.0
    est = 0.0
    for t0, t1 in zip(ts, ts[1:]):
        lo, hi = a + span * t0, a + span * t1
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        v16 = sum(w * fn(mid + half * x) for x, w in zip(*_GL16))
        v12 = sum(w * fn(mid + half * x) for x, w in zip(*_GL12))
        total += half * v16
        est += abs(half * (v16 - v12))
    if est > 1e-11 * max(1.0, abs(total)):
        raise QuadratureFailure(
            f"{what}: composite rule disagreement {est:.2e} over [{a}, {b}]"
        )
    return total


def _quad_checked(fn, a: float, b: float, what: str) -> float:
    # full_output suppresses warnings; the returned estimate is what counts
    out = quad(fn, a, b, epsabs=1e-12, epsrel=1e-12, limit=400, full_output=1)
    val, abserr = out[0], out[1]
    if abserr > 1e-11 * max(1.0, abs(val)):
        raise QuadratureFailure(
            f"{what}: quadrature error estimate {abserr:.2e} over [{a}, {b}]"
        )
    return val


def f2_eval(
    params: ModelParams,
    model: ServiceModel,
    z: float,
    profile: SingularityProfile | None = None,
) -> float:
    """``f2(z) = -(lambda/nu) * integral_z^1 f1(x) dx`` along the real axis.

    The endpoint may touch the dominant singularity wherever f1 stays
    integrable (everywhere except the retrial-case pole at r_star). At
    ``nu = inf`` this is identically 0.
    """
    ln = _lam_over_nu(params)
    if ln == 0.0 or z == 1.0:
        return 0.0
    if profile is None:
        profile = build_profile(params, model)
    if profile.case_tag == CASE1 and z >= profile.r_star * (1.0 - 1e-12):
        raise DivergentIntegral(
            f"f2_eval: f1 has a pole at r_star={profile.r_star}; "
            f"the integral to z={z} diverges"
        )
    if z > profile.r_dominant * (1.0 + 1e-12):
        raise DomainError(f"f2_eval: z={z} is beyond r_dominant={profile.r_dominant}")
    u_z = _solve_u_real(params, model, min(z, profile.r_dominant))
    return ln * _quad_checked(_f2_integrand(params, model), 0.0, u_z, "f2_eval")


def _regularized_c_q1_integral(
    params: ModelParams, model: ServiceModel, r: float
) -> float:
    """``integral_1^R [f1(x) - c1/(R-x)] dx`` with the pole removed exactly.

    Over the common denominator the x-space integrand is ``N / (phi (R-z))``
    with ``N(u) = (1-B*(u))(R - z(u)) - c1 phi(u)``, which vanishes
    quadratically at the pole parameter u_r. Assembling N from the raw
    pieces would subtract two O(1)-rounded products to reach an O(du^2)
    value, so everything is rebuilt from the increments
    ``dB = B*(u) - B*(u_r)`` (cancellation-free via ``lst_increment``) and
    ``dz = z(u) - R = -(lambda1 dB + du)/lambda2``:

        N = dz (c1 - (1-W)) - c1 dB + dB dz,  phi = dB - dz,  R - z = -dz,

    whose rounding scales with du itself, leaving only integrable
    ~eps/du relative noise. The removable 0/0 endpoint at u = 0 gets its
    frozen one-sided value inside a tiny pad window.
    """
    lam1, lam2, lam = params.lambda1, params.lambda2, params.lambda_total
    u_r = lam * (1.0 - r)
    w, b1 = lst_eval(model, u_r, order=1)
    c1 = (1.0 - w) * (1.0 + lam1 * b1) / (1.0 + lam * b1)
    h1 = params.rho2 / (1.0 - params.rho1)
    # limit of the x-space integrand at x = 1, times z'(0)
    at_one = (h1 / (1.0 - h1) - c1 / (r - 1.0)) * (params.rho1 - 1.0) / lam2
    pad = 1e-9 * abs(u_r)
    coeff = c1 - (1.0 - w)

    def integrand(u: float) -> float:
        if abs(u) < pad:
            return at_one
        du = u - u_r
        if abs(du) < pad:
            du = math.copysign(pad, -u_r)
        db = lst_increment(model, u_r, du)
        dz = -(lam1 * db + du) / lam2
        n = dz * coeff - c1 * db + db * dz
        phi = db - dz
        d1 = lst_eval(model, u_r + du, order=1)[1]
        tau = -lam1 * d1 - 1.0
        return n * tau / (lam2 * phi * (-dz))

    return _graded_gl_quad(integrand, 0.0, u_r, "c_q1 integral")


def _gamma_factor(x: float) -> float:
    return math.gamma(x)


def q_law(
    profile: SingularityProfile, params: ModelParams, model: ServiceModel
) -> tuple[QExpansionData, AsymptoticLaw]:
    """Expansion data of Q and the tail law of q(n) for fold-type cases."""
    if profile.case_tag not in _TYPE1_CASES:
        raise CaseMismatch(
            f"q_law handles the fold-type cases; use type2_laws/type3_laws "
            f"for {profile.case_tag}"
        )
    ln = _lam_over_nu(params)
    one_rho = 1.0 - params.rho
    f1e = f1_expand(profile, params, model)
    r = profile.r_dominant

    if profile.case_tag == CASE1:
        a = ln * f1e.c1
        if a == 0.0:
            # nu = inf: Q is constant, its tail law degenerates
            data = QExpansionData(r_q=r, c_q1=one_rho)
            return data, AsymptoticLaw(0.0, -1.0, r, CASE1)
        j = _regularized_c_q1_integral(params, model, r)
        c_q1 = one_rho * (r - 1.0) ** a * math.exp(ln * j)
        data = QExpansionData(r_q=r, c_q1=c_q1)
        law = AsymptoticLaw(c_q1 / _gamma_factor(a) * r ** (-a), a - 1.0, r, CASE1)
        return data, law

    f2_r = f2_eval(params, model, r, profile)
    q_r = one_rho * math.exp(f2_r)
    if profile.case_tag == CASE2:
        c_q2 = q_r * (2.0 * ln / 3.0) * f1e.c2
        data = QExpansionData(r_q=r, q_at_r=q_r, f2_at_r=f2_r, c_q2=c_q2)
        pref = 3.0 * c_q2 / (4.0 * math.sqrt(math.pi)) * r**1.5
        return data, AsymptoticLaw(pref, Fraction(-5, 2), r, CASE2)

    c_q3 = q_r * (2.0 * ln) * f1e.c3
    data = QExpansionData(r_q=r, q_at_r=q_r, f2_at_r=f2_r, c_q3=c_q3)
    pref = c_q3 / (2.0 * math.sqrt(math.pi)) * math.sqrt(r)
    return data, AsymptoticLaw(pref, Fraction(-3, 2), r, CASE3)


def r_law(
    profile: SingularityProfile,
    params: ModelParams,
    model: ServiceModel,
    q_data: QExpansionData,
) -> AsymptoticLaw:
    """Tail law of r(n) for fold-type cases (q_data comes from q_law)."""
    if profile.case_tag not in _TYPE1_CASES:
        raise CaseMismatch(
            f"r_law handles the fold-type cases; use type2_laws/type3_laws "
            f"for {profile.case_tag}"
        )
    lam, lam2 = params.lambda_total, params.lambda2
    ln = _lam_over_nu(params)
    f1e = f1_expand(profile, params, model)
    r = profile.r_dominant

    if profile.case_tag == CASE1:
        a = ln * f1e.c1
        pref = (lam / lam2) * q_data.c_q1 * f1e.c1 / _gamma_factor(1.0 + a) * r ** (-1.0 - a)
        beta = a if a != 0.0 else Fraction(0)
        return AsymptoticLaw(pref, beta, r, CASE1)
    if profile.case_tag == CASE2:
        pref = (lam / lam2) * f1e.c2 * q_data.q_at_r / (2.0 * math.sqrt(math.pi)) * math.sqrt(r)
        return AsymptoticLaw(pref, Fraction(-3, 2), r, CASE2)
    pref = (lam / lam2) * f1e.c3 * q_data.q_at_r / math.sqrt(math.pi) / math.sqrt(r)
    return AsymptoticLaw(pref, Fraction(-1, 2), r, CASE3)


def p2_law(
    profile: SingularityProfile,
    params: ModelParams,
    model: ServiceModel,
    q_data: QExpansionData,
) -> AsymptoticLaw:
    """Tail law of p2(n): identical to r(n), whose tail dominates q(n)."""
    return r_law(profile, params, model, q_data)


def special_nonretrial(
    profile: SingularityProfile, params: ModelParams, model: ServiceModel
) -> AsymptoticLaw:
    """p2 law of the plain two-class priority queue (``nu = inf``).

    Independent closed forms, not the ``lambda/nu -> 0`` limit of the
    general path; the two must agree and tests check that they do.
    """
    if not math.isinf(params.nu):
        raise DomainError("special_nonretrial requires nu = inf")
    if profile.case_tag not in _TYPE1_CASES:
        raise CaseMismatch(
            f"special_nonretrial handles the fold-type cases, got {profile.case_tag}"
        )
    lam, lam2 = params.lambda_total, params.lambda2
    one_rho = 1.0 - params.rho
    f1e = f1_expand(profile, params, model)
    r = profile.r_dominant
    if profile.case_tag == CASE1:
        return AsymptoticLaw((lam / lam2) * one_rho * f1e.c1 / r, Fraction(0), r, CASE1)
    if profile.case_tag == CASE2:
        pref = (lam / lam2) * one_rho * f1e.c2 / (2.0 * math.sqrt(math.pi)) * math.sqrt(r)
        return AsymptoticLaw(pref, Fraction(-3, 2), r, CASE2)
    pref = (lam / lam2) * one_rho * f1e.c3 / math.sqrt(math.pi) / math.sqrt(r)
    return AsymptoticLaw(pref, Fraction(-1, 2), r, CASE3)


def regime_D(params: ModelParams, mu: float) -> float:
    """Sign classifier for exponential service: D > 0 retrial regime,
    D < 0 priority regime, D = 0 boundary."""
    if not mu > 0:
        raise DomainError(f"service rate must be positive, got {mu}")
    lam1, lam2, lam = params.lambda1, params.lambda2, params.lambda_total
    root = math.sqrt(lam1 * mu)
    return lam2 * mu - (lam + mu - 2.0 * root) * root


def type2_laws(
    profile: SingularityProfile, params: ModelParams, model: ServiceModel
) -> tuple[AsymptoticLaw, AsymptoticLaw, AsymptoticLaw]:
    """(q, r, p2) laws when the LST-endpoint singularity dominates.

    The singular coefficient transferred from B* to h carries the feedback
    factor ``1/(1 + lambda1 B*'(-r_bstar))``: the endpoint term re-enters
    the kernel through the class-1 argument of B*, which rescales it. The
    same factor appears inside ``lambda1 h'(R) + lambda2 = lambda2 / (1 +
    lambda1 B*'(-r_bstar))``, evaluated here in closed form.
    """
    if profile.case_tag != TYPE2_DOMINANT:
        raise CaseMismatch(f"type2_laws requires Type2Dominant, got {profile.case_tag}")
    data = endpoint_expansion(model)
    alpha, c_b = data.alpha_bstar, data.c_bstar
    r = profile.r_hstar
    lam1, lam2, lam = params.lambda1, params.lambda2, params.lambda_total
    if lam1 == 0.0:
        feed = 1.0
    else:
        feed = 1.0 + lam1 * data.regular_derivs[1]
    h_r = data.regular_derivs[0]
    big_f = lam2 / feed  # lambda1 h'(R) + lambda2
    k2 = (1.0 / feed) * c_b * big_f ** (-alpha) * (r - 1.0) / (h_r - r) ** 2
    ln = _lam_over_nu(params)
    f2_r = f2_eval(params, model, r, profile)
    q_r = (1.0 - params.rho) * math.exp(f2_r)
    g = _gamma_factor(alpha)
    law_q = AsymptoticLaw(
        ln * q_r * k2 / g * r ** (1.0 - alpha), alpha - 2.0, r, TYPE2_DOMINANT
    )
    pref_r = (lam / lam2) * q_r * k2 / g * r ** (-alpha)
    law_r = AsymptoticLaw(pref_r, alpha - 1.0, r, TYPE2_DOMINANT)
    return law_q, law_r, law_r


def type3_laws(
    profile: SingularityProfile, params: ModelParams, model: ServiceModel
) -> tuple[AsymptoticLaw, AsymptoticLaw, AsymptoticLaw]:
    """(q, r, p2) laws for pure power-law service: decay rate exactly 1.

    Carries the same feedback factor as type2_laws (here ``1/(1 - rho1)``
    since ``B*'(0) = -b``) and the idle-state weight ``Q(1) = 1 - rho`` in
    every law, including r and p2.
    """
    if profile.case_tag != TYPE3_DOMINANT:
        raise CaseMismatch(f"type3_laws requires Type3Dominant, got {profile.case_tag}")
    data = endpoint_expansion(model)
    alpha, c_b = data.alpha_bstar, data.c_bstar
    if not alpha < -1.0:
        raise DomainError(
            f"power-law tail needs alpha < -1 for a finite mean, got {alpha}"
        )
    lam, lam2 = params.lambda_total, params.lambda2
    one_rho1 = 1.0 - params.rho1
    h1 = params.rho2 / one_rho1
    big_f = lam2 / one_rho1  # lambda1 h'(1) + lambda2
    k3 = (
        (1.0 / one_rho1)
        * c_b
        * big_f ** (-alpha)
        / (-alpha * _gamma_factor(alpha) * (1.0 - h1) ** 2)
    )
    ln = _lam_over_nu(params)
    one_rho = 1.0 - params.rho
    law_q = AsymptoticLaw(ln * one_rho * k3, alpha - 1.0, 1.0, TYPE3_DOMINANT)
    law_r = AsymptoticLaw((lam / lam2) * one_rho * k3, alpha, 1.0, TYPE3_DOMINANT)
    return law_q, law_r, law_r
