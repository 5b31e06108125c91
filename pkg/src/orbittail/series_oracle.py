"""Coefficient ground truth for the orbit PGFs by contour inversion.

The oracle evaluates the target PGF at ``M`` equally spaced points on a
circle ``|z| = r`` strictly inside the dominant singularity and recovers
power-series coefficients by a discrete Fourier transform in
working-precision arithmetic. ``f2`` values on the contour are spectral:
``f2' = (lambda/nu) f1`` and ``f1`` is analytic in the disk, so one FFT of
the ``f1`` samples, a termwise division by ``k + 1``, and an inverse
transform integrate it; a single real-axis quadrature pins the constant.
Two further real-axis anchor quadratures (straight segments to ``z = 1``)
measure the actual reconstruction error at ``z = +-r``, and the measured
mismatch feeds the reported error bound.

Error accounting is explicit: every table carries a per-coefficient bound
``est_by_n`` (aliasing term from a probe radius plus the quadrature floor)
and a per-coefficient ``usable`` flag (magnitude at least ``10^3`` times
the bound). Deep coefficients below working precision are reported as
unusable noise rather than silently returned.

Arc integrals and contour-point evaluations are mutually independent (the
prefix sum and the Fourier inversion are the only synchronization points),
so the evaluation stage parallelizes if ever needed; the implementation
here is serial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from ._highprec import fft_pow2, mp_lst, solve_u, u_real_mp
from .errors import DomainError, PrecisionExhausted, QuadratureFailure
from .implicit_map import TYPE3_DOMINANT, ModelParams, build_profile
from .service_models import Exponential, ServiceModel
from .tail_asymptotics import AsymptoticLaw

__all__ = [
    "CoefficientTable",
    "RatioReport",
    "coeffs_contour",
    "coeffs_contour_all",
    "coeffs_closed_noqueue",
    "ratio_report",
    "loglog_slope",
]

_TARGETS = ("Q", "R", "P2")
# smallest error bound we will claim; float64 cannot witness anything below it
_EST_FLOOR = 1e-300


@dataclass(frozen=True)
class CoefficientTable:
    """Power-series coefficients of one orbit PGF with error bounds.

    ``coeffs`` holds working-precision reals (mpmath), length ``n_max + 1``;
    ``est_by_n[n]`` bounds the absolute error of ``coeffs[n]``;
    ``usable[n]`` is true when the coefficient magnitude exceeds
    ``10^3 * est_by_n[n]``. ``est_abs_error`` is the largest per-coefficient
    bound. ``radius`` is the contour radius (nominal 1.0 for closed-form
    tables, which use no contour).
    """

    target: str
    n_max: int
    radius: float
    digits: int
    coeffs: tuple
    est_abs_error: float
    est_by_n: tuple
    usable: tuple

    def to_csv(self) -> str:
        lines = ["n,coeff,usable,est_abs_error"]
        for n, (c, ok, e) in enumerate(zip(self.coeffs, self.usable, self.est_by_n)):
            lines.append(f"{n},{mpmath.nstr(c, 17)},{int(ok)},{e:.6e}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RatioReport:
    """Coefficient-versus-law diagnostics over the usable rows of a table.

    ``rows`` holds ``(n, coeff, law_value, ratio)`` for every usable n >= 1
    with a positive coefficient. The tail window ``[tail_lo, tail_hi]`` is
    the last decade of n below the precision reach; ``tail_max_dev`` is the
    largest ``|ratio - 1|`` inside it (nan when nothing is usable).
    """

    target: str
    rows: tuple
    tail_lo: int
    tail_hi: int
    tail_max_dev: float


def _make_table(
    target: str, n_max: int, radius: float, digits: int, coeffs: list, est_by_n: list
) -> CoefficientTable:
    usable = tuple(abs(c) > 1e3 * e for c, e in zip(coeffs, est_by_n))
    for n, (c, e) in enumerate(zip(coeffs, est_by_n)):
        if c < -e:
            raise QuadratureFailure(
                f"{target} coefficient {n} is {mpmath.nstr(c, 8)}, below -est {e:.2e};"
                " the error bound is wrong"
            )
    if est_by_n[n_max] > abs(coeffs[n_max]):
        first_bad = next((n for n, u in enumerate(usable) if not u), n_max)
        raise PrecisionExhausted(
            f"{target} error bound {est_by_n[n_max]:.2e} at n={n_max} exceeds the"
            f" coefficient magnitude {mpmath.nstr(abs(coeffs[n_max]), 5)};"
            f" first unusable n = {first_bad}; lower n_max or raise digits",
            first_unusable_n=first_bad,
        )
    return CoefficientTable(
        target=target,
        n_max=n_max,
        radius=radius,
        digits=digits,
        coeffs=tuple(coeffs),
        est_abs_error=max(est_by_n),
        est_by_n=tuple(est_by_n),
        usable=usable,
    )


def _check_inputs(n_max: int, digits: int, radius_factor: float) -> None:
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    if digits < 30:
        raise DomainError(f"digits must be >= 30, got {digits}")
    if not 0.0 < radius_factor < 1.0:
        raise DomainError(f"radius_factor must be in (0, 1), got {radius_factor}")


def _segment_f1(params: ModelParams, model: ServiceModel, r_dom: float, a, d_q: int):
    """``integral_a^1 f1(x) dx`` along the real axis (tanh-sinh).

    The straight path stays inside the convex disk of analyticity; the
    runtime check below asserts that geometric fact for both endpoints and
    the midpoint. The integrand has at worst an algebraic endpoint
    singularity in its derivatives (heavy-tail boundary case), which the
    doubly exponential rule absorbs. Runs at just enough precision for its
    own error gate: the nodes are real, so every kernel root comes from the
    cheap bracketing-plus-polish path.
    """
    for pt in (a, (a + 1) / 2, mpmath.mpf(1)):
        if abs(pt) > r_dom * (1 + 1e-12):
            raise DomainError(
                f"segment point {float(pt)} leaves the analyticity disk |z| < {r_dom}"
            )

    with mpmath.workdps(min(d_q + 12, mpmath.mp.dps)):
        h1 = mpmath.mpf(params.rho2) / (1 - mpmath.mpf(params.rho1))
        at_one = h1 / (1 - h1)
        pad = mpmath.mpf(10) ** (-(mpmath.mp.dps - 2))

        def f(x):
            # deep tanh-sinh nodes round onto the endpoint, where the
            # integrand is the 0/0 limit h'(1)/(1 - h'(1))
            if abs(1 - x) <= pad:
                return at_one
            u = u_real_mp(params, model, x)
            w = mp_lst(model, u)[0]
            return (1 - w) / (w - x)

        val, err = mpmath.quad(f, [a, 1], error=True, maxdegree=10)
        if err > mpmath.mpf(10) ** (-(d_q + 2)) * (1 + abs(val)):
            raise QuadratureFailure(
                f"f1 segment quadrature from {float(a)} stalled at error {float(err):.2e}"
            )
    return val


def _contour_raw(
    params: ModelParams,
    model: ServiceModel,
    n_max: int,
    digits: int,
    radius_factor: float,
) -> tuple[dict, float]:
    """Shared engine: coefficients and error bounds for all three targets."""
    profile = build_profile(params, model)
    heavy = profile.case_tag == TYPE3_DOMINANT
    factor = 8 if heavy else 4
    m_pts = 1 << max(math.ceil(math.log2(factor * n_max)), 10)
    mh = m_pts // 2
    d_q = digits - 6
    lam1, lam2, lam = params.lambda1, params.lambda2, params.lambda_total

    with mpmath.workdps(digits + 10):
        r_dom = mpmath.mpf(profile.r_dominant)
        r = mpmath.mpf(radius_factor) * r_dom
        if abs(float(r) - 1.0) < 1e-6:
            raise DomainError(
                f"contour radius {float(r)} passes through z = 1, where the"
                " queue functionals cancel; adjust radius_factor"
            )
        ln_ = mpmath.mpf(lam) / params.nu if math.isfinite(params.nu) else mpmath.mpf(0)
        one_rho = 1 - mpmath.mpf(params.rho)

        zs = [r * mpmath.expjpi(mpmath.mpf(2 * k) / m_pts) for k in range(mh + 1)]
        zs[0] = r
        zs[mh] = -r
        us = [u_real_mp(params, model, r)]
        for k in range(1, mh + 1):
            seed = us[-1] if k == 1 else 2 * us[-1] - us[-2]
            us.append(solve_u(params, model, zs[k], seed))
        f1s = []
        for z, u in zip(zs, us):
            w = mp_lst(model, u)[0]
            f1s.append((1 - w) / (w - z))

        # probe radius between the contour and the singularity for the
        # Cauchy-bound aliasing estimates; PGF coefficients are nonnegative,
        # so the modulus maximum on |z| = r' sits on the positive real axis
        rp = r_dom * (1 - (1 - mpmath.mpf(radius_factor)) / 4)
        u_rp = u_real_mp(params, model, rp)
        w_rp = mp_lst(model, u_rp)[0]
        f1_rp = (1 - w_rp) / (w_rp - rp)
        kappa = (r / rp) ** m_pts

        quad_rel = mpmath.mpf(10) ** (-(d_q - 2))
        if ln_ != 0:
            # f2' = (lambda/nu) f1 and f1 is analytic in |z| < r_dom, so the
            # antiderivative is spectral: FFT the f1 samples, divide bin k by
            # (k+1), and inverse-transform. One real-axis segment pins the
            # constant; two more anchor segments measure the actual error.
            f1_full = list(f1s) + [mpmath.conj(f1s[k]) for k in range(mh - 1, 0, -1)]
            bins1 = fft_pow2(f1_full)
            d_vec = [g * r / (m_pts * (k + 1)) for k, g in enumerate(bins1)]
            s_vec = fft_pow2([mpmath.conj(v) for v in d_vec])
            i01 = _segment_f1(params, model, profile.r_dominant, mpmath.mpf(0), d_q)
            # integral of f1 from 0 to z_j is (z_j / r) * conj(s_vec[j])
            f2s = [
                -ln_ * (i01 - (z / r) * mpmath.conj(s_vec[j]))
                for j, z in enumerate(zs)
            ]
            f1_bound = 3 * max(max(abs(v) for v in f1s), abs(f1_rp))
            t_f2 = 4 * ln_ * f1_bound * r * kappa / (1 - r / rp)
            mis0 = abs(f2s[0] + ln_ * _segment_f1(params, model, profile.r_dominant, r, d_q))
            mis_pi = abs(f2s[mh] + ln_ * _segment_f1(params, model, profile.r_dominant, -r, d_q))
            gate = 10 * t_f2 + mpmath.mpf(10) ** (-(d_q - 4)) * (1 + abs(f2s[0]))
            if max(mis0, mis_pi) > gate:
                raise QuadratureFailure(
                    f"f2 anchor mismatch {float(max(mis0, mis_pi)):.2e} signals a"
                    " singularity inside the contour or an anchor failure"
                )
            quad_rel += t_f2 + mis0 + mis_pi
            f2s = [v.real if j in (0, mh) else v for j, v in enumerate(f2s)]
        else:
            f2s = [mpmath.mpf(0)] * (mh + 1)

        qs = [one_rho * mpmath.exp(f2) for f2 in f2s]
        rs = [(lam / lam2) * f1 * q for f1, q in zip(f1s, qs)]
        p2s = [q + rv for q, rv in zip(qs, rs)]
        qs[0], rs[0], p2s[0] = qs[0].real, rs[0].real, p2s[0].real
        qs[mh], rs[mh], p2s[mh] = qs[mh].real, rs[mh].real, p2s[mh].real

        if ln_ != 0:
            f2_rp = -ln_ * _segment_f1(params, model, profile.r_dominant, rp, d_q)
        else:
            f2_rp = mpmath.mpf(0)
        q_rp = one_rho * mpmath.exp(f2_rp)
        r_rp = (lam / lam2) * f1_rp * q_rp
        probes = {"Q": q_rp, "R": r_rp, "P2": q_rp + r_rp}

        r_inv, rp_inv = 1 / r, 1 / rp
        out: dict[str, tuple[list, list]] = {}
        for target, half in (("Q", qs), ("R", rs), ("P2", p2s)):
            full = list(half) + [mpmath.conj(half[k]) for k in range(mh - 1, 0, -1)]
            bins = fft_pow2(full)
            max_f = max(abs(v) for v in half)
            alias0 = probes[target] * kappa / (1 - kappa)
            floor0 = max_f * quad_rel
            coeffs, est = [], []
            pw_r, pw_rp = mpmath.mpf(1), mpmath.mpf(1)
            for n in range(n_max + 1):
                coeffs.append((bins[n] / m_pts * pw_r).real)
                e = float(alias0 * pw_rp + floor0 * pw_r)
                est.append(max(e, _EST_FLOOR) if math.isfinite(e) else _EST_FLOOR)
                pw_r *= r_inv
                pw_rp *= rp_inv
            out[target] = (coeffs, est)
        return out, float(r)


def coeffs_contour(
    params: ModelParams,
    model: ServiceModel,
    target: str,
    n_max: int,
    digits: int = 50,
    radius_factor: float = 0.95,
) -> CoefficientTable:
    """Coefficients of one orbit PGF by contour inversion.

    Parameters
    ----------
    params, model:
        Stable parameter set and service-time model.
    target:
        One of ``"Q"``, ``"R"``, ``"P2"``.
    n_max:
        Highest coefficient index, at least 1.
    digits:
        Working precision in decimal digits, at least 30.
    radius_factor:
        Contour radius as a fraction of the dominant singularity radius,
        strictly inside (0, 1). The default 0.95 matches the reported
        error bounds; 0.90 is useful for radius-robustness cross-checks.

    Returns
    -------
    CoefficientTable

    Raises
    ------
    PrecisionExhausted
        If the error bound at ``n_max`` exceeds the coefficient magnitude.
    QuadratureFailure
        If a self-check (closed-contour residual, anchor mismatch, segment
        tolerance) fails.
    """
    if target not in _TARGETS:
        raise DomainError(f"target must be one of {_TARGETS}, got {target!r}")
    _check_inputs(n_max, digits, radius_factor)
    raw, radius = _contour_raw(params, model, n_max, digits, radius_factor)
    coeffs, est = raw[target]
    return _make_table(target, n_max, radius, digits, coeffs, est)


def coeffs_contour_all(
    params: ModelParams,
    model: ServiceModel,
    n_max: int,
    digits: int = 50,
    radius_factor: float = 0.95,
) -> tuple[CoefficientTable, CoefficientTable, CoefficientTable]:
    """All three tables (Q, R, P2) from one shared contour evaluation."""
    _check_inputs(n_max, digits, radius_factor)
    raw, radius = _contour_raw(params, model, n_max, digits, radius_factor)
    return tuple(
        _make_table(t, n_max, radius, digits, *raw[t]) for t in _TARGETS
    )


def coeffs_closed_noqueue(
    params: ModelParams, model: ServiceModel, target: str, n_max: int
) -> CoefficientTable:
    """Closed-form coefficients for the no-queue exponential special case.

    With no priority arrivals and exponential service the queue PGF is
    ``(1-rho) ((1-rho)/(1-rho z))^(lambda/nu)``, a negative binomial, and
    ``f1`` is the geometric series ``rho/(1-rho z)``, so all three targets
    follow from stable forward recurrences. Assumes ``params.b`` is the
    model mean. This is the second, independent oracle: no contour, no
    quadrature, no kernel solve.
    """
    if target not in _TARGETS:
        raise DomainError(f"target must be one of {_TARGETS}, got {target!r}")
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    if params.lambda1 != 0.0:
        raise DomainError("closed-form coefficients need lambda1 = 0")
    if not isinstance(model, Exponential):
        raise DomainError("closed-form coefficients need exponential service")
    with mpmath.workdps(60):
        rho = mpmath.mpf(params.rho)
        a = mpmath.mpf(params.lambda_total) / params.nu if math.isfinite(params.nu) else mpmath.mpf(0)
        q = [mpmath.exp((1 + a) * mpmath.log(1 - rho))]
        for n in range(1, n_max + 1):
            q.append(q[-1] * rho * (n - 1 + a) / n)
        r = [rho * q[0]]
        for n in range(1, n_max + 1):
            r.append(rho * (q[n] + r[-1]))
        series = {"Q": q, "R": r, "P2": [x + y for x, y in zip(q, r)]}[target]
        coeffs = list(series)
        est = [float(abs(c) * mpmath.mpf("1e-50")) for c in coeffs]
    return _make_table(target, n_max, 1.0, 60, coeffs, est)


def ratio_report(table: CoefficientTable, law: AsymptoticLaw) -> RatioReport:
    """Per-coefficient comparison of a table against an asymptotic law.

    Ratios are formed in log space so that coefficients far below float
    range stay exact; rows cover the usable coefficients with n >= 1 and a
    positive value, and the summary window is the last decade of usable n.
    """
    rows = []
    for n in range(1, table.n_max + 1):
        if not table.usable[n]:
            continue
        c = table.coeffs[n]
        if not c > 0:
            continue
        lv = law.log_value(n)
        if math.isinf(lv):
            continue
        ratio = float(mpmath.exp(mpmath.log(c) - lv))
        rows.append((n, float(c), math.exp(lv) if lv > -745 else 0.0, ratio))
    if not rows:
        return RatioReport(table.target, (), 0, 0, math.nan)
    n_hi = rows[-1][0]
    n_lo = max(1, n_hi // 10)
    window = [abs(row[3] - 1.0) for row in rows if n_lo <= row[0] <= n_hi]
    return RatioReport(table.target, tuple(rows), n_lo, n_hi, max(window))


def loglog_slope(
    table: CoefficientTable, n_lo: int, n_hi: int, decay: float = 1.0
) -> float:
    """Least-squares slope of ``log c_n + n log(decay)`` against ``log n``.

    Estimates the polynomial exponent of a coefficient tail after removing
    the geometric factor; with ``decay=1`` (heavy tails) it reads the
    exponent straight off the table.
    """
    xs, ys = [], []
    for n in range(max(1, n_lo), min(table.n_max, n_hi) + 1):
        c = table.coeffs[n]
        if not table.usable[n] or not c > 0:
            continue
        xs.append(math.log(n))
        ys.append(float(mpmath.log(c)) + n * math.log(decay))
    if len(xs) < 2:
        raise DomainError(
            f"need at least two usable positive coefficients in [{n_lo}, {n_hi}]"
        )
    xbar = sum(xs) / len(xs)
    ybar = sum(ys) / len(ys)
    sxx = sum((x - xbar) ** 2 for x in xs)
    sxy = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    return sxy / sxx
