"""Working-precision building blocks for the coefficient oracle.

Everything here runs in mpmath's *current* working precision (callers wrap
their pipeline in ``mpmath.workdps``). The float implementations in
``service_models`` and ``implicit_map`` stay the fast path for law
computation; this module re-derives the same quantities in arbitrary
precision for contour inversion, where float64 would drown coefficients
like ``2^-400`` in rounding noise. Tests cross-check both paths.
"""

from __future__ import annotations

import mpmath

from .errors import NoConvergence, UnsupportedKind
from .implicit_map import ModelParams, _solve_u_real
from .service_models import (
    Deterministic,
    Erlang,
    Exponential,
    GammaShape,
    HyperExponential,
    Pareto,
    PowerLawCutoff,
    ServiceModel,
)

_PLC_NORM_CACHE: dict[tuple, mpmath.mpf] = {}
_TWIDDLE_CACHE: dict[tuple[int, int], list] = {}


def _plc_norm_mp(p: float, rc: float, x0: float):
    key = (p, rc, x0, mpmath.mp.dps)
    got = _PLC_NORM_CACHE.get(key)
    if got is None:
        got = mpmath.mpf(rc) ** (1.0 - p) / mpmath.gammainc(1.0 - p, x0 * mpmath.mpf(rc))
        _PLC_NORM_CACHE[key] = got
    return got


def mp_lst(model: ServiceModel, s, order: int = 0) -> list:
    """``[B*(s)]`` or ``[B*(s), B*'(s)]`` at the current working precision.

    ``s`` may be real or complex; powers and incomplete gammas use the
    principal branch, which is the analytic continuation the kernel root
    tracking stays on.
    """
    s = mpmath.mpmathify(s)
    match model:
        case Exponential(mu=mu):
            g = mu / (mu + s)
            vals = [g]
            if order >= 1:
                vals.append(-g / (mu + s))
        case Erlang(shape=k, mu=mu) | GammaShape(shape=k, mu=mu):
            base = 1 + s / mu
            vals = [base**-k]
            if order >= 1:
                vals.append(-(mpmath.mpf(k) / mu) * base ** (-k - 1))
        case HyperExponential(weights=ws, rates=rs):
            vals = [sum(w * r / (r + s) for w, r in zip(ws, rs))]
            if order >= 1:
                vals.append(sum(-w * r / (r + s) ** 2 for w, r in zip(ws, rs)))
        case Deterministic(duration=d):
            e = mpmath.exp(-d * s)
            vals = [e]
            if order >= 1:
                vals.append(-d * e)
        case PowerLawCutoff(p=p, cutoff_rate=rc, x0=x0):
            c = _plc_norm_mp(p, rc, x0)
            sh = s + rc
            vals = [c * sh ** (p - 1.0) * mpmath.gammainc(1.0 - p, x0 * sh)]
            if order >= 1:
                vals.append(-c * sh ** (p - 2.0) * mpmath.gammainc(2.0 - p, x0 * sh))
        case Pareto(p=p, x0=x0):
            if s == 0:
                vals = [mpmath.mpf(1)]
                if order >= 1:
                    vals.append(mpmath.mpf(-p * x0 / (p - 1.0)))
            else:
                xp = mpmath.mpf(x0) ** p
                vals = [p * xp * s**p * mpmath.gammainc(-p, x0 * s)]
                if order >= 1:
                    vals.append(-p * xp * s ** (p - 1.0) * mpmath.gammainc(1.0 - p, x0 * s))
        case _:
            raise UnsupportedKind(f"unknown service model {model!r}")
    return vals


def solve_u(params: ModelParams, model: ServiceModel, z, seed):
    """Kernel root ``u(z)`` of ``u = lambda1 (1 - B*(u)) + lambda2 (1 - z)``.

    Damped Newton at the current working precision. ``seed`` must be close
    enough to stay on the principal sheet; callers walk the contour in small
    steps and seed from the previous point (extrapolating where they can).
    The Jacobian is refreshed every accepted step: quadratic convergence
    keeps the evaluation count low even for transform kinds whose
    derivatives cost extra special-function calls.
    """
    lam1, lam2 = params.lambda1, params.lambda2
    z = mpmath.mpmathify(z)
    if lam1 == 0.0:
        return lam2 * (1 - z)
    tol = mpmath.mpf(10) ** (-(mpmath.mp.dps - 4))
    u = mpmath.mpmathify(seed)
    b, b1 = mp_lst(model, u, order=1)
    f = u - lam1 * (1 - b) - lam2 * (1 - z)
    for _ in range(60):
        if abs(f) <= tol * (1 + abs(u)):
            return u
        step = f / (1 + lam1 * b1)
        for _ in range(50):
            cand = u - step
            bc, bc1 = mp_lst(model, cand, order=1)
            fc = cand - lam1 * (1 - bc) - lam2 * (1 - z)
            if abs(fc) < abs(f):
                u, f, b1 = cand, fc, bc1
                break
            step /= 2
        else:
            break
    else:
        if abs(f) <= tol * (1 + abs(u)):
            return u
    raise NoConvergence(f"kernel root iteration stalled at z = {complex(z)}")


def _twiddles(m: int) -> list:
    """``exp(-2 pi i k / m)`` for ``k < m // 2``, cached per (m, dps)."""
    key = (m, mpmath.mp.dps)
    got = _TWIDDLE_CACHE.get(key)
    if got is None:
        got = [mpmath.expjpi(mpmath.mpf(-2 * k) / m) for k in range(m // 2)]
        _TWIDDLE_CACHE[key] = got
    return got


def fft_pow2(values: list) -> list:
    """Forward DFT ``X_n = sum_k x_k exp(-2 pi i k n / M)`` by radix-2 FFT.

    ``len(values)`` must be a power of two. Runs at the current working
    precision; rounding grows like ``log2(M)`` ulps, negligible next to the
    guard digits callers carry.
    """
    m = len(values)
    if m == 0 or m & (m - 1):
        raise ValueError(f"length must be a power of two, got {m}")
    vec = [mpmath.mpmathify(v) for v in values]
    j = 0
    for i in range(1, m):
        bit = m >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            vec[i], vec[j] = vec[j], vec[i]
    span = 1
    while span < m:
        tw = _twiddles(2 * span)
        for start in range(0, m, 2 * span):
            for k in range(span):
                a = vec[start + k]
                b = vec[start + span + k] * tw[k]
                vec[start + k] = a + b
                vec[start + span + k] = a - b
        span *= 2
    return vec


def u_real_mp(params: ModelParams, model: ServiceModel, x) -> mpmath.mpf:
    """Kernel root at a real point: float bracketing seed, mp polish."""
    if params.lambda1 == 0.0:
        return params.lambda2 * (1 - mpmath.mpf(x))
    seed = _solve_u_real(params, model, float(x))
    return solve_u(params, model, mpmath.mpf(x), seed).real
