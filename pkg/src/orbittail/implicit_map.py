"""The kernel root h(z) and the candidate dominant singularities.

The kernel equation is ``w = B*(lambda1*(1-w) + lambda2*(1-z))``. Everything
in this module runs through the substitution ``u = lambda1*(1-w) +
lambda2*(1-z)``: on the solution set, ``w = B*(u)`` and

    z(u) = 1 + (lambda1*(1 - B*(u)) - u) / lambda2,

so the two-dimensional root curve is an explicit one-parameter curve in ``u``
and every root-finding problem below is scalar. Key derived quantities:

* ``tau(u) = -lambda1*B*'(u) - 1`` is ``lambda2 * dz/du``. A zero ``u_star``
  of ``tau`` is a fold of the curve: ``z(u)`` attains its maximum ``R_h``
  there and ``h`` picks up a square-root branch point.
* ``phi(u) = B*(u) - z(u)`` is strictly convex with ``phi(0) = 0`` and
  ``phi'(0) = (1-rho)/lambda2 > 0``, so ``h(z) = z`` has at most one root
  ``z > 1`` on the principal branch, reached at the unique negative zero of
  ``phi``.

For ``lambda1 = 0`` the substitution is explicit (``u = lambda2*(1-z)``) and
all solvers degenerate to closed forms automatically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import AmbiguousProfile, BranchLoss, DomainError, NoConvergence
from .service_models import ServiceModel, classify_lst, lst_eval, mean_service_time

__all__ = [
    "ModelParams",
    "SingularityProfile",
    "CASE1",
    "CASE2",
    "CASE3",
    "TYPE2_DOMINANT",
    "TYPE3_DOMINANT",
    "h_eval",
    "find_r_h",
    "find_r_star",
    "find_r_hstar",
    "build_profile",
]

CASE1 = "Case1_RetrialRegime"
CASE2 = "Case2_PriorityRegime"
CASE3 = "Case3_Boundary"
TYPE2_DOMINANT = "Type2Dominant"
TYPE3_DOMINANT = "Type3Dominant"

_CASE_TOL = 1e-8  # relative tolerance for coinciding-singularity detection
_EDGE_PAD = 1e-13  # relative offset kept from a finite LST-domain edge


@dataclass(frozen=True)
class ModelParams:
    """Arrival and retrial rates plus the service mean they act on.

    ``lambda1`` is the priority (queued) arrival rate, ``lambda2`` the orbit
    arrival rate, ``nu`` the per-customer retrial rate (``math.inf`` for the
    instant-retrial limit). ``b`` is the mean service time of the common
    service distribution.
    """

    lambda1: float
    lambda2: float
    nu: float
    b: float

    def __post_init__(self) -> None:
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise DomainError("arrival rates must be nonnegative")
        if self.lambda1 + self.lambda2 <= 0:
            raise DomainError("at least one arrival rate must be positive")
        if not self.nu > 0:
            raise DomainError(f"retrial rate must be positive (or inf), got {self.nu}")
        if not self.b > 0 or not math.isfinite(self.b):
            raise DomainError(f"mean service time must be positive finite, got {self.b}")
        if not self.rho < 1:
            raise DomainError(
                f"unstable system: rho = {self.rho} >= 1 (lambda*b must be < 1)"
            )

    @classmethod
    def for_model(
        cls, lambda1: float, lambda2: float, nu: float, model: ServiceModel
    ) -> ModelParams:
        """Build params with ``b`` taken from the service model."""
        return cls(float(lambda1), float(lambda2), float(nu), mean_service_time(model))

    @property
    def lambda_total(self) -> float:
        return self.lambda1 + self.lambda2

    @property
    def rho1(self) -> float:
        return self.lambda1 * self.b

    @property
    def rho2(self) -> float:
        return self.lambda2 * self.b

    @property
    def rho(self) -> float:
        return self.lambda_total * self.b


@dataclass(frozen=True)
class SingularityProfile:
    """Candidate singularities of the orbit PGFs and which one rules.

    ``r_h`` (with ``h_at_rh``, ``c_h``) is the square-root branch point of
    ``h``; ``r_star`` the root of ``h(z) = z`` above 1 on the principal
    branch; ``r_hstar`` the singularity transferred from the service-time
    LST endpoint, present only when the principal branch actually reaches
    that endpoint. ``r_dominant`` is the smallest present candidate; for
    heavy tails without exponential cutoff it equals 1.
    """

    case_tag: str
    r_dominant: float
    r_h: float | None = None
    h_at_rh: float | None = None
    c_h: float | None = None
    r_star: float | None = None
    r_hstar: float | None = None


def _require_orbit(params: ModelParams) -> None:
    if params.lambda2 <= 0:
        raise DomainError("orbit asymptotics need lambda2 > 0")


def _edge(model: ServiceModel) -> float:
    """Left end of the real LST domain (``-r_bstar``), possibly ``-inf``."""
    return -classify_lst(model).r_bstar


def _z_of_u(params: ModelParams, model: ServiceModel, u: float) -> float:
    b0 = lst_eval(model, u)[0]
    return 1.0 + (params.lambda1 * (1.0 - b0) - u) / params.lambda2


def _tau(params: ModelParams, model: ServiceModel, u: float) -> float:
    return -params.lambda1 * lst_eval(model, u, order=1)[1] - 1.0


def _phi(params: ModelParams, model: ServiceModel, u: float) -> float:
    b0 = lst_eval(model, u)[0]
    z = 1.0 + (params.lambda1 * (1.0 - b0) - u) / params.lambda2
    return b0 - z


def _tau_at_edge(params: ModelParams, model: ServiceModel) -> float:
    """Limit of tau at the LST-domain edge (``+inf`` when B*' diverges)."""
    data = classify_lst(model)
    if params.lambda1 == 0.0:
        return -1.0
    if data.type_tag == "Type1" or data.regular_derivs is None:
        return math.inf
    if len(data.regular_derivs) < 2:
        return math.inf  # B*' already divergent at the edge
    return -params.lambda1 * data.regular_derivs[1] - 1.0


def _find_fold(params: ModelParams, model: ServiceModel) -> float | None:
    """Unique zero ``u_star < 0`` of tau, or None when tau < 0 throughout."""
    if params.lambda1 == 0.0:
        return None
    if classify_lst(model).type_tag == "Type3":
        return None  # real LST domain is u >= 0 only
    if _tau_at_edge(params, model) <= 0.0:
        return None
    edge = _edge(model)
    lo = None
    if math.isinf(edge):
        u = -1.0
        for _ in range(200):
            if _tau(params, model, u) > 0.0:
                lo = u
                break
            u *= 2.0
    else:
        for k in range(1, 200):
            u = edge * (1.0 - 2.0 ** (-k))
            if _tau(params, model, u) > 0.0:
                lo = u
                break
    if lo is None:
        raise NoConvergence("find_r_h: could not bracket the fold of the root curve")
    return brentq(
        lambda u: _tau(params, model, u), lo, 0.0, xtol=1e-15, rtol=8.9e-16, maxiter=200
    )


def find_r_h(
    params: ModelParams, model: ServiceModel
) -> tuple[float, float, float] | None:
    """Square-root branch point of h: ``(r_h, h(r_h), c_h)``, or None.

    Exists exactly when the root curve folds before the LST domain ends:
    always for lambda1 > 0 with an LST that blows up at its singularity,
    conditionally for cutoff power laws, never for pure power laws or
    lambda1 = 0. ``c_h`` is the coefficient in
    ``h(z) = h(r_h) - c_h*sqrt(r_h - z) + O(r_h - z)``.
    """
    _require_orbit(params)
    u_star = _find_fold(params, model)
    if u_star is None:
        return None
    vals = lst_eval(model, u_star, order=2)
    r_h = 1.0 + (params.lambda1 * (1.0 - vals[0]) - u_star) / params.lambda2
    c_h = math.sqrt(2.0 * params.lambda2 / (params.lambda1**3 * vals[2]))
    return r_h, vals[0], c_h


def find_r_hstar(params: ModelParams, model: ServiceModel) -> float | None:
    """Image of the LST-domain endpoint on the root curve, or None for kinds
    whose LST diverges there (nothing finite to transfer)."""
    _require_orbit(params)
    data = classify_lst(model)
    if data.type_tag == "Type1":
        return None
    b_at_edge = data.regular_derivs[0]
    return 1.0 + (data.r_bstar + params.lambda1 * (1.0 - b_at_edge)) / params.lambda2


def _r_star_u(
    params: ModelParams,
    model: ServiceModel,
    u_star: float | None,
) -> float | None:
    """Root of phi on the negative u axis (u of the fixed point h(z) = z)."""
    if u_star is not None:
        u_lo = u_star
        phi_lo = _phi(params, model, u_lo)
    else:
        edge = _edge(model)
        if math.isinf(edge):
            u = -1.0
            u_lo = None
            for _ in range(200):
                if _phi(params, model, u) > 0.0:
                    u_lo, phi_lo = u, _phi(params, model, u)
                    break
                u *= 2.0
            if u_lo is None:
                return None  # bounded-support LST:  root would have shown up
        else:
            u_lo = edge * (1.0 - _EDGE_PAD)
            phi_lo = _phi(params, model, u_lo)
    if phi_lo < 0.0:
        return None
    if phi_lo == 0.0:
        return u_lo
    # phi is convex, phi(u_lo) > 0, phi(0) = 0 with phi'(0) > 0: exactly one
    # interior root; find a negative-phi point marching from 0 toward u_lo
    u_hi = None
    frac = 0.5
    for _ in range(60):
        cand = u_lo * frac
        if _phi(params, model, cand) < 0.0:
            u_hi = cand
            break
        frac *= 0.5
    if u_hi is None:
        raise NoConvergence("find_r_star: could not bracket the fixed point")
    return brentq(
        lambda u: _phi(params, model, u), u_lo, u_hi, xtol=1e-15, rtol=8.9e-16,
        maxiter=200,
    )


def find_r_star(
    params: ModelParams,
    model: ServiceModel,
    r_h_opt: tuple[float, float, float] | None = None,
) -> float | None:
    """Smallest root above 1 of ``h(z) = z`` on the principal branch.

    ``r_h_opt`` is the result of find_r_h (passed to avoid recomputing the
    fold; pass None to recompute). Returns None when ``h - z`` stays
    negative up to the end of the principal branch.
    """
    _require_orbit(params)
    if classify_lst(model).type_tag == "Type3":
        return None  # principal branch does not extend beyond z = 1
    if r_h_opt is not None:
        r_h, h_at_rh, _ = r_h_opt
        u_star = params.lambda1 * (1.0 - h_at_rh) + params.lambda2 * (1.0 - r_h)
    else:
        u_star = _find_fold(params, model)
    u_root = _r_star_u(params, model, u_star)
    if u_root is None:
        return None
    return _z_of_u(params, model, u_root)


def _solve_u_real(params: ModelParams, model: ServiceModel, z: float) -> float:
    """u on the principal branch for real z (z(u) is monotone there)."""
    if z == 1.0:
        return 0.0
    if params.lambda1 == 0.0:
        return params.lambda2 * (1.0 - z)
    if z < 1.0:
        hi = 1.0
        for _ in range(200):
            if _z_of_u(params, model, hi) < z:
                return brentq(
                    lambda u: _z_of_u(params, model, u) - z,
                    0.0, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200,
                )
            hi *= 2.0
        raise NoConvergence(f"h_eval: could not bracket u for z={z}")
    u_star = _find_fold(params, model)
    if u_star is not None:
        r_h = _z_of_u(params, model, u_star)
        if z > r_h * (1.0 + 1e-14):
            raise DomainError(f"z={z} lies beyond the branch point r_h={r_h}")
        if z >= r_h:
            return u_star
        lo = u_star
    else:
        edge = _edge(model)
        lo = edge * (1.0 - _EDGE_PAD)
        z_lo = _z_of_u(params, model, lo)
        if z > z_lo:
            if z <= z_lo * (1.0 + 1e-12):
                return lo
            raise DomainError(f"z={z} lies beyond the domain end z={z_lo}")
    return brentq(
        lambda u: _z_of_u(params, model, u) - z,
        lo, 0.0, xtol=1e-15, rtol=8.9e-16, maxiter=200,
    )


def _solve_u_complex(
    params: ModelParams,
    model: ServiceModel,
    z: complex,
    seed: complex | None = None,
) -> complex:
    """Damped Newton for the kernel root in u at complex z."""
    lam1, lam2 = params.lambda1, params.lambda2

    def g(u: complex) -> complex:
        b0 = lst_eval(model, u)[0]
        return lam1 * (1.0 - b0) + lam2 * (1.0 - z) - u

    u = complex(seed) if seed is not None else lam2 * (1.0 - z)
    gu = g(u)
    for _ in range(200):
        if abs(gu) <= 1e-15 * (1.0 + abs(u)):
            break
        tau = -lam1 * lst_eval(model, u, order=1)[1] - 1.0
        if tau == 0:
            raise BranchLoss("h_eval: Newton hit the fold at a complex point")
        step = -gu / tau
        t = 1.0
        for _ in range(50):
            cand = u + t * step
            gc = g(cand)
            if abs(gc) < abs(gu):
                u, gu = cand, gc
                break
            t *= 0.5
        else:
            raise NoConvergence(f"h_eval: Newton stalled at z={z}")
    w = lst_eval(model, u)[0]
    resid = abs(w - lst_eval(model, lam1 * (1.0 - w) + lam2 * (1.0 - z))[0])
    if resid > 1e-13 * (1.0 + abs(w)):
        raise NoConvergence(f"h_eval: kernel residual {resid:.2e} at z={z}")
    return u


def _u_for_z(params: ModelParams, model: ServiceModel, z: complex | float) -> complex | float:
    if isinstance(z, complex) and z.imag != 0.0:
        return _solve_u_complex(params, model, z)
    zr = z.real if isinstance(z, complex) else float(z)
    return _solve_u_real(params, model, zr)


def h_eval(params: ModelParams, model: ServiceModel, z: complex | float) -> complex | float:
    """Principal root ``w`` of ``w = B*(lambda1*(1-w) + lambda2*(1-z))``.

    For real z up to the dominant singularity this is the probabilistically
    meaningful branch (the one with ``h(1) = 1``); complex z is solved by
    damped Newton seeded from the explicit lambda1 = 0 value.
    """
    _require_orbit(params)
    u = _u_for_z(params, model, z)
    w = lst_eval(model, u)[0]
    if isinstance(z, complex) and not isinstance(w, complex):
        w = complex(w)
    return w


def _h_derivs(
    params: ModelParams, model: ServiceModel, z: float, order: int = 2
) -> list[float]:
    """``[h, h', h'']`` at real z via closed forms on the curve.

    ``h' = -lambda2 B*'(u) / (1 + lambda1 B*'(u))`` and
    ``h'' = -lambda2^2 B*''(u) / tau(u)^3``; both blow up at the fold.
    """
    u = _solve_u_real(params, model, z)
    vals = lst_eval(model, u, order=min(order + 1, 2) if order else 0)
    out: list[float] = [vals[0]]
    if order >= 1:
        tau = -params.lambda1 * vals[1] - 1.0
        out.append(params.lambda2 * vals[1] / tau)
    if order >= 2:
        out.append(-params.lambda2**2 * vals[2] / tau**3)
    return out


def build_profile(params: ModelParams, model: ServiceModel) -> SingularityProfile:
    """Run the three singularity finders and apply the dominance rules.

    The endpoint-transfer candidate ``r_hstar`` enters the contest only when
    the principal branch actually reaches the LST-domain endpoint, i.e. when
    the curve has no fold. With a fold, the branch terminates at the
    square-root point ``r_h`` first and the endpoint image (which sits on
    the far side of the fold) is not a singularity of h at all.
    """
    _require_orbit(params)
    data = classify_lst(model)

    if data.type_tag == "Type3":
        return SingularityProfile(
            case_tag=TYPE3_DOMINANT,
            r_dominant=1.0,
            r_hstar=find_r_hstar(params, model),
        )

    r_h_opt = find_r_h(params, model)
    r_star = find_r_star(params, model, r_h_opt)

    if r_h_opt is not None:
        r_h, h_at_rh, c_h = r_h_opt
        if r_star is not None and abs(r_star - r_h) < _CASE_TOL * r_h:
            if data.type_tag == "Type2":
                raise AmbiguousProfile(
                    "build_profile: fixed point and branch point coincide for a "
                    "cutoff power law; the boundary expansion is not available"
                )
            return SingularityProfile(
                case_tag=CASE3, r_dominant=r_h, r_h=r_h, h_at_rh=h_at_rh,
                c_h=c_h, r_star=r_star,
            )
        if r_star is not None:
            return SingularityProfile(
                case_tag=CASE1, r_dominant=r_star, r_h=r_h, h_at_rh=h_at_rh,
                c_h=c_h, r_star=r_star,
            )
        return SingularityProfile(
            case_tag=CASE2, r_dominant=r_h, r_h=r_h, h_at_rh=h_at_rh, c_h=c_h,
        )

    # no fold: the branch runs to the LST-domain endpoint
    if data.type_tag == "Type2":
        r_hstar = find_r_hstar(params, model)
        if r_star is not None and abs(r_star - r_hstar) < _CASE_TOL * r_hstar:
            raise AmbiguousProfile(
                "build_profile: fixed point and endpoint singularity coincide "
                "within tolerance; no clean dominant term exists"
            )
        if r_star is not None and r_star < r_hstar:
            return SingularityProfile(
                case_tag=CASE1, r_dominant=r_star, r_star=r_star, r_hstar=r_hstar,
            )
        return SingularityProfile(
            case_tag=TYPE2_DOMINANT, r_dominant=r_hstar, r_star=r_star,
            r_hstar=r_hstar,
        )

    # Type1 without fold: lambda1 = 0 with a divergent or entire LST; the
    # fixed point always exists before h can blow up
    if r_star is None:
        raise NoConvergence(
            "build_profile: no fixed point found for a divergent-LST model"
        )
    return SingularityProfile(case_tag=CASE1, r_dominant=r_star, r_star=r_star)
