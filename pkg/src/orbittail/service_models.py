"""Service-time distributions seen through their Laplace-Stieltjes transforms.

Seven parametric kinds are supported. Each kind knows its LST ``B*(s)`` with
derivatives, its mean, and the location and local shape of the dominant
singularity of ``B*`` on the negative real axis. The singularity metadata is
what separates the three asymptotic families downstream:

* ``Type1``: ``B*`` blows up at ``-r_bstar`` (poles, or the branch point of a
  fractional-shape gamma). Includes ``r_bstar = inf`` for bounded supports.
* ``Type2``: ``B*`` stays finite at ``-r_bstar`` but has an algebraic branch
  point there (power law with exponential cut-off).
* ``Type3``: the singularity sits at 0 (pure power-law tail).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath

from .errors import DomainError, UnsupportedKind

__all__ = [
    "Exponential",
    "Erlang",
    "HyperExponential",
    "Deterministic",
    "GammaShape",
    "PowerLawCutoff",
    "Pareto",
    "ServiceModel",
    "LstSingularData",
    "mean_service_time",
    "lst_eval",
    "lst_increment",
    "classify_lst",
    "endpoint_expansion",
    "density",
]

_GAMMAINC_DPS = 30


@dataclass(frozen=True)
class Exponential:
    """Exponential service with rate ``mu``."""

    mu: float

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise DomainError(f"exponential rate must be positive, got {self.mu}")


@dataclass(frozen=True)
class Erlang:
    """Sum of ``shape`` independent exponentials of rate ``mu``."""

    shape: int
    mu: float

    def __post_init__(self) -> None:
        if not (isinstance(self.shape, int) and self.shape >= 1):
            raise DomainError(f"erlang shape must be a positive integer, got {self.shape}")
        if not self.mu > 0:
            raise DomainError(f"erlang rate must be positive, got {self.mu}")


@dataclass(frozen=True)
class HyperExponential:
    """Mixture of exponentials: weight ``weights[i]`` on rate ``rates[i]``."""

    weights: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if len(self.weights) != len(self.rates) or not self.weights:
            raise DomainError("weights and rates must be nonempty and equally long")
        if any(w <= 0 for w in self.weights) or any(r <= 0 for r in self.rates):
            raise DomainError("hyperexponential weights and rates must be positive")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise DomainError(f"weights must sum to 1, got {sum(self.weights)!r}")


@dataclass(frozen=True)
class Deterministic:
    """Constant service time ``duration``."""

    duration: float

    def __post_init__(self) -> None:
        if not self.duration > 0:
            raise DomainError(f"duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class GammaShape:
    """Gamma service with non-integer shape ``shape`` and rate ``mu``.

    The LST ``(mu/(mu+s))**shape`` has an algebraic branch point at ``-mu``
    where it diverges, so the kind is still Type1.
    """

    shape: float
    mu: float

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise DomainError(f"gamma rate must be positive, got {self.mu}")
        if not self.shape > 0 or float(self.shape).is_integer():
            raise DomainError(
                f"gamma shape must be positive and non-integer, got {self.shape}"
            )


@dataclass(frozen=True)
class PowerLawCutoff:
    """Density ``C * x**(-p) * exp(-cutoff_rate*x)`` on ``[x0, inf)``.

    Polynomial at moderate ``x``, exponential in the far tail. ``p`` must be
    non-integer so the LST's branch point at ``-cutoff_rate`` has a
    non-integer algebraic exponent.
    """

    p: float
    cutoff_rate: float
    x0: float = 1.0

    def __post_init__(self) -> None:
        if not self.p > 1 or float(self.p).is_integer():
            raise DomainError(f"exponent p must be non-integer and > 1, got {self.p}")
        if not self.cutoff_rate > 0:
            raise DomainError(f"cutoff rate must be positive, got {self.cutoff_rate}")
        if not self.x0 > 0:
            raise DomainError(f"lower bound x0 must be positive, got {self.x0}")


@dataclass(frozen=True)
class Pareto:
    """Pareto service: density ``p * x0**p * x**(-p-1)`` on ``[x0, inf)``.

    ``p`` is restricted to non-integer values in (1, 3): the mean must be
    finite and the LST expansion exponent ``-p`` non-integer.
    """

    p: float
    x0: float = 1.0

    def __post_init__(self) -> None:
        if not (1 < self.p < 3) or float(self.p).is_integer():
            raise DomainError(
                f"pareto exponent must be non-integer in (1, 3), got {self.p}"
            )
        if not self.x0 > 0:
            raise DomainError(f"pareto scale must be positive, got {self.x0}")


ServiceModel = (
    Exponential
    | Erlang
    | HyperExponential
    | Deterministic
    | GammaShape
    | PowerLawCutoff
    | Pareto
)


@dataclass(frozen=True)
class LstSingularData:
    """Location and local shape of the dominant singularity of ``B*(s)``.

    Fields
    ------
    r_bstar:
        Distance from 0 to the singularity at ``-r_bstar``; ``inf`` when the
        LST is entire.
    type_tag:
        ``"Type1"``, ``"Type2"`` or ``"Type3"`` (see module docstring).
    alpha_bstar, c_bstar:
        Exponent and coefficient of the algebraic term
        ``c_bstar * (s + r_bstar)**(-alpha_bstar)``; present for Type2/Type3
        and for the GammaShape branch point, absent otherwise.
    regular_derivs:
        ``B*^(j)(-r_bstar)`` for ``j = 0 .. floor(-alpha_bstar)``; present
        for Type2/Type3 (the finite part of the endpoint expansion).
    """

    r_bstar: float
    type_tag: str
    alpha_bstar: float | None = None
    c_bstar: float | None = None
    regular_derivs: tuple[float, ...] | None = None


def mean_service_time(model: ServiceModel) -> float:
    """Mean service time ``b = -B*'(0)``."""
    match model:
        case Exponential(mu=mu):
            return 1.0 / mu
        case Erlang(shape=k, mu=mu):
            return k / mu
        case HyperExponential(weights=ws, rates=rs):
            return sum(w / r for w, r in zip(ws, rs))
        case Deterministic(duration=d):
            return d
        case GammaShape(shape=k, mu=mu):
            return k / mu
        case PowerLawCutoff(p=p, cutoff_rate=rc, x0=x0):
            c = _plc_norm(p, rc, x0)
            return c * _upper_gamma(2.0 - p, x0 * rc) * rc ** (p - 2.0)
        case Pareto(p=p, x0=x0):
            return p * x0 / (p - 1.0)
    raise UnsupportedKind(f"unknown service model {model!r}")


def lst_eval(model: ServiceModel, s: complex | float, order: int = 0) -> list[complex | float]:
    """Evaluate ``[B*(s), B*'(s), ..., B*^(order)(s)]``.

    Parameters
    ----------
    model:
        Any of the seven service kinds.
    s:
        Evaluation point, real or complex. Must lie strictly to the right of
        the LST singularity at ``-r_bstar`` (for Pareto, ``s = 0`` itself is
        additionally allowed and returns the one-sided moment values, with
        ``inf`` magnitudes for the orders whose moments diverge).
    order:
        Highest derivative order, at most 4.

    Returns
    -------
    list
        Derivative values; floats for real ``s``, complex otherwise.
    """
    if not 0 <= order <= 4:
        raise DomainError(f"order must be in 0..4, got {order}")
    if isinstance(model, Erlang) and model.shape == 1:
        model = Exponential(model.mu)  # identical arithmetic, not just equal values
    is_complex = isinstance(s, complex)
    sr = s.real if is_complex else float(s)
    data = classify_lst(model)
    on_axis = not is_complex or s.imag == 0.0
    if math.isfinite(data.r_bstar) and on_axis:
        # Real-axis formulas hold strictly right of the singularity. Off the
        # axis the principal-branch continuation is well defined and the
        # root solvers are responsible for staying on their sheet.
        if isinstance(model, Pareto):
            if sr < 0.0:
                raise DomainError(f"s={s!r} is left of the LST singularity at 0")
        elif sr <= -data.r_bstar:
            raise DomainError(
                f"s={s!r} is not strictly right of the LST singularity at {-data.r_bstar}"
            )

    match model:
        case Exponential(mu=mu):
            vals = [(-1) ** j * math.factorial(j) * mu / (mu + s) ** (j + 1) for j in range(order + 1)]
        case Erlang(shape=k, mu=mu):
            vals = _ratio_power_derivs(float(k), mu, s, order)
        case GammaShape(shape=k, mu=mu):
            vals = _ratio_power_derivs(k, mu, s, order)
        case HyperExponential(weights=ws, rates=rs):
            vals = [
                sum(
                    w * (-1) ** j * math.factorial(j) * r / (r + s) ** (j + 1)
                    for w, r in zip(ws, rs)
                )
                for j in range(order + 1)
            ]
        case Deterministic(duration=d):
            vals = _deterministic_derivs(d, s, order)
        case PowerLawCutoff(p=p, cutoff_rate=rc, x0=x0):
            c = _plc_norm(p, rc, x0)
            sh = s + rc
            vals = [
                (-1) ** j * c * sh ** (p - 1.0 - j) * _upper_gamma(1.0 + j - p, x0 * sh)
                for j in range(order + 1)
            ]
        case Pareto(p=p, x0=x0):
            vals = _pareto_derivs(p, x0, s, order)
        case _:
            raise UnsupportedKind(f"unknown service model {model!r}")

    if is_complex:
        return [complex(v) for v in vals]
    return [float(v.real) if isinstance(v, complex) else float(v) for v in vals]


def lst_increment(model: ServiceModel, base: float, delta: float) -> float:
    """Evaluate ``B*(base + delta) - B*(base)`` without subtractive rounding.

    Subtracting two ``lst_eval`` results leaves an absolute error near
    machine epsilon times ``|B*|``, which dominates once ``delta`` is small.
    Each branch below assembles the difference so that rounding scales with
    the increment itself; the incomplete-gamma kinds subtract in working
    precision before converting to float.

    Parameters
    ----------
    model:
        Any of the seven service kinds.
    base, delta:
        Real evaluation points; both ``base`` and ``base + delta`` must lie
        in the real domain of ``lst_eval``.

    Returns
    -------
    float
        ``B*(base + delta) - B*(base)``.
    """
    if delta == 0.0:
        return 0.0
    data = classify_lst(model)
    if math.isfinite(data.r_bstar):
        for s in (base, base + delta):
            if isinstance(model, Pareto):
                if s < 0.0:
                    raise DomainError(f"s={s!r} is left of the LST singularity at 0")
            elif s <= -data.r_bstar:
                raise DomainError(
                    f"s={s!r} is not strictly right of the LST singularity at {-data.r_bstar}"
                )
    if isinstance(model, Erlang) and model.shape == 1:
        model = Exponential(model.mu)

    match model:
        case Exponential(mu=mu):
            return -mu * delta / ((mu + base + delta) * (mu + base))
        case Erlang(shape=k, mu=mu) | GammaShape(shape=k, mu=mu):
            w0 = math.exp(-float(k) * math.log1p(base / mu))
            return w0 * math.expm1(-float(k) * math.log1p(delta / (mu + base)))
        case HyperExponential(weights=ws, rates=rs):
            return sum(
                w * -r * delta / ((r + base + delta) * (r + base))
                for w, r in zip(ws, rs)
            )
        case Deterministic(duration=d):
            try:
                return math.exp(-d * base) * math.expm1(-d * delta)
            except OverflowError:
                return math.inf if delta < 0.0 else -math.inf
        case PowerLawCutoff(p=p, cutoff_rate=rc, x0=x0):
            with mpmath.workdps(_GAMMAINC_DPS + 10):
                shb = mpmath.mpf(base) + rc
                shd = mpmath.mpf(base) + delta + rc
                c = mpmath.mpf(rc) ** (1.0 - p) / mpmath.gammainc(1.0 - p, x0 * mpmath.mpf(rc))
                fb = shb ** (p - 1.0) * mpmath.gammainc(1.0 - p, x0 * shb)
                fd = shd ** (p - 1.0) * mpmath.gammainc(1.0 - p, x0 * shd)
                return float(c * (fd - fb))
        case Pareto(p=p, x0=x0):
            with mpmath.workdps(_GAMMAINC_DPS + 10):

                def point(s: float):
                    if s == 0.0:
                        return mpmath.mpf(1)
                    sm = mpmath.mpf(s)
                    return p * mpmath.mpf(x0) ** p * sm**p * mpmath.gammainc(-p, x0 * sm)

                return float(point(base + delta) - point(base))
        case _:
            raise UnsupportedKind(f"unknown service model {model!r}")


def classify_lst(model: ServiceModel) -> LstSingularData:
    """Locate the dominant singularity of ``B*`` and its local expansion data.

    Type2/Type3 kinds get the endpoint expansion (coefficient, exponent and
    the finite derivatives at the singularity); GammaShape gets its branch
    data; pole-type kinds get location only.
    """
    match model:
        case Exponential(mu=mu):
            return LstSingularData(r_bstar=mu, type_tag="Type1")
        case Erlang(mu=mu):
            return LstSingularData(r_bstar=mu, type_tag="Type1")
        case HyperExponential(rates=rs):
            return LstSingularData(r_bstar=min(rs), type_tag="Type1")
        case Deterministic():
            return LstSingularData(r_bstar=math.inf, type_tag="Type1")
        case GammaShape(shape=k, mu=mu):
            return LstSingularData(
                r_bstar=mu, type_tag="Type1", alpha_bstar=k, c_bstar=mu**k
            )
        case PowerLawCutoff(p=p, cutoff_rate=rc, x0=x0):
            c = _plc_norm(p, rc, x0)
            nreg = math.floor(p - 1.0)
            derivs = tuple(
                (-1) ** j * c * x0 ** (j - p + 1.0) / (p - j - 1.0) for j in range(nreg + 1)
            )
            return LstSingularData(
                r_bstar=rc,
                type_tag="Type2",
                alpha_bstar=1.0 - p,
                c_bstar=c * math.gamma(1.0 - p),
                regular_derivs=derivs,
            )
        case Pareto(p=p, x0=x0):
            nreg = math.floor(p)
            derivs = tuple(
                (-1) ** j * p * x0**j / (p - j) for j in range(nreg + 1)
            )
            return LstSingularData(
                r_bstar=0.0,
                type_tag="Type3",
                alpha_bstar=-p,
                c_bstar=p * math.gamma(-p) * x0**p,
                regular_derivs=derivs,
            )
    raise UnsupportedKind(f"unknown service model {model!r}")


def endpoint_expansion(model: ServiceModel) -> LstSingularData:
    """classify_lst restricted to kinds with a finite-valued LST singularity.

    Raises UnsupportedKind for Type1 kinds (no endpoint expansion exists;
    Deterministic in particular has an entire LST).
    """
    data = classify_lst(model)
    if data.type_tag == "Type1":
        raise UnsupportedKind(
            f"{type(model).__name__} has no finite endpoint expansion"
        )
    return data


def density(model: ServiceModel, x: float) -> float:
    """Service-time density at ``x`` (kinds with a density only)."""
    match model:
        case Exponential(mu=mu):
            return mu * math.exp(-mu * x) if x >= 0 else 0.0
        case Erlang(shape=k, mu=mu):
            if x < 0:
                return 0.0
            return mu**k * x ** (k - 1) * math.exp(-mu * x) / math.factorial(k - 1)
        case HyperExponential(weights=ws, rates=rs):
            if x < 0:
                return 0.0
            return sum(w * r * math.exp(-r * x) for w, r in zip(ws, rs))
        case GammaShape(shape=k, mu=mu):
            if x <= 0:
                return 0.0
            return mu**k * x ** (k - 1) * math.exp(-mu * x) / math.gamma(k)
        case PowerLawCutoff(p=p, cutoff_rate=rc, x0=x0):
            if x < x0:
                return 0.0
            return _plc_norm(p, rc, x0) * x ** (-p) * math.exp(-rc * x)
        case Pareto(p=p, x0=x0):
            if x < x0:
                return 0.0
            return p * x0**p * x ** (-p - 1.0)
    raise UnsupportedKind(f"{type(model).__name__} has no density")


def _ratio_power_derivs(k: float, mu: float, s: complex | float, order: int) -> list:
    # derivatives of (mu/(mu+s))**k via the rising factorial k(k+1)...(k+j-1)
    base = mu + s
    vals = []
    rising = 1.0
    for j in range(order + 1):
        vals.append((-1) ** j * rising * mu**k * base ** (-(k + j)))
        rising *= k + j
    return vals


def _deterministic_derivs(d: float, s: complex | float, order: int) -> list:
    try:
        e = cmath.exp(-s * d) if isinstance(s, complex) else math.exp(-float(s) * d)
    except OverflowError:
        # deep real-axis bracketing only; signs still drive bisection correctly
        e = math.inf
    return [(-d) ** j * e for j in range(order + 1)]


def _pareto_derivs(p: float, x0: float, s: complex | float, order: int) -> list:
    if s == 0:
        vals: list[float] = []
        for j in range(order + 1):
            if j < p:
                vals.append((-1) ** j * p * x0**j / (p - j))
            else:
                vals.append((-1) ** j * math.inf)
        return vals
    return [
        (-1) ** j * p * x0**p * s ** (p - j) * _upper_gamma(j - p, x0 * s)
        for j in range(order + 1)
    ]


def _plc_norm(p: float, rc: float, x0: float) -> float:
    """Normalizing constant of the cut-off power-law density."""
    return rc ** (1.0 - p) / _upper_gamma(1.0 - p, x0 * rc)


def _upper_gamma(a: float, y: complex | float):
    """Upper incomplete gamma integral with (possibly negative) real order.

    Evaluated in working-precision arithmetic because the fixed-precision
    special-function libraries do not cover negative non-integer orders.
    """
    with mpmath.workdps(_GAMMAINC_DPS):
        g = mpmath.gammainc(a, y)
        return complex(g) if isinstance(y, complex) else float(g)
