"""Discrete-event simulation of the two-class priority retrial queue.

This is a model-level oracle: it simulates the queue itself (class-1 FCFS
priority line, class-2 orbit with per-customer exponential retrials at rate
``nu``, non-preemptive single server) and reports time-average occupancy
probabilities for small orbit sizes, with batch-means confidence intervals.
It shares no formulas with the analytic modules beyond the stability bound,
so agreement between the two is evidence for both.

Two interchangeable engines exist: a compiled Cython kernel and a pure
Python one. Both consume identical Philox substreams and produce
bit-identical results; the compiled engine is selected at import time when
available unless the environment variable ``ORBITTAIL_PURE_PYTHON=1`` forces
the pure one. ``ENGINE`` names the selection.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as _student_t

from ..errors import DomainError, UnstableDrift, UnsupportedKind
from ..implicit_map import ModelParams
from ..service_models import (
    Deterministic,
    Erlang,
    Exponential,
    GammaShape,
    HyperExponential,
    Pareto,
    PowerLawCutoff,
    ServiceModel,
    mean_service_time,
)
from . import _engine_py

if os.environ.get("ORBITTAIL_PURE_PYTHON") == "1":
    _ENGINE = _engine_py
    ENGINE = "pure"
else:
    try:
        from . import _engine_cy as _ENGINE

        ENGINE = "compiled"
    except ImportError:
        _ENGINE = _engine_py
        ENGINE = "pure"

__all__ = [
    "SimConfig",
    "EmpiricalDist",
    "simulate",
    "sample_service",
    "ENGINE",
    "ORBIT_CAP",
]

ORBIT_CAP = 1_000_000


@dataclass(frozen=True)
class SimConfig:
    """One simulation run: model, seed, and run lengths.

    ``warmup_events`` events are discarded before measurement starts;
    ``measure_events`` (rounded down to a multiple of ``batches``) are then
    split into equal-event batches for batch-means confidence intervals.
    The default warm-up is generous for moderate loads; raise it for loads
    near 1 or heavy-tailed service, where relaxation is slow.
    """

    params: ModelParams
    model: ServiceModel
    seed: int
    warmup_events: int = 1_000_000
    measure_events: int = 10_000_000
    batches: int = 20

    def __post_init__(self) -> None:
        if not (0 <= self.seed < 2**64):
            raise DomainError(f"seed must be a 64-bit integer, got {self.seed}")
        if self.batches < 2:
            raise DomainError(f"need at least 2 batches, got {self.batches}")
        if self.warmup_events < 0:
            raise DomainError("warmup_events must be nonnegative")
        if self.measure_events < 100 * self.batches:
            raise DomainError(
                f"measure_events = {self.measure_events} is below "
                f"100 * batches = {100 * self.batches}"
            )
        b = mean_service_time(self.model)
        if abs(self.params.b - b) > 1e-9 * max(1.0, abs(b)):
            raise DomainError(
                f"params.b = {self.params.b} does not match the model's "
                f"mean service time {b}"
            )


@dataclass(frozen=True)
class EmpiricalDist:
    """Time-average orbit-size probabilities with 95% half-widths.

    ``q_emp[n]`` estimates P(server idle, n in orbit), ``r_emp[n]``
    P(server busy, n in orbit), ``p2_emp = q_emp + r_emp`` the orbit-size
    marginal; all arrays cover orbit sizes ``0..n_cap`` and time spent above
    ``n_cap`` is excluded (so each array sums to slightly below its marginal
    mass). ``arrivals2``/``arrivals2_busy`` count measured class-2 arrivals
    and those that found the server busy.
    """

    q_emp: tuple[float, ...]
    q_hw: tuple[float, ...]
    r_emp: tuple[float, ...]
    r_hw: tuple[float, ...]
    p2_emp: tuple[float, ...]
    p2_hw: tuple[float, ...]
    utilization: float
    utilization_hw: float
    arrivals2: int
    arrivals2_busy: int
    total_time: float

    def __post_init__(self) -> None:
        n = len(self.q_emp)
        arrays = (self.q_emp, self.q_hw, self.r_emp, self.r_hw,
                  self.p2_emp, self.p2_hw)
        if any(len(a) != n for a in arrays) or n == 0:
            raise DomainError("empirical arrays must be nonempty and equally long")
        if any(v < 0 for a in arrays for v in a):
            raise DomainError("probabilities and half-widths must be nonnegative")
        if not 0 <= self.arrivals2_busy <= self.arrivals2:
            raise DomainError("inconsistent class-2 arrival counters")

    @property
    def pasta_busy_fraction(self) -> float:
        """Fraction of class-2 arrivals that found the server busy."""
        if self.arrivals2 == 0:
            return math.nan
        return self.arrivals2_busy / self.arrivals2

    def to_csv(self) -> str:
        """Render as CSV with columns n,q_emp,q_hw,r_emp,r_hw,p2_emp,p2_hw."""
        lines = ["n,q_emp,q_hw,r_emp,r_hw,p2_emp,p2_hw"]
        for n in range(len(self.q_emp)):
            lines.append(
                f"{n},{self.q_emp[n]!r},{self.q_hw[n]!r},"
                f"{self.r_emp[n]!r},{self.r_hw[n]!r},"
                f"{self.p2_emp[n]!r},{self.p2_hw[n]!r}"
            )
        return "\n".join(lines) + "\n"


def _pack_model(model: ServiceModel) -> tuple[int, np.ndarray]:
    # kind codes shared with both engines; see _engine_py.draw_service
    match model:
        case Exponential(mu=mu):
            return 0, np.array([mu])
        case Erlang(shape=k, mu=mu):
            return 1, np.array([float(k), mu])
        case HyperExponential(weights=ws, rates=rs):
            return 2, np.array([float(len(ws)), *ws, *rs])
        case Deterministic(duration=d):
            return 3, np.array([d])
        case GammaShape(shape=k, mu=mu):
            return 4, np.array([k, mu])
        case PowerLawCutoff(p=p, cutoff_rate=rc, x0=x0):
            return 5, np.array([p, rc, x0])
        case Pareto(p=p, x0=x0):
            return 6, np.array([p, x0])
    raise UnsupportedKind(f"cannot sample service times for {model!r}")


def _streams(seed: int) -> list:
    # one Philox substream per event type: arr1, arr2, retrial, service
    return [
        np.random.Philox(counter=0, key=np.array([seed, tag], dtype=np.uint64))
        for tag in range(4)
    ]


def sample_service(model: ServiceModel, rng: np.random.Generator) -> float:
    """Draw one service time from ``model`` using ``rng``.

    Exponential families use inverse-CDF transforms; Pareto is inverse-CDF;
    the power law with cutoff uses acceptance-rejection against a shifted
    exponential envelope; fractional gamma shapes use the Ahrens-Dieter GS
    scheme. Consumes ``rng.random()`` uniforms only.
    """
    kind, sp = _pack_model(model)
    return float(_engine_py.draw_service(kind, sp, rng.random))


def simulate(cfg: SimConfig, n_cap: int = 64) -> EmpiricalDist:
    """Simulate the queue and estimate the orbit distribution up to ``n_cap``.

    Runs ``cfg.warmup_events`` discarded events, then measures time-weighted
    occupancy over equal-event batches. Point estimates are means of batch
    time-averages; half-widths are 95% Student-t intervals over batches.

    Raises
    ------
    UnstableDrift
        If the orbit exceeds ``ORBIT_CAP`` customers (diagnostic for an
        effectively unstable or runaway parameter set).
    DomainError
        For invalid ``n_cap``.
    """
    if n_cap < 1:
        raise DomainError(f"n_cap must be at least 1, got {n_cap}")
    if isinstance(cfg.model, (Pareto, PowerLawCutoff)):
        warnings.warn(
            "heavy-tailed service relaxes slowly; empirical orbit "
            "probabilities may carry warm-up bias",
            RuntimeWarning,
            stacklevel=2,
        )
    kind, sp = _pack_model(cfg.model)
    per_batch = cfg.measure_events // cfg.batches
    occ, batch_time, busy_time, arr2, arr2_busy, drift = _ENGINE.run(
        cfg.params.lambda1, cfg.params.lambda2, cfg.params.nu,
        kind, sp, cfg.warmup_events, per_batch, cfg.batches,
        n_cap, ORBIT_CAP, _streams(cfg.seed),
    )
    if drift:
        raise UnstableDrift(
            f"orbit size reached {drift} (cap {ORBIT_CAP}); the sample path "
            "is drifting and the time averages would be meaningless"
        )
    tcrit = float(_student_t.ppf(0.975, cfg.batches - 1))
    root_b = math.sqrt(cfg.batches)
    x_q = occ[:, 0, :] / batch_time[:, None]
    x_r = occ[:, 1, :] / batch_time[:, None]
    x_p2 = x_q + x_r
    util_b = busy_time / batch_time

    def centred(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return x.mean(axis=0), tcrit * x.std(axis=0, ddof=1) / root_b

    q_emp, q_hw = centred(x_q)
    r_emp, r_hw = centred(x_r)
    p2_emp, p2_hw = centred(x_p2)
    util, util_hw = centred(util_b)
    return EmpiricalDist(
        q_emp=tuple(float(v) for v in q_emp),
        q_hw=tuple(float(v) for v in q_hw),
        r_emp=tuple(float(v) for v in r_emp),
        r_hw=tuple(float(v) for v in r_hw),
        p2_emp=tuple(float(v) for v in p2_emp),
        p2_hw=tuple(float(v) for v in p2_hw),
        utilization=float(util),
        utilization_hw=float(util_hw),
        arrivals2=arr2,
        arrivals2_busy=arr2_busy,
        total_time=float(batch_time.sum()),
    )
