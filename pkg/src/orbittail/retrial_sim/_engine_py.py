"""Pure-Python discrete-event engine for the priority retrial queue.

The compiled twin in ``_engine_cy.pyx`` implements the identical event loop
and draw protocol, and both consume raw doubles from the same four Philox
substreams (class-1 arrivals, class-2 arrivals, retrials, service times), so
the engines produce bit-identical sample paths and occupancy arrays.

Event codes: 0 service completion, 1 class-1 arrival, 2 class-2 arrival,
3 retrial. Simultaneous events are resolved in that order.

Draw protocol (must not change without changing the compiled twin):

* exponential increments are ``-log1p(-u)/rate``;
* the next class-1 (class-2) interarrival is drawn from stream 0 (1) at the
  moment the previous arrival fires;
* the retrial clock is drawn from stream 2 only when a service completion
  leaves the server idle with a nonempty orbit (the clock is exponential
  with rate ``k*nu``, which is the race of ``k`` per-customer clocks, and
  ``nu = inf`` arms it at the current instant without consuming a draw);
* service times are drawn from stream 3 at service start, via
  :func:`draw_service`.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["run", "draw_service"]

_BUF = 4096


class _Stream:
    """Buffered scalar uniforms drawn from one bit generator."""

    __slots__ = ("_gen", "_buf", "_i")

    def __init__(self, bitgen) -> None:
        self._gen = np.random.Generator(bitgen)
        self._buf = self._gen.random(_BUF)
        self._i = 0

    def u(self) -> float:
        i = self._i
        if i == _BUF:
            self._buf = self._gen.random(_BUF)
            i = 0
        self._i = i + 1
        return float(self._buf[i])


def draw_service(kind, sp, u):
    """One service-time draw; ``u()`` yields uniforms in [0, 1).

    ``kind`` and ``sp`` are the packed form produced by the parent package:
    0 exponential [mu], 1 erlang [shape, mu], 2 hyperexponential
    [m, w_1..w_m, r_1..r_m], 3 deterministic [d], 4 gamma [shape, mu],
    5 power law with cutoff [p, cutoff_rate, x0], 6 pareto [p, x0].
    """
    if kind == 0:
        return -math.log1p(-u()) / sp[0]
    if kind == 1:
        total = 0.0
        for _ in range(int(sp[0])):
            total += -math.log1p(-u())
        return total / sp[1]
    if kind == 2:
        m = int(sp[0])
        v = u()
        pick = m - 1
        acc = 0.0
        for j in range(m):
            acc += sp[1 + j]
            if v < acc:
                pick = j
                break
        return -math.log1p(-u()) / sp[1 + m + pick]
    if kind == 3:
        return sp[0]
    if kind == 4:
        shape = sp[0]
        mu = sp[1]
        n = int(shape)
        frac = shape - n
        total = 0.0
        if frac > 0.0:
            # fractional part via the Ahrens-Dieter GS rejection scheme
            scale = 1.0 + frac * math.exp(-1.0)
            while True:
                p = scale * u()
                v = u()
                if p <= 1.0:
                    x = p ** (1.0 / frac)
                    if v <= math.exp(-x):
                        total = x
                        break
                else:
                    x = -math.log((scale - p) / frac)
                    if v <= x ** (frac - 1.0):
                        total = x
                        break
        for _ in range(n):
            total += -math.log1p(-u())
        return total / mu
    if kind == 5:
        # accept-reject against a shifted exponential envelope; the target
        # density x**(-p) * exp(-rc*x) on [x0, inf) gives acceptance
        # probability (x0/x)**p at an envelope draw x
        p = sp[0]
        rc = sp[1]
        x0 = sp[2]
        while True:
            x = x0 - math.log1p(-u()) / rc
            if u() <= (x0 / x) ** p:
                return x
    if kind == 6:
        return sp[1] * math.exp(-math.log1p(-u()) / sp[0])
    raise ValueError(f"unknown service kind code {kind}")


def run(lam1, lam2, nu, kind, sp, warmup, per_batch, batches, n_cap,
        orbit_cap, bitgens, trace=None):
    """Run ``warmup + per_batch*batches`` events; accumulate after warm-up.

    Returns ``(occ, batch_time, busy_time, arr2, arr2_busy, drift)`` where
    ``occ[b, s, n]`` is the time batch ``b`` spent with server state ``s``
    (0 idle, 1 busy) and orbit size ``n <= n_cap``, ``busy_time`` includes
    time spent above ``n_cap``, ``arr2``/``arr2_busy`` count measured
    class-2 arrivals (total / those finding the server busy), and ``drift``
    is 0 or the orbit size that exceeded ``orbit_cap`` (the loop stops
    there). ``trace``, if a list, receives ``(code, t, busy, q1, k, t_svc)``
    after every applied event.
    """
    occ = [0.0] * (batches * 2 * (n_cap + 1))
    batch_time = [0.0] * batches
    busy_time = [0.0] * batches
    width = n_cap + 1
    s1, s2, sr, ss = (_Stream(b) for b in bitgens)
    inf = math.inf
    t = 0.0
    busy = 0
    q1 = 0
    k = 0
    t_arr1 = -math.log1p(-s1.u()) / lam1 if lam1 > 0.0 else inf
    t_arr2 = -math.log1p(-s2.u()) / lam2 if lam2 > 0.0 else inf
    t_svc = inf
    t_retr = inf
    arr2 = 0
    arr2_busy = 0
    drift = 0
    total = warmup + per_batch * batches
    for i in range(total):
        tn = t_svc
        code = 0
        if t_arr1 < tn:
            tn = t_arr1
            code = 1
        if t_arr2 < tn:
            tn = t_arr2
            code = 2
        if t_retr < tn:
            tn = t_retr
            code = 3
        if i >= warmup:
            dt = tn - t
            b = (i - warmup) // per_batch
            batch_time[b] += dt
            if busy:
                busy_time[b] += dt
            if k <= n_cap:
                occ[(b * 2 + busy) * width + k] += dt
        t = tn
        if code == 0:
            if q1 > 0:
                q1 -= 1
                t_svc = t + draw_service(kind, sp, ss.u)
            else:
                busy = 0
                t_svc = inf
                if k > 0:
                    if nu == inf:
                        t_retr = t
                    else:
                        t_retr = t + (-math.log1p(-sr.u()) / (k * nu))
        elif code == 1:
            t_arr1 = t + (-math.log1p(-s1.u()) / lam1)
            if busy:
                q1 += 1
            else:
                busy = 1
                t_retr = inf
                t_svc = t + draw_service(kind, sp, ss.u)
        elif code == 2:
            t_arr2 = t + (-math.log1p(-s2.u()) / lam2)
            if i >= warmup:
                arr2 += 1
                if busy:
                    arr2_busy += 1
            if busy:
                k += 1
                if k > orbit_cap:
                    drift = k
                    break
            else:
                busy = 1
                t_retr = inf
                t_svc = t + draw_service(kind, sp, ss.u)
        else:
            k -= 1
            busy = 1
            t_retr = inf
            t_svc = t + draw_service(kind, sp, ss.u)
        if trace is not None:
            trace.append((code, t, busy, q1, k, t_svc))
    occ_arr = np.array(occ).reshape(batches, 2, width)
    return (occ_arr, np.array(batch_time), np.array(busy_time),
            arr2, arr2_busy, drift)
