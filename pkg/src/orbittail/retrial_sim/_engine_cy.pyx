# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_engine_py``.

Identical event loop and draw protocol; consumes the same Philox substreams
through the ``bitgen_t`` capsule interface, so sample paths are bit-identical
to the pure engine's. See the pure module's docstring for the protocol.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY, exp, isinf, log, log1p, pow

from numpy.random cimport bitgen_t

__all__ = ["run"]


cdef inline double _u(bitgen_t *bg) noexcept nogil:
    return bg.next_double(bg.state)


cdef double _service(bitgen_t *bg, int kind, double[::1] sp) noexcept nogil:
    cdef double total, v, acc, p, x, shape, mu, frac, scale, rc, x0
    cdef int m, j, n, pick
    if kind == 0:
        return -log1p(-_u(bg)) / sp[0]
    if kind == 1:
        total = 0.0
        n = <int> sp[0]
        for j in range(n):
            total += -log1p(-_u(bg))
        return total / sp[1]
    if kind == 2:
        m = <int> sp[0]
        v = _u(bg)
        pick = m - 1
        acc = 0.0
        for j in range(m):
            acc += sp[1 + j]
            if v < acc:
                pick = j
                break
        return -log1p(-_u(bg)) / sp[1 + m + pick]
    if kind == 3:
        return sp[0]
    if kind == 4:
        shape = sp[0]
        mu = sp[1]
        n = <int> shape
        frac = shape - n
        total = 0.0
        if frac > 0.0:
            scale = 1.0 + frac * exp(-1.0)
            while True:
                p = scale * _u(bg)
                v = _u(bg)
                if p <= 1.0:
                    x = pow(p, 1.0 / frac)
                    if v <= exp(-x):
                        total = x
                        break
                else:
                    x = -log((scale - p) / frac)
                    if v <= pow(x, frac - 1.0):
                        total = x
                        break
        for j in range(n):
            total += -log1p(-_u(bg))
        return total / mu
    if kind == 5:
        p = sp[0]
        rc = sp[1]
        x0 = sp[2]
        while True:
            x = x0 - log1p(-_u(bg)) / rc
            if _u(bg) <= pow(x0 / x, p):
                return x
    # kind == 6; the caller validates kind codes before the loop starts
    return sp[1] * exp(-log1p(-_u(bg)) / sp[0])


def run(double lam1, double lam2, double nu, int kind, double[::1] sp,
        long long warmup, long long per_batch, long long batches,
        int n_cap, long long orbit_cap, bitgens):
    """Event loop; see the pure twin for the return-value description."""
    occ_arr = np.zeros((batches, 2, n_cap + 1))
    bt_arr = np.zeros(batches)
    busy_arr = np.zeros(batches)
    cdef double[:, :, ::1] occ = occ_arr
    cdef double[::1] batch_time = bt_arr
    cdef double[::1] busy_time = busy_arr
    cdef bitgen_t *bg1 = <bitgen_t *> PyCapsule_GetPointer(bitgens[0].capsule, "BitGenerator")
    cdef bitgen_t *bg2 = <bitgen_t *> PyCapsule_GetPointer(bitgens[1].capsule, "BitGenerator")
    cdef bitgen_t *bgr = <bitgen_t *> PyCapsule_GetPointer(bitgens[2].capsule, "BitGenerator")
    cdef bitgen_t *bgs = <bitgen_t *> PyCapsule_GetPointer(bitgens[3].capsule, "BitGenerator")
    cdef double t = 0.0
    cdef double tn, dt, t_arr1, t_arr2, t_svc, t_retr
    cdef int busy = 0
    cdef int code
    cdef long long q1 = 0, k = 0, arr2 = 0, arr2_busy = 0, drift = 0
    cdef long long i, b, total
    t_arr1 = -log1p(-_u(bg1)) / lam1 if lam1 > 0.0 else INFINITY
    t_arr2 = -log1p(-_u(bg2)) / lam2 if lam2 > 0.0 else INFINITY
    t_svc = INFINITY
    t_retr = INFINITY
    total = warmup + per_batch * batches
    with nogil:
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
                    occ[b, busy, k] += dt
            t = tn
            if code == 0:
                if q1 > 0:
                    q1 -= 1
                    t_svc = t + _service(bgs, kind, sp)
                else:
                    busy = 0
                    t_svc = INFINITY
                    if k > 0:
                        if isinf(nu):
                            t_retr = t
                        else:
                            t_retr = t + (-log1p(-_u(bgr)) / (k * nu))
            elif code == 1:
                t_arr1 = t + (-log1p(-_u(bg1)) / lam1)
                if busy:
                    q1 += 1
                else:
                    busy = 1
                    t_retr = INFINITY
                    t_svc = t + _service(bgs, kind, sp)
            elif code == 2:
                t_arr2 = t + (-log1p(-_u(bg2)) / lam2)
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
                    t_retr = INFINITY
                    t_svc = t + _service(bgs, kind, sp)
            else:
                k -= 1
                busy = 1
                t_retr = INFINITY
                t_svc = t + _service(bgs, kind, sp)
    return occ_arr, bt_arr, busy_arr, int(arr2), int(arr2_busy), int(drift)
