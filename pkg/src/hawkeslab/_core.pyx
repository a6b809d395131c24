# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled thinning kernel.

Bitwise twin of ``hawkeslab._kernel_py``: same algorithm, same floating
point operations in the same order, fed by the same Philox stream through
numpy's bit-generator C API.  See _kernel_py's module docstring for the
algorithm; keep the two implementations in lockstep.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp, log, log1p, sqrt, pow
from libc.stdlib cimport malloc, realloc, free
from numpy.random cimport bitgen_t
from scipy.special.cython_special cimport ndtri

import numpy as np

from .rng import philox

BACKEND_NAME = "cython"


cdef inline double _nd(bitgen_t *rng) noexcept nogil:
    return rng.next_double(rng.state)


cdef double _draw_gamma_std(bitgen_t *rng, double shape) noexcept nogil:
    cdef double dd = shape - 1.0 / 3.0
    cdef double c = 1.0 / sqrt(9.0 * dd)
    cdef double z, w, v, u2, z2
    while True:
        z = ndtri(_nd(rng))
        w = 1.0 + c * z
        v = w * w * w
        if v <= 0.0:
            continue
        u2 = _nd(rng)
        z2 = z * z
        if u2 < 1.0 - 0.0331 * (z2 * z2):
            return dd * v
        if u2 == 0.0:
            return dd * v
        if log(u2) < 0.5 * z2 + dd * (1.0 - v + log(v)):
            return dd * v


cdef double _draw_mark(bitgen_t *rng, int kind, double p1, double p2) noexcept nogil:
    cdef double y, u, boost
    if kind == 0:
        return p1
    if kind == 1:
        while True:
            y = -log1p(-_nd(rng)) / p1
            if y > 0.0:
                return y
    while True:
        if p1 < 1.0:
            u = _nd(rng)
            while u <= 0.0:
                u = _nd(rng)
            boost = pow(u, 1.0 / p1)
            y = (_draw_gamma_std(rng, p1 + 1.0) * boost) / p2
        else:
            y = _draw_gamma_std(rng, p1) / p2
        if y > 0.0:
            return y


cdef inline void _record_checkpoint(
    int k, int d, double s, double t_ev,
    const double *mu, const double *beta, double *lam, double *integ, double *L, long long *H,
    double[:, ::1] ck_lambda, double[:, ::1] ck_L, long long[:, ::1] ck_H,
    double[:, ::1] ck_int,
) noexcept nogil:
    cdef double dt = s - t_ev
    cdef double e
    cdef int i
    for i in range(d):
        e = exp(-beta[i] * dt)
        ck_lambda[k, i] = mu[i] + (lam[i] - mu[i]) * e
        ck_int[k, i] = integ[i] + mu[i] * dt + (lam[i] - mu[i]) * (1.0 - e) / beta[i]
        ck_L[k, i] = L[i]
        ck_H[k, i] = H[i]


def run_thinning(mu, alpha, beta, mark_kind, mark_p1, mark_p2,
                 t0, horizon, lam0, key,
                 collect_events, checkpoints,
                 event_cap, refresh_interval, death_threshold):
    """Compiled counterpart of ``_kernel_py.run_thinning`` (same contract)."""
    cdef const double[::1] mu_v = np.ascontiguousarray(mu, dtype=np.float64)
    cdef const double[:, ::1] a_v = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef const double[::1] beta_v = np.ascontiguousarray(beta, dtype=np.float64)
    cdef const int[::1] kind_v = np.ascontiguousarray(mark_kind, dtype=np.int32)
    cdef const double[::1] p1_v = np.ascontiguousarray(mark_p1, dtype=np.float64)
    cdef const double[::1] p2_v = np.ascontiguousarray(mark_p2, dtype=np.float64)
    cdef const double[::1] lam0_v = np.ascontiguousarray(lam0, dtype=np.float64)
    if checkpoints is None:
        checkpoints = ()
    cdef const double[::1] ck_v = np.ascontiguousarray(checkpoints, dtype=np.float64)

    cdef int d = mu_v.shape[0]
    cdef int n_ck = ck_v.shape[0]
    cdef double t0_c = t0
    cdef double horizon_c = horizon
    cdef double refresh_c = refresh_interval
    cdef double death_c = death_threshold
    cdef long long cap_c = event_cap
    cdef bint collect = bool(collect_events)

    bit_gen = philox(key)
    capsule = bit_gen.capsule
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    ck_lambda_np = np.zeros((n_ck, d))
    ck_L_np = np.zeros((n_ck, d))
    ck_H_np = np.zeros((n_ck, d), dtype=np.int64)
    ck_int_np = np.zeros((n_ck, d))
    cdef double[:, ::1] ck_lambda = ck_lambda_np
    cdef double[:, ::1] ck_L = ck_L_np
    cdef long long[:, ::1] ck_H = ck_H_np
    cdef double[:, ::1] ck_int = ck_int_np

    cdef double *lam = <double *> malloc(d * sizeof(double))
    cdef double *lam_c = <double *> malloc(d * sizeof(double))
    cdef double *integ = <double *> malloc(d * sizeof(double))
    cdef double *L = <double *> malloc(d * sizeof(double))
    cdef long long *H = <long long *> malloc(d * sizeof(long long))
    cdef double *int_lambda = <double *> malloc(d * sizeof(double))
    cdef double *lam_end = <double *> malloc(d * sizeof(double))

    cdef size_t ev_cap = 1024
    cdef double *ev_t = <double *> malloc(ev_cap * sizeof(double))
    cdef int *ev_c = <int *> malloc(ev_cap * sizeof(int))
    cdef double *ev_y = <double *> malloc(ev_cap * sizeof(double))
    cdef double *tmp_d
    cdef int *tmp_i

    if (lam == NULL or lam_c == NULL or integ == NULL or L == NULL or H == NULL
            or int_lambda == NULL or lam_end == NULL or ev_t == NULL
            or ev_c == NULL or ev_y == NULL):
        free(lam); free(lam_c); free(integ); free(L); free(H)
        free(int_lambda); free(lam_end); free(ev_t); free(ev_c); free(ev_y)
        raise MemoryError()

    cdef int i, j, q
    cdef long long n_ev = 0, n_cand = 0
    cdef bint capped = False, oom = False
    cdef double t_ev, t_b, t_cur, bound, gap, t_c, tick, stop, tot, u2, cum, y, dt, e, s

    for i in range(d):
        lam[i] = lam0_v[i]
        integ[i] = 0.0
        L[i] = 0.0
        H[i] = 0

    t_ev = t0_c
    t_b = t0_c
    t_cur = t0_c
    bound = 0.0
    for i in range(d):
        bound += lam[i]
    q = 0

    with nogil:
        while True:
            if bound <= death_c:
                break
            gap = -log1p(-_nd(rng)) / bound
            while not gap > 0.0:
                gap = -log1p(-_nd(rng)) / bound
            t_c = t_cur + gap
            tick = t_b + refresh_c
            if tick < horizon_c:
                stop = tick
            else:
                stop = horizon_c
            if t_c > stop:
                if stop == tick and tick < horizon_c:
                    s = 0.0
                    for i in range(d):
                        s += mu_v[i] + (lam[i] - mu_v[i]) * exp(-beta_v[i] * (tick - t_ev))
                    bound = s
                    t_b = tick
                    t_cur = tick
                    continue
                break

            n_cand += 1
            tot = 0.0
            for i in range(d):
                lam_c[i] = mu_v[i] + (lam[i] - mu_v[i]) * exp(-beta_v[i] * (t_c - t_ev))
                tot += lam_c[i]
            u2 = _nd(rng) * bound
            if u2 < tot:
                j = d - 1
                cum = 0.0
                for i in range(d):
                    cum += lam_c[i]
                    if u2 < cum:
                        j = i
                        break
                y = _draw_mark(rng, kind_v[j], p1_v[j], p2_v[j])
                while q < n_ck and ck_v[q] < t_c:
                    _record_checkpoint(q, d, ck_v[q], t_ev, &mu_v[0], &beta_v[0],
                                       lam, integ, L, H,
                                       ck_lambda, ck_L, ck_H, ck_int)
                    q += 1
                dt = t_c - t_ev
                for i in range(d):
                    integ[i] += mu_v[i] * dt + (lam[i] - mu_v[i]) * (1.0 - exp(-beta_v[i] * dt)) / beta_v[i]
                    lam[i] = lam_c[i] + a_v[i, j] * y
                L[j] += y
                H[j] += 1
                n_ev += 1
                if collect:
                    if <size_t> n_ev > ev_cap:
                        ev_cap *= 2
                        tmp_d = <double *> realloc(ev_t, ev_cap * sizeof(double))
                        if tmp_d == NULL:
                            oom = True
                            break
                        ev_t = tmp_d
                        tmp_i = <int *> realloc(ev_c, ev_cap * sizeof(int))
                        if tmp_i == NULL:
                            oom = True
                            break
                        ev_c = tmp_i
                        tmp_d = <double *> realloc(ev_y, ev_cap * sizeof(double))
                        if tmp_d == NULL:
                            oom = True
                            break
                        ev_y = tmp_d
                    ev_t[n_ev - 1] = t_c
                    ev_c[n_ev - 1] = j
                    ev_y[n_ev - 1] = y
                t_ev = t_c
                t_b = t_c
                t_cur = t_c
                bound = 0.0
                for i in range(d):
                    bound += lam[i]
                if n_ev >= cap_c:
                    capped = True
                    break
            else:
                t_cur = t_c

        # finalize at the horizon
        while q < n_ck and ck_v[q] <= horizon_c:
            _record_checkpoint(q, d, ck_v[q], t_ev, &mu_v[0], &beta_v[0],
                               lam, integ, L, H,
                               ck_lambda, ck_L, ck_H, ck_int)
            q += 1
        dt = horizon_c - t_ev
        for i in range(d):
            e = exp(-beta_v[i] * dt)
            int_lambda[i] = integ[i] + mu_v[i] * dt + (lam[i] - mu_v[i]) * (1.0 - e) / beta_v[i]
            lam_end[i] = mu_v[i] + (lam[i] - mu_v[i]) * e

    try:
        if oom:
            raise MemoryError()
        times_np = np.empty(n_ev if collect else 0, dtype=np.float64)
        comps_np = np.empty(n_ev if collect else 0, dtype=np.int32)
        marks_np = np.empty(n_ev if collect else 0, dtype=np.float64)
        if collect and n_ev > 0:
            for i in range(<int> n_ev):
                times_np[i] = ev_t[i]
                comps_np[i] = ev_c[i]
                marks_np[i] = ev_y[i]
        L_np = np.empty(d)
        H_np = np.empty(d, dtype=np.int64)
        il_np = np.empty(d)
        le_np = np.empty(d)
        for i in range(d):
            L_np[i] = L[i]
            H_np[i] = H[i]
            il_np[i] = int_lambda[i]
            le_np[i] = lam_end[i]
        return {
            "times": times_np,
            "components": comps_np,
            "marks": marks_np,
            "n_events": int(n_ev),
            "n_candidates": int(n_cand),
            "L": L_np,
            "H": H_np,
            "int_lambda": il_np,
            "lambda_end": le_np,
            "ck_lambda": ck_lambda_np,
            "ck_L": ck_L_np,
            "ck_H": ck_H_np,
            "ck_int": ck_int_np,
            "capped": bool(capped),
        }
    finally:
        free(lam)
        free(lam_c)
        free(integ)
        free(L)
        free(H)
        free(int_lambda)
        free(lam_end)
        free(ev_t)
        free(ev_c)
        free(ev_y)
