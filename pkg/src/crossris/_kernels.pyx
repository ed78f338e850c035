# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: smoothed max-min phase ascent and the rate-LP bisection.

Must stay step-for-step identical to ``_kernels_py``.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, sqrt, INFINITY

cnp.import_array()


cdef inline double _abs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef void _evaluate(const double complex[:, ::1] A, const double complex[:, :, ::1] F,
                    const double[::1] C, const double complex[::1] phi,
                    double[::1] f, double complex[:, ::1] s) noexcept nogil:
    cdef Py_ssize_t K = A.shape[0], R = F.shape[1], N = A.shape[1]
    cdef Py_ssize_t k, r, n
    cdef double complex lin, acc
    cdef double quad
    for k in range(K):
        lin = 0
        for n in range(N):
            lin = lin + A[k, n] * phi[n]
        quad = 0.0
        for r in range(R):
            acc = 0
            for n in range(N):
                acc = acc + F[k, r, n] * phi[n]
            s[k, r] = acc
            quad += _abs2(acc)
        f[k] = 2.0 * lin.real - quad + C[k]


cdef double _smoothed(double[::1] f, double lam, double[::1] pi) noexcept nogil:
    cdef Py_ssize_t k, K = f.shape[0]
    cdef double m = INFINITY, tot = 0.0
    for k in range(K):
        if f[k] < m:
            m = f[k]
    for k in range(K):
        pi[k] = exp(-lam * (f[k] - m))
        tot += pi[k]
    for k in range(K):
        pi[k] /= tot
    return m - log(tot) / lam


cdef double _fmin(double[::1] f) noexcept nogil:
    cdef Py_ssize_t k
    cdef double m = INFINITY
    for k in range(f.shape[0]):
        if f[k] < m:
            m = f[k]
    return m


def maxmin_ascent(const double complex[:, ::1] A, const double complex[:, :, ::1] F,
                  const double[::1] C, const double complex[::1] phi0,
                  const double[::1] lambdas, int max_iters, double step0, double tol):
    """Accelerated projected ascent on -(1/lam) log sum_k exp(-lam f_k) over |phi_n| <= 1.

    B_k = F_k^H F_k. Each step backtracks on the sufficient-increase test of
    projected gradient methods, starting from twice the last accepted step.
    Momentum is kept only while the smoothed value does not drop, so the
    recorded trace is nondecreasing within a stage. Returns (best phi by
    true min_k f_k, that min, smoothed trace, stage index per trace entry).
    """
    cdef Py_ssize_t K = A.shape[0], R = F.shape[1], N = A.shape[1]
    cdef Py_ssize_t S = lambdas.shape[0]
    cdef Py_ssize_t k, r, n, st, it, bt
    cdef double lam, gx, gy, gz, t, tn, step, trial, mag, best, zmin, lin, dist2, mom
    cdef double complex acc, delta
    cdef bint done

    x_np = np.array(phi0, dtype=np.complex128)
    best_np = x_np.copy()
    cdef double complex[::1] x = x_np
    cdef double complex[::1] bestphi = best_np
    cdef double complex[::1] y = np.empty(N, dtype=np.complex128)
    cdef double complex[::1] z = np.empty(N, dtype=np.complex128)
    cdef double complex[::1] d = np.empty(N, dtype=np.complex128)
    cdef double[::1] f = np.empty(K)
    cdef double[::1] fz = np.empty(K)
    cdef double[::1] piy = np.empty(K)
    cdef double[::1] piz = np.empty(K)
    cdef double complex[:, ::1] sy = np.empty((K, max(R, 1)), dtype=np.complex128)
    cdef double complex[:, ::1] sz = np.empty((K, max(R, 1)), dtype=np.complex128)
    trace_np = np.empty(S * max_iters)
    stage_np = np.empty(S * max_iters, dtype=np.int64)
    cdef double[::1] trace = trace_np
    cdef long long[::1] stage = stage_np
    cdef Py_ssize_t nt = 0

    _evaluate(A, F, C, x, f, sy)
    best = _fmin(f)

    for st in range(S):
        lam = lambdas[st]
        for n in range(N):
            x[n] = bestphi[n]
            y[n] = bestphi[n]
        _evaluate(A, F, C, x, f, sy)
        gx = _smoothed(f, lam, piy)
        gy = gx
        t = 1.0
        step = step0
        for it in range(max_iters):
            for n in range(N):
                acc = 0
                for k in range(K):
                    acc = acc + piy[k] * A[k, n].conjugate()
                    for r in range(R):
                        acc = acc - piy[k] * F[k, r, n].conjugate() * sy[k, r]
                d[n] = acc
            trial = 2.0 * step
            for bt in range(60):
                lin = 0.0
                dist2 = 0.0
                for n in range(N):
                    z[n] = y[n] + trial * d[n]
                    mag = sqrt(_abs2(z[n]))
                    if mag > 1.0:
                        z[n] = z[n] / mag
                    delta = z[n] - y[n]
                    lin += 2.0 * (d[n].conjugate() * delta).real
                    dist2 += _abs2(delta)
                _evaluate(A, F, C, z, fz, sz)
                gz = _smoothed(fz, lam, piz)
                if gz >= gy + lin - dist2 / trial:
                    break
                trial = trial * 0.5
            step = trial
            zmin = _fmin(fz)
            if zmin > best:
                best = zmin
                for n in range(N):
                    bestphi[n] = z[n]
            if gz >= gx:
                tn = 0.5 * (1.0 + sqrt(1.0 + 4.0 * t * t))
                mom = (t - 1.0) / tn
                for n in range(N):
                    y[n] = z[n] + mom * (z[n] - x[n])
                    x[n] = z[n]
                done = gz - gx <= tol * (abs(gz) + 1e-300)
                gx = gz
                t = tn
                trace[nt] = gz
                stage[nt] = st
                nt += 1
                if done:
                    break
            else:
                # Momentum overshot: restart from the last accepted point.
                if t == 1.0:
                    break
                for n in range(N):
                    y[n] = x[n]
                t = 1.0
            _evaluate(A, F, C, y, f, sy)
            gy = _smoothed(f, lam, piy)
    return best_np, best, trace_np[:nt].copy(), stage_np[:nt].copy()


def lp_bisect_grid(const double[::1] caps, const double[::1] T1, const double[::1] T2, int iters):
    """Largest t feasible for the delay-constrained rate LP at each (T1, T2)."""
    cdef Py_ssize_t g, G = T1.shape[0]
    cdef int it
    cdef double c1u = caps[0], c2u = caps[1], c1d = caps[2], c2d = caps[3]
    cdef double lo, hi, mid, t1, t2
    out_np = np.empty(G)
    cdef double[::1] out = out_np
    for g in range(G):
        t1 = T1[g]
        t2 = T2[g]
        lo = 0.0
        hi = c1u * t2
        if c2u * t1 < hi:
            hi = c2u * t1
        if c1d * t1 < hi:
            hi = c1d * t1
        if c2d * t2 < hi:
            hi = c2d * t2
        if hi <= 0.0:
            out[g] = 0.0
            continue
        if _feasible(hi, c1u, c2u, c1d, c2d, t1, t2):
            out[g] = hi
            continue
        for it in range(iters):
            mid = 0.5 * (lo + hi)
            if _feasible(mid, c1u, c2u, c1d, c2d, t1, t2):
                lo = mid
            else:
                hi = mid
        out[g] = lo
    return out_np


cdef inline bint _feasible(double t, double c1u, double c2u, double c1d, double c2d,
                           double t1, double t2) noexcept nogil:
    # Lowest uplink rates meeting the target against the highest downlink rates.
    cdef double r1u = t / t2, r2u = t / t1
    if r1u > c1u or r2u > c2u or t > c1d * t1 or t > c2d * t2:
        return False
    return r1u * t1 <= c2d * t2 and r2u * t2 <= c1d * t1
