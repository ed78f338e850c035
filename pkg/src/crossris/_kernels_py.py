"""Pure-numpy twins of the compiled kernels in ``_kernels.pyx``."""
import math

import numpy as np


def _evaluate(A, F, C, phi):
    s = F @ phi  # (K, R)
    f = 2.0 * (A @ phi).real - (s.real ** 2 + s.imag ** 2).sum(axis=1) + C
    return f, s


def _smoothed(f, lam):
    m = f.min()
    e = np.exp(-lam * (f - m))
    tot = e.sum()
    return m - math.log(tot) / lam, e / tot


def _project(z):
    mag = np.abs(z)
    over = mag > 1.0
    z[over] /= mag[over]
    return z


def maxmin_ascent(A, F, C, phi0, lambdas, max_iters, step0, tol):
    phi = np.array(phi0, dtype=np.complex128)
    f, s = _evaluate(A, F, C, phi)
    best = f.min()
    bestphi = phi.copy()
    trace, stage = [], []
    Fc = F.conj()
    for st, lam in enumerate(lambdas):
        x = bestphi.copy()
        f, s = _evaluate(A, F, C, x)
        gx, _ = _smoothed(f, lam)
        y, gy, sy = x.copy(), gx, s
        _, piy = _smoothed(f, lam)
        t = 1.0
        step = step0
        for _ in range(max_iters):
            d = piy @ A.conj() - np.einsum("k,krn,kr->n", piy, Fc, sy)
            trial = 2.0 * step
            for _ in range(60):
                z = _project(y + trial * d)
                delta = z - y
                lin = 2.0 * np.vdot(d, delta).real
                dist2 = np.vdot(delta, delta).real
                fz, sz = _evaluate(A, F, C, z)
                gz, piz = _smoothed(fz, lam)
                if gz >= gy + lin - dist2 / trial:
                    break
                trial *= 0.5
            step = trial
            zmin = fz.min()
            if zmin > best:
                best = zmin
                bestphi = z.copy()
            if gz >= gx:
                tn = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
                y = z + ((t - 1.0) / tn) * (z - x)
                done = gz - gx <= tol * (abs(gz) + 1e-300)
                x, gx, t = z, gz, tn
                trace.append(gz)
                stage.append(st)
                if done:
                    break
            else:
                # Momentum overshot: restart from the last accepted point.
                if t == 1.0:
                    break
                y, t = x.copy(), 1.0
            fy, sy = _evaluate(A, F, C, y)
            gy, piy = _smoothed(fy, lam)
    return bestphi, float(best), np.array(trace), np.array(stage, dtype=np.int64)


def _feasible(t, c1u, c2u, c1d, c2d, t1, t2):
    r1u, r2u = t / t2, t / t1
    if r1u > c1u or r2u > c2u or t > c1d * t1 or t > c2d * t2:
        return False
    return r1u * t1 <= c2d * t2 and r2u * t2 <= c1d * t1


def lp_bisect_grid(caps, T1, T2, iters):
    c1u, c2u, c1d, c2d = (float(c) for c in caps)
    out = np.empty(len(T1))
    for g, (t1, t2) in enumerate(zip(T1, T2)):
        hi = min(c1u * t2, c2u * t1, c1d * t1, c2d * t2)
        if hi <= 0.0:
            out[g] = 0.0
            continue
        if _feasible(hi, c1u, c2u, c1d, c2d, t1, t2):
            out[g] = hi
            continue
        lo = 0.0
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if _feasible(mid, c1u, c2u, c1d, c2d, t1, t2):
                lo = mid
            else:
                hi = mid
        out[g] = lo
    return out
