"""Max-min RIS phase subproblem over the relaxed unit disk.

The inner problem maximizes min_k f_k(phi) for four concave quadratics. It is
solved by accelerated projected gradient ascent (backtracking, restart on any
decrease) on the log-sum-exp smoothing of the minimum, with the smoothing
sharpened over a few stages.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import SolverSettings
from .linkmodel import QuadForm

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SolverParams:
    max_inner_iters: int = 5000
    smoothing: tuple[float, ...] = (20.0, 100.0, 500.0, 2500.0)  # relative to objective scale
    tol: float = 1e-10
    grid_points: int = 64

    @classmethod
    def from_settings(cls, s: SolverSettings) -> "SolverParams":
        return cls(max_inner_iters=s.inner_iters, smoothing=s.smoothing, tol=s.inner_tol)


def project_unit_disk(phi) -> np.ndarray:
    phi = np.array(phi, dtype=np.complex128)
    mag = np.abs(phi)
    over = mag > 1.0
    phi[over] /= mag[over]
    # z/|z| can land an ulp outside; pull it in so projecting twice is a no-op
    out = np.abs(phi) > 1.0
    phi[out] *= 1.0 - np.finfo(float).eps
    return phi


def unit_modulus(phi) -> np.ndarray:
    """Entrywise e^{j arg(phi_n)}; zero entries map to 1."""
    return np.exp(1j * np.angle(np.asarray(phi)))


def is_feasible(phi, tol: float = UNIT_TOL) -> bool:
    return bool(np.all(np.abs(np.abs(phi) - 1.0) <= tol))


def min_value(forms, phi) -> float:
    return min(f.value(phi) for f in forms)


def smoothed_min(values, lam: float) -> float:
    """-(1/lam) log sum_k exp(-lam v_k); a lower bound on min_k v_k."""
    v = np.asarray(values, dtype=float)
    m = v.min()
    return float(m - np.log(np.exp(-lam * (v - m)).sum()) / lam)


def form_arrays(forms) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack forms into (A, F, C) with B_k = F_k^H F_k.

    Raises ValueError when some B is not Hermitian positive semidefinite.
    """
    A = np.array([f.A for f in forms], dtype=np.complex128)
    C = np.array([f.C for f in forms], dtype=float)
    factors = []
    for f in forms:
        if f.factor is not None:
            factors.append(np.asarray(f.factor, dtype=np.complex128))
            continue
        B = np.asarray(f.B, dtype=np.complex128)
        scale = max(1.0, float(np.abs(B).max(initial=0.0)))
        if np.abs(B - B.conj().T).max(initial=0.0) > 1e-10 * scale:
            raise ValueError(f"form {f.label or '?'}: B is not Hermitian")
        w, V = np.linalg.eigh(B)
        if w.min() < -1e-10 * max(scale, np.abs(w).max()):
            raise ValueError(f"form {f.label or '?'}: B is not positive semidefinite (min eig {w.min():.3g})")
        keep = w > 1e-15 * max(np.abs(w).max(), 1e-300)
        factors.append(np.sqrt(w[keep])[:, None] * V[:, keep].conj().T)
    R = max(1, max(fac.shape[0] for fac in factors))
    N = A.shape[1]
    F = np.zeros((len(forms), R, N), dtype=np.complex128)
    for k, fac in enumerate(factors):
        F[k, : fac.shape[0]] = fac
    return A, F, C


def ascent_arrays(A, F, C, phi0, params: SolverParams):
    """Run the compiled/numpy ascent on stacked arrays. Returns (phi, trace, stages)."""
    phi0 = np.ascontiguousarray(phi0, dtype=np.complex128)
    f0 = 2.0 * (A @ phi0).real - (np.abs(F @ phi0) ** 2).sum(axis=1) + C
    # Temperature follows the binding value, not the loosest form.
    scale = float(abs(f0.min())) or float(np.abs(f0).max())
    if scale == 0.0:
        scale = float(np.abs(C).max() + 2.0 * np.abs(A).sum(axis=1).max() + (np.abs(F) ** 2).sum(axis=(1, 2)).max())
    scale = scale or 1.0
    lipschitz = float((np.abs(F) ** 2).sum(axis=(1, 2)).max())
    if lipschitz == 0.0:
        lipschitz = float(np.abs(A).sum(axis=1).max()) or 1.0
    lambdas = np.array(params.smoothing, dtype=float) / scale
    phi, best, trace, stages = kernels.maxmin_ascent(
        np.ascontiguousarray(A), np.ascontiguousarray(F), np.ascontiguousarray(C, dtype=float),
        phi0, lambdas, int(params.max_inner_iters), 1.0 / lipschitz, float(params.tol))
    if best < f0.min():  # never hand back something worse than the start
        phi = phi0.copy()
    return phi, trace, stages


def solve_maxmin_phase(forms, phi0, params: SolverParams | None = None, return_trace: bool = False):
    """Maximize min_k f_k(phi) subject to |phi_n| <= 1, starting from ``phi0``.

    The result never has a lower min_k f_k than ``phi0``. With
    ``return_trace`` also returns the smoothed objective per accepted step
    and the smoothing stage it belongs to.
    """
    params = params or SolverParams()
    phi0 = np.asarray(phi0, dtype=np.complex128)
    if np.any(np.abs(phi0) > 1.0 + UNIT_TOL):
        raise ValueError("phi0 violates |phi_n| <= 1")
    A, F, C = form_arrays(forms)
    phi, trace, stages = ascent_arrays(A, F, C, phi0, params)
    # Rank-truncated factors can differ from B in the last bits; re-check on the forms themselves.
    if min_value(forms, phi) < min_value(forms, phi0):
        phi = phi0.copy()
    if return_trace:
        return phi, trace, stages
    return phi


def round_feasible(phi_opt, F_prev: float, evaluator) -> np.ndarray:
    """Return the unit-modulus projection of ``phi_opt`` if it does not lose
    objective against ``F_prev``, otherwise ``phi_opt`` itself."""
    deg = unit_modulus(phi_opt)
    if evaluator(deg) >= F_prev:
        return deg
    return np.asarray(phi_opt)


def brute_force_phase_oracle(forms, grid_points_per_entry: int = 64, max_n: int = 3):
    """Exhaustive max of min_k f_k over a unit-modulus phase grid plus phi = 0."""
    N = forms[0].A.shape[0]
    if N > max_n:
        raise ValueError(f"oracle limited to N <= {max_n}, got N={N}")
    angles = np.exp(2j * np.pi * np.arange(grid_points_per_entry) / grid_points_per_entry)
    cands = np.array(list(itertools.product(angles, repeat=N)), dtype=np.complex128)
    cands = np.vstack([np.zeros((1, N), dtype=np.complex128), cands])
    vals = np.min(np.stack([f.value(cands) for f in forms]), axis=0)
    k = int(np.argmax(vals))
    return cands[k], float(vals[k])
