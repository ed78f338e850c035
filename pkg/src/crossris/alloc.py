"""Outer alternating optimization of RIS phase, time allocation and rates.

``optimize_p1`` handles the unconstrained-delay problem: rates follow the
capacities directly. ``optimize_p2`` adds the per-frame buffer constraints
R_i^U T_i <= R_j^D T_j and picks rates with a small linear program.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .channel import ChannelSet
from .config import SystemConfig
from .linkmodel import aux_weights, beamformers, capacities, quad_forms
from .phase import SolverParams, ascent_arrays, form_arrays, round_feasible

LP_BISECTION_ITERS = 60


@dataclass(frozen=True)
class Allocation:
    """Downlink slot lengths as frame fractions.

    TDMA allocations satisfy T1 + T2 = 1 with both slots nonzero. The
    AP-based benchmark uses the full frame for both (T1 = T2 = 1), built via
    ``Allocation.full_frame()``.
    """

    T1: float
    T2: float

    def __post_init__(self):
        full = self.T1 == 1.0 and self.T2 == 1.0
        if not full:
            if not (0.0 < self.T1 < 1.0 and 0.0 < self.T2 < 1.0):
                raise ValueError(f"slot lengths must lie in (0, 1), got ({self.T1}, {self.T2})")
            if abs(self.T1 + self.T2 - 1.0) > 1e-12:
                raise ValueError(f"T1 + T2 must equal 1, got {self.T1 + self.T2}")

    @classmethod
    def full_frame(cls) -> "Allocation":
        return cls(1.0, 1.0)

    @property
    def slot_weights(self) -> np.ndarray:
        """Weight of each link in the end-to-end objective, order 1U, 2U, 1D, 2D."""
        return np.array([self.T2, self.T1, self.T1, self.T2])


class RateVector(NamedTuple):
    R1U: float
    R2U: float
    R1D: float
    R2D: float


@dataclass
class Solution:
    phase: np.ndarray
    alloc: Allocation
    rates: RateVector
    capacities: np.ndarray
    F: float
    trace: list = field(default_factory=list)  # F at the start, then once per accepted outer step
    iterations: int = 0  # outer iterations run
    converged: bool = False


def end_to_end_objective(values, alloc: Allocation) -> float:
    """min{v1U T2, v2U T1, v1D T1, v2D T2} in bits per frame."""
    v = np.asarray(values, dtype=float)
    return float(np.min(v * alloc.slot_weights))


def time_grid(k_max: int) -> list[Allocation]:
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    dt = 1.0 / k_max
    return [Allocation(k * dt, 1.0 - k * dt) for k in range(1, k_max)]


def p1_rate_assignment(caps) -> RateVector:
    c1u, c2u, c1d, c2d = (float(c) for c in caps)
    r12 = min(c1u, c2d)
    r21 = min(c2u, c1d)
    return RateVector(R1U=r12, R2U=r21, R1D=r21, R2D=r12)


def _lp_values(caps, grid) -> np.ndarray:
    t1 = np.array([a.T1 for a in grid])
    t2 = np.array([a.T2 for a in grid])
    return kernels.lp_bisect_grid(np.asarray(caps, dtype=float), t1, t2, LP_BISECTION_ITERS)


def solve_rate_lp(caps, alloc: Allocation) -> RateVector:
    """Rates maximizing the end-to-end objective at fixed T under the delay constraints.

    Both downlinks run at capacity and each uplink is capped by its capacity
    and by its delay constraint; this attains the LP optimum. The uplink is
    nudged down by ulps if rounding would break the constraint.
    """
    c1u, c2u, c1d, c2d = (float(c) for c in caps)
    if min(c1u, c2u, c1d, c2d) <= 0.0:
        return RateVector(0.0, 0.0, 0.0, 0.0)
    t1, t2 = alloc.T1, alloc.T2
    r2d, r1d = c2d, c1d
    r1u = _delay_capped(c1u, t1, r2d * t2)
    r2u = _delay_capped(c2u, t2, r1d * t1)
    return RateVector(R1U=r1u, R2U=r2u, R1D=r1d, R2D=r2d)


def _delay_capped(cap: float, slot: float, budget: float) -> float:
    """Largest rate <= cap with rate * slot <= budget in floating point."""
    r = min(cap, budget / slot)
    while r * slot > budget:
        r = math.nextafter(r, 0.0)
    return r


def lp_optimum(caps, alloc: Allocation) -> float:
    """Optimal objective of the delay-constrained rate LP (bisection)."""
    return float(_lp_values(caps, [alloc])[0])


def lp_slot_weights(alloc: Allocation) -> np.ndarray:
    """Per-link weights w with LP optimum = min_k w_k C_k at this allocation.

    The delay constraints tighten the downlink terms when their slot is the
    shorter one: C2D enters as C2D T2 min(1, T2/T1), C1D as C1D T1 min(1, T1/T2).
    """
    t1, t2 = alloc.T1, alloc.T2
    return np.array([t2, t1, t1 * min(1.0, t1 / t2), t2 * min(1.0, t2 / t1)])


def _stacked_forms(ch, phi, ap=False):
    bf = beamformers(ch, phi, ap)
    mu = aux_weights(ch, phi, bf, ap)
    return form_arrays(quad_forms(ch, bf, mu, np.ones(4), ap))


def _scaled(arrays, w):
    A, F, C = arrays
    return A * w[:, None], F * np.sqrt(w)[:, None, None], C * w


def _min_f(arrays, phi):
    A, F, C = arrays
    return float((2.0 * (A @ phi).real - (np.abs(F @ phi) ** 2).sum(axis=1) + C).min())


def optimize_p1(config: SystemConfig, channels: ChannelSet, params: SolverParams | None = None) -> Solution:
    """Alternate MMSE/weight refresh with a time-grid scan of the phase subproblem.

    F(t) is the end-to-end objective at the accepted phase and the best grid
    allocation for it; the loop stops at t_max or once F(t) - F(t-1) <= ero * F(t).
    """
    s = config.solver
    params = params or SolverParams.from_settings(s)
    grid = time_grid(s.k_max)
    weights = np.array([a.slot_weights for a in grid])

    phi = np.ones(config.N, dtype=np.complex128)
    caps = capacities(channels, phi)
    vals = (weights * caps).min(axis=1)
    k_opt = int(np.argmax(vals))
    F_prev = float(vals[k_opt])
    alloc = grid[k_opt]
    trace = [F_prev]
    converged = False
    it = 0

    for it in range(1, s.t_max + 1):
        base = _stacked_forms(channels, phi)
        best_val, best_phi, best_k = -math.inf, None, 0
        warm = None
        for k, w in enumerate(weights):
            arrays = _scaled(base, w)
            start = phi
            if warm is not None and _min_f(arrays, warm) > _min_f(arrays, phi):
                start = warm
            cand, _, _ = ascent_arrays(*arrays, start, params)
            val = _min_f(arrays, cand)
            if val > best_val:  # strict: smallest T1 wins ties
                best_val, best_phi, best_k = val, cand, k
            warm = cand
        cand_alloc = grid[best_k]

        def evaluator(p, a=cand_alloc):
            return end_to_end_objective(capacities(channels, p), a)

        phi_hat = round_feasible(best_phi, F_prev, evaluator)
        new_caps = capacities(channels, phi_hat)
        # Re-pick T on the accepted phase; never worse than cand_alloc.
        vals = (weights * new_caps).min(axis=1)
        k_new = int(np.argmax(vals))
        F = float(vals[k_new])
        if F < F_prev:
            # Only reachable through floating-point noise at a fixed point.
            converged = True
            break
        phi, caps, alloc = phi_hat, new_caps, grid[k_new]
        trace.append(F)
        if F - F_prev <= s.ero * F:
            converged = True
            break
        F_prev = F

    return Solution(phase=phi, alloc=alloc, rates=p1_rate_assignment(caps), capacities=caps,
                    F=end_to_end_objective(caps, alloc), trace=trace, iterations=it,
                    converged=converged)


def optimize_p2(config: SystemConfig, channels: ChannelSet, params: SolverParams | None = None,
                fixed_alloc: Allocation | None = None, ap: bool = False) -> Solution:
    """Delay-constrained variant: grid-search T with the rate LP, then one
    phase update at the chosen T per outer iteration.

    ``fixed_alloc`` pins the allocation (EqualT, AP-based); ``ap`` switches the
    downlink to the AP-transmitted carrier.
    """
    s = config.solver
    params = params or SolverParams.from_settings(s)
    grid = [fixed_alloc] if fixed_alloc is not None else time_grid(s.k_max)

    def best_on_grid(c):
        vals = _lp_values(c, grid)
        k = int(np.argmax(vals))
        return k, float(vals[k])

    phi = np.ones(config.N, dtype=np.complex128)
    caps = capacities(channels, phi, ap)
    k_opt, F_prev = best_on_grid(caps)
    trace = [F_prev]
    converged = False
    it = 0

    for it in range(1, s.t_max + 1):
        alloc = grid[k_opt]
        arrays = _scaled(_stacked_forms(channels, phi, ap), lp_slot_weights(alloc))
        phi_opt, _, _ = ascent_arrays(*arrays, phi, params)
        phi_hat = round_feasible(phi_opt, F_prev, lambda p: best_on_grid(capacities(channels, p, ap))[1])
        new_caps = capacities(channels, phi_hat, ap)
        k_new, F = best_on_grid(new_caps)
        if F < F_prev:
            converged = True
            break
        phi, caps, k_opt = phi_hat, new_caps, k_new
        trace.append(F)
        if F - F_prev <= s.ero * F:
            converged = True
            break
        F_prev = F

    alloc = grid[k_opt]
    rates = solve_rate_lp(caps, alloc)
    return Solution(phase=phi, alloc=alloc, rates=rates, capacities=caps,
                    F=end_to_end_objective(rates, alloc), trace=trace, iterations=it,
                    converged=converged)
