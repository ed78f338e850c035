"""Benchmark schemes and energy-efficiency accounting.

``AP`` sends the downlink from the access points through the RIS over the
full frame instead of relaying device to device. ``EqualT``, ``RandPhi`` and
``2bitPhi`` are degraded variants of the delay-constrained optimizer.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alloc import Allocation, Solution, end_to_end_objective, optimize_p1, optimize_p2, solve_rate_lp
from .channel import ChannelSet, ap_powers, derived_powers
from .config import SystemConfig
from .linkmodel import capacities, capacity, downlink_vector
from .phase import SolverParams

SCHEMES = ("P1", "P2", "EqualT", "RandPhi", "2bitPhi", "AP")
BASELINES = ("EqualT", "RandPhi", "2bitPhi")

EQUAL_SLOTS = Allocation(0.5, 0.5)
_QUARTER_ANGLES = 0.5 * np.pi * np.arange(4)


@dataclass(frozen=True)
class PowerBudget:
    """Transmit and circuit powers in watts; index 0 is device/AP 1."""

    device: tuple[float, float]
    ap: tuple[float, float]
    device_circuit: tuple[float, float]
    ap_circuit: tuple[float, float]
    ris_element: float
    N: int

    def __post_init__(self):
        values = [*self.device, *self.ap, *self.device_circuit, *self.ap_circuit, self.ris_element]
        if any(not v >= 0 for v in values) or self.N < 0:
            raise ValueError("power budget entries must be >= 0")


def power_budget(config: SystemConfig) -> PowerBudget:
    p1, p2, _, _ = derived_powers(config)
    c = config.circuit
    return PowerBudget(
        device=(p1, p2),
        ap=ap_powers(config),
        device_circuit=(c.d1_mw * 1e-3, c.d2_mw * 1e-3),
        ap_circuit=(c.ap1_mw * 1e-3, c.ap2_mw * 1e-3),
        ris_element=c.ris_element_mw * 1e-3,
        N=config.N,
    )


def total_power(scheme: str, budget: PowerBudget) -> float:
    """Total consumption in W. Only ``AP`` pays for the access points."""
    total = sum(budget.device) + sum(budget.device_circuit) + budget.N * budget.ris_element
    if scheme == "AP":
        total += sum(budget.ap) + sum(budget.ap_circuit)
    return total


def energy_efficiency(F: float, power_w: float) -> float:
    """Bits per joule for a 1 s frame."""
    if not power_w > 0:
        raise ValueError("total power must be > 0")
    return F / power_w


@dataclass
class SchemeResult:
    scheme: str
    F: float
    EE: float
    total_power: float
    solution: Solution


def _result(scheme: str, sol: Solution, config: SystemConfig) -> SchemeResult:
    p = total_power(scheme, power_budget(config))
    return SchemeResult(scheme=scheme, F=sol.F, EE=energy_efficiency(sol.F, p), total_power=p, solution=sol)


def ap_downlink_capacity(channels: ChannelSet, phase, i: int) -> float:
    """Downlink capacity to device i (0 or 1) when AP i transmits via the RIS."""
    if channels.g_ap is None:
        raise ValueError("channel set has no AP-to-RIS channels")
    h = complex(downlink_vector(channels, i, ap=True) @ np.asarray(phase, dtype=np.complex128))
    s = abs(h) ** 2
    return float(capacity(channels.bandwidth[i], s / (channels.rho_si * s + channels.noise_down[i])))


def optimize_ap_based(config: SystemConfig, channels: ChannelSet,
                      params: SolverParams | None = None) -> SchemeResult:
    sol = optimize_p2(config, channels, params, fixed_alloc=Allocation.full_frame(), ap=True)
    return _result("AP", sol, config)


def quantize_phase_2bit(phi) -> np.ndarray:
    """Nearest of the four quarter-turn phases per entry; ties go to the smaller angle."""
    phi = np.asarray(phi, dtype=np.complex128)
    ang = np.mod(np.angle(phi), 2.0 * np.pi)
    gap = np.abs(ang[..., None] - _QUARTER_ANGLES)
    gap = np.minimum(gap, 2.0 * np.pi - gap)
    q = np.argmin(gap, axis=-1)  # first index wins ties
    q[phi == 0] = 0
    return np.exp(1j * _QUARTER_ANGLES[q])


def _fixed_phase_solution(channels: ChannelSet, phi, alloc: Allocation) -> Solution:
    caps = capacities(channels, phi)
    rates = solve_rate_lp(caps, alloc)
    F = end_to_end_objective(rates, alloc)
    return Solution(phase=np.asarray(phi), alloc=alloc, rates=rates, capacities=caps, F=F,
                    trace=[F], iterations=0, converged=True)


def run_baseline(kind: str, config: SystemConfig, channels: ChannelSet,
                 rng: np.random.Generator | None = None, params: SolverParams | None = None,
                 p2: Solution | None = None) -> SchemeResult:
    """Run EqualT, RandPhi or 2bitPhi.

    RandPhi needs ``rng``. 2bitPhi quantizes the P2 phase, reusing ``p2``
    when given.
    """
    if kind == "EqualT":
        sol = optimize_p2(config, channels, params, fixed_alloc=EQUAL_SLOTS)
    elif kind == "RandPhi":
        if rng is None:
            raise ValueError("RandPhi needs an rng")
        phi = np.exp(2j * np.pi * rng.random(channels.N))
        sol = _fixed_phase_solution(channels, phi, EQUAL_SLOTS)
    elif kind == "2bitPhi":
        p2 = p2 or optimize_p2(config, channels, params)
        sol = _fixed_phase_solution(channels, quantize_phase_2bit(p2.phase), p2.alloc)
    else:
        raise ValueError(f"unknown baseline {kind!r}; expected one of {BASELINES}")
    return _result(kind, sol, config)


def run_scheme(scheme: str, config: SystemConfig, channels: ChannelSet,
               rng: np.random.Generator | None = None, params: SolverParams | None = None,
               p2: Solution | None = None) -> SchemeResult:
    """Dispatch any scheme id in ``SCHEMES``."""
    if scheme == "P1":
        return _result("P1", optimize_p1(config, channels, params), config)
    if scheme == "P2":
        return _result("P2", p2 or optimize_p2(config, channels, params), config)
    if scheme == "AP":
        return optimize_ap_based(config, channels, params)
    if scheme in BASELINES:
        return run_baseline(scheme, config, channels, rng, params, p2)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


__all__ = [
    "SCHEMES", "BASELINES", "PowerBudget", "SchemeResult", "power_budget", "total_power",
    "energy_efficiency", "ap_downlink_capacity", "optimize_ap_based", "quantize_phase_2bit",
    "run_baseline", "run_scheme",
]
