import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import symmetric_channels
from crossris.alloc import (Allocation, RateVector, end_to_end_objective, lp_optimum, lp_slot_weights,
                            optimize_p1, optimize_p2, p1_rate_assignment, solve_rate_lp, time_grid)
from crossris.channel import draw_channel_set
from crossris.config import SolverSettings, SystemConfig
from oracles import lp_vertex_enumeration

FAST = SystemConfig(solver=SolverSettings(k_max=20))


def test_objective_examples():
    rates = RateVector(R1U=2, R2U=4, R1D=5, R2D=3)
    assert end_to_end_objective(rates, Allocation(0.5, 0.5)) == 1.0
    assert end_to_end_objective([7.0] * 4, Allocation(0.5, 0.5)) == 3.5


@given(st.lists(st.floats(0.0, 1e8), min_size=4, max_size=4), st.integers(1, 99))
def test_objective_relabeling_symmetry(v, k):
    a = Allocation(k / 100, 1 - k / 100)
    swapped = Allocation(a.T2, a.T1)
    assert end_to_end_objective(v, a) == end_to_end_objective([v[1], v[0], v[3], v[2]], swapped)


def test_time_grid():
    g = time_grid(4)
    assert [(a.T1, a.T2) for a in g] == [(0.25, 0.75), (0.5, 0.5), (0.75, 0.25)]
    assert len(time_grid(100)) == 99
    assert all(abs(a.T1 + a.T2 - 1) <= 1e-12 for a in time_grid(100))
    with pytest.raises(ValueError):
        time_grid(1)


def test_allocation_validation():
    with pytest.raises(ValueError):
        Allocation(0.0, 1.0)
    with pytest.raises(ValueError):
        Allocation(0.3, 0.6)
    full = Allocation.full_frame()
    assert (full.T1, full.T2) == (1.0, 1.0)


def test_p1_rate_assignment():
    assert p1_rate_assignment([10, 8, 6, 4]) == RateVector(4, 6, 6, 4)
    assert p1_rate_assignment([3, 3, 3, 3]) == RateVector(3, 3, 3, 3)
    caps = np.array([5.0, 1.0, 2.0, 9.0])
    assert np.all(np.array(p1_rate_assignment(caps)) <= caps)


def test_rate_lp_examples():
    r = solve_rate_lp([4, 4, 4, 4], Allocation(0.5, 0.5))
    assert r == RateVector(4, 4, 4, 4)
    assert end_to_end_objective(r, Allocation(0.5, 0.5)) == 2.0
    r = solve_rate_lp([10, 1e6, 1e6, 2], Allocation(0.5, 0.5))
    assert r.R1U == pytest.approx(2.0)
    assert solve_rate_lp([0, 1, 1, 1], Allocation(0.5, 0.5)) == RateVector(0, 0, 0, 0)


def _delay_ok(r, a, tol=1e-9):
    return r.R1U * a.T1 <= r.R2D * a.T2 + tol and r.R2U * a.T2 <= r.R1D * a.T1 + tol


@pytest.mark.parametrize("seed", range(25))
def test_rate_lp_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    caps = rng.uniform(0.0, 10.0, 4) * rng.choice([1.0, 100.0], 4)
    a = Allocation(*(lambda t: (t, 1 - t))(rng.integers(1, 100) / 100))
    ref = lp_vertex_enumeration(caps, a.T1, a.T2)
    assert lp_optimum(caps, a) == pytest.approx(ref, abs=1e-6 * max(1.0, ref))
    r = solve_rate_lp(caps, a)
    assert end_to_end_objective(r, a) == pytest.approx(ref, abs=1e-6 * max(1.0, ref))
    assert np.all(np.array(r) <= caps + 1e-9) and np.all(np.array(r) >= 0)
    assert _delay_ok(r, a)
    assert float(np.min(lp_slot_weights(a) * caps)) == pytest.approx(ref, abs=1e-6 * max(1.0, ref))


@pytest.fixture(scope="module")
def realization():
    return draw_channel_set(FAST, np.random.default_rng(3))


def test_p1_invariants(realization):
    sol = optimize_p1(FAST, realization)
    assert np.all(np.diff([*sol.trace]) >= -1e-9 * abs(sol.F))
    assert sol.rates == p1_rate_assignment(sol.capacities)
    assert sol.F == pytest.approx(end_to_end_objective(sol.capacities, sol.alloc))
    grid = time_grid(FAST.solver.k_max)
    best = max(end_to_end_objective(sol.capacities, a) for a in grid)
    assert sol.F == best
    assert np.all(np.abs(sol.phase) <= 1 + 1e-12)


def test_p2_invariants(realization):
    sol = optimize_p2(FAST, realization)
    assert np.all(np.diff(sol.trace) >= -1e-9 * abs(sol.F))
    assert _delay_ok(sol.rates, sol.alloc)
    assert np.all(np.array(sol.rates) <= sol.capacities * (1 + 1e-9))
    grid = time_grid(FAST.solver.k_max)
    vals = [lp_optimum(sol.capacities, a) for a in grid]
    assert sol.alloc == grid[int(np.argmax(vals))]
    assert sol.F == pytest.approx(max(vals), rel=1e-9)


def test_p2_not_above_p1(realization):
    assert optimize_p2(FAST, realization).F <= optimize_p1(FAST, realization).F * (1 + 1e-9)


def test_fixed_allocation_is_respected(realization):
    sol = optimize_p2(FAST, realization, fixed_alloc=Allocation(0.5, 0.5))
    assert (sol.alloc.T1, sol.alloc.T2) == (0.5, 0.5)


def test_symmetric_media_pick_equal_slots():
    cfg = dataclasses.replace(FAST, media=(FAST.media[0], dataclasses.replace(FAST.media[0], id=2)))
    ch = symmetric_channels(cfg, seed=2)
    p1 = optimize_p1(cfg, ch)
    p2 = optimize_p2(cfg, ch)
    assert (p1.alloc.T1, p1.alloc.T2) == (0.5, 0.5)
    assert p2.F == pytest.approx(p1.F, rel=1e-6)


def test_optimizers_deterministic(realization):
    a, b = optimize_p1(FAST, realization), optimize_p1(FAST, realization)
    assert a.F == b.F and np.array_equal(a.phase, b.phase)


@given(st.lists(st.floats(1e-3, 1e9), min_size=4, max_size=4), st.integers(1, 99))
def test_rate_lp_delay_constraints_hold_exactly(caps, k):
    a = Allocation(k / 100, 1 - k / 100)
    r = solve_rate_lp(caps, a)
    assert _delay_ok(r, a, tol=0.0)
    assert end_to_end_objective(r, a) == pytest.approx(lp_optimum(caps, a), rel=1e-9)
