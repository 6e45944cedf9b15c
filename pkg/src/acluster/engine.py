"""Main simulation loop: per-agent pick/drop voting, stigmergic movement,
pheromone update, evaporation, and the end-of-run drain phase.

The inner loop is numba-jitted; a full benchmark run is ~1e8 agent-steps.
All randomness flows through one splitmix64 stream, so a run is a pure
function of (config, dataset bytes) regardless of how the loop is chunked.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from numba import njit

from . import rng as _rng
from .behavior import (SUB_A, SUB_B, chi, compose_nb, delta_drop, epsilon_pick,
                       lf_density_nb, lf_probabilities_nb, rms_distance_nb)
from .core import ConfigError, Dataset, SimConfig
from .grid import (DIR_C, DIR_R, EMPTY, Grid, count_items_around_nb,
                   place_items_randomly, _sample_without_replacement)
from .pheromone import transition_scores_nb


@njit(cache=True)
def _attempt_pick(items, features, d_max, r, c, oid, variant, sub,
                  k1, k2, theta, steep, lf_alpha, lf_s, state):
    """Vote over occupied neighbors (or the LF single draw); True means pick."""
    if variant == 4:
        f = lf_density_nb(items, features, d_max, r, c, features[oid], lf_s, lf_alpha)
        pp, _ = lf_probabilities_nb(f, k1, k2)
        return _rng.uniform(state) <= pp
    side = items.shape[0]
    n = count_items_around_nb(items, r, c)
    if n == 0:
        return True
    chi_val = chi(n, theta, steep)
    votes = 0
    for k in range(8):
        nid = items[(r + DIR_R[k]) % side, (c + DIR_C[k]) % side]
        if nid < 0:
            continue
        d = rms_distance_nb(features, nid, features[oid], d_max)
        pp, _ = compose_nb(variant, sub, chi_val, epsilon_pick(d, k2), delta_drop(d, k1))
        if _rng.uniform(state) <= pp:
            votes += 1
    return 2 * votes >= n


@njit(cache=True)
def _attempt_drop(items, features, d_max, r, c, carried, variant, sub,
                  k1, k2, theta, steep, lf_alpha, lf_s, state):
    """As _attempt_pick but for the drop side; n == 0 never drops."""
    if variant == 4:
        f = lf_density_nb(items, features, d_max, r, c, features[carried], lf_s, lf_alpha)
        _, pd = lf_probabilities_nb(f, k1, k2)
        return _rng.uniform(state) <= pd
    side = items.shape[0]
    n = count_items_around_nb(items, r, c)
    if n == 0:
        return False
    chi_val = chi(n, theta, steep)
    votes = 0
    for k in range(8):
        nid = items[(r + DIR_R[k]) % side, (c + DIR_C[k]) % side]
        if nid < 0:
            continue
        d = rms_distance_nb(features, nid, features[carried], d_max)
        _, pd = compose_nb(variant, sub, chi_val, epsilon_pick(d, k2), delta_drop(d, k1))
        if _rng.uniform(state) <= pd:
            votes += 1
    return 2 * votes >= n


@njit(cache=True)
def _simulate(pheromone, items, agents, agent_r, agent_c, agent_head, agent_carry,
              agent_sub, features, d_max,
              k1, k2, beta, gamma, eta, k_evap, p_dep, theta, steep,
              variant, lf_alpha, lf_s,
              n_steps, pick_enabled, stop_when_unladen, shuffle, state):
    """Advance the state in place by up to n_steps; returns steps executed."""
    side = pheromone.shape[0]
    n_agents = agent_r.shape[0]
    order = np.arange(n_agents)
    probs = np.empty(8, dtype=np.float64)
    decay = 1.0 - k_evap
    done = 0
    for _ in range(n_steps):
        if stop_when_unladen:
            laden = 0
            for a in range(n_agents):
                if agent_carry[a] >= 0:
                    laden += 1
            if laden == 0:
                break
        if shuffle:
            for i in range(n_agents - 1, 0, -1):
                j = _rng.randint(state, i + 1)
                order[i], order[j] = order[j], order[i]
        for slot in range(n_agents):
            a = order[slot]
            r = agent_r[a]
            c = agent_c[a]
            here = items[r, c]
            if agent_carry[a] < 0 and here >= 0 and pick_enabled:
                if _attempt_pick(items, features, d_max, r, c, here, variant,
                                 agent_sub[a], k1, k2, theta, steep,
                                 lf_alpha, lf_s, state):
                    items[r, c] = -1
                    agent_carry[a] = here
            elif agent_carry[a] >= 0 and here < 0:
                if _attempt_drop(items, features, d_max, r, c, agent_carry[a],
                                 variant, agent_sub[a], k1, k2, theta, steep,
                                 lf_alpha, lf_s, state):
                    items[r, c] = agent_carry[a]
                    agent_carry[a] = -1
            # movement: sample among neighbors not occupied by another agent
            if transition_scores_nb(pheromone, agents, r, c, agent_head[a],
                                    beta, gamma, probs):
                u = _rng.uniform(state)
                acc = 0.0
                k = -1
                for kk in range(8):
                    p = probs[kk]
                    if p > 0.0:
                        k = kk
                        acc += p
                        if u < acc:
                            break
                nr = (r + DIR_R[k]) % side
                nc = (c + DIR_C[k]) % side
                agents[r, c] = -1
                agents[nr, nc] = a
                agent_r[a] = nr
                agent_c[a] = nc
                agent_head[a] = k
                r = nr
                c = nc
            # deposit at the (possibly unchanged) destination
            pheromone[r, c] += eta + p_dep * count_items_around_nb(items, r, c)
        for i in range(side):
            for j in range(side):
                pheromone[i, j] *= decay
        done += 1
    return done


class Agent:
    """Live view of one ant inside a SimState."""

    def __init__(self, state: "SimState", idx: int):
        self._s = state
        self.id = idx

    @property
    def pos(self) -> tuple[int, int]:
        return int(self._s.agent_r[self.id]), int(self._s.agent_c[self.id])

    @property
    def heading(self) -> int:
        return int(self._s.agent_head[self.id])

    @property
    def carried(self) -> int | None:
        v = int(self._s.agent_carry[self.id])
        return v if v >= 0 else None

    @property
    def sub_assignment(self) -> str:
        return "a" if self._s.agent_sub[self.id] == SUB_A else "b"


@dataclass
class SimState:
    grid: Grid
    dataset: Dataset
    cfg: SimConfig
    agent_r: np.ndarray
    agent_c: np.ndarray
    agent_head: np.ndarray
    agent_carry: np.ndarray
    agent_sub: np.ndarray
    rng: np.ndarray
    t: int = 0

    @property
    def agents(self) -> list[Agent]:
        return [Agent(self, i) for i in range(self.agent_r.shape[0])]

    def carried_count(self) -> int:
        return int(np.count_nonzero(self.agent_carry >= 0))


def init_state(cfg: SimConfig, dataset: Dataset) -> SimState:
    """Random item and agent placement plus headings, all from cfg.seed."""
    if len(dataset) > cfg.grid_side**2:
        raise ConfigError("more items than grid cells")
    if cfg.n_agents > cfg.grid_side**2:
        raise ConfigError("more agents than grid cells")
    rng = _rng.make_stream(cfg.seed)
    grid = Grid(cfg.grid_side)
    place_items_randomly(grid, dataset, rng)
    cells = _sample_without_replacement(
        np.arange(cfg.grid_side**2, dtype=np.int64), cfg.n_agents, rng
    )
    agent_r = (cells // cfg.grid_side).astype(np.int64)
    agent_c = (cells % cfg.grid_side).astype(np.int64)
    for i in range(cfg.n_agents):
        grid.agents[agent_r[i], agent_c[i]] = i
    agent_head = np.array([_rng.randint(rng, 8) for _ in range(cfg.n_agents)],
                          dtype=np.int64)
    agent_carry = np.full(cfg.n_agents, -1, dtype=np.int64)
    agent_sub = np.array([SUB_A if i % 2 == 0 else SUB_B for i in range(cfg.n_agents)],
                         dtype=np.int64)
    return SimState(grid, dataset, cfg, agent_r, agent_c, agent_head,
                    agent_carry, agent_sub, rng)


def _kernel_args(state: SimState, n_steps: int, pick_enabled: bool,
                 stop_when_unladen: bool):
    cfg = state.cfg
    return (state.grid.pheromone, state.grid.items, state.grid.agents,
            state.agent_r, state.agent_c, state.agent_head, state.agent_carry,
            state.agent_sub, state.dataset.features, state.dataset.d_max,
            cfg.k1, cfg.k2, cfg.beta, cfg.gamma, cfg.eta, cfg.k_evap, cfg.p_dep,
            cfg.theta_count, cfg.steepness, cfg.function_type, cfg.lf_alpha,
            cfg.lf_s, n_steps, pick_enabled, stop_when_unladen,
            cfg.shuffle_agents, state.rng)


def try_pick(state: SimState, agent: Agent) -> bool:
    """One pick attempt for an unladen agent standing on an item."""
    a = agent.id
    r, c = int(state.agent_r[a]), int(state.agent_c[a])
    here = int(state.grid.items[r, c])
    if state.agent_carry[a] >= 0 or here < 0:
        return False
    cfg = state.cfg
    ok = _attempt_pick(state.grid.items, state.dataset.features, state.dataset.d_max,
                       r, c, here, cfg.function_type, int(state.agent_sub[a]),
                       cfg.k1, cfg.k2, cfg.theta_count, cfg.steepness,
                       cfg.lf_alpha, cfg.lf_s, state.rng)
    if ok:
        state.grid.items[r, c] = EMPTY
        state.agent_carry[a] = here
    return bool(ok)


def try_drop(state: SimState, agent: Agent) -> bool:
    """One drop attempt for a laden agent standing on an empty cell."""
    a = agent.id
    r, c = int(state.agent_r[a]), int(state.agent_c[a])
    carried = int(state.agent_carry[a])
    if carried < 0 or state.grid.items[r, c] != EMPTY:
        return False
    cfg = state.cfg
    ok = _attempt_drop(state.grid.items, state.dataset.features, state.dataset.d_max,
                       r, c, carried, cfg.function_type, int(state.agent_sub[a]),
                       cfg.k1, cfg.k2, cfg.theta_count, cfg.steepness,
                       cfg.lf_alpha, cfg.lf_s, state.rng)
    if ok:
        state.grid.items[r, c] = carried
        state.agent_carry[a] = EMPTY
    return bool(ok)


def step(state: SimState, n_steps: int = 1, pick_enabled: bool = True) -> SimState:
    """Advance n_steps global time steps in place."""
    done = _simulate(*_kernel_args(state, n_steps, pick_enabled, False))
    state.t += done
    return state


def run(cfg: SimConfig, dataset: Dataset,
        observers: Iterable[tuple[object, Callable]] = ()) -> SimState:
    """Full run: init, t_max steps, then the drain phase.

    Each observer is (schedule, callback); schedule is an int interval or an
    iterable of absolute step numbers. Callbacks get (t, state) with the state
    to be treated as read-only; they fire at t=0 when scheduled, at every
    scheduled t up to t_max, and once more after the drain completes.
    """
    state = init_state(cfg, dataset)
    schedules = []
    for sched, fn in observers:
        if isinstance(sched, int):
            times = set(range(0, cfg.t_max + 1, sched)) if sched > 0 else set()
        else:
            times = {int(t) for t in sched if 0 <= int(t) <= cfg.t_max}
        schedules.append((times, fn))
    event_times = sorted(set().union(*(s for s, _ in schedules)) if schedules else set())

    def fire(t):
        for times, fn in schedules:
            if t in times:
                fn(t, state)

    fire(0)
    for t_next in event_times:
        if t_next == 0:
            continue
        step(state, t_next - state.t)
        fire(state.t)
    if state.t < cfg.t_max:
        step(state, cfg.t_max - state.t)

    # drain: no more pick-ups; laden agents walk until they have dropped
    # everything or the cap elapses, then leftovers go to the nearest empty cell
    done = _simulate(*_kernel_args(state, cfg.drain_cap, False, True))
    state.t += done
    _force_place_leftovers(state)
    if state.t > cfg.t_max:
        for _, fn in schedules:
            fn(state.t, state)

    assert state.grid.item_count() + state.carried_count() == len(dataset), \
        "item conservation violated"
    assert state.carried_count() == 0, "drain left a laden agent"
    return state


def _force_place_leftovers(state: SimState) -> None:
    """Place still-carried items on the nearest empty cell (toroidal Chebyshev
    distance, ties broken row-major)."""
    side = state.grid.side
    for a in range(state.agent_r.shape[0]):
        carried = int(state.agent_carry[a])
        if carried < 0:
            continue
        ar, ac = int(state.agent_r[a]), int(state.agent_c[a])
        best = None
        for r in range(side):
            dr = abs(r - ar)
            dr = min(dr, side - dr)
            for c in range(side):
                if state.grid.items[r, c] != EMPTY:
                    continue
                dc = abs(c - ac)
                dc = min(dc, side - dc)
                dist = max(dr, dc)
                if best is None or dist < best[0]:
                    best = (dist, r, c)
        if best is None:
            raise RuntimeError("no empty cell available for a carried item")
        state.grid.items[best[1], best[2]] = carried
        state.agent_carry[a] = EMPTY
