"""End-to-end acceptance checks, one test per criterion.

Each test prints a single "[ACCEPTANCE] criterion N ...: PASS/FAIL" line
(visible with -s or on failure) and asserts the same condition. The slow
full-scale runs are shared through session fixtures in conftest.py.
"""
import json
import math
import os
import re

import numpy as np
import pytest
import scipy.stats

from acluster import behavior, metrics, pheromone
from acluster.cli import main as cli_main
from acluster.core import Dataset, SimConfig
from acluster.engine import SimState, Agent, init_state, step, try_drop, try_pick
from acluster.grid import EMPTY, Grid
from acluster.rng import make_stream

from conftest import DESK_GRID


def verdict(n: int, name: str, ok: bool, detail: str = "") -> None:
    line = f"[ACCEPTANCE] criterion {n:2d} ({name}): {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  [{detail}]"
    print(line)
    assert ok, line


def _bare_state(side, n_agents, dataset, cfg, agent_cells, item_cells=()):
    """Hand-built SimState: explicit agent cells, optional (cell -> item id)."""
    grid = Grid(side)
    for (r, c), oid in item_cells:
        grid.items[r, c] = oid
    agent_r = np.array([r for r, _ in agent_cells], dtype=np.int64)
    agent_c = np.array([c for _, c in agent_cells], dtype=np.int64)
    for i, (r, c) in enumerate(agent_cells):
        grid.agents[r, c] = i
    n = len(agent_cells)
    return SimState(grid, dataset, cfg, agent_r, agent_c,
                    np.zeros(n, dtype=np.int64), np.full(n, -1, dtype=np.int64),
                    np.zeros(n, dtype=np.int64), make_stream(cfg.seed))


# --- 1: entropy decline -----------------------------------------------------

def test_criterion_01_entropy_decline(desk_run, full_run):
    details = []
    ok = True
    for ftype in (1, 2, 4):
        e0, ef = desk_run(ftype, 1)
        details.append(f"type{ftype} {ef:.3f}<{0.5 * e0:.3f}")
        ok = ok and ef < 0.5 * e0

    _, _, series, _ = full_run
    ts = np.array([t for t, _ in series])
    es = np.array([e for _, e in series])
    ok = ok and es[ts == 10**6][0] < 0.5 * es[ts == 0][0]
    # smoothed trend after t=1e5: mean over 1e4-step windows must not climb
    # beyond noise (3 sigma of window-to-window jitter) and must slope down
    late = es[(ts > 10**5) & (ts <= 10**6)][:900].reshape(90, 10).mean(axis=1)
    diffs = np.diff(late)
    slope = np.polyfit(np.arange(late.size), late, 1)[0]
    details.append(f"max_rise {diffs.max():.4f}<=3x{diffs.std():.4f} slope {slope:.2e}")
    ok = ok and diffs.max() <= 3.0 * diffs.std() and slope <= 0.0
    verdict(1, "entropy decline", ok, "; ".join(details))


# --- 2: type ranking --------------------------------------------------------

def test_criterion_02_type3_is_worst(desk_run):
    medians = {ftype: float(np.median([desk_run(ftype, seed)[1] for seed in range(5)]))
               for ftype in (1, 2, 3, 4)}
    ok = all(medians[3] > medians[f] for f in (1, 2, 4))
    verdict(2, "type #3 ranks worst",
            ok, " ".join(f"t{f}={m:.3f}" for f, m in sorted(medians.items())))


# --- 3: cluster purity ------------------------------------------------------

def test_criterion_03_cluster_purity(full_run, paper_dataset):
    _, state, _, _ = full_run
    report = metrics.extract_clusters(state.grid, paper_dataset)
    purities = [cl.purity for cl in report.clusters if cl.size >= 10]
    mean_purity = float(np.mean(purities))
    verdict(3, "cluster purity", bool(purities) and mean_purity >= 0.8,
            f"{len(purities)} clusters>=10, mean purity {mean_purity:.3f}")


# --- 4: closed-form oracle suite --------------------------------------------

def _relerr(got, want):
    return abs(got - want) / max(abs(want), 1e-300)

def test_criterion_04_closed_form_oracles():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(10_000):
        s, b, g = rng.uniform(0, 50), rng.uniform(0.5, 6), rng.uniform(0, 1)
        worst = max(worst, _relerr(pheromone.weight_pheromone(s, b, g),
                                   math.pow(1.0 + s / (1.0 + g * s), b)))
        n, th, st = rng.integers(0, 30), rng.uniform(0.5, 10), rng.uniform(1.1, 5)
        want = 0.0 if n == 0 else 1.0 / (1.0 + math.pow(th / n, st))
        worst = max(worst, _relerr(behavior.chi(n, th, st), want))
        d, k1, k2 = rng.uniform(0, 3), rng.uniform(0.01, 1), rng.uniform(0.01, 1)
        worst = max(worst, _relerr(behavior.delta_drop(d, k1),
                                   math.pow(1.0 + d / k1, -2)))
        worst = max(worst, _relerr(behavior.epsilon_pick(d, k2),
                                   1.0 if d == 0 and k2 == 0 else
                                   (d * d) / ((k2 + d) * (k2 + d))))
        f = rng.uniform(0, 2)
        pp, pd = behavior.lf_probabilities(f, k1, k2)
        worst = max(worst, _relerr(pp, (k1 / (k1 + f)) ** 2))
        want_pd = 1.0 if f >= k2 else min(1.0, 2.0 * f)
        worst = max(worst, _relerr(pd, want_pd) if want_pd else abs(pd))
        pp, pd = behavior.bm_probabilities(f, k1, k2)
        worst = max(worst, _relerr(pp, (k1 / (k1 + f)) ** 2))
        worst = max(worst, _relerr(pd, (f / (k2 + f)) ** 2) if f else abs(pd))

    # window-density oracle on random occupancy patterns
    feats = np.random.default_rng(1).random((40, 3))
    ds = Dataset(feats)
    for trial in range(300):
        trng = np.random.default_rng(100 + trial)
        side = int(trng.integers(5, 11))
        s = int(trng.choice([3, 5]))
        alpha = float(trng.uniform(0.1, 1.0))
        g = Grid(side)
        cells = trng.permutation(side * side)[: trng.integers(0, 15)]
        for i, cell in enumerate(cells):
            g.items[cell // side, cell % side] = i
        r, c = int(trng.integers(side)), int(trng.integers(side))
        fvec = feats[trng.integers(len(feats))]
        h = s // 2
        acc = 0.0
        for dr in range(-h, h + 1):
            for dc in range(-h, h + 1):
                if dr == dc == 0:
                    continue
                oid = g.items[(r + dr) % side, (c + dc) % side]
                if oid >= 0:
                    d = math.sqrt(sum((feats[oid][k] - fvec[k]) ** 2
                                      for k in range(3)) / 3) / ds.d_max
                    acc += 1.0 - d / alpha
        want = max(0.0, acc / (s * s))
        got = behavior.lf_density_nb(g.items, feats, ds.d_max, r, c,
                                     np.asarray(fvec, dtype=np.float64), s, alpha)
        worst = max(worst, _relerr(got, want) if want else abs(got))

    exact = (
        pheromone.weight_pheromone(1.0, 3.5, 0.2) == (1.0 + 1.0 / 1.2) ** 3.5
        and behavior.chi(5, 5.0, 2.0) == 0.5
        and behavior.delta_drop(0.0, 0.1) == 1.0
        and behavior.epsilon_pick(0.0, 0.3) == 0.0
        and behavior.lf_probabilities(0.0, 0.1, 0.15) == (1.0, 0.0)
    )
    verdict(4, "closed-form oracles", worst <= 1e-12 and exact,
            f"worst rel err {worst:.2e}")


# --- 5: transition normalization + heading-change law ------------------------

def test_criterion_05_transition_probabilities():
    cfg = SimConfig()
    rng = np.random.default_rng(2)
    g = Grid(11)
    worst = 0.0
    for _ in range(100_000):
        g.pheromone[:] = rng.exponential(1.0, size=(11, 11))
        g.agents[:] = EMPTY
        for cell in rng.permutation(121)[: rng.integers(0, 30)]:
            g.agents[cell // 11, cell % 11] = 0
        probs = pheromone.transition_probabilities(
            g, (int(rng.integers(11)), int(rng.integers(11))),
            int(rng.integers(8)), cfg)
        if probs is not None:
            worst = max(worst, abs(float(probs.sum()) - 1.0))

    # end-to-end heading-change histogram on a uniform field: one ant, no
    # items, no deposition or decay, so the field stays flat for 1e6 moves
    flat_cfg = SimConfig(eta=0.0, p_dep=0.0, k_evap=0.0, grid_side=9, n_agents=1)
    ds = Dataset(np.zeros((1, 1)))
    state = _bare_state(9, 1, ds, flat_cfg, [(4, 4)])
    state.grid.pheromone[:] = 1.0
    counts = np.zeros(5, dtype=np.int64)
    for _ in range(1_000_000):
        prev = int(state.agent_head[0])
        step(state, 1)
        counts[pheromone.delta_index(prev, int(state.agent_head[0]))] += 1
    w = pheromone.TURN_WEIGHTS
    expected = np.array([w[0], 2 * w[1], 2 * w[2], 2 * w[3], w[4]])
    expected = expected / expected.sum() * counts.sum()
    chi2, pval = scipy.stats.chisquare(counts, expected)
    verdict(5, "transition normalization + heading law",
            worst <= 1e-12 and pval > 0.01,
            f"worst |sum-1| {worst:.2e}, chi2 p={pval:.3f}")


# --- 6: constant deposition with an empty grid -------------------------------

def test_criterion_06_empty_grid_deposition():
    ds = Dataset(np.zeros((1, 1)))
    cells = [(1, 1), (4, 7), (8, 2)]
    base = SimConfig(eta=0.07, p_dep=0.0, k_evap=0.0, grid_side=9, n_agents=3)
    spiked = SimConfig(eta=0.07, p_dep=1e9, k_evap=0.0, grid_side=9, n_agents=3)
    s1 = _bare_state(9, 3, ds, base, cells)
    s2 = _bare_state(9, 3, ds, spiked, cells)
    ok = True
    detail = ""
    for t in range(1, 201):
        before = float(s1.grid.pheromone.sum())
        step(s1, 1)
        step(s2, 1)
        gain = float(s1.grid.pheromone.sum()) - before
        if abs(gain - 3 * 0.07) > 1e-9:
            ok, detail = False, f"step {t}: gain {gain!r}"
            break
        if not np.array_equal(s1.grid.pheromone, s2.grid.pheromone):
            ok, detail = False, f"step {t}: item term leaked into deposition"
            break
    verdict(6, "deposition is exactly eta on an empty grid", ok,
            detail or "200 steps, p_dep-independent, gain = 3*eta")


# --- 7: entropy metric oracle ------------------------------------------------

def _entropy_oracle(grid, dataset, label):
    side = grid.side
    cells = [(r, c, dataset.labels[grid.items[r, c]] or "all")
             for r in range(side) for c in range(side)
             if grid.items[r, c] != EMPTY]
    mine = [(r, c) for r, c, l in cells if l == label]
    if not mine:
        raise metrics.UndefinedLabelError(label)
    occupied = {(r, c): l for r, c, l in cells}
    e_sum = 0
    for r, c in mine:
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == dc == 0:
                    continue
                if occupied.get(((r + dr) % side, (c + dc) % side)) != label:
                    e_sum += 1
    return e_sum / (len(mine) * 8)


def test_criterion_07_entropy_oracle():
    labels = ["A", "B", "C", "D"]
    ok = True
    rng = np.random.default_rng(5)
    for trial in range(1000):
        side = int(rng.integers(5, 11))
        n_classes = int(rng.integers(2, 5))
        n_items = int(rng.integers(1, side * side // 2))
        ds = Dataset(np.zeros((n_items, 1)),
                     labels=[labels[rng.integers(n_classes)] for _ in range(n_items)])
        g = Grid(side)
        for i, cell in enumerate(rng.permutation(side * side)[:n_items]):
            g.items[cell // side, cell % side] = i
        for label in sorted(set(ds.labels)):
            if metrics.class_entropy(g, ds, label) != _entropy_oracle(g, ds, label):
                ok = False

    g = Grid(9)
    ds = Dataset(np.zeros((10, 1)), labels=["A"] * 10)
    g.items[4, 4] = 0
    worked = metrics.class_entropy(g, ds, "A") == 1.0
    g.items[4, 5] = 1
    worked = worked and metrics.class_entropy(g, ds, "A") == 0.875
    g = Grid(9)
    for i in range(9):
        g.items[3 + i // 3, 3 + i % 3] = i
    worked = worked and metrics.class_entropy(g, ds, "A") == 32 / 72
    verdict(7, "entropy metric oracle", ok and worked,
            "1000 random grids exact + worked configurations")


# --- 8: conservation and byte-level determinism -------------------------------

def test_criterion_08_conservation_and_determinism(full_run, tmp_path):
    _, _, _, violations = full_run
    ok = not violations
    detail = f"{len(violations)} audit violations over 1e6 steps"

    data = tmp_path / "bench.csv"
    cli_main(["generate", "--paper-gaussian", "--seed", "0", "-o", str(data)])
    args = ["run", str(data), "--labels", "--seed", "1", "--tmax", "1000000",
            "--entropy-interval", "10000"]
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert cli_main(args + ["-o", str(out)]) == 0
        outs.append(out)
    manifest = json.loads((outs[0] / "manifest.json").read_text())
    for fname in manifest["outputs"] + ["manifest.json"]:
        b1 = (outs[0] / fname).read_bytes()
        b2 = (outs[1] / fname).read_bytes()
        if b1 != b2:
            ok, detail = False, f"{fname} differs between identical runs"
            break
    else:
        detail += f"; {len(manifest['outputs']) + 1} output files byte-identical"
    verdict(8, "conservation + determinism", ok, detail)


# --- 9: vote law vs Poisson-binomial oracle -----------------------------------

def _vote_prob(ps):
    """P(2*S >= n) for S a sum of independent Bernoulli(ps)."""
    dist = np.zeros(len(ps) + 1)
    dist[0] = 1.0
    for p in ps:
        dist[1:] = dist[1:] * (1 - p) + dist[:-1] * p
        dist[0] *= 1 - p
    return float(sum(dist[v] for v in range(len(ps) + 1) if 2 * v >= len(ps)))


def test_criterion_09_vote_law():
    feats = np.array([[0.0], [0.05], [0.1], [0.2], [0.35], [0.5], [0.8], [1.0],
                      [0.15]])
    ds = Dataset(feats)
    cfg = SimConfig(grid_side=9, n_agents=1)
    trials = 100_000
    ok = True
    details = []
    for occupied in ([0, 1, 2], [1, 3, 5, 7], list(range(8))):
        state = _bare_state(9, 1, ds, cfg, [(4, 4)])
        neigh = state.grid.neighbors8((4, 4))
        item_ids = []
        for slot, k in enumerate(occupied):
            r, c = neigh[k]
            state.grid.items[r, c] = slot  # features[slot]
            item_ids.append(slot)
        n = len(occupied)
        chi_val = behavior.chi(n, cfg.theta_count, cfg.steepness)

        # pick: agent on item 8 (feature 0.15)
        state.grid.items[4, 4] = 8
        ps = []
        for oid in item_ids:
            d = abs(feats[oid, 0] - feats[8, 0]) / ds.d_max
            pp, _ = behavior.compose_probabilities(
                1, 0, chi_val, behavior.epsilon_pick(d, cfg.k2),
                behavior.delta_drop(d, cfg.k1))
            ps.append(pp)
        want = _vote_prob(ps)
        hits = 0
        agent = Agent(state, 0)
        for _ in range(trials):
            if try_pick(state, agent):
                hits += 1
                state.grid.items[4, 4] = 8
                state.agent_carry[0] = -1
        got = hits / trials
        se = math.sqrt(max(want * (1 - want), 1e-12) / trials)
        details.append(f"pick n={n}: {got:.4f} vs {want:.4f}")
        ok = ok and abs(got - want) <= 3 * se

        # drop: same neighborhood, agent laden with item 8, center empty
        state.grid.items[4, 4] = EMPTY
        state.agent_carry[0] = 8
        ps = []
        for oid in item_ids:
            d = abs(feats[oid, 0] - feats[8, 0]) / ds.d_max
            _, pd = behavior.compose_probabilities(
                1, 0, chi_val, behavior.epsilon_pick(d, cfg.k2),
                behavior.delta_drop(d, cfg.k1))
            ps.append(pd)
        want = _vote_prob(ps)
        hits = 0
        for _ in range(trials):
            if try_drop(state, agent):
                hits += 1
                state.grid.items[4, 4] = EMPTY
                state.agent_carry[0] = 8
        got = hits / trials
        se = math.sqrt(max(want * (1 - want), 1e-12) / trials)
        details.append(f"drop n={n}: {got:.4f} vs {want:.4f}")
        ok = ok and abs(got - want) <= 3 * se
    verdict(9, "pick/drop vote law", ok, "; ".join(details))


# --- 10: large sparse-feature run shape ---------------------------------------

def test_criterion_10_large_run_shape(tmp_path):
    rng = np.random.default_rng(9)
    centers = rng.random((7, 50))
    rows = centers[rng.integers(0, 7, size=931)] + rng.normal(0, 0.05, (931, 50))
    data = tmp_path / "docs.csv"
    with open(data, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    out = tmp_path / "out"
    code = cli_main(["run", str(data), "--grid-side", "61", "--agents", "91",
                     "--type", "2", "--k2", "0.3", "--tmax", "1000000",
                     "--entropy-interval", "100000", "--seed", "1",
                     "-o", str(out)])
    ok = code == 0
    listing = (out / "clusters.txt").read_text().splitlines()
    pat = re.compile(r"^\([A-Z]+\) \[size=\d+ majority=\S+ purity=[01]\.\d{3}\] "
                     r"\d+(, \d+)*$")
    ok = ok and listing[0].startswith("# clusters:")
    members = []
    for line in listing[1:]:
        if not pat.match(line):
            ok = False
            break
        members.extend(int(tok) for tok in line.split("] ")[1].split(", "))
    ok = ok and sorted(members) == list(range(931))
    verdict(10, "931x50 run shape and listing format", ok,
            f"exit {code}, {len(listing) - 1} clusters, {len(members)} items listed")
