"""Acceptance suite: eight end-to-end criteria at their pinned tolerances.

Each test records one ``PASS``/``FAIL`` line before asserting; pytest
prints the collected lines in its terminal summary.  Running
``python tests/test_acceptance.py`` performs the same checks without pytest
and exits non-zero if any criterion fails.
"""

import itertools
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))

from oracles import MODE_TABLE, brute_force_survivors, formula_weight  # noqa: E402
from wsnais.ais import (AffinityConfig, Bitstring, BoxSpace, ClonalParams, Detector,  # noqa: E402
                        Population, Scheme, all_bitstrings, allocate_clones, clonal_step,
                        negative_selection)
from wsnais.harness import render_metrics, run_scenario  # noqa: E402
from wsnais.optimizer import GLOBAL_OPTIMUM, fitness, grid_oracle, optimize_seeds  # noqa: E402
from wsnais.response import (DrainConfig, Mode, ModeEvent, run_confrontation,  # noqa: E402
                             transition_mode)
from wsnais.scenario import benchmark_scenario  # noqa: E402
from wsnais.tracking import (CLOSER, FARTHER, Particle, TrackingConfig, case_weight,  # noqa: E402
                             reweigh_particles)
from wsnais.world import Node, Position, Role, WorldState, make_credential  # noqa: E402

RESULTS: list[str] = []


def report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS.append(line)
    if __name__ == "__main__":
        print(line, flush=True)
    assert ok, detail


def test_1_fitness_optimum():
    start = time.perf_counter()
    runs = optimize_seeds(ClonalParams(50, 20, 20, 80.0, 5, 600), range(100))
    elapsed = time.perf_counter() - start
    hits = sum(abs(r.best.fitness - 0.87890625) <= 0.01 for r in runs)
    report(1, hits >= 90 and elapsed < 5.0,
           f"{hits}/100 seeds within 0.01 of 0.87890625 in {elapsed:.2f}s")


def test_2_grid_oracle():
    x, y, f = grid_oracle(1000)
    t = np.random.default_rng(2).uniform(0, 1, 100)
    edges = np.concatenate([fitness(0.0, t), fitness(1.0, t), fitness(t, 0.0), fitness(t, 1.0)])
    ok = (x, y) == (0.5, 0.5) and abs(f - 0.87890625) <= 1e-9 and f == GLOBAL_OPTIMUM
    ok = ok and len(edges) == 400 and bool(np.all(edges == 0.0))
    report(2, ok, f"grid_oracle(1000) = ({x}, {y}, {f!r}); {len(edges)} edge points all zero")


def test_3_negative_selection_oracle():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(100):
        n = int(rng.integers(1, 9))
        r = int(rng.integers(1, n + 1))
        k = int(rng.integers(0, min(6, 1 << n) + 1))
        self_strs = sorted({format(int(v), f"0{n}b") for v in rng.integers(0, 1 << n, k)})
        config = AffinityConfig(Scheme.R_CONTIGUOUS, r, 0.8, n)
        found = negative_selection([Bitstring.from_str(s) for s in self_strs], 1 << n, config,
                                   1 << n, candidates=all_bitstrings(n))
        if [str(d.pattern) for d in found] != brute_force_survivors(n, self_strs, r):
            mismatches += 1
    config = AffinityConfig(Scheme.R_CONTIGUOUS, 2, 0.8, 4)
    four = [str(d.pattern) for d in negative_selection(
        [Bitstring.from_str("0000")], 16, config, 16, candidates=all_bitstrings(4))]
    no_adjacent_zeros = [s for s in (format(v, "04b") for v in range(16)) if "00" not in s]
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and four == no_adjacent_zeros and len(four) == 8 and elapsed < 1.0
    report(3, ok, f"{100 - mismatches}/100 random cases equal brute force; length-4 case "
                  f"gives {len(four)} survivors; {elapsed:.2f}s")


def test_4_case_weights():
    rng = np.random.default_rng(4)
    config = TrackingConfig()
    floor = config.floor_weight
    bad = []
    for trial in range(10_000):
        s, a, b = (Position(*rng.uniform(0, 1, 2)) for _ in range(3))
        p = Particle(a, b, 1.0)
        sp, sc = (int(v) for v in rng.choice([CLOSER, FARTHER], 2))
        w = case_weight(s, sp, sc, p, config.threshold, floor)
        if not floor <= w <= 1.0:
            bad.append(f"range {trial}")
        expect = formula_weight(s.as_tuple(), a.as_tuple(), b.as_tuple(), sp, sc,
                                config.threshold, floor)
        if not math.isclose(w, expect, rel_tol=1e-12):
            bad.append(f"oracle {trial}")
        if case_weight(s, sp, -sp, p, config.threshold, floor) != 1.0:
            bad.append(f"flip {trial}")
        if trial % 10 == 0:
            sensors = [Node(i, Role.FRIEND, Position(*rng.uniform(0, 1, 2)), 100.0,
                            make_credential(i)) for i in range(int(rng.integers(1, 5)))]
            parts = [Particle(Position(*rng.uniform(0, 1, 2)), Position(*rng.uniform(0, 1, 2)),
                              1.0) for _ in range(int(rng.integers(1, 20)))]
            prev = [int(v) for v in rng.choice([CLOSER, FARTHER], len(sensors))]
            curr = [int(v) for v in rng.choice([CLOSER, FARTHER], len(sensors))]
            out = reweigh_particles(sensors, prev, curr, parts, config)
            if abs(math.fsum(q.weight for q in out) - 1.0) > 1e-12:
                bad.append(f"sum {trial}")
            if [(q.prev_position, q.curr_position) for q in out] != \
                    [(q.prev_position, q.curr_position) for q in parts]:
                bad.append(f"order {trial}")
    report(4, not bad, f"10000 geometries, {len(bad)} violations {bad[:3]}")


def test_5_admission_exactness():
    texts, summaries = [], []
    for _ in range(3):
        result = run_scenario(benchmark_scenario())
        texts.append(render_metrics(result))
        summaries.append(result.summary)
    s = summaries[0]
    ok = (s["nonself_count"], s["detected_count"]) == (20, 20) \
        and (s["self_count"], s["false_positive_count"]) == (30, 0) \
        and texts[0] == texts[1] == texts[2]
    report(5, ok, f"detection {s['detected_count']}/{s['nonself_count']}, false positives "
                  f"{s['false_positive_count']}/{s['self_count']}, 3 runs bytewise equal: "
                  f"{texts[0] == texts[1] == texts[2]}")


def test_6_drain_closed_form():
    rng = np.random.default_rng(6)
    cfg = AffinityConfig(length=16, r=4)
    bad = []
    for trial in range(1000):
        e0 = float(rng.uniform(0.01, 500))
        k = int(rng.integers(1, 9))
        rate = int(rng.integers(1, 5))
        c = float(rng.uniform(0.1, 10))
        nodes = {99: Node(99, Role.HOSTILE, Position(0.5, 0.5), e0, make_credential(99))}
        for i in range(1, k + 1):
            nodes[i] = Node(i, Role.FRIEND, Position(0.5, 0.5 + 0.001 * i), 100.0,
                            make_credential(i))
        detectors = {i: Detector(Bitstring.from_str("1010101010101010")) for i in range(1, k + 1)}
        _, rep = run_confrontation(WorldState(nodes), 99, detectors, cfg,
                                   DrainConfig(c, rate, 0.1, 0.0))
        expected = math.ceil(Fraction(e0) / (k * rate * Fraction(c)))
        h = rep.energy_history
        if rep.ticks_to_neutralize != expected:
            bad.append(f"ticks {trial}: {rep.ticks_to_neutralize} != {expected}")
        if any(later > earlier for earlier, later in zip(h, h[1:])):
            bad.append(f"monotone {trial}")
    report(6, not bad, f"1000 drain tuples, {len(bad)} violations {bad[:3]}")


def test_7_mode_machine():
    table_ok = all(
        transition_mode(m, e).value == MODE_TABLE.get((m.value, e.value), m.value)
        for m in Mode for e in ModeEvent)
    cells = len(Mode) * len(ModeEvent)
    reach_ok = True
    sequences = 0
    for n in range(1, 6):
        for seq in itertools.product(ModeEvent, repeat=n):
            sequences += 1
            mode = Mode.SENSING
            for e in seq:
                nxt = transition_mode(mode, e)
                if nxt is Mode.RESPONSE and mode not in (Mode.RECOGNITION, Mode.RESPONSE):
                    reach_ok = False
                mode = nxt
    report(7, table_ok and reach_ok and cells == 12,
           f"{cells}-cell table matches: {table_ok}; {sequences} event sequences, Response "
           f"only after Recognition: {reach_ok}")


def _bump(g):
    return np.exp(-np.sum((g - 0.3) ** 2, axis=1))


def test_8_clonal_steps():
    rng = np.random.default_rng(8)
    bad = []
    for trial in range(500):
        n = int(rng.integers(2, 13))
        params = ClonalParams(n, int(rng.integers(1, n + 1)), int(rng.integers(1, 31)),
                              float(rng.uniform(0, 100)), int(rng.integers(1, n)), 5)
        g = rng.uniform(0, 1, (n, 2))
        pop = Population(g, _bump(g))
        step = clonal_step(pop, _bump, params, rng, BoxSpace())
        top = np.sort(pop.affinities)[::-1][:params.select_count]
        if len(step.population.affinities) != n or step.population.genomes.shape != (n, 2):
            bad.append(f"size {trial}")
        if sum(step.clone_counts) != params.clone_budget:
            bad.append(f"budget {trial}")
        if step.clone_counts != sorted(step.clone_counts, reverse=True) or \
                step.clone_counts != allocate_clones(top, params.clone_budget):
            bad.append(f"order {trial}")
        if step.memory[0][1] < pop.affinities.max():
            bad.append(f"memory {trial}")
    report(8, not bad, f"500 clonal steps, {len(bad)} violations {bad[:3]}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
