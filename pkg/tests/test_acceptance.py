"""Acceptance criteria, one test per criterion.

Each test appends a PASS/FAIL line to the "acceptance criteria" section of
the pytest summary before asserting, so a failing criterion still reports
its measured numbers.
"""

import random
import time

import pytest

from conftest import ACCEPTANCE_LINES
from howard_lb.cli import instance_seeds, verify_one
from howard_lb.evaluation import evaluate, invariant_violations
from howard_lb.howard import initial_policy, run_howard, trace_violations
from howard_lb.lowerbound import (
    PnLayout,
    check_weight_inequalities,
    expected_edge_count,
    expected_iteration_count,
    expected_sequence,
    gen_pn,
    stated_edge_count,
    verify_lemma,
)
from howard_lb.oracles import RandomSpec, brute_force_values, optimal_values, random_dmdp, random_policy

N_MAX = 60
CORPUS_SEED = 42
CORPUS_SIZE = 500
PROPERTY_SEED = 7
PROPERTY_PAIRS = 200


def record(number, title, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")


@pytest.fixture(scope="session")
def lowest_traces():
    start = time.perf_counter()
    traces = {n: run_howard(gen_pn(n), initial_policy(gen_pn(n), "lowest-index"))
              for n in range(1, N_MAX + 1)}
    return traces, time.perf_counter() - start


@pytest.fixture(scope="session")
def greedy_traces():
    return {n: run_howard(gen_pn(n), initial_policy(gen_pn(n), "greedy-weight"))
            for n in range(2, N_MAX + 1)}


@pytest.fixture(scope="session")
def corpus():
    rows = []
    start = time.perf_counter()
    for seed in instance_seeds(CORPUS_SEED, CORPUS_SIZE):
        d = random_dmdp(RandomSpec(8, (1, 3), (-9, 9), seed))
        traces = {init: run_howard(d, initial_policy(d, init))
                  for init in ("lowest-index", "greedy-weight")}
        rows.append((seed, d, traces))
    return rows, time.perf_counter() - start


def test_criterion_1_iteration_count(lowest_traces):
    traces, elapsed = lowest_traces
    wrong = {n: (t.iterations, expected_iteration_count(n))
             for n, t in traces.items() if t.iterations != expected_iteration_count(n)}
    ok = not wrong and elapsed < 30
    record(1, "iteration count (n^2+7n-6)/2 for n=1..60", ok,
           f"{len(traces) - len(wrong)}/{len(traces)} exact, n=60 -> {traces[N_MAX].iterations}, "
           f"{elapsed:.1f}s")
    assert not wrong
    assert elapsed < 30


def test_criterion_2_trace_and_lemma(lowest_traces):
    traces, _ = lowest_traces
    start = time.perf_counter()
    bad_trace, bad_lemma = [], []
    for n in range(1, 16):
        if traces[n].policies != expected_sequence(n):
            bad_trace.append(n)
        rep = verify_lemma(n)
        failing = [k for k, r in rep.items.items() if not r.passed]
        if failing:
            bad_lemma.append((n, failing))
    elapsed = time.perf_counter() - start
    ok = not bad_trace and not bad_lemma and elapsed < 10
    record(2, "trace equals predicted sequence and lemma items hold for n=1..15", ok,
           f"trace mismatch at n={bad_trace or 'none'}, lemma failures {bad_lemma or 'none'}, "
           f"{elapsed:.1f}s")
    assert not bad_trace
    assert not bad_lemma
    assert elapsed < 10


def test_criterion_3_greedy_init(lowest_traces, greedy_traces):
    lowest, _ = lowest_traces
    bad = []
    for n, t in greedy_traces.items():
        sigma_12 = expected_sequence(n)[2]
        if t.iterations != lowest[n].iterations - 1 or t.policies[1] != sigma_12:
            bad.append(n)
    record(3, "greedy init saves one iteration and reaches sigma_{1,2} for n=2..60", not bad,
           f"{len(greedy_traces) - len(bad)}/{len(greedy_traces)} ok"
           + (f", failing n={bad}" if bad else ""))
    assert not bad


def test_criterion_4_optimal_value(lowest_traces):
    traces, _ = lowest_traces
    bad = []
    for n in range(1, 31):
        target = n * (n + 1) + n
        final = traces[n].final.evaluation.val
        if set(final) != {target} or final != optimal_values(gen_pn(n)).val:
            bad.append(n)
    record(4, "terminal val = n(n+1)+n = Karp optimum for n=1..30", not bad,
           "all 30 exact" if not bad else f"failing n={bad}")
    assert not bad


def test_criterion_5_differential(corpus):
    rows, _ = corpus
    mismatches = []
    for seed, d, traces in rows:
        opt = optimal_values(d).val
        brute = brute_force_values(d).val
        if opt != brute:
            mismatches.append((seed, "oracles disagree"))
        for init, t in traces.items():
            if t.final.evaluation.val != opt:
                mismatches.append((seed, init))
    record(5, f"{CORPUS_SIZE} random DMDPs: Howard = Karp = brute force", not mismatches,
           f"{len(mismatches)} mismatches")
    assert not mismatches


def test_criterion_6_harmonic_equations():
    rng = random.Random(PROPERTY_SEED)
    failures = []
    for _ in range(PROPERTY_PAIRS):
        spec = RandomSpec(rng.randint(1, 8), (1, 3), (-9, 9), rng.getrandbits(64))
        spec = RandomSpec(spec.n, (1, min(3, spec.n)), spec.weight_range, spec.seed)
        d = random_dmdp(spec)
        policy = random_policy(d, rng)
        problems = invariant_violations(d, policy, evaluate(d, policy))
        if problems:
            failures.append((spec.seed, policy, problems))
    record(6, f"evaluation invariants on {PROPERTY_PAIRS} random (instance, policy) pairs",
           not failures, f"{len(failures)} violating pairs")
    assert not failures


def test_criterion_7_structure():
    bad = []
    for n in range(1, N_MAX + 1):
        d = gen_pn(n)
        lay = PnLayout(n)
        if d.n != 2 * n or d.m != expected_edge_count(n) or d.m != (5 * n * n + n) // 2:
            bad.append((n, "size"))
        if d.max_abs_weight != (n + 1) ** 2 or lay.bar_w != (n + 1) ** 2:
            bad.append((n, "max weight"))
        if not check_weight_inequalities(n).ok:
            bad.append((n, "inequalities"))
    structure = verify_one(3, "lowest-index", "literal", "incumbent")["structure"]
    surfaced = (structure["edges"] == 24 and
                structure["edges_stated_in_theorem"] == stated_edge_count(3) == 15)
    ok = not bad and surfaced
    record(7, "P_n structure, weights and inequalities for n=1..60", ok,
           f"{len(bad)} problems, stated edge count surfaced: {surfaced}")
    assert not bad
    assert surfaced


def test_criterion_8_monotonicity(lowest_traces, greedy_traces, corpus):
    traces = list(lowest_traces[0].values()) + list(greedy_traces.values())
    traces += [t for _, _, ts in corpus[0] for t in ts.values()]
    bad = [msg for t in traces for msg in trace_violations(t)]
    record(8, "val nondecreasing and no repeated policy on every trace", not bad,
           f"{len(traces)} traces, {len(bad)} violations")
    assert not bad


def test_criterion_9_conjecture_scan(corpus):
    rows, elapsed = corpus
    findings = [(seed, init, t.iterations, d.m)
                for seed, d, ts in rows for init, t in ts.items() if t.iterations > d.m]
    worst = max(t.iterations / d.m for _, d, ts in rows for t in ts.values())
    record(9, "iterations <= m over the random corpus (scan)", elapsed < 60,
           f"{len(findings)} findings, max iterations/m = {worst:.3f}, {elapsed:.1f}s")
    # findings are reported, not failed
    assert elapsed < 60
