"""Howard's policy iteration for mean-payoff DMDPs.

Each iteration evaluates the current policy exactly and then applies the
Bellman operator: every vertex picks the successor with the lexicographically
largest appraisal ``(val(u), w(v, u) - val(u) + pot(u))``. Ties keep the
current choice when it is a maximizer and otherwise go to the least index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence, TextIO

import numpy as np

from .dmdp import Dmdp, Policy, check_policy
from .evaluation import Evaluation, evaluate, format_rational

INIT_MODES = ("lowest-index", "greedy-weight")
TIE_RULES = ("incumbent", "least-index", "greatest-index")


class Appraisal(NamedTuple):
    """Ordered lexicographically: gain first, then bias."""

    gain: Fraction
    bias: Fraction


class IterationLimitError(RuntimeError):
    def __init__(self, limit: int, trace: "IterationTrace"):
        self.limit = limit
        self.trace = trace
        super().__init__(
            f"no fixpoint after {limit} Bellman applications "
            f"(last policy {list(trace.steps[-1].policy) if trace.steps else None})"
        )


@dataclass(frozen=True)
class TraceStep:
    policy: Policy
    evaluation: Evaluation
    switched: frozenset[int]

    def to_json(self, k: int) -> dict:
        return {
            "k": k,
            "policy": list(self.policy),
            "val": [format_rational(x) for x in self.evaluation.val],
            "pot": [format_rational(x) for x in self.evaluation.pot],
            "switched": sorted(self.switched),
        }


@dataclass
class IterationTrace:
    steps: list[TraceStep] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        """Number of Bellman applications, the fixpoint-confirming one included."""
        return len(self.steps)

    @property
    def policies(self) -> list[Policy]:
        return [s.policy for s in self.steps]

    @property
    def final(self) -> TraceStep:
        return self.steps[-1]

    def write_jsonl(self, fh: TextIO) -> None:
        for k, step in enumerate(self.steps):
            fh.write(json.dumps(step.to_json(k)) + "\n")


def appraise(d: Dmdp, e: Evaluation, v: int, u: int) -> Appraisal:
    w = d.weight(v, u)
    return Appraisal(e.val[u], w - e.val[u] + e.pot[u])


def improve(d: Dmdp, policy: Policy, e: Evaluation, tie_rule: str = "incumbent") -> Policy:
    """One Bellman step given the evaluation ``e`` of ``policy``."""
    if tie_rule not in TIE_RULES:
        raise ValueError(f"unknown tie rule {tie_rule!r}")
    fast = _improve_scaled(d, policy, e, tie_rule)
    return fast if fast is not None else improve_exact(d, policy, e, tie_rule)


_INT64_SAFE = 2**62


def _improve_scaled(d: Dmdp, policy: Policy, e: Evaluation, tie_rule: str) -> Optional[Policy]:
    """Vectorized Bellman step on values scaled to a common denominator.

    Every val and pot is multiplied by the lcm of their denominators, which
    makes all appraisals int64 integers with the same order. Returns None
    when the scaled magnitudes could overflow int64.
    """
    scale = math.lcm(*(x.denominator for x in e.val), *(x.denominator for x in e.pot))
    gain = [x.numerator * (scale // x.denominator) for x in e.val]
    shift = [p.numerator * (scale // p.denominator) - g for p, g in zip(e.pot, gain)]
    bound = max(map(abs, gain)) + d.max_abs_weight * scale + max(map(abs, shift))
    if bound >= _INT64_SAFE:
        return None

    src, dst, w, starts = d.edge_arrays
    g = np.array(gain, dtype=np.int64)[dst]
    b = w * scale + np.array(shift, dtype=np.int64)[dst]
    top = g == np.maximum.reduceat(g, starts)[src]
    masked = np.where(top, b, np.iinfo(np.int64).min)
    best = top & (masked == np.maximum.reduceat(masked, starts)[src])

    idx = np.arange(len(dst))
    if tie_rule == "greatest-index":
        pick = np.maximum.reduceat(np.where(best, idx, -1), starts)
    else:
        pick = np.minimum.reduceat(np.where(best, idx, len(dst)), starts)
    new = dst[pick]
    if tie_rule == "incumbent":
        current = np.array(policy, dtype=np.int64)
        keep = np.logical_or.reduceat(best & (dst == current[src]), starts)
        new = np.where(keep, current, new)
    return tuple(int(u) for u in new)


def improve_exact(d: Dmdp, policy: Policy, e: Evaluation, tie_rule: str = "incumbent") -> Policy:
    """Bellman step straight from :func:`appraise`, one vertex at a time."""
    new = []
    for v in range(d.n):
        scored = [(appraise(d, e, v, u), u) for u in d.successors(v)]
        best = max(a for a, _ in scored)
        maximizers = [u for a, u in scored if a == best]
        if tie_rule == "incumbent" and policy[v] in maximizers:
            new.append(policy[v])
        elif tie_rule == "greatest-index":
            new.append(maximizers[-1])
        else:
            new.append(maximizers[0])
    return tuple(new)


def bellman(
    d: Dmdp, policy: Sequence[int], tie_rule: str = "incumbent"
) -> tuple[Policy, frozenset[int]]:
    """Apply the Bellman operator; return the new policy and the switched vertices."""
    policy = check_policy(d, policy)
    new = improve(d, policy, evaluate(d, policy), tie_rule)
    return new, frozenset(v for v in range(d.n) if new[v] != policy[v])


def initial_policy(d: Dmdp, mode: str = "lowest-index") -> Policy:
    if mode == "lowest-index":
        return tuple(adj[0][0] for adj in d.adjacency)
    if mode == "greedy-weight":
        # max() keeps the first maximizer, and adjacency is sorted by index
        return tuple(max(adj, key=lambda e: e[1])[0] for adj in d.adjacency)
    raise ValueError(f"unknown init mode {mode!r}; expected one of {INIT_MODES}")


def default_iteration_limit(d: Dmdp) -> int:
    return 4 * d.n * d.m


def run_howard(
    d: Dmdp,
    s0: Sequence[int],
    max_iterations: Optional[int] = None,
    tie_rule: str = "incumbent",
) -> IterationTrace:
    policy = check_policy(d, s0)
    limit = default_iteration_limit(d) if max_iterations is None else max_iterations
    trace = IterationTrace()
    while True:
        if trace.iterations >= limit:
            raise IterationLimitError(limit, trace)
        e = evaluate(d, policy)
        new = improve(d, policy, e, tie_rule)
        switched = frozenset(v for v in range(d.n) if new[v] != policy[v])
        trace.steps.append(TraceStep(policy, e, switched))
        if not switched:
            return trace
        policy = new


def solve(d: Dmdp, init: str = "lowest-index", **kwargs) -> IterationTrace:
    return run_howard(d, initial_policy(d, init), **kwargs)


def is_fixpoint_optimal(d: Dmdp, policy: Sequence[int], e: Optional[Evaluation] = None) -> bool:
    """True iff no edge has a strictly larger appraisal than the chosen one."""
    e = evaluate(d, policy) if e is None else e
    for v in range(d.n):
        chosen = appraise(d, e, v, policy[v])
        if any(appraise(d, e, v, u) > chosen for u in d.successors(v)):
            return False
    return True


def trace_violations(trace: IterationTrace) -> Iterable[str]:
    """Monotonicity and no-repeat checks over a trace; yields a message per violation."""
    seen = set()
    for k, step in enumerate(trace.steps):
        if step.policy in seen:
            yield f"policy repeats at step {k}"
        seen.add(step.policy)
        if k:
            prev = trace.steps[k - 1].evaluation.val
            for v, (a, b) in enumerate(zip(prev, step.evaluation.val)):
                if b < a:
                    yield f"val of vertex {v} decreases at step {k}: {a} -> {b}"
