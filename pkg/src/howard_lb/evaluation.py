"""Exact evaluation of positional policies.

Under a positional policy every run is lasso-shaped: a cycle-free path
followed by a simple cycle repeated forever. The value of a vertex is the
mean weight of that cycle; its potential is the sum of ``w - val`` along the
path from the vertex to the cycle head (least-index cycle vertex).

Results are :class:`fractions.Fraction`; denominators divide the cycle
length.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .dmdp import Dmdp, check_policy

Rational = Fraction


def format_rational(x: Fraction) -> str:
    """``p/q`` in lowest terms, or ``p`` when the denominator is 1."""
    return str(Fraction(x))


def parse_rational(text: str) -> Fraction:
    return Fraction(text)


@dataclass(frozen=True)
class LassoRun:
    path: tuple[int, ...]
    cycle: tuple[int, ...]

    @property
    def head(self) -> int:
        return self.cycle[0]


@dataclass(frozen=True)
class Evaluation:
    val: tuple[Fraction, ...]
    pot: tuple[Fraction, ...]

    def to_json(self) -> dict:
        return {
            "val": [format_rational(x) for x in self.val],
            "pot": [format_rational(x) for x in self.pot],
        }


def decompose(d: Dmdp, policy: Sequence[int], v: int) -> LassoRun:
    """Split the run from ``v`` under ``policy`` into path and head-first cycle."""
    policy = check_policy(d, policy)
    run: list[int] = []
    position: dict[int, int] = {}
    x = v
    while x not in position:
        position[x] = len(run)
        run.append(x)
        x = policy[x]
    loop = run[position[x]:]
    head = min(loop)
    start = position[head]
    k = loop.index(head)
    return LassoRun(path=tuple(run[:start]), cycle=tuple(loop[k:] + loop[:k]))


def evaluate(d: Dmdp, policy: Sequence[int]) -> Evaluation:
    """Values and potentials of every vertex in one pass over the policy graph.

    For a vertex at distance ``L`` from its head, with weight sum ``S_path``
    along the way, and a cycle of length ``c`` and weight sum ``S``, the
    potential is ``(c * S_path - L * S) / c``; sums stay integral until then.
    """
    policy = check_policy(d, policy)
    n = d.n
    # per vertex: (cycle weight sum, cycle length, path weight sum, path length)
    info: list = [None] * n
    on_walk = [False] * n

    for root in range(n):
        if info[root] is not None:
            continue
        walk = []
        x = root
        while info[x] is None and not on_walk[x]:
            on_walk[x] = True
            walk.append(x)
            x = policy[x]

        if on_walk[x]:
            loop = walk[walk.index(x):]
            del walk[len(walk) - len(loop):]
            total = sum(d.weight(y, policy[y]) for y in loop)
            c = len(loop)
            k = loop.index(min(loop))
            loop = loop[k:] + loop[:k]
            for y in loop:
                on_walk[y] = False
            info[loop[0]] = (total, c, 0, 0)
            for y in reversed(loop[1:]):
                _, _, s_next, l_next = info[policy[y]]
                info[y] = (total, c, d.weight(y, policy[y]) + s_next, l_next + 1)

        for y in reversed(walk):
            on_walk[y] = False
            total, c, s_next, l_next = info[policy[y]]
            info[y] = (total, c, d.weight(y, policy[y]) + s_next, l_next + 1)

    val, pot = [], []
    means: dict[tuple[int, int], Fraction] = {}
    for total, c, s_path, length in info:
        mean = means.get((total, c))
        if mean is None:
            mean = means[total, c] = Fraction(total, c)
        val.append(mean)
        pot.append(Fraction(c * s_path - length * total, c))
    return Evaluation(val=tuple(val), pot=tuple(pot))


def evaluate_by_lasso(d: Dmdp, policy: Sequence[int]) -> Evaluation:
    """Reference evaluation: decompose each vertex's run and sum directly."""
    policy = check_policy(d, policy)
    vals, pots = [], []
    for v in range(d.n):
        lasso = decompose(d, policy, v)
        cyc = lasso.cycle
        total = sum(d.weight(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc)))
        mean = Fraction(total, len(cyc))
        walk = lasso.path + (lasso.head,)
        pots.append(sum((d.weight(a, b) - mean for a, b in zip(walk, walk[1:])), Fraction(0)))
        vals.append(mean)
    return Evaluation(val=tuple(vals), pot=tuple(pots))


def values_equal(a: Evaluation, b: Evaluation) -> bool:
    if len(a.val) != len(b.val) or len(a.pot) != len(b.pot):
        raise ValueError("evaluations cover different vertex sets")
    return a.val == b.val and a.pot == b.pot


def invariant_violations(d: Dmdp, policy: Sequence[int], e: Evaluation) -> list[str]:
    """Check the harmonic equations of ``e`` against ``policy``; empty when all hold."""
    policy = check_policy(d, policy)
    problems = []
    heads = set()
    for v in range(d.n):
        lasso = decompose(d, policy, v)
        heads.add(lasso.head)
        if e.val[v] != e.val[policy[v]]:
            problems.append(f"val changes along the policy edge {v} -> {policy[v]}")
    for h in heads:
        if e.pot[h] != 0:
            problems.append(f"head {h} has potential {e.pot[h]}")
        cyc = decompose(d, policy, h).cycle
        drift = sum(d.weight(x, policy[x]) - e.val[x] for x in cyc)
        if drift != 0:
            problems.append(f"cycle through {h} has residual {drift}")
    for v in range(d.n):
        if v in heads:
            continue
        u = policy[v]
        if e.pot[v] != d.weight(v, u) - e.val[v] + e.pot[u]:
            problems.append(f"potential recurrence fails at {v}")
    return problems
