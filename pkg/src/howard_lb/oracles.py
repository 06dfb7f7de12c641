"""Independent optimal-value oracles and a seeded random instance generator.

``optimal_values`` condenses the graph into strongly connected components,
runs Karp's maximum-mean-cycle recurrence inside each cyclic component and
propagates the best reachable mean backwards. ``brute_force_values``
enumerates every positional policy. Neither shares code with the policy
iteration path except :func:`evaluation.evaluate` in the brute force.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import networkx as nx

from .dmdp import Dmdp, Policy
from .evaluation import evaluate

DEFAULT_POLICY_SPACE_LIMIT = 10**6


class PolicySpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OptimalValues:
    val: tuple[Fraction, ...]


def karp_max_mean_cycle(d: Dmdp, component: Iterable[int]) -> Fraction:
    """Maximum cycle mean within the subgraph induced by ``component``.

    Karp's recurrence with a virtual source joined to every member by a
    0-weight edge: ``D_k(v)`` is the heaviest k-edge walk ending at ``v``,
    and the answer is ``max_v min_k (D_N(v) - D_k(v)) / (N - k)``.
    """
    members = sorted(set(component))
    local = {v: i for i, v in enumerate(members)}
    N = len(members)
    inner = [(local[v], local[u], w) for v in members for u, w in d.adjacency[v] if u in local]
    if not inner or (N == 1 and not any(a == b for a, b, _ in inner)):
        raise ValueError("component contains no cycle")

    # None stands for minus infinity (no walk of that length)
    D: list[list[Optional[int]]] = [[0] * N]
    for _ in range(N):
        prev = D[-1]
        row: list[Optional[int]] = [None] * N
        for a, b, w in inner:
            if prev[a] is not None and (row[b] is None or prev[a] + w > row[b]):
                row[b] = prev[a] + w
        D.append(row)

    best: Optional[Fraction] = None
    for v in range(N):
        if D[N][v] is None:
            continue
        worst = min(
            Fraction(D[N][v] - D[k][v], N - k) for k in range(N) if D[k][v] is not None
        )
        if best is None or worst > best:
            best = worst
    if best is None:
        raise ValueError("component contains no cycle")
    return best


def _graph(d: Dmdp) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(d.n))
    g.add_edges_from((v, u) for v, u, _ in d.edges())
    return g


def optimal_values(d: Dmdp) -> OptimalValues:
    """val(v) = best mean over cycles reachable from v."""
    cond = nx.condensation(_graph(d))
    best: dict[int, Fraction] = {}
    for c in reversed(list(nx.topological_sort(cond))):
        members = cond.nodes[c]["members"]
        candidates = [best[s] for s in cond.successors(c)]
        v0 = next(iter(members))
        if len(members) > 1 or d.has_edge(v0, v0):
            candidates.append(karp_max_mean_cycle(d, members))
        # out-degree >= 1 everywhere, so a sink component is always cyclic
        best[c] = max(candidates)
    mapping = cond.graph["mapping"]
    return OptimalValues(tuple(best[mapping[v]] for v in range(d.n)))


def brute_force_values(d: Dmdp, policy_space_limit: int = DEFAULT_POLICY_SPACE_LIMIT) -> OptimalValues:
    size = d.policy_space_size()
    if size > policy_space_limit:
        raise PolicySpaceTooLarge(f"{size} policies exceed the limit {policy_space_limit}")
    best = [None] * d.n
    for policy in itertools.product(*(d.successors(v) for v in range(d.n))):
        for v, x in enumerate(evaluate(d, policy).val):
            if best[v] is None or x > best[v]:
                best[v] = x
    return OptimalValues(tuple(best))


def max_cycle_mean_by_enumeration(d: Dmdp, component: Iterable[int]) -> Fraction:
    """Maximum mean over all simple cycles inside ``component``."""
    members = set(component)
    g = _graph(d).subgraph(members)
    means = [
        Fraction(sum(d.weight(c[i], c[(i + 1) % len(c)]) for i in range(len(c))), len(c))
        for c in nx.simple_cycles(g)
    ]
    if not means:
        raise ValueError("component contains no cycle")
    return max(means)


@dataclass(frozen=True)
class RandomSpec:
    n: int
    out_degree_range: tuple[int, int] = (1, 3)
    weight_range: tuple[int, int] = (-9, 9)
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.out_degree_range
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 1 <= lo <= hi:
            raise ValueError(f"bad out-degree range {self.out_degree_range}")
        if self.weight_range[0] > self.weight_range[1]:
            raise ValueError(f"bad weight range {self.weight_range}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def random_dmdp(spec: RandomSpec) -> Dmdp:
    lo, hi = spec.out_degree_range
    if hi > spec.n:
        raise ValueError(f"out-degree up to {hi} impossible with {spec.n} vertices")
    rng = random.Random(spec.seed)
    edges = []
    for v in range(spec.n):
        for u in sorted(rng.sample(range(spec.n), rng.randint(lo, hi))):
            edges.append((v, u, rng.randint(*spec.weight_range)))
    return Dmdp.from_edges([f"v{i}" for i in range(spec.n)], edges)


def random_policy(d: Dmdp, rng: random.Random) -> Policy:
    return tuple(rng.choice(d.successors(v)) for v in range(d.n))
