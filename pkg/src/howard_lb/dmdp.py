"""Deterministic MDPs: data model, text format, size and DOT export.

A DMDP is a directed graph with integer edge weights in which every vertex
has at least one outgoing edge. Vertices are identified by their position in
the declaration order; that order is also the tie-breaking order used by the
Bellman operator.

Text format (one directive per line)::

    # comment
    vertex a
    vertex b
    edge a b 1
    edge b a 1
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

# A positional policy: successor index for each vertex.
Policy = tuple[int, ...]

WEIGHT_LIMIT = 2**62

_NAME_RE = re.compile(r"^[A-Za-z0-9_]+$")


class DmdpError(ValueError):
    """Invalid DMDP structure or malformed input text."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PolicyError(ValueError):
    """A policy that is not total or uses a non-existent edge."""


@dataclass(frozen=True)
class Dmdp:
    """Immutable DMDP.

    ``adjacency[v]`` is the tuple of ``(successor, weight)`` pairs of ``v``,
    sorted by successor index.
    """

    names: tuple[str, ...]
    adjacency: tuple[tuple[tuple[int, int], ...], ...]
    _weights: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        names = tuple(self.names)
        adjacency = tuple(
            tuple(sorted((int(u), int(w)) for u, w in edges))
            for edges in self.adjacency
        )
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "adjacency", adjacency)

        n = len(names)
        if n == 0:
            raise DmdpError("a DMDP needs at least one vertex")
        if len(adjacency) != n:
            raise DmdpError(f"adjacency has {len(adjacency)} rows for {n} vertices")
        if len(set(names)) != n:
            raise DmdpError("duplicate vertex name")
        for name in names:
            if not _NAME_RE.match(name):
                raise DmdpError(f"invalid vertex name {name!r}")

        weights = {}
        for v, edges in enumerate(adjacency):
            if not edges:
                raise DmdpError(f"vertex {names[v]!r} has no outgoing edge")
            for u, w in edges:
                if not 0 <= u < n:
                    raise DmdpError(f"edge {names[v]!r} -> {u} points outside the graph")
                if (v, u) in weights:
                    raise DmdpError(f"duplicate edge {names[v]} -> {names[u]}")
                if abs(w) > WEIGHT_LIMIT:
                    raise DmdpError(f"weight {w} exceeds magnitude limit 2^62")
                weights[v, u] = w
        object.__setattr__(self, "_weights", weights)

    @classmethod
    def from_edges(
        cls, names: Sequence[str], edges: Iterable[tuple[int, int, int]]
    ) -> "Dmdp":
        """Build from ``(source, successor, weight)`` triples."""
        adjacency: list[list[tuple[int, int]]] = [[] for _ in names]
        for v, u, w in edges:
            if not 0 <= v < len(names):
                raise DmdpError(f"edge source {v} outside the graph")
            adjacency[v].append((u, w))
        return cls(tuple(names), tuple(tuple(a) for a in adjacency))

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def m(self) -> int:
        return len(self._weights)

    @cached_property
    def max_abs_weight(self) -> int:
        """W, the largest absolute edge weight."""
        return max(abs(w) for w in self._weights.values())

    @cached_property
    def edge_arrays(self):
        """``(src, dst, weight, starts)`` as int64 arrays; edges grouped by source."""
        src, dst, w = (np.array(col, dtype=np.int64) for col in zip(*self.edges()))
        counts = np.array([len(a) for a in self.adjacency], dtype=np.int64)
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        return src, dst, w, starts

    def successors(self, v: int) -> tuple[int, ...]:
        return tuple(u for u, _ in self.adjacency[v])

    def weight(self, v: int, u: int) -> int:
        try:
            return self._weights[v, u]
        except KeyError:
            raise KeyError(f"no edge {self.names[v]} -> {self.names[u]}") from None

    def has_edge(self, v: int, u: int) -> bool:
        return (v, u) in self._weights

    def edges(self) -> Iterable[tuple[int, int, int]]:
        for v, adj in enumerate(self.adjacency):
            for u, w in adj:
                yield v, u, w

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown vertex {name!r}") from None

    def policy_space_size(self) -> int:
        total = 1
        for adj in self.adjacency:
            total *= len(adj)
        return total


def check_policy(d: Dmdp, policy: Sequence[int]) -> Policy:
    """Return ``policy`` as a tuple after checking it is total and uses edges of ``d``."""
    policy = tuple(policy)
    if len(policy) != d.n:
        raise PolicyError(f"policy has {len(policy)} entries for {d.n} vertices")
    for v, u in enumerate(policy):
        if not d.has_edge(v, u):
            raise PolicyError(f"policy chooses non-edge {v} -> {u}")
    return policy


def bit_contribution(w: int) -> int:
    """ceil(log2 |w|), taken as 0 for w in {-1, 0, 1}."""
    a = abs(w)
    if a <= 1:
        return 0
    return (a - 1).bit_length()


def size_bits(d: Dmdp) -> int:
    """|P| = n + m + sum of ceil(log2 |w|) over edges."""
    return d.n + d.m + sum(bit_contribution(w) for _, _, w in d.edges())


def parse_dmdp(text: str) -> Dmdp:
    names: list[str] = []
    index: dict[str, int] = {}
    edges: list[list[tuple[int, int]]] = []
    seen: set[tuple[int, int]] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "vertex":
            if len(parts) != 2:
                raise DmdpError("expected 'vertex <name>'", lineno)
            name = parts[1]
            if not _NAME_RE.match(name):
                raise DmdpError(f"invalid vertex name {name!r}", lineno)
            if name in index:
                raise DmdpError(f"vertex {name!r} declared twice", lineno)
            index[name] = len(names)
            names.append(name)
            edges.append([])
        elif parts[0] == "edge":
            if len(parts) != 4:
                raise DmdpError("expected 'edge <src> <dst> <weight>'", lineno)
            src, dst, wtext = parts[1:]
            for name in (src, dst):
                if name not in index:
                    raise DmdpError(f"unknown vertex {name!r}", lineno)
            try:
                w = int(wtext)
            except ValueError:
                raise DmdpError(f"weight {wtext!r} is not an integer", lineno) from None
            if abs(w) > WEIGHT_LIMIT:
                raise DmdpError(f"weight {w} exceeds magnitude limit 2^62", lineno)
            v, u = index[src], index[dst]
            if (v, u) in seen:
                raise DmdpError(f"duplicate edge {src} -> {dst}", lineno)
            seen.add((v, u))
            edges[v].append((u, w))
        else:
            raise DmdpError(f"unknown directive {parts[0]!r}", lineno)

    for v, adj in enumerate(edges):
        if not adj:
            raise DmdpError(f"vertex {names[v]!r} has no outgoing edge")
    if not names:
        raise DmdpError("no vertices declared")
    return Dmdp(tuple(names), tuple(tuple(a) for a in edges))


def serialize_dmdp(d: Dmdp) -> str:
    lines = [f"vertex {name}" for name in d.names]
    lines += [f"edge {d.names[v]} {d.names[u]} {w}" for v, u, w in d.edges()]
    return "\n".join(lines) + "\n"


def export_dot(d: Dmdp, highlight: Optional[Sequence[int]] = None) -> str:
    """Render ``d`` as a Graphviz digraph; edges of ``highlight`` are drawn bold."""
    chosen: set[tuple[int, int]] = set()
    if highlight is not None:
        chosen = set(enumerate(check_policy(d, highlight)))
    out = ["digraph dmdp {"]
    for name in d.names:
        out.append(f'  "{name}";')
    for v, u, w in d.edges():
        attrs = [f'label="{w}"']
        if (v, u) in chosen:
            attrs.append("style=bold")
            attrs.append("penwidth=2.5")
        out.append(f'  "{d.names[v]}" -> "{d.names[u]}" [{", ".join(attrs)}];')
    out.append("}")
    return "\n".join(out) + "\n"
