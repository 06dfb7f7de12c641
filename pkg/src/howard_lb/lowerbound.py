"""The worst-case family P_n and its policy sequence.

P_n has vertices t_1..t_n (top) and b_1..b_n (the deceleration lane),
ordered ``(t_1, b_1, ..., b_n, t_2, ..., t_n)``. Self-loops at t_i weigh
n(n+1)+i, lane and top-to-lane edges weigh (n+1)^2, everything else 0.
Howard's algorithm started at pi_1 walks through
``pi_i -> sigma_{i,1} -> ... -> sigma_{i,i+1} -> tau_i -> pi_{i+1}`` and stops
at sigma_{n,n-1}, taking (n^2+7n-6)/2 iterations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .dmdp import Dmdp, Policy, PolicyError, check_policy
from .evaluation import evaluate
from .howard import bellman, initial_policy, run_howard, trace_violations

# "literal": sigma_{i,j} sends t_k (k <= i-2) to b_k only when j = 1.
# "persistent": t_k keeps b_k for every j; this is what Howard actually does
# once i >= 5 (the incumbent b_k ties with b_{j+1} and is kept).
SIGMA_VARIANTS = ("literal", "persistent")


@dataclass(frozen=True)
class PnLayout:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"P_n needs n >= 1, got {self.n}")

    def t(self, k: int) -> int:
        if not 1 <= k <= self.n:
            raise IndexError(f"t_{k} does not exist for n={self.n}")
        return 0 if k == 1 else self.n + k - 1

    def b(self, k: int) -> int:
        if not 1 <= k <= self.n:
            raise IndexError(f"b_{k} does not exist for n={self.n}")
        return k

    @property
    def bar_w(self) -> int:
        """Weight of every lane and top-to-lane edge, (n+1)^2."""
        return (self.n + 1) ** 2

    def loop_weight(self, i: int) -> int:
        """Self-loop weight at t_i, n(n+1)+i."""
        return self.n * (self.n + 1) + i

    def names(self) -> tuple[str, ...]:
        n = self.n
        return ("t1",) + tuple(f"b{k}" for k in range(1, n + 1)) + tuple(
            f"t{k}" for k in range(2, n + 1)
        )

    def label(self, v: int) -> str:
        return self.names()[v]


@lru_cache(maxsize=64)
def gen_pn(n: int) -> Dmdp:
    lay = PnLayout(n)
    t, b = lay.t, lay.b
    edges = []
    for i in range(1, n + 1):
        for j in range(1, i):
            edges.append((b(i), b(j), lay.bar_w))
        for j in range(1, n + 1):
            edges.append((b(i), t(j), 0))
        for j in range(1, i + 1):
            edges.append((t(i), b(j), lay.bar_w))
        for j in range(1, i):
            edges.append((t(i), t(j), 0))
        edges.append((t(i), t(i), lay.loop_weight(i)))
    return Dmdp.from_edges(lay.names(), edges)


def expected_edge_count(n: int) -> int:
    """|E_n| by direct count of the four edge groups, (5n^2+n)/2."""
    return n * (n - 1) // 2 + n * n + n * (n + 1) // 2 + n * (n + 1) // 2


def stated_edge_count(n: int) -> int:
    """Edge count quoted with the iteration bound, (3n^2+n)/2; differs from the edge set."""
    return (3 * n * n + n) // 2


def _finish(d: Dmdp, choice: dict[int, int]) -> Policy:
    policy = tuple(choice[v] for v in range(d.n))
    try:
        return check_policy(d, policy)
    except PolicyError as exc:
        raise AssertionError(f"generated policy is not valid on P_n: {exc}") from exc


def policy_pi(n: int, i: int) -> Policy:
    lay = PnLayout(n)
    if not 1 <= i <= n:
        raise ValueError(f"pi_i needs 1 <= i <= n, got i={i}, n={n}")
    t, b = lay.t, lay.b
    choice = {}
    for k in range(1, n + 1):
        if k <= i - 2:
            choice[t(k)] = b(k)
        elif k in (i - 1, i):
            choice[t(k)] = t(k)
        else:
            choice[t(k)] = t(i)
        choice[b(k)] = t(i)
    return _finish(gen_pn(n), choice)


def policy_sigma(n: int, i: int, j: int, variant: str = "literal") -> Policy:
    lay = PnLayout(n)
    if not (1 <= i <= n and 1 <= j <= i + 1):
        raise ValueError(f"sigma_(i,j) needs 1 <= i <= n, 1 <= j <= i+1; got {i},{j}")
    if variant not in SIGMA_VARIANTS:
        raise ValueError(f"unknown sigma variant {variant!r}")
    keep_lane_entry = j == 1 or variant == "persistent"
    t, b = lay.t, lay.b
    choice = {}
    for k in range(1, n + 1):
        if k == i:
            choice[t(k)] = t(i)
        elif k <= j or (k <= i - 2 and keep_lane_entry):
            choice[t(k)] = b(k)
        else:
            choice[t(k)] = b(j)
        if k == 1:
            choice[b(k)] = t(i)
        elif k <= j:
            choice[b(k)] = b(k - 1)
        else:
            choice[b(k)] = b(j)
    return _finish(gen_pn(n), choice)


def policy_tau(n: int, i: int) -> Policy:
    lay = PnLayout(n)
    if not 1 <= i <= n - 1:
        raise ValueError(f"tau_i needs 1 <= i <= n-1, got i={i}, n={n}")
    t, b = lay.t, lay.b
    top = min(i + 2, n)
    choice = {}
    for k in range(1, n + 1):
        if k in (i, i + 1):
            choice[t(k)] = t(k)
        elif k < i:
            choice[t(k)] = b(k)
        else:
            choice[t(k)] = b(top)
        if k == 1:
            choice[b(k)] = t(i)
        elif k <= top:
            choice[b(k)] = b(k - 1)
        else:
            choice[b(k)] = b(top)
    return _finish(gen_pn(n), choice)


def expected_iteration_count(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    twice = n * n + 7 * n - 6
    assert twice % 2 == 0
    return twice // 2


def expected_sequence(n: int, variant: str = "literal") -> list[Policy]:
    """Policies visited from pi_1, ending at the optimal sigma_{n,n-1}."""
    seq = [policy_pi(n, 1)]
    if n == 1:
        return seq
    for i in range(1, n):
        seq += [policy_sigma(n, i, j, variant) for j in range(1, i + 2)]
        seq += [policy_tau(n, i), policy_pi(n, i + 1)]
    seq += [policy_sigma(n, n, j, variant) for j in range(1, n)]
    assert len(seq) == expected_iteration_count(n)
    return seq


@dataclass
class InequalityReport:
    n: int
    checked: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"n": self.n, "ok": self.ok, "checked": self.checked,
                "violations": self.violations}


def check_weight_inequalities(n: int) -> InequalityReport:
    """Check the three weight-inequality families the sequence relies on."""
    lay = PnLayout(n)
    bar = lay.bar_w
    loops = [lay.loop_weight(i) for i in range(1, n + 1)]
    rep = InequalityReport(n)

    chain = [bar] + loops[::-1] + [0]
    for a, b in zip(chain, chain[1:]):
        rep.checked += 1
        if not a > b:
            rep.violations.append(f"chain: {a} > {b} fails")

    for i, x in enumerate(loops, start=1):
        for k in range(0, n + 1):
            rep.checked += 1
            if not k * bar < (k + 1) * x:
                rep.violations.append(f"{k}*{bar} < {k + 1}*{x} fails (i={i})")
        for k in range(0, n + 2):
            rep.checked += 1
            if not (k - 1) * bar - k * x < k * bar - (k + 1) * x:
                rep.violations.append(f"lane step inequality fails at k={k}, i={i}")
    return rep


@dataclass
class ItemResult:
    checked: int = 0
    counterexample: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.counterexample is None

    def to_json(self) -> dict:
        return {"checked": self.checked, "passed": self.passed,
                "counterexample": self.counterexample}


@dataclass
class LemmaReport:
    n: int
    variant: str
    items: dict[int, ItemResult]

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.items.values())

    def to_json(self) -> dict:
        return {"n": self.n, "sigma_variant": self.variant, "ok": self.ok,
                "items": {str(k): v.to_json() for k, v in self.items.items()}}


def _require_pn(d: Optional[Dmdp], n: int) -> Dmdp:
    expected = gen_pn(n)
    if d is not None and d != expected:
        raise ValueError(f"verification only runs on the canonical P_{n} instance")
    return expected


def _policy_labels(n: int, policy: Policy) -> dict[str, str]:
    names = PnLayout(n).names()
    return {names[v]: names[u] for v, u in enumerate(policy)}


def verify_lemma(n: int, variant: str = "literal", d: Optional[Dmdp] = None,
                 tie_rule: str = "incumbent") -> LemmaReport:
    """Apply the Bellman operator to every policy of the family and compare
    with its claimed successor, item by item."""
    d = _require_pn(d, n)
    sigma = lambda i, j: policy_sigma(n, i, j, variant)  # noqa: E731

    cases: dict[int, list] = {1: [], 2: [], 3: [], 4: [], 5: []}
    if n == 1:
        cases[5].append(("pi_1", policy_pi(1, 1), "pi_1", policy_pi(1, 1)))
    else:
        for i in range(1, n + 1):
            cases[1].append((f"pi_{i}", policy_pi(n, i), f"sigma_{i},1", sigma(i, 1)))
            top = i if i <= n - 1 else n - 2
            for j in range(1, top + 1):
                cases[2].append((f"sigma_{i},{j}", sigma(i, j), f"sigma_{i},{j + 1}", sigma(i, j + 1)))
        for i in range(1, n):
            cases[3].append((f"sigma_{i},{i + 1}", sigma(i, i + 1), f"tau_{i}", policy_tau(n, i)))
            cases[4].append((f"tau_{i}", policy_tau(n, i), f"pi_{i + 1}", policy_pi(n, i + 1)))
        last = sigma(n, n - 1)
        cases[5].append((f"sigma_{n},{n - 1}", last, f"sigma_{n},{n - 1}", last))

    items = {}
    for item, rows in cases.items():
        res = ItemResult()
        for src_name, src, dst_name, dst in rows:
            res.checked += 1
            got, _ = bellman(d, src, tie_rule)
            if got != dst and res.counterexample is None:
                names = PnLayout(n).names()
                res.counterexample = {
                    "from": src_name,
                    "expected": dst_name,
                    "differs_at": {names[v]: {"expected": names[dst[v]], "actual": names[got[v]]}
                                   for v in range(d.n) if got[v] != dst[v]},
                }
        items[item] = res
    return LemmaReport(n, variant, items)


@dataclass
class SequenceReport:
    n: int
    init_mode: str
    matched: bool
    iteration_count: int
    expected: int
    first_divergence: Optional[dict] = None
    sigma_variant: str = "literal"
    trace_violations: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "init": self.init_mode,
            "matched": self.matched,
            "iterations": self.iteration_count,
            "expected": self.expected,
            "first_divergence": self.first_divergence,
            "sigma_variant": self.sigma_variant,
            "trace_violations": self.trace_violations,
        }


def verify_theorem(n: int, init_mode: str = "lowest-index", variant: str = "literal",
                   d: Optional[Dmdp] = None, tie_rule: str = "incumbent") -> SequenceReport:
    """Run Howard on P_n and compare the trace with the predicted one.

    With lowest-index init the whole trace must equal the predicted sequence
    and the count must equal (n^2+7n-6)/2. With greedy-weight init the first
    Bellman step must land on sigma_{1,2} and the count must be one less.
    """
    d = _require_pn(d, n)
    if init_mode == "greedy-weight" and n < 2:
        raise ValueError("greedy-weight verification needs n >= 2")
    trace = run_howard(d, initial_policy(d, init_mode), tie_rule=tie_rule)
    actual = trace.policies
    names = PnLayout(n).names()
    seq = expected_sequence(n, variant)

    def divergence(k, exp, act):
        return {"step": k,
                "expected": [names[u] for u in exp] if exp is not None else None,
                "actual": [names[u] for u in act] if act is not None else None}

    first = None
    if init_mode == "lowest-index":
        target = expected_iteration_count(n)
        for k in range(max(len(seq), len(actual))):
            exp = seq[k] if k < len(seq) else None
            act = actual[k] if k < len(actual) else None
            if exp != act:
                first = divergence(k, exp, act)
                break
    else:
        target = expected_iteration_count(n) - 1
        after_first = actual[1] if len(actual) > 1 else None
        if after_first != seq[2]:
            first = divergence(1, seq[2], after_first)
    matched = first is None and trace.iterations == target
    return SequenceReport(n, init_mode, matched, trace.iterations, target, first,
                          variant, list(trace_violations(trace)))
