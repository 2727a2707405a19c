"""Microclusters with dangling nodes, glued together by ``CZ_{1/4}`` gates.

A microcluster is a hub qubit with ``k`` dangling leaves and an optional
horizontal chain through the hub. Two microclusters are glued by attempting
CZ gates between unconsumed dangling pairs until one succeeds or a side runs
out. Both endpoints already sit in clusters, so each attempt is a full
two-teleportation gate.

Consumption rules
-----------------
``"retire"`` (default)
    A failed first teleportation measures out A's dangling node. A failed
    second teleportation measures out B's dangling node and also retires A's
    engaged node. Every failure therefore costs A one node, and the success
    probability is ``1 - (1 - p_gate)**k``.
``"failing-side-only"``
    A failure measures out one node, on the failing side only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .graphstate import ByproductRecord, ClusterGraph
from .growth import GateModel, RatioEstimate
from .rng import RngStream

RULES = ("retire", "failing-side-only")


class GlueError(ValueError):
    pass


@dataclass
class Microcluster:
    graph: ClusterGraph
    hub: int
    dangling: list[int]
    chain: list[int] = field(default_factory=list)

    def relabeled(self, offset: int) -> "Microcluster":
        g = ClusterGraph.from_edges([(u + offset, v + offset) for u, v in self.graph.edges],
                                    nodes=[v + offset for v in self.graph.nodes])
        return Microcluster(g, self.hub + offset, [d + offset for d in self.dangling],
                            [c + offset for c in self.chain])


def make_microcluster(k: int, chain_len: int = 0) -> Microcluster:
    """Hub ``0``, leaves ``1..k``, then chain nodes running left and right of the hub."""
    if k < 1:
        raise GlueError("a microcluster needs at least one dangling node")
    if chain_len < 0:
        raise GlueError("chain length must be non-negative")
    g = ClusterGraph.star(k)
    leaves = list(range(1, k + 1))
    chain = list(range(k + 1, k + 1 + chain_len))
    left, right = chain[: (chain_len + 1) // 2], chain[(chain_len + 1) // 2:]
    for side in (left, right):
        prev = 0
        for v in side:
            g.add_node(v)
            g.add_edge(prev, v)
            prev = v
    return Microcluster(g, 0, leaves, chain)


@dataclass
class GlueOutcome:
    success: bool
    attempts_used: int
    dangling_consumed: tuple[int, int]
    corrections: ByproductRecord
    graph: ClusterGraph
    joined: tuple[int, int] | None
    # computational-basis outcome of every measured-out node, in order
    measurements: list[tuple[int, int]]


def _check_rule(rule: str) -> None:
    if rule not in RULES:
        raise GlueError(f"unknown consumption rule {rule!r}; choose from {RULES}")


def glue(a: Microcluster, b: Microcluster, model: GateModel, rng: RngStream, rule: str = "retire") -> GlueOutcome:
    """Glue ``b`` onto ``a``; ``b`` is relabelled past ``a``'s node ids."""
    _check_rule(rule)
    if not a.dangling or not b.dangling:
        raise GlueError("both microclusters need at least one dangling node")
    b = b.relabeled(max(a.graph.nodes) + 1)
    g = ClusterGraph.from_edges(a.graph.edges + b.graph.edges, nodes=a.graph.nodes + b.graph.nodes)
    free_a, free_b = list(a.dangling), list(b.dangling)
    corr = ByproductRecord()
    measured: list[tuple[int, int]] = []
    used = [0, 0]
    p = model.p_float

    def measure_out(v: int) -> None:
        m = rng.bit()
        for w in g.remove_node(v):
            corr.add(w, z=m)
        corr.ops.pop(v, None)
        measured.append((v, m))

    attempts = 0
    joined = None
    while free_a and free_b:
        attempts += 1
        da, db = free_a[0], free_b[0]
        if rng.uniform() >= p:
            measure_out(free_a.pop(0))
            used[0] += 1
            continue
        if rng.uniform() >= p:
            measure_out(free_b.pop(0))
            used[1] += 1
            if rule == "retire":
                measure_out(free_a.pop(0))
                used[0] += 1
            continue
        g.add_edge(da, db)
        free_a.pop(0)
        free_b.pop(0)
        used[0] += 1
        used[1] += 1
        joined = (da, db)
        break
    for v in free_a + free_b:
        measure_out(v)
    return GlueOutcome(joined is not None, attempts, (used[0], used[1]), corr, g, joined, measured)


def glue_success_probability(k: int, model: GateModel, rule: str = "retire") -> Fraction:
    """Exact probability that gluing two ``k``-dangling microclusters succeeds."""
    _check_rule(rule)
    if k < 1:
        raise GlueError("k must be >= 1")
    p = model.p_teleport
    q = p * p
    if rule == "retire":
        return 1 - (1 - q) ** k
    fail_a, fail_b = 1 - p, p * (1 - p)
    # success after i first-side and j second-side failures, in any order
    return q * sum(comb(i + j, i) * fail_a**i * fail_b**j for i in range(k) for j in range(k))


def glue_trials(k: int, model: GateModel, trials: int, rng: RngStream, rule: str = "retire",
                chain_len: int = 0) -> RatioEstimate:
    """Monte Carlo glue success frequency with its binomial standard error."""
    a = make_microcluster(k, chain_len)
    hits = np.array([glue(a, a, model, rng.spawn(t), rule).success for t in range(trials)], dtype=float)
    se = hits.std(ddof=1) / math.sqrt(trials) if trials > 1 else math.nan
    return RatioEstimate(float(hits.mean()), float(se))


def required_dangling(target_sites: int, overall_success: float, model: GateModel | None = None,
                      rule: str = "retire", k_max: int = 10_000) -> int:
    """Smallest ``k`` with ``glue_success_probability(k) ** target_sites >= overall_success``."""
    if not 0 < overall_success < 1:
        raise GlueError("overall success probability must lie in (0, 1)")
    if target_sites < 1:
        raise GlueError("target_sites must be >= 1")
    model = model or GateModel(1)
    goal = Fraction(overall_success)
    log_goal = math.log(overall_success)
    for k in range(1, k_max + 1):
        prob = glue_success_probability(k, model, rule)
        if target_sites <= 64:
            if prob**target_sites >= goal:
                return k
        elif target_sites * math.log(prob) >= log_goal:
            return k
    raise GlueError(f"no k <= {k_max} reaches the requested success probability")


def dangling_scaling(sizes: list[int], overall_success: float, model: GateModel | None = None,
                     rule: str = "retire") -> tuple[list[int], float, float]:
    """``required_dangling`` at each size plus a least-squares fit ``k ~ c*log2(s) + b``."""
    ks = [required_dangling(s, overall_success, model, rule) for s in sizes]
    if len(sizes) < 2:
        return ks, math.nan, math.nan
    c, b = np.polyfit(np.log2(sizes), ks, 1)
    return ks, float(c), float(b)


def prep_overhead(m: int, model: GateModel) -> Fraction:
    """Expected repeats to prepare an ``m``-node microcluster when every bond must succeed at once."""
    if m < 2:
        raise GlueError("a microcluster has at least two nodes")
    return (1 / model.p_gate) ** (m - 1)
