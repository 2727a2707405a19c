"""Non-deterministic CZ gates and Monte Carlo growth of cluster states.

Gate model
----------
``CZ_{n^2/(n+1)^2}`` is two teleportations, each succeeding with probability
``n/(n+1)``. Done sequentially, a failed teleportation aborts the gate after
measuring out only the qubit it touched. When a fresh qubit ``S`` is attached
to cluster qubits ``A, B, ...``, every teleportation involving ``S`` is done
first, so only the cluster side is at risk: each bond succeeds with
probability ``n/(n+1)`` and a failure deletes the cluster qubit it targeted.

Growth policies
---------------
``grow_alternating``
    Strictly alternates single-bond and double-bond site attempts on a
    stack-shaped frontier (bonds go to the newest nodes) and stops after a
    completed pair once the cluster reaches the requested size. This is the
    size-level process behind the ~9 attempts per site estimate.
``grow_cluster``
    Grows a concrete labelled target graph, rebuilding every deleted node.
    Repairs can need more bonds than the original build step, so this costs
    more per site than the alternating process.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from enum import Enum
from fractions import Fraction
from typing import Iterable

import numpy as np

from .graphstate import ByproductRecord, ClusterGraph
from .rng import RngStream

DESTRUCTIVE_GATE_PROBABILITY = Fraction(2, 27)
# figures quoted for comparison only
QUOTED_SUCCESSES_PER_LOGICAL_GATE = 8
QUOTED_SUCCESSES_PER_ENTANGLING_GATE = 24
QUOTED_ATTEMPTS_PER_SITE = 9
KLM_ERROR_CORRECTED_GATES = 300
KLM_ERROR_CORRECTED_SUCCESS = 0.95


class GrowthError(ValueError):
    pass


@dataclass(frozen=True)
class OpticalCost:
    beamsplitters: int
    photodetectors: int
    single_photon_preps: int
    upper_bound: bool = False

    def scaled(self, k: float) -> dict[str, float]:
        return {"beamsplitters": self.beamsplitters * k,
                "photodetectors": self.photodetectors * k,
                "single_photon_preps": self.single_photon_preps * k}


_COSTS = {1: OpticalCost(8, 4, 4), 2: OpticalCost(70, 30, 12, upper_bound=True)}


@dataclass(frozen=True)
class GateModel:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise GrowthError(f"n must be a positive integer, got {self.n!r}")

    @property
    def p_teleport(self) -> Fraction:
        return Fraction(self.n, self.n + 1)

    @property
    def p_gate(self) -> Fraction:
        return Fraction(self.n**2, (self.n + 1) ** 2)

    @cached_property
    def p_float(self) -> float:
        return float(self.p_teleport)

    @property
    def cost(self) -> OpticalCost | None:
        return _COSTS.get(self.n)

    @property
    def destructive_gate_probability(self) -> Fraction:
        return DESTRUCTIVE_GATE_PROBABILITY

    def __str__(self) -> str:
        return f"CZ_{self.p_gate}"


class CZOutcome(Enum):
    SUCCESS = "success"
    FAIL_FIRST = "fail_first"
    FAIL_SECOND = "fail_second"


def cz_outcome_probabilities(model: GateModel, risky_sides: int) -> dict[CZOutcome, Fraction]:
    """Exact branch probabilities of one sequentially teleported CZ."""
    p = model.p_teleport
    if risky_sides == 1:
        return {CZOutcome.SUCCESS: p, CZOutcome.FAIL_FIRST: 1 - p, CZOutcome.FAIL_SECOND: Fraction(0)}
    if risky_sides == 2:
        return {CZOutcome.SUCCESS: p * p, CZOutcome.FAIL_FIRST: 1 - p, CZOutcome.FAIL_SECOND: p * (1 - p)}
    raise GrowthError(f"risky_sides must be 1 or 2, got {risky_sides!r}")


def attempt_cz(model: GateModel, rng: RngStream, risky_sides: int = 2) -> CZOutcome:
    if risky_sides not in (1, 2):
        raise GrowthError(f"risky_sides must be 1 or 2, got {risky_sides!r}")
    p = model.p_float
    if rng.uniform() >= p:
        return CZOutcome.FAIL_FIRST
    if risky_sides == 2 and rng.uniform() >= p:
        return CZOutcome.FAIL_SECOND
    return CZOutcome.SUCCESS


def expected_gain(model: GateModel, bond_type: str | int) -> Fraction:
    """Expected change in cluster size for one site attempt: ``2 p**k - 1``."""
    k = {"single": 1, "double": 2}.get(bond_type, bond_type)
    if not isinstance(k, int) or k < 1:
        raise GrowthError(f"unknown bond type {bond_type!r}")
    return 2 * model.p_teleport**k - 1


def expected_successes(model: GateModel, bonds: int) -> Fraction:
    """Expected successful CZs in one site attempt with ``bonds`` sequential gates."""
    p = model.p_teleport
    return sum((p**i for i in range(1, bonds + 1)), Fraction(0))


def alternating_successes_per_site(model: GateModel) -> Fraction | None:
    """Successful CZs per net site for alternating single/double attempts; None if the drift is not positive."""
    gain = expected_gain(model, 1) + expected_gain(model, 2)
    if gain <= 0:
        return None
    return (expected_successes(model, 1) + expected_successes(model, 2)) / gain


def alternating_attempts_per_site(model: GateModel) -> Fraction | None:
    gain = expected_gain(model, 1) + expected_gain(model, 2)
    return None if gain <= 0 else 2 / gain


# growth state -------------------------------------------------------------------

@dataclass
class Counters:
    site_attempts: int = 0
    gate_attempts: int = 0
    gate_successes: int = 0
    nodes_removed: int = 0
    nodes_added: int = 0
    reseeds: int = 0

    def merge(self, other: "Counters") -> "Counters":
        return Counters(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def astuple(self) -> tuple[int, ...]:
        return (self.site_attempts, self.gate_attempts, self.gate_successes,
                self.nodes_removed, self.nodes_added, self.reseeds)


@dataclass
class GrowthState:
    cluster: ClusterGraph
    counters: Counters = field(default_factory=Counters)
    corrections: ByproductRecord = field(default_factory=ByproductRecord)
    initial_size: int = 0
    next_id: int = 0
    events: list[tuple] | None = None

    @classmethod
    def seeded(cls, nodes: Iterable[int] = (0,), record: bool = False) -> "GrowthState":
        g = ClusterGraph.from_edges([], nodes=nodes)
        return cls(g, initial_size=len(g), next_id=max(g.nodes, default=-1) + 1,
                   events=[] if record else None)

    def fresh_id(self) -> int:
        v = self.next_id
        self.next_id += 1
        return v

    def reseed(self, node: int | None = None) -> int:
        """Put a fresh ``|+>`` qubit into the cluster (no gate involved)."""
        v = self.fresh_id() if node is None else node
        self.next_id = max(self.next_id, v + 1)
        self.cluster.add_node(v)
        self.counters.nodes_added += 1
        self.counters.reseeds += 1
        if self.events is not None:
            self.events.append(("reseed", v))
        return v

    @property
    def gate_grown_sites(self) -> int:
        return len(self.cluster) - self.initial_size - self.counters.reseeds

    def _measure_out(self, node: int, rng: RngStream) -> None:
        outcome = rng.bit()
        for v in self.cluster.remove_node(node):
            self.corrections.add(v, z=outcome)
        self.corrections.ops.pop(node, None)
        self.counters.nodes_removed += 1


def attempt_add_site(state: GrowthState, targets: list[int], model: GateModel, rng: RngStream,
                     new_node: int | None = None) -> tuple[int, int | None]:
    """Attach a fresh qubit to ``targets`` by sequential CZ gates.

    Gates run in the given order and the procedure aborts at the first
    failure, which measures out that target. If earlier gates had succeeded,
    the fresh qubit is measured out too, leaving only a Z correction on those
    earlier targets. Returns ``(gain, deleted_node)``.
    """
    if not targets:
        raise GrowthError("need at least one attachment node")
    if len(set(targets)) != len(targets):
        raise GrowthError(f"attachment nodes must be distinct, got {targets}")
    for t in targets:
        if t not in state.cluster:
            raise GrowthError(f"attachment node {t} is not in the cluster")
    c = state.counters
    c.site_attempts += 1
    p = model.p_float
    for i, a in enumerate(targets):
        c.gate_attempts += 1
        if rng.uniform() >= p:
            state._measure_out(a, rng)
            if i:
                outcome = rng.bit()
                for done in targets[:i]:
                    state.corrections.add(done, z=outcome)
            if state.events is not None:
                state.events.append(("fail", tuple(targets), a))
            return -1, a
        c.gate_successes += 1
    s = state.fresh_id() if new_node is None else new_node
    state.next_id = max(state.next_id, s + 1)
    state.cluster.add_node(s)
    for a in targets:
        state.cluster.add_edge(s, a)
    c.nodes_added += 1
    if state.events is not None:
        state.events.append(("add", tuple(targets), s))
    return 1, None


def attempt_add_single_bond(state: GrowthState, target: int, model: GateModel, rng: RngStream) -> GrowthState:
    attempt_add_site(state, [target], model, rng)
    return state


def attempt_add_double_bond(state: GrowthState, a: int, b: int, model: GateModel, rng: RngStream) -> GrowthState:
    if a == b:
        raise GrowthError("double bond needs two distinct nodes")
    attempt_add_site(state, [a, b], model, rng)
    return state


@dataclass
class GrowthTrace:
    counters: Counters
    initial_size: int
    final_size: int
    completed: bool
    cluster: ClusterGraph | None = None
    events: list[tuple] | None = None

    @property
    def gate_grown_sites(self) -> int:
        return self.final_size - self.initial_size - self.counters.reseeds


def _trace(state: GrowthState, completed: bool, keep_graph: bool) -> GrowthTrace:
    return GrowthTrace(state.counters, state.initial_size, len(state.cluster), completed,
                       state.cluster if keep_graph else None, state.events)


def grow_alternating(num_sites: int, model: GateModel, rng: RngStream, max_attempts: int | None = None,
                     record: bool = False, keep_graph: bool = False) -> GrowthTrace:
    """Grow a cluster to ``num_sites`` nodes by strictly alternating single/double attempts.

    A single bond attaches to the newest node; a double bond attaches first to
    the newest, then to the second newest. Fresh ``|+>`` qubits are added for
    free whenever the cluster is too small for the next attempt. Growth stops
    after a completed single/double pair, or after ``max_attempts``.
    """
    if num_sites < 1:
        raise GrowthError("num_sites must be >= 1")
    if max_attempts is None:
        max_attempts = 100 * num_sites + 1000
    state = GrowthState.seeded([0], record=record)
    stack = [0]
    double = False
    while len(stack) < num_sites or double:
        if state.counters.site_attempts >= max_attempts:
            return _trace(state, False, keep_graph)
        need = 2 if double else 1
        while len(stack) < need:
            stack.append(state.reseed())
        targets = [stack[-1], stack[-2]] if double else [stack[-1]]
        gain, deleted = attempt_add_site(state, targets, model, rng)
        if gain > 0:
            stack.append(state.next_id - 1)
        else:
            stack.remove(deleted)
        double = not double
    return _trace(state, True, keep_graph)


def check_build_order(target: ClusterGraph, order: list[int]) -> None:
    if sorted(order) != target.nodes:
        raise GrowthError("build order must list every target node exactly once")
    seen: set[int] = set()
    for i, v in enumerate(order):
        k = len(target.neighbors(v) & seen)
        if i and not 1 <= k <= 2:
            raise GrowthError(f"node {v} has {k} bonds into the built prefix; need 1 or 2")
        seen.add(v)


def grow_cluster(target: ClusterGraph, model: GateModel, rng: RngStream, order: list[int] | None = None,
                 max_attempts: int | None = None, record: bool = False) -> GrowthTrace:
    """Grow an exact copy of ``target`` (same node ids), rebuilding deleted nodes.

    Each step attaches one unbuilt node to all of its built neighbours. The
    choice prefers nodes that would not leave an unbuilt neighbour with three
    or more built neighbours, then fewer bonds, then build order. Bonds go to
    the least-connected attachment nodes first.
    """
    if len(target) == 0:
        raise GrowthError("empty target")
    if not target.is_connected():
        raise GrowthError("target graph must be connected")
    order = target.nodes if order is None else list(order)
    check_build_order(target, order)
    pos = {v: i for i, v in enumerate(order)}
    nbrs = {v: target.neighbors(v) for v in order}
    if max_attempts is None:
        max_attempts = 1000 * len(target) + 1000
    state = GrowthState.seeded([order[0]], record=record)
    built = state.cluster

    def built_degree(v: int) -> int:
        return sum(w in built for w in nbrs[v])

    while len(built) < len(target):
        if state.counters.site_attempts >= max_attempts:
            return _trace(state, False, True)
        if len(built) == 0:
            state.reseed(order[0])
            continue
        best = None
        for u in order:
            if u in built:
                continue
            k = built_degree(u)
            if k == 0:
                continue
            overload = any(w not in built and built_degree(w) + 1 >= 3 for w in nbrs[u])
            key = (overload, k, pos[u])
            if best is None or key < best[0]:
                best = (key, u)
        u = best[1]
        bonds = sorted((w for w in nbrs[u] if w in built), key=lambda w: (built_degree(w), -pos[w]))
        attempt_add_site(state, bonds, model, rng, new_node=u)
    return _trace(state, True, True)


def ladder(length: int) -> tuple[ClusterGraph, list[int]]:
    """Two-row ladder with a rung at every column, and its alternating build order.

    Node ``2*i`` is top of column ``i``, node ``2*i + 1`` the bottom. Top nodes
    attach by one bond, bottom nodes by two.
    """
    g = ClusterGraph()
    order = []
    for i in range(length):
        t, b = 2 * i, 2 * i + 1
        g.add_node(t)
        g.add_node(b)
        g.add_edge(t, b)
        if i:
            g.add_edge(t, t - 2)
            g.add_edge(b, b - 2)
        order += [t, b]
    return g, order


# statistics -----------------------------------------------------------------

@dataclass
class RatioEstimate:
    value: float
    stderr: float

    def within(self, expected: float, sigmas: float = 3.0) -> bool:
        return abs(self.value - expected) <= sigmas * self.stderr


def ratio_estimate(num: np.ndarray, den: np.ndarray) -> RatioEstimate:
    """Ratio of sums with a delta-method standard error (sample std / sqrt(trials))."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    n = len(num)
    if n == 0 or den.sum() == 0:
        return RatioEstimate(math.nan, math.nan)
    r = num.sum() / den.sum()
    if n < 2:
        return RatioEstimate(float(r), math.nan)
    resid = num - r * den
    se = resid.std(ddof=1) / math.sqrt(n) / den.mean()
    return RatioEstimate(float(r), float(abs(se)))


@dataclass
class GrowthStats:
    trials: int
    completed: int
    mean_net_gain_per_step: RatioEstimate
    attempts_per_site: RatioEstimate
    successes_per_site: RatioEstimate
    attempts_per_target_site: RatioEstimate
    mean_reseeds: float

    @classmethod
    def from_traces(cls, traces: list[GrowthTrace], target_size: int) -> "GrowthStats":
        att = np.array([t.counters.site_attempts for t in traces])
        succ = np.array([t.counters.gate_successes for t in traces])
        grown = np.array([t.gate_grown_sites for t in traces])
        tsize = np.full(len(traces), float(max(target_size, 1)))
        return cls(len(traces), sum(t.completed for t in traces), ratio_estimate(grown, att),
                   ratio_estimate(att, grown), ratio_estimate(succ, grown), ratio_estimate(att, tsize),
                   float(np.mean([t.counters.reseeds for t in traces])) if traces else 0.0)


def run_trials(fn, trials: int, rng: RngStream) -> list[GrowthTrace]:
    """Call ``fn(trial_rng)`` once per trial on independent child streams."""
    return [fn(rng.spawn(t)) for t in range(trials)]


def sample_gains(model: GateModel, bonds: int | Iterable[int], attempts: int, rng: RngStream) -> np.ndarray:
    """Per-attempt cluster-size changes for repeated site attempts.

    ``bonds`` is a fixed bond count or a cycle of counts, e.g. ``(1, 2)`` for
    alternating attempts. Attempts act on a real cluster kept large enough by
    free reseeds; nodes far behind the frontier are retired so memory stays flat.
    """
    pattern = [bonds] if isinstance(bonds, int) else list(bonds)
    state = GrowthState.seeded(range(max(pattern)))
    stack = list(range(max(pattern)))
    out = np.empty(attempts, dtype=np.int8)
    for i in range(attempts):
        k = pattern[i % len(pattern)]
        while len(stack) < k:
            stack.append(state.reseed())
        gain, deleted = attempt_add_site(state, stack[-1:-k - 1:-1], model, rng)
        if gain > 0:
            stack.append(state.next_id - 1)
            if len(stack) > 64:
                state.cluster.remove_node(stack.pop(0))
        else:
            stack.remove(deleted)
        out[i] = gain
    return out


# circuit-level reports -----------------------------------------------------------

SITES_PER_LOGICAL_GATE = Fraction(4, 3)
SITES_PER_ENTANGLING_GATE = 4


def _column_order(pattern) -> list[int] | None:
    """Leftmost-first order in which every node touches the part already built."""
    g = pattern.graph
    if not g.is_connected():
        return None
    key = lambda v: (pattern.coords[v][1], pattern.coords[v][0])  # noqa: E731
    order = [min(g.nodes, key=key)]
    built = set(order)
    while len(order) < len(g):
        v = min((w for u in built for w in g.neighbors(u) if w not in built), key=key)
        order.append(v)
        built.add(v)
    return order


@dataclass
class ResourceReport:
    model: GateModel
    trials: int
    layout_nodes: int
    logical_gates: int
    entangling_gates: int
    viable: bool
    completed: int
    attempts_per_site: RatioEstimate
    successes_per_site: RatioEstimate
    gate_attempts_per_site: RatioEstimate
    analytic_attempts_per_site: Fraction | None
    analytic_successes_per_site: Fraction | None
    label_exact_attempts_per_site: RatioEstimate | None
    optical_totals: dict[str, float] | None
    mean_gate_attempts: float

    @property
    def successes_per_logical_gate(self) -> float:
        return self.successes_per_site.value * float(SITES_PER_LOGICAL_GATE)

    @property
    def successes_per_entangling_gate(self) -> float:
        return self.successes_per_site.value * SITES_PER_ENTANGLING_GATE

    def rows(self) -> list[tuple[str, str, str, str]]:
        """(quantity, measured, stderr, reference) rows for tabular output."""
        def f(x) -> str:
            return "" if x is None or not math.isfinite(float(x)) else f"{float(x):.6g}"

        a_site = self.analytic_successes_per_site
        # site attempts times p: the accounting that yields 8 and 24
        attempt_level = None
        if self.analytic_attempts_per_site is not None:
            attempt_level = self.analytic_attempts_per_site * self.model.p_teleport
        sps = self.successes_per_site
        rows = [
            ("attempts_per_site", f(self.attempts_per_site.value), f(self.attempts_per_site.stderr),
             f(self.analytic_attempts_per_site)),
            ("gate_successes_per_site", f(sps.value), f(sps.stderr), f(a_site)),
            ("gate_attempts_per_site", f(self.gate_attempts_per_site.value),
             f(self.gate_attempts_per_site.stderr), ""),
            ("gate_successes_per_logical_gate", f(self.successes_per_logical_gate),
             f(sps.stderr * float(SITES_PER_LOGICAL_GATE)),
             f(None if a_site is None else a_site * SITES_PER_LOGICAL_GATE)),
            ("gate_successes_per_entangling_gate", f(self.successes_per_entangling_gate),
             f(sps.stderr * SITES_PER_ENTANGLING_GATE),
             f(None if a_site is None else a_site * SITES_PER_ENTANGLING_GATE)),
            ("quoted_successes_per_logical_gate", f(QUOTED_SUCCESSES_PER_LOGICAL_GATE), "", ""),
            ("quoted_successes_per_entangling_gate", f(QUOTED_SUCCESSES_PER_ENTANGLING_GATE), "", ""),
            ("attempt_level_successes_per_site", f(attempt_level), "", ""),
            ("attempt_level_per_logical_gate",
             f(None if attempt_level is None else attempt_level * SITES_PER_LOGICAL_GATE), "", ""),
            ("attempt_level_per_entangling_gate",
             f(None if attempt_level is None else attempt_level * SITES_PER_ENTANGLING_GATE), "", ""),
        ]
        if self.label_exact_attempts_per_site is not None:
            le = self.label_exact_attempts_per_site
            rows.append(("label_exact_attempts_per_site", f(le.value), f(le.stderr), ""))
        if self.optical_totals is not None:
            for k, v in self.optical_totals.items():
                rows.append((f"{k}_per_circuit", f(v), "", "upper bound" if self.model.cost.upper_bound else ""))
        return rows

    def to_text(self) -> str:
        lines = [f"model: {self.model} (n={self.model.n})",
                 f"layout nodes: {self.layout_nodes}; logical gates: {self.logical_gates}; "
                 f"entangling gates: {self.entangling_gates}",
                 f"trials: {self.trials}; completed: {self.completed}"]
        if not self.viable:
            lines.append("NOT VIABLE: alternating growth has non-positive drift for this gate model; "
                         "runs are capped by max_attempts and per-site figures are per layout node")
        lines.append(f"{'quantity':<38}{'measured':>12}{'stderr':>12}{'reference':>14}")
        for q, m, s, r in self.rows():
            lines.append(f"{q:<38}{m:>12}{s:>12}{r:>14}")
        lines.append("note: the quoted 8 and 24 equal site attempts x p_teleport; counted gate successes "
                     "per net site for n=2 are 8, i.e. 10.67 per logical gate and 32 per entangling gate")
        return "\n".join(lines) + "\n"


def resource_report(c, model: GateModel, trials: int, rng: RngStream, label_trials: int | None = None,
                    max_attempts: int | None = None) -> ResourceReport:
    """Grow the compiled layout of ``c`` repeatedly and tabulate gate costs."""
    from .mbqc import CPhase, compile_circuit, validate

    validate(c)
    if trials < 1:
        raise GrowthError("trials must be >= 1")
    pattern = compile_circuit(c)
    size = len(pattern.graph)
    viable = (expected_gain(model, 1) + expected_gain(model, 2)) > 0
    if max_attempts is None and not viable:
        max_attempts = 50 * size
    traces = run_trials(lambda r: grow_alternating(size, model, r, max_attempts), trials, rng.spawn(0))
    stats = GrowthStats.from_traces(traces, size)
    grown = np.array([t.gate_grown_sites for t in traces])
    gate_att = np.array([t.counters.gate_attempts for t in traces])
    per_site = (stats.attempts_per_site, stats.successes_per_site, ratio_estimate(gate_att, grown))
    if not viable:
        # net growth is not positive, so normalise by the layout size instead
        tsize = np.full(len(traces), float(size))
        per_site = tuple(ratio_estimate(np.array(x, dtype=float), tsize) for x in (
            [t.counters.site_attempts for t in traces], [t.counters.gate_successes for t in traces], gate_att))

    label = None
    label_trials = min(trials, 200) if label_trials is None else label_trials
    if label_trials and viable:
        order = _column_order(pattern)
        if order is not None:
            try:
                check_build_order(pattern.graph, order)
            except GrowthError:
                order = None
        if order is not None:
            lt = run_trials(lambda r: grow_cluster(pattern.graph, model, r, order), label_trials, rng.spawn(1))
            label = ratio_estimate(np.array([t.counters.site_attempts for t in lt]),
                                   np.array([t.gate_grown_sites for t in lt]))

    logical = sum(len(layer) for layer in c.layers)
    entangling = sum(isinstance(g, CPhase) for layer in c.layers for g in layer)
    cost = model.cost
    optical = cost.scaled(float(gate_att.mean())) if cost is not None else None
    return ResourceReport(model, trials, size, logical, entangling, viable, stats.completed, *per_site,
                          alternating_attempts_per_site(model), alternating_successes_per_site(model),
                          label, optical, float(gate_att.mean()))


@dataclass
class FrontierReport:
    trials: int
    depth: int
    breadth: int
    slack: int
    total_nodes: int
    window_nodes: int
    peak_live: int
    mean_peak_live: float
    starvation_rate: float
    mean_stalls: float


def default_slack(depth: int, c0: float = 2.0) -> int:
    return max(1, math.ceil(c0 * math.log2(depth + 1)))


def frontier_schedule(c, model: GateModel, trials: int, rng: RngStream, slack: int | None = None,
                      growth_rate: float = 3.0) -> FrontierReport:
    """Simulate growing layout columns just ahead of the measurement front.

    Works at cluster-size level. ``slack`` and the circuit depth count circuit
    layers; each layer occupies two layout columns after the input column, so
    the growth window spans ``2*slack + 1`` layout columns starting at the
    front. Each round then spends a budget of
    ``growth_rate`` times the expected attempts for one column, and measures
    the front column once it and its right neighbour are complete. A round
    where the budget runs out first counts as a stall; a trial with any stall
    is starved.
    """
    from .mbqc import compile_circuit, validate

    validate(c)
    attempts_per_site = alternating_attempts_per_site(model)
    if attempts_per_site is None:
        raise GrowthError(f"growth drift is not positive for {model}; frontier scheduling cannot keep up")
    pattern = compile_circuit(c)
    columns = pattern.num_columns()
    depth = len(c.layers)
    sizes = [0] * columns
    for _, col in pattern.coords.values():
        sizes[col] += 1
    cum = [0]
    for s in sizes:
        cum.append(cum[-1] + s)
    if slack is None:
        slack = default_slack(depth)
    if slack < 1:
        raise GrowthError("slack must be >= 1")
    span = 2 * slack + 1
    p = model.p_float
    p2 = p * p
    rate = float(attempts_per_site) * growth_rate

    peaks, stalls_all = [], []
    for t in range(trials):
        r = rng.spawn(t)
        live = 0
        double = False
        peak = 0
        stalls = 0

        def attempt() -> None:
            nonlocal live, double
            need = 2 if double else 1
            live = max(live, need)  # free reseeds when too few nodes are live
            live += 1 if r.uniform() < (p2 if double else p) else -1
            double = not double

        def window(f: int) -> int:
            return cum[min(f + span, columns)] - cum[f]

        while live < window(0):
            attempt()
            peak = max(peak, live)
        for f in range(columns):
            needed = cum[min(f + 2, columns)] - cum[f]
            budget = math.ceil(rate * sizes[f])
            while budget > 0 and live < window(f):
                attempt()
                budget -= 1
                peak = max(peak, live)
            if live < needed:
                stalls += 1
                while live < needed:
                    attempt()
                    peak = max(peak, live)
            live -= sizes[f]
        peaks.append(peak)
        stalls_all.append(stalls)
    return FrontierReport(trials, depth, c.num_qubits, slack, cum[-1], cum[min(span, columns)],
                          max(peaks, default=0), float(np.mean(peaks)) if peaks else 0.0,
                          float(np.mean([s > 0 for s in stalls_all])) if trials else 0.0,
                          float(np.mean(stalls_all)) if trials else 0.0)
