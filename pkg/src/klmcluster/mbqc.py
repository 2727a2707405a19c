"""Compile U/CPHASE circuits to cluster layouts and adaptive measurement patterns.

Each circuit qubit becomes a horizontal chain of cluster nodes, starting from
an input node in ``|+>``. A gate ``U(a, a') = X_a' Z_a`` consumes two chain
nodes, measured after ``H Z_(+-a)`` and ``H Z_(+-a')``. A CPHASE becomes a
single vertical edge between the current chain ends of its two rows. The last
node of every chain is left unmeasured and carries the output.

Byproduct bookkeeping
---------------------
After any prefix of measurements the logical state of a row equals
``X**x Z**z`` applied to the ideal state, where ``x`` and ``z`` are parities of
earlier outcomes. The compiler tracks them symbolically as sets of node ids:

* measuring a chain node ``v`` with base angle ``a`` uses the angle
  ``(-1)**x * a``, then ``x, z <- {v} ^ z, x``;
* a vertical edge between rows ``a`` and ``b`` sends ``z_b ^= x_a`` and
  ``z_a ^= x_b``.

The sign dependencies of a node are its ``x`` set at measurement time.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np
import yaml

from . import simcore
from .graphstate import ByproductRecord, ClusterGraph
from .rng import RngStream
from .simcore import StateVector


# circuit IR -------------------------------------------------------------------

@dataclass(frozen=True)
class UGate:
    qubit: int
    alpha: float
    alpha_prime: float

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class CPhase:
    a: int
    b: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.a, self.b)


Gate = Union[UGate, CPhase]


@dataclass
class CircuitIR:
    num_qubits: int
    layers: list[list[Gate]] = field(default_factory=list)

    @property
    def gates(self) -> list[Gate]:
        return [g for layer in self.layers for g in layer]

    def count(self, kind: type) -> int:
        return sum(isinstance(g, kind) for g in self.gates)


class CircuitError(ValueError):
    def __init__(self, message: str, layer: int | None = None, line: int | None = None):
        self.layer = layer
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if layer is not None:
            where.append(f"layer {layer}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class DuplicateQubitInLayer(CircuitError):
    pass


class ParallelBridgeConflict(CircuitError):
    pass


class BadEndpoints(CircuitError):
    pass


class PatternInconsistent(RuntimeError):
    pass


def validate(c: CircuitIR) -> None:
    """Raise a :class:`CircuitError` subclass naming the first offending layer."""
    if c.num_qubits < 1:
        raise CircuitError(f"circuit needs at least one qubit, got {c.num_qubits}")
    for li, layer in enumerate(c.layers):
        for g in layer:
            for q in g.qubits:
                if not 0 <= q < c.num_qubits:
                    raise BadEndpoints(f"qubit {q} out of range", layer=li)
            if isinstance(g, CPhase) and g.a == g.b:
                raise BadEndpoints(f"cphase endpoints coincide on qubit {g.a}", layer=li)
            if isinstance(g, UGate) and not (math.isfinite(g.alpha) and math.isfinite(g.alpha_prime)):
                raise CircuitError(f"non-finite angle on qubit {g.qubit}", layer=li)
        bridged: dict[int, int] = {}
        for g in layer:
            if isinstance(g, CPhase):
                for q in g.qubits:
                    bridged[q] = bridged.get(q, 0) + 1
        for q, k in bridged.items():
            if k > 1:
                raise ParallelBridgeConflict(f"qubit {q} is in {k} parallel cphase gates", layer=li)
        seen: set[int] = set()
        for g in layer:
            for q in g.qubits:
                if q in seen:
                    raise DuplicateQubitInLayer(f"qubit {q} used twice", layer=li)
                seen.add(q)


def direct_simulate(c: CircuitIR) -> StateVector:
    """Run the circuit gate by gate on ``|+>**n``."""
    s = simcore.new_plus_state(c.num_qubits)
    for layer in c.layers:
        for g in layer:
            if isinstance(g, UGate):
                s = simcore.apply_u(s, g.qubit, g.alpha, g.alpha_prime)
            else:
                s = simcore.apply_cphase(s, g.a, g.b)
    return s


# measurement patterns ---------------------------------------------------------

@dataclass(frozen=True)
class NodeRecord:
    base_angle: float
    time_label: int
    sign_dependencies: frozenset[int]


@dataclass
class MeasurementPattern:
    graph: ClusterGraph
    coords: dict[int, tuple[int, int]]
    records: dict[int, NodeRecord]
    outputs: list[int]
    # per output node: parity sets for the final X and Z byproducts
    output_byproducts: dict[int, tuple[frozenset[int], frozenset[int]]]

    @property
    def num_rows(self) -> int:
        return len(self.outputs)

    @property
    def measured(self) -> list[int]:
        return sorted(self.records, key=lambda v: (self.records[v].time_label, v))

    def is_output(self, node: int) -> bool:
        return node in self.output_byproducts

    def vertical_edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, v in self.graph.edges if self.coords[u][0] != self.coords[v][0]]

    def num_columns(self) -> int:
        return 1 + max(col for _, col in self.coords.values())

    def to_dict(self) -> dict:
        nodes = []
        for v in self.graph.nodes:
            row, col = self.coords[v]
            entry = {"id": v, "row": row, "col": col, "output": self.is_output(v)}
            if v in self.records:
                r = self.records[v]
                entry.update(angle=r.base_angle, time=r.time_label, depends_on=sorted(r.sign_dependencies))
            else:
                xs, zs = self.output_byproducts[v]
                entry.update(byproduct_x=sorted(xs), byproduct_z=sorted(zs))
            nodes.append(entry)
        return {"rows": self.num_rows, "columns": self.num_columns(), "nodes": nodes,
                "edges": [list(e) for e in self.graph.edges]}


def compile_circuit(c: CircuitIR) -> MeasurementPattern:
    validate(c)
    graph = ClusterGraph()
    coords: dict[int, tuple[int, int]] = {}
    angles: dict[int, float] = {}
    deps: dict[int, frozenset[int]] = {}
    ids = itertools.count()

    def new_node(row: int, col: int) -> int:
        v = next(ids)
        graph.add_node(v)
        coords[v] = (row, col)
        return v

    carrier = [new_node(r, 0) for r in range(c.num_qubits)]
    xdep = [frozenset() for _ in range(c.num_qubits)]
    zdep = [frozenset() for _ in range(c.num_qubits)]

    for layer in c.layers:
        for g in layer:
            if isinstance(g, UGate):
                r = g.qubit
                for angle in (g.alpha, g.alpha_prime):
                    v = carrier[r]
                    angles[v] = float(angle)
                    deps[v] = xdep[r]
                    nxt = new_node(r, coords[v][1] + 1)
                    graph.add_edge(v, nxt)
                    xdep[r], zdep[r] = zdep[r] ^ {v}, xdep[r]
                    carrier[r] = nxt
            else:
                graph.toggle_edge(carrier[g.a], carrier[g.b])
                xa, xb = xdep[g.a], xdep[g.b]
                zdep[g.b] = zdep[g.b] ^ xa
                zdep[g.a] = zdep[g.a] ^ xb

    labels: dict[int, int] = {}
    for v in sorted(angles):  # ids increase with creation, so deps come first
        labels[v] = 1 + max((labels[d] for d in deps[v]), default=0)
    records = {v: NodeRecord(angles[v], labels[v], deps[v]) for v in angles}
    byproducts = {carrier[r]: (xdep[r], zdep[r]) for r in range(c.num_qubits)}
    return MeasurementPattern(graph, coords, records, list(carrier), byproducts)


def _parity(outcomes: dict[int, int], nodes: Iterable[int]) -> int:
    p = 0
    for v in nodes:
        if v not in outcomes:
            raise PatternInconsistent(f"node {v} is needed before it is measured")
        p ^= outcomes[v]
    return p


@dataclass
class ExecutionResult:
    output_state: StateVector  # qubit r holds the output of row r
    byproducts: ByproductRecord
    outcomes: dict[int, int]
    outputs: list[int]
    branch_probability: float = 1.0

    def corrected_state(self) -> StateVector:
        index = {v: r for r, v in enumerate(self.outputs)}
        return self.byproducts.apply_inverse(self.output_state, index)


def execute_pattern(p: MeasurementPattern, rng: RngStream | None = None,
                    forced: dict[int, int] | None = None) -> ExecutionResult:
    """Run the pattern; outcomes are drawn from ``rng`` unless given in ``forced``.

    The cluster is entangled lazily: a node joins the register when it or a
    neighbour is about to be measured, and leaves it once measured. Because
    all CPHASEs commute with measurements on other qubits, the output equals
    that of preparing the whole cluster first.
    """
    if forced is None and rng is None:
        raise ValueError("need an rng or a full set of forced outcomes")
    live: list[int] = []
    state: StateVector | None = None
    applied: set[tuple[int, int]] = set()
    outcomes: dict[int, int] = {}
    branch_p = 1.0

    def ensure(v: int) -> None:
        nonlocal state
        if v in live:
            return
        state = simcore.new_plus_state(1) if state is None else simcore.append_plus(state)
        live.append(v)

    def entangle(v: int) -> None:
        nonlocal state
        for w in p.graph.neighbors(v):
            e = (min(v, w), max(v, w))
            if e in applied:
                continue
            ensure(w)
            state = simcore.apply_cphase(state, live.index(v), live.index(w))
            applied.add(e)

    for v in p.measured:
        rec = p.records[v]
        ensure(v)
        entangle(v)
        sign = -1 if _parity(outcomes, rec.sign_dependencies) else 1
        q = live.index(v)
        state = simcore.apply_hadamard(simcore.apply_zrot(state, q, sign * rec.base_angle), q)
        if forced is not None and v in forced:
            m = forced[v]
            state, prob = simcore.project_z(state, q, m)
        elif rng is not None:
            m, state, prob = simcore.measure_z(state, q, rng)
        else:
            raise PatternInconsistent(f"no forced outcome for node {v}")
        outcomes[v] = m
        branch_p *= prob
        if len(live) > 1:
            state = simcore.remove_qubit(state, q)
        else:
            state = None
        live.remove(v)

    for v in p.outputs:
        ensure(v)
    for v in p.outputs:
        entangle(v)
    state = simcore.permute_qubits(state, [live.index(v) for v in p.outputs])

    record = ByproductRecord()
    for v in p.outputs:
        xs, zs = p.output_byproducts[v]
        record.add(v, x=_parity(outcomes, xs), z=_parity(outcomes, zs))
    return ExecutionResult(state, record, outcomes, list(p.outputs), branch_p)


@dataclass
class EquivalenceReport:
    trials: int
    min_fidelity: float
    mean_fidelity: float
    branch_counts: dict[str, int]

    def passed(self, tol: float = 1e-9) -> bool:
        return self.min_fidelity >= 1 - tol


def _branch_key(p: MeasurementPattern, outcomes: dict[int, int]) -> str:
    return "".join(str(outcomes[v]) for v in sorted(p.records))


def verify_equivalence(c: CircuitIR, trials: int, rng: RngStream) -> EquivalenceReport:
    """Execute the pattern ``trials`` times against the direct circuit simulation."""
    p = compile_circuit(c)
    target = direct_simulate(c)
    fids: list[float] = []
    counts: dict[str, int] = {}
    for t in range(trials):
        res = execute_pattern(p, rng.spawn(t))
        fids.append(simcore.fidelity(res.corrected_state(), target))
        key = _branch_key(p, res.outcomes)
        counts[key] = counts.get(key, 0) + 1
    return EquivalenceReport(trials, min(fids, default=1.0), float(np.mean(fids)) if fids else 1.0,
                             dict(sorted(counts.items())))


def verify_all_branches(c: CircuitIR, max_measured: int = 12) -> EquivalenceReport:
    """Force every outcome branch of the pattern and check each against the oracle."""
    p = compile_circuit(c)
    nodes = sorted(p.records)
    if len(nodes) > max_measured:
        raise ValueError(f"{len(nodes)} measured nodes exceed the exhaustive limit {max_measured}")
    target = direct_simulate(c)
    fids = []
    counts = {}
    for bits in itertools.product((0, 1), repeat=len(nodes)):
        forced = dict(zip(nodes, bits))
        res = execute_pattern(p, forced=forced)
        fids.append(simcore.fidelity(res.corrected_state(), target))
        counts["".join(map(str, bits))] = 1
    return EquivalenceReport(len(fids), min(fids), float(np.mean(fids)), counts)


def random_circuit(rng: RngStream, num_qubits: int, u_columns: int, cphases: int) -> CircuitIR:
    """Random layered circuit: ``u_columns`` full U layers with CPHASE layers interleaved."""
    layers: list[list[Gate]] = []
    slots = sorted(rng.integer(0, u_columns + 1) for _ in range(cphases))
    for col in range(u_columns + 1):
        for _ in range(slots.count(col)):
            a = rng.integer(0, num_qubits)
            b = (a + 1 + rng.integer(0, num_qubits - 1)) % num_qubits
            layers.append([CPhase(a, b)])
        if col < u_columns:
            layers.append([UGate(q, *rng.angles(2)) for q in range(num_qubits)])
    return CircuitIR(num_qubits, layers)


def example_circuit(alphas=(0.0, 0.0, 0.0, 0.0), betas=(0.0, 0.0, 0.0, 0.0)) -> CircuitIR:
    """Two qubits: a U column, one CPHASE, a second U column."""
    a1, a2, a3, a4 = alphas
    b1, b2, b3, b4 = betas
    return CircuitIR(2, [[UGate(0, a1, a2), UGate(1, b1, b2)], [CPhase(0, 1)],
                         [UGate(0, a3, a4), UGate(1, b3, b4)]])


# circuit file format ------------------------------------------------------------

def _line(node) -> int:
    return node.start_mark.line + 1


def _scalar(node, kind, what: str, layer: int):
    if not isinstance(node, yaml.ScalarNode):
        raise CircuitError(f"{what} must be a scalar", layer=layer, line=_line(node))
    value = node.value
    if node.style is None:  # unquoted: numeric literals per JSON
        for conv in (int, float):
            try:
                value = conv(node.value)
                break
            except ValueError:
                pass
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise CircuitError(f"{what} must be a number, got {node.value!r}", layer=layer, line=_line(node))
        if not math.isfinite(float(value)):
            raise CircuitError(f"{what} must be finite", layer=layer, line=_line(node))
        return float(value)
    if isinstance(value, bool) or not isinstance(value, int):
        raise CircuitError(f"{what} must be an integer, got {node.value!r}", layer=layer, line=_line(node))
    return int(value)


def loads_circuit(text: str) -> CircuitIR:
    """Parse the circuit file format (JSON, or the equivalent YAML)."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise CircuitError(f"parse error: {getattr(exc, 'problem', exc)}",
                           line=mark.line + 1 if mark else None) from None
    if not isinstance(root, yaml.MappingNode):
        raise CircuitError("circuit file must hold an object with 'qubits' and 'layers'")
    top = {k.value: v for k, v in root.value}
    if "qubits" not in top or "layers" not in top:
        raise CircuitError("circuit object needs 'qubits' and 'layers'", line=_line(root))
    nq = _scalar(top["qubits"], int, "qubits", None)
    if not isinstance(top["layers"], yaml.SequenceNode):
        raise CircuitError("'layers' must be a list", line=_line(top["layers"]))
    layers: list[list[Gate]] = []
    for li, lnode in enumerate(top["layers"].value):
        if not isinstance(lnode, yaml.SequenceNode):
            raise CircuitError("layer must be a list of gates", layer=li, line=_line(lnode))
        layer: list[Gate] = []
        for gnode in lnode.value:
            if not isinstance(gnode, yaml.MappingNode):
                raise CircuitError("gate must be an object", layer=li, line=_line(gnode))
            fields = {k.value: v for k, v in gnode.value}
            kind = fields.get("type")
            kind = kind.value if isinstance(kind, yaml.ScalarNode) else None
            try:
                if kind == "u":
                    layer.append(UGate(_scalar(fields["qubit"], int, "qubit", li),
                                       _scalar(fields["alpha"], float, "alpha", li),
                                       _scalar(fields["alpha_prime"], float, "alpha_prime", li)))
                elif kind == "cz":
                    layer.append(CPhase(_scalar(fields["a"], int, "a", li), _scalar(fields["b"], int, "b", li)))
                else:
                    raise CircuitError(f"unknown gate type {kind!r}", layer=li, line=_line(gnode))
            except KeyError as missing:
                raise CircuitError(f"gate is missing field {missing}", layer=li, line=_line(gnode)) from None
        layers.append(layer)
    c = CircuitIR(nq, layers)
    _validate_with_lines(c, top["layers"])
    return c


def _validate_with_lines(c: CircuitIR, layers_node) -> None:
    try:
        validate(c)
    except CircuitError as exc:
        if exc.layer is not None and exc.line is None:
            exc.line = _line(layers_node.value[exc.layer])
            exc.args = (f"line {exc.line}, {exc.args[0]}",)
        raise


def dumps_circuit(c: CircuitIR) -> str:
    import json

    layers = []
    for layer in c.layers:
        out = []
        for g in layer:
            if isinstance(g, UGate):
                out.append({"type": "u", "qubit": g.qubit, "alpha": g.alpha, "alpha_prime": g.alpha_prime})
            else:
                out.append({"type": "cz", "a": g.a, "b": g.b})
        layers.append(out)
    return json.dumps({"qubits": c.num_qubits, "layers": layers}, indent=2) + "\n"
