"""Cluster graphs, their amplitude formula, and the deletion rule.

A cluster state on graph ``G`` has amplitude
``(-1)**(sum over edges z_j z_k) / 2**(|V|/2)`` on basis state ``z``. Node ids
are opaque, stable integers; the qubit index of a node is its rank among the
sorted node ids at the moment a state is built.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import simcore
from .rng import RngStream
from .simcore import StateVector


class GraphError(ValueError):
    pass


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass
class ClusterGraph:
    """Undirected simple graph with stable integer node ids."""

    _adj: dict[int, set[int]] = field(default_factory=dict)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], nodes: Iterable[int] = ()) -> "ClusterGraph":
        g = cls()
        for n in nodes:
            g.add_node(n)
        for u, v in edges:
            g.add_node(u)
            g.add_node(v)
            g.add_edge(u, v)
        return g

    @classmethod
    def path(cls, n: int) -> "ClusterGraph":
        return cls.from_edges([(i, i + 1) for i in range(n - 1)], nodes=range(n))

    @classmethod
    def star(cls, leaves: int) -> "ClusterGraph":
        return cls.from_edges([(0, i) for i in range(1, leaves + 1)], nodes=[0])

    @classmethod
    def cycle(cls, n: int) -> "ClusterGraph":
        return cls.from_edges([(i, (i + 1) % n) for i in range(n)])

    def copy(self) -> "ClusterGraph":
        return ClusterGraph({k: set(v) for k, v in self._adj.items()})

    @property
    def nodes(self) -> list[int]:
        return sorted(self._adj)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted({_edge(u, v) for u, nb in self._adj.items() for v in nb})

    def __len__(self) -> int:
        return len(self._adj)

    def __contains__(self, node: int) -> bool:
        return node in self._adj

    def __eq__(self, other) -> bool:
        return isinstance(other, ClusterGraph) and self._adj == other._adj

    def num_edges(self) -> int:
        return sum(len(nb) for nb in self._adj.values()) // 2

    def neighbors(self, node: int) -> set[int]:
        self._require(node)
        return set(self._adj[node])

    def degree(self, node: int) -> int:
        self._require(node)
        return len(self._adj[node])

    def has_edge(self, u: int, v: int) -> bool:
        return u in self._adj and v in self._adj[u]

    def add_node(self, node: int) -> None:
        self._adj.setdefault(int(node), set())

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise GraphError(f"self-loop on node {u}")
        self._require(u)
        self._require(v)
        self._adj[u].add(v)
        self._adj[v].add(u)

    def toggle_edge(self, u: int, v: int) -> None:
        """Add the edge, or remove it if present (CZ is an involution)."""
        if self.has_edge(u, v):
            self._adj[u].discard(v)
            self._adj[v].discard(u)
        else:
            self.add_edge(u, v)

    def remove_node(self, node: int) -> set[int]:
        """Remove ``node`` and its edges; return its former neighbours."""
        self._require(node)
        nb = self._adj.pop(node)
        for v in nb:
            self._adj[v].discard(node)
        return nb

    def is_connected(self) -> bool:
        if not self._adj:
            return True
        start = next(iter(self._adj))
        seen, stack = {start}, [start]
        while stack:
            for v in self._adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(self._adj)

    def qubit_index(self) -> dict[int, int]:
        return {node: i for i, node in enumerate(self.nodes)}

    def _require(self, node: int) -> None:
        if node not in self._adj:
            raise GraphError(f"node {node} not in graph")


@dataclass
class ByproductRecord:
    """Pending Pauli corrections ``X**x Z**z`` per node (exponents mod 2)."""

    ops: dict[int, tuple[int, int]] = field(default_factory=dict)

    def get(self, node: int) -> tuple[int, int]:
        return self.ops.get(node, (0, 0))

    def add(self, node: int, x: int = 0, z: int = 0) -> None:
        ox, oz = self.get(node)
        nx_, nz = (ox + x) % 2, (oz + z) % 2
        if nx_ or nz:
            self.ops[node] = (nx_, nz)
        else:
            self.ops.pop(node, None)

    def compose(self, other: "ByproductRecord") -> "ByproductRecord":
        out = ByproductRecord(dict(self.ops))
        for node, (x, z) in other.ops.items():
            out.add(node, x, z)
        return out

    def restrict(self, nodes: Iterable[int]) -> "ByproductRecord":
        keep = set(nodes)
        return ByproductRecord({n: xz for n, xz in self.ops.items() if n in keep})

    def is_identity(self) -> bool:
        return not self.ops

    def apply_inverse(self, s: StateVector, index: dict[int, int]) -> StateVector:
        """Undo the recorded Paulis on ``s`` (node -> qubit via ``index``)."""
        for node, (x, z) in sorted(self.ops.items()):
            if node not in index:
                continue
            if x:
                s = simcore.apply_pauli(s, index[node], "X")
            if z:
                s = simcore.apply_pauli(s, index[node], "Z")
        return s

    def apply(self, s: StateVector, index: dict[int, int]) -> StateVector:
        """Apply ``X**x Z**z`` (Z first) on each recorded node."""
        for node, (x, z) in sorted(self.ops.items()):
            if node not in index:
                continue
            if z:
                s = simcore.apply_pauli(s, index[node], "Z")
            if x:
                s = simcore.apply_pauli(s, index[node], "X")
        return s


def cluster_amplitudes(g: ClusterGraph) -> StateVector:
    """Evaluate the cluster-state amplitude formula directly, configuration by configuration."""
    n = len(g)
    if n == 0:
        raise GraphError("empty graph has no cluster state")
    if n > simcore.MAX_QUBITS:
        raise GraphError(f"{n} nodes exceed the {simcore.MAX_QUBITS}-qubit limit")
    index = g.qubit_index()
    z = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    parity = np.zeros(2**n, dtype=np.int64)
    for u, v in g.edges:
        parity += z[:, index[u]] * z[:, index[v]]
    amps = np.where(parity % 2, -1.0, 1.0).astype(complex) * 2 ** (-n / 2)
    return StateVector(n, amps)


def build_cluster_state(g: ClusterGraph, edge_order: list[tuple[int, int]] | None = None) -> StateVector:
    """Prepare ``|+>`` on every node, then CPHASE across each edge."""
    if len(g) == 0:
        raise GraphError("empty graph has no cluster state")
    index = g.qubit_index()
    s = simcore.new_plus_state(len(g))
    for u, v in (g.edges if edge_order is None else edge_order):
        if not g.has_edge(u, v):
            raise GraphError(f"({u}, {v}) is not an edge")
        s = simcore.apply_cphase(s, index[u], index[v])
    return s


def delete_by_measurement(g: ClusterGraph, node: int, outcome: int) -> tuple[ClusterGraph, ByproductRecord]:
    """Graph after a computational-basis measurement of ``node``.

    The posterior is the cluster state of the reduced graph up to ``Z**outcome``
    on every former neighbour; that correction is returned.
    """
    if node not in g:
        raise GraphError(f"node {node} not in graph")
    if outcome not in (0, 1):
        raise GraphError(f"outcome must be 0 or 1, got {outcome!r}")
    g2 = g.copy()
    nb = g2.remove_node(node)
    corr = ByproductRecord()
    for v in nb:
        corr.add(v, z=outcome)
    return g2, corr


def _check_deletion(g: ClusterGraph, node: int, outcome: int, tol: float) -> tuple[bool, float]:
    index = g.qubit_index()
    q = index[node]
    state = build_cluster_state(g)
    posterior, prob = simcore.project_z(state, q, outcome)
    g2, corr = delete_by_measurement(g, node, outcome)
    reduced = simcore.remove_qubit(posterior, q)
    reduced = corr.apply_inverse(reduced, g2.qubit_index())
    ok = simcore.fidelity(reduced, cluster_amplitudes(g2)) >= 1 - tol
    return ok, prob


def verify_deletion(g: ClusterGraph, node: int, rng: RngStream | None = None,
                    outcome: int | None = None, tol: float = 1e-10) -> bool:
    """Check the deletion rule on the state vector.

    With ``outcome`` given the measurement is forced; otherwise it is drawn from
    ``rng``. Both outcomes must also have probability 1/2.
    """
    if len(g) < 2:
        raise GraphError("deletion check needs at least two nodes")
    if node not in g:
        raise GraphError(f"node {node} not in graph")
    state = build_cluster_state(g)
    p0, p1 = simcore.outcome_probabilities(state, g.qubit_index()[node])
    if abs(p0 - 0.5) > 1e-12 or abs(p1 - 0.5) > 1e-12:
        return False
    if outcome is None:
        if rng is None:
            raise GraphError("need rng or a forced outcome")
        outcome = rng.bit()
    ok, _ = _check_deletion(g, node, outcome, tol)
    return ok


def connected_graphs(max_nodes: int) -> list[ClusterGraph]:
    """All connected graphs on 1..max_nodes nodes, one per isomorphism class."""
    import networkx as nx

    out: list[ClusterGraph] = []
    for n in range(1, max_nodes + 1):
        reps: list[nx.Graph] = []
        pairs = list(itertools.combinations(range(n), 2))
        for mask in range(2 ** len(pairs)):
            h = nx.Graph()
            h.add_nodes_from(range(n))
            h.add_edges_from(p for i, p in enumerate(pairs) if mask >> i & 1)
            if not nx.is_connected(h):
                continue
            if any(nx.is_isomorphic(h, r) for r in reps):
                continue
            reps.append(h)
        out.extend(ClusterGraph.from_edges(r.edges(), nodes=r.nodes()) for r in reps)
    return out


def random_graph(rng: RngStream, max_nodes: int, edge_prob: float = 0.5, min_nodes: int = 1) -> ClusterGraph:
    n = rng.integer(min_nodes, max_nodes + 1)
    g = ClusterGraph.from_edges([], nodes=range(n))
    for u, v in itertools.combinations(range(n), 2):
        if rng.uniform() < edge_prob:
            g.add_edge(u, v)
    return g


# edge-list text format -------------------------------------------------------

def dumps_graph(g: ClusterGraph) -> str:
    lines = [f"{u} {v}" for u, v in g.edges]
    isolated = [n for n in g.nodes if g.degree(n) == 0]
    if isolated:
        lines.append("# isolated: " + " ".join(map(str, isolated)))
    return "\n".join(lines) + "\n"


def loads_graph(text: str) -> ClusterGraph:
    g = ClusterGraph()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("isolated:"):
                try:
                    for tok in body[len("isolated:"):].split():
                        g.add_node(int(tok))
                except ValueError:
                    raise GraphError(f"line {lineno}: bad isolated-node list") from None
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: node ids must be integers") from None
        if u == v:
            raise GraphError(f"line {lineno}: self-loop on node {u}")
        g.add_node(u)
        g.add_node(v)
        g.add_edge(u, v)
    return g
