"""Reference implementations that share no code with the package under test.

Everything here is written directly from the definitions with Kronecker
products and exact fractions, so agreement with the package is evidence and
not an echo.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

I2 = np.eye(2, dtype=complex)
P1 = np.diag([0, 1]).astype(complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


def kron_all(ops):
    out = np.array([[1]], dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def embed(op: np.ndarray, q: int, n: int) -> np.ndarray:
    """Full 2^n matrix for ``op`` on qubit ``q``; qubit 0 is the least significant bit."""
    # kron order runs from the most significant qubit down
    return kron_all([op if k == q else I2 for k in reversed(range(n))])


def cz_matrix(a: int, b: int, n: int) -> np.ndarray:
    return np.eye(2**n, dtype=complex) - 2 * embed(P1, a, n) @ embed(P1, b, n)


def kron_cluster(nodes: list[int], edges: list[tuple[int, int]]) -> np.ndarray:
    """|+>^n followed by a CZ on every edge, with qubit index = rank of the node id."""
    idx = {v: i for i, v in enumerate(sorted(nodes))}
    n = len(nodes)
    psi = PLUS
    for _ in range(n - 1):
        psi = np.kron(psi, PLUS)
    for u, v in edges:
        psi = cz_matrix(idx[u], idx[v], n) @ psi
    return psi


def rz(a: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])


def rx(a: float) -> np.ndarray:
    c, s = np.cos(a / 2), np.sin(a / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def circuit_oracle(num_qubits: int, layers) -> np.ndarray:
    """Apply layers of ("u", q, a, a') / ("cz", a, b) tuples to |+>^n."""
    psi = PLUS
    for _ in range(num_qubits - 1):
        psi = np.kron(psi, PLUS)
    for layer in layers:
        for g in layer:
            if g[0] == "u":
                _, q, a, ap = g
                psi = embed(rx(ap) @ rz(a), q, num_qubits) @ psi
            else:
                psi = cz_matrix(g[1], g[2], num_qubits) @ psi
    return psi


def overlap_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def glue_enumeration(k: int, p: Fraction, rule: str) -> Fraction:
    """Success probability of gluing by walking every sequence of teleport draws.

    State is the number of unconsumed dangling nodes on each side. Each attempt
    draws the first teleport, then (if it worked) the second.
    """

    @lru_cache(maxsize=None)
    def walk(a_left: int, b_left: int) -> Fraction:
        if a_left == 0 or b_left == 0:
            return Fraction(0)
        total = Fraction(0)
        # first draw fails: A loses its node
        total += (1 - p) * walk(a_left - 1, b_left)
        # first succeeds, second fails: B loses its node; A too under "retire"
        a_next = a_left - 1 if rule == "retire" else a_left
        total += p * (1 - p) * walk(a_next, b_left - 1)
        # both succeed
        total += p * p
        return total

    return walk(k, k)


def glue_sequences(k: int, p: Fraction, rule: str) -> Fraction:
    """Same quantity by listing explicit draw strings up to length 2k and summing weights."""
    total = Fraction(0)
    stack = [((), k, k)]
    while stack:
        draws, a, b = stack.pop()
        if a == 0 or b == 0:
            continue
        w = Fraction(1)
        for d in draws:
            w *= p if d else 1 - p
        # extend by one attempt: (0,), (1, 0) or (1, 1)
        stack.append((draws + (0,), a - 1, b))
        stack.append((draws + (1, 0), a - 1 if rule == "retire" else a, b - 1))
        total += w * p * p
    return total


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
