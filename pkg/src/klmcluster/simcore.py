"""Dense state-vector simulation of qubit registers.

Conventions
-----------
* Qubit 0 is the least significant bit of the amplitude index.
* ``Z_a = exp(-i a Z / 2)`` and ``X_a = exp(-i a X / 2)``; ``U(a, a') = X_a' Z_a``.

Operations return new :class:`StateVector` values and never mutate their
inputs. This module is the ground truth every other module is checked against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngStream

MAX_QUBITS = 22
PHASE_TOL = 1e-10
_DEGENERATE = 1e-9

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class SimulationError(ValueError):
    pass


def zrot_matrix(alpha: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * alpha), 0], [0, np.exp(0.5j * alpha)]], dtype=complex)


def xrot_matrix(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha / 2), math.sin(alpha / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def hadamard_matrix() -> np.ndarray:
    return _H.copy()


@dataclass(frozen=True, eq=False)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise SimulationError(f"qubit count {self.num_qubits} outside [1, {MAX_QUBITS}]")
        if self.amplitudes.shape != (2**self.num_qubits,):
            raise SimulationError("amplitude array must have length 2**num_qubits")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"


def from_amplitudes(amplitudes, normalize: bool = False) -> StateVector:
    amps = np.asarray(amplitudes, dtype=complex).copy()
    n = int(round(math.log2(len(amps)))) if len(amps) else 0
    if n < 1 or 2**n != len(amps):
        raise SimulationError("amplitude count must be a power of two >= 2")
    if normalize:
        norm = np.linalg.norm(amps)
        if norm < _DEGENERATE:
            raise SimulationError("cannot normalize a zero vector")
        amps /= norm
    return StateVector(n, amps)


def new_plus_state(n: int) -> StateVector:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_QUBITS:
        raise SimulationError(f"qubit count must be in [1, {MAX_QUBITS}], got {n!r}")
    return StateVector(int(n), np.full(2**n, 2 ** (-n / 2), dtype=complex))


def basis_state(n: int, index: int) -> StateVector:
    if not 1 <= n <= MAX_QUBITS:
        raise SimulationError(f"qubit count must be in [1, {MAX_QUBITS}], got {n!r}")
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


def _check_qubit(s: StateVector, q: int) -> None:
    if not 0 <= q < s.num_qubits:
        raise SimulationError(f"qubit index {q} out of range for {s.num_qubits} qubits")


def _split(s: StateVector, q: int) -> np.ndarray:
    # axis 1 of the view is the bit of qubit q
    return s.amplitudes.reshape(2 ** (s.num_qubits - q - 1), 2, 2**q)


def apply_matrix(s: StateVector, q: int, matrix: np.ndarray) -> StateVector:
    """Apply a 2x2 matrix to qubit ``q``."""
    _check_qubit(s, q)
    out = np.einsum("ij,ajb->aib", matrix, _split(s, q)).reshape(-1)
    return StateVector(s.num_qubits, out)


def _bit_mask(n: int, q: int) -> np.ndarray:
    return ((np.arange(2**n) >> q) & 1).astype(bool)


def apply_cphase(s: StateVector, a: int, b: int) -> StateVector:
    _check_qubit(s, a)
    _check_qubit(s, b)
    if a == b:
        raise SimulationError("cphase needs two distinct qubits")
    out = s.amplitudes.copy()
    out[_bit_mask(s.num_qubits, a) & _bit_mask(s.num_qubits, b)] *= -1
    return StateVector(s.num_qubits, out)


def _check_angle(alpha: float) -> None:
    if not math.isfinite(alpha):
        raise SimulationError(f"rotation angle must be finite, got {alpha!r}")


def apply_zrot(s: StateVector, q: int, alpha: float) -> StateVector:
    _check_angle(alpha)
    return apply_matrix(s, q, zrot_matrix(alpha))


def apply_xrot(s: StateVector, q: int, alpha: float) -> StateVector:
    _check_angle(alpha)
    return apply_matrix(s, q, xrot_matrix(alpha))


def apply_u(s: StateVector, q: int, alpha: float, alpha_prime: float) -> StateVector:
    """Z rotation by ``alpha`` followed by X rotation by ``alpha_prime``."""
    return apply_xrot(apply_zrot(s, q, alpha), q, alpha_prime)


def apply_hadamard(s: StateVector, q: int) -> StateVector:
    return apply_matrix(s, q, _H)


def apply_pauli(s: StateVector, q: int, which: str) -> StateVector:
    try:
        m = PAULI[which.upper()]
    except KeyError:
        raise SimulationError(f"unknown Pauli {which!r}") from None
    return apply_matrix(s, q, m)


def outcome_probabilities(s: StateVector, q: int) -> tuple[float, float]:
    _check_qubit(s, q)
    weights = np.sum(np.abs(_split(s, q)) ** 2, axis=(0, 2))
    return float(weights[0]), float(weights[1])


def project_z(s: StateVector, q: int, outcome: int) -> tuple[StateVector, float]:
    """Project qubit ``q`` onto ``|outcome>`` and renormalize.

    Returns the posterior (qubit kept, collapsed) and the Born probability of
    the forced outcome.
    """
    if outcome not in (0, 1):
        raise SimulationError(f"outcome must be 0 or 1, got {outcome!r}")
    norm = s.norm
    if norm < _DEGENERATE:
        raise SimulationError("degenerate state (norm below 1e-9)")
    view = _split(s, q).copy()
    view[:, 1 - outcome, :] = 0
    prob = float(np.sum(np.abs(view) ** 2)) / norm**2
    if prob < _DEGENERATE:
        raise SimulationError(f"outcome {outcome} on qubit {q} has zero probability")
    out = view.reshape(-1) / math.sqrt(prob * norm**2)
    return StateVector(s.num_qubits, out), prob


def measure_z(s: StateVector, q: int, rng: RngStream) -> tuple[int, StateVector, float]:
    """Computational-basis measurement with Born-rule sampling."""
    if s.norm < _DEGENERATE:
        raise SimulationError("degenerate state (norm below 1e-9)")
    _, p1 = outcome_probabilities(s, q)
    p1 /= s.norm**2
    outcome = 1 if rng.uniform() < p1 else 0
    posterior, prob = project_z(s, q, outcome)
    return outcome, posterior, prob


def remove_qubit(s: StateVector, q: int) -> StateVector:
    """Drop a qubit that is already in a computational basis state.

    Higher qubit indices shift down by one.
    """
    _check_qubit(s, q)
    if s.num_qubits == 1:
        raise SimulationError("cannot remove the last qubit of a register")
    view = _split(s, q)
    w0 = float(np.sum(np.abs(view[:, 0, :]) ** 2))
    w1 = float(np.sum(np.abs(view[:, 1, :]) ** 2))
    if min(w0, w1) > 1e-12 * (w0 + w1):
        raise SimulationError(f"qubit {q} is not in a computational basis state")
    kept = view[:, 0, :] if w0 >= w1 else view[:, 1, :]
    return StateVector(s.num_qubits - 1, kept.reshape(-1).copy())


def append_plus(s: StateVector) -> StateVector:
    """Tensor a fresh ``|+>`` on as the new most significant qubit."""
    if s.num_qubits + 1 > MAX_QUBITS:
        raise SimulationError(f"register would exceed {MAX_QUBITS} qubits")
    plus = np.array([1, 1], dtype=complex) / math.sqrt(2)
    return StateVector(s.num_qubits + 1, np.kron(plus, s.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.num_qubits != b.num_qubits:
        raise SimulationError("fidelity of states with different qubit counts")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def equal_up_to_global_phase(a: StateVector, b: StateVector, tol: float = PHASE_TOL) -> bool:
    return fidelity(a, b) >= 1 - tol


def permute_qubits(s: StateVector, order: list[int]) -> StateVector:
    """Reorder qubits so that new qubit ``i`` is old qubit ``order[i]``."""
    n = s.num_qubits
    if sorted(order) != list(range(n)):
        raise SimulationError(f"{order} is not a permutation of range({n})")
    # tensor axis k holds qubit n-1-k
    t = s.amplitudes.reshape([2] * n)
    axes = [n - 1 - order[n - 1 - k] for k in range(n)]
    return StateVector(n, np.transpose(t, axes).reshape(-1).copy())
