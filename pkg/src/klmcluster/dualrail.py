"""Occupation-number states on a few optical modes, and dual-rail qubits.

A dual-rail qubit is one photon shared by modes ``(a, b)``: ``|0>_L = |0,1>``
and ``|1>_L = |1,0>`` (photon in ``b`` means logical 0).

Beamsplitter convention: creation operators map as

    a1^dag -> cos(t) a1^dag + i sin(t) a2^dag
    a2^dag -> i sin(t) a1^dag + cos(t) a2^dag

so on a dual-rail qubit it acts as ``[[cos t, i sin t], [i sin t, cos t]]``,
which equals ``xrot_matrix(-2 t)``. A phase shifter on mode ``a`` acts as
``diag(1, e^{i phi})``, i.e. ``zrot_matrix(phi)`` up to a global phase.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .rng import RngStream
from .simcore import xrot_matrix, zrot_matrix

NORM_TOL = 1e-12
LEAK_TOL = 1e-10
CUTOFF_TOL = 1e-12


class FockError(ValueError):
    pass


class CutoffError(FockError):
    pass


class LeakageError(FockError):
    def __init__(self, leaked: float):
        super().__init__(f"{leaked:.3g} of the weight lies outside the dual-rail subspace")
        self.leaked = leaked


Occupation = tuple[int, ...]


@dataclass(frozen=True)
class FockState:
    num_modes: int
    amplitudes: dict[Occupation, complex]
    cutoff: int = 2

    def __post_init__(self):
        if self.num_modes < 1:
            raise FockError("need at least one mode")
        for occ in self.amplitudes:
            if len(occ) != self.num_modes:
                raise FockError(f"occupation {occ} does not have {self.num_modes} modes")
            if any(k < 0 or k > self.cutoff for k in occ):
                raise CutoffError(f"occupation {occ} is outside 0..{self.cutoff}")

    @property
    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def amplitude(self, occ: Occupation) -> complex:
        return self.amplitudes.get(tuple(occ), 0j)

    def photon_number_weights(self) -> dict[int, float]:
        """Total squared amplitude in each total-photon-number sector."""
        out: dict[int, float] = {}
        for occ, a in self.amplitudes.items():
            n = sum(occ)
            out[n] = out.get(n, 0.0) + abs(a) ** 2
        return out

    def _check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.num_modes:
            raise FockError(f"mode {mode} out of range for {self.num_modes} modes")


def vacuum(num_modes: int, cutoff: int = 2) -> FockState:
    return FockState(num_modes, {(0,) * num_modes: 1 + 0j}, cutoff)


def fock(occupation: Occupation, cutoff: int = 2) -> FockState:
    occ = tuple(int(k) for k in occupation)
    return FockState(len(occ), {occ: 1 + 0j}, cutoff)


def superposition(num_modes: int, amplitudes: dict, cutoff: int = 2) -> FockState:
    """Normalised state from an occupation -> amplitude map."""
    amps = {tuple(k): complex(v) for k, v in amplitudes.items() if v != 0}
    norm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
    if norm == 0:
        raise FockError("zero state")
    return FockState(num_modes, {k: v / norm for k, v in amps.items()}, cutoff)


@dataclass(frozen=True)
class DualRailQubit:
    mode_a: int
    mode_b: int

    def __post_init__(self):
        if self.mode_a == self.mode_b:
            raise FockError("dual-rail modes must be distinct")


def _with(occ: Occupation, **changes: int) -> Occupation:
    out = list(occ)
    for k, v in changes.items():
        out[int(k[1:])] = v
    return tuple(out)


def encode(logical, q: DualRailQubit, state: FockState) -> FockState:
    """Put ``c0|0>_L + c1|1>_L`` on the rails of ``q``, which must be empty in ``state``."""
    c0, c1 = (complex(x) for x in logical)
    if abs(abs(c0) ** 2 + abs(c1) ** 2 - 1) > NORM_TOL:
        raise FockError("logical amplitudes must be normalised")
    state._check_mode(q.mode_a)
    state._check_mode(q.mode_b)
    out: dict[Occupation, complex] = {}
    for occ, amp in state.amplitudes.items():
        if occ[q.mode_a] or occ[q.mode_b]:
            raise FockError("dual-rail modes must start in vacuum")
        for rail, c in ((q.mode_b, c0), (q.mode_a, c1)):
            if c != 0:
                key = _with(occ, **{f"m{rail}": 1})
                out[key] = out.get(key, 0j) + amp * c
    return FockState(state.num_modes, out, state.cutoff)


def decode(state: FockState, q: DualRailQubit) -> tuple[complex, complex]:
    """Logical amplitudes ``(c0, c1)``; raises :class:`LeakageError` if too much weight leaked."""
    zero = [0] * state.num_modes
    zero[q.mode_b] = 1
    one = [0] * state.num_modes
    one[q.mode_a] = 1
    c0, c1 = state.amplitude(tuple(zero)), state.amplitude(tuple(one))
    total = sum(abs(a) ** 2 for a in state.amplitudes.values())
    leaked = total - abs(c0) ** 2 - abs(c1) ** 2
    if leaked > LEAK_TOL:
        raise LeakageError(leaked)
    return c0, c1


def phase_shifter(state: FockState, mode: int, phi: float) -> FockState:
    state._check_mode(mode)
    out = {occ: amp * cmath.exp(1j * phi * occ[mode]) for occ, amp in state.amplitudes.items()}
    return FockState(state.num_modes, out, state.cutoff)


def _two_mode_terms(n1: int, n2: int, c: float, s: float) -> list[tuple[int, complex]]:
    """Expand ``(c x + i s y)^n1 (i s x + c y)^n2`` over Fock states ``|k, N-k>``."""
    total = n1 + n2
    coeffs = [0j] * (total + 1)
    for j in range(n1 + 1):
        # j factors of x from the first bracket
        f1 = comb(n1, j) * c**j * (1j * s) ** (n1 - j)
        for l in range(n2 + 1):
            f2 = comb(n2, l) * (1j * s) ** l * c ** (n2 - l)
            coeffs[j + l] += f1 * f2
    norm = math.sqrt(factorial(n1) * factorial(n2))
    return [(k, coeffs[k] * math.sqrt(factorial(k) * factorial(total - k)) / norm)
            for k in range(total + 1) if coeffs[k] != 0]


def beamsplitter(state: FockState, m1: int, m2: int, theta: float) -> FockState:
    state._check_mode(m1)
    state._check_mode(m2)
    if m1 == m2:
        raise FockError("beamsplitter needs two distinct modes")
    c, s = math.cos(theta), math.sin(theta)
    acc: dict[Occupation, complex] = {}
    for occ, amp in state.amplitudes.items():
        for k, coef in _two_mode_terms(occ[m1], occ[m2], c, s):
            key = list(occ)
            key[m1], key[m2] = k, occ[m1] + occ[m2] - k
            key = tuple(key)
            acc[key] = acc.get(key, 0j) + amp * coef
    out = {}
    for occ, amp in acc.items():
        if max(occ) > state.cutoff:
            if abs(amp) ** 2 > CUTOFF_TOL:
                raise CutoffError(f"occupation {occ} exceeds cutoff {state.cutoff} "
                                  f"with weight {abs(amp) ** 2:.3g}")
            continue
        out[occ] = amp
    return FockState(state.num_modes, out, state.cutoff)


def count_probabilities(state: FockState, mode: int) -> dict[int, float]:
    state._check_mode(mode)
    total = sum(abs(a) ** 2 for a in state.amplitudes.values())
    probs: dict[int, float] = {}
    for occ, amp in state.amplitudes.items():
        probs[occ[mode]] = probs.get(occ[mode], 0.0) + abs(amp) ** 2 / total
    return dict(sorted(probs.items()))


def project_count(state: FockState, mode: int, count: int) -> tuple[FockState, float]:
    """Post-measurement state for a given photon count, with its probability."""
    probs = count_probabilities(state, mode)
    p = probs.get(count, 0.0)
    if p <= 0:
        raise FockError(f"count {count} on mode {mode} has zero probability")
    kept = {occ: amp for occ, amp in state.amplitudes.items() if occ[mode] == count}
    norm = math.sqrt(sum(abs(a) ** 2 for a in kept.values()))
    return FockState(state.num_modes, {k: v / norm for k, v in kept.items()}, state.cutoff), p


def photodetect(state: FockState, mode: int, rng: RngStream) -> tuple[int, FockState]:
    """Number-resolving detection of ``mode``; returns the count and the renormalised posterior."""
    probs = count_probabilities(state, mode)
    u = rng.uniform()
    acc = 0.0
    counts = list(probs)
    for n in counts:
        acc += probs[n]
        if u < acc:
            break
    else:
        n = counts[-1]
    post, _ = project_count(state, mode, n)
    return n, post


def logical_matrix(element, q: DualRailQubit = DualRailQubit(0, 1), num_modes: int = 2,
                   cutoff: int = 2) -> np.ndarray:
    """2x2 matrix of ``decode . element . encode`` on a dual-rail qubit."""
    vac = vacuum(num_modes, cutoff)
    cols = []
    for basis in ((1, 0), (0, 1)):
        cols.append(decode(element(encode(basis, q, vac)), q))
    return np.array(cols, dtype=complex).T


def _phase_aligned_error(u: np.ndarray, v: np.ndarray) -> float:
    """Max entry difference after removing the best global phase."""
    overlap = np.vdot(v, u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(u - phase * v)))


@dataclass
class Check:
    name: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance


def correspondence_suite(angles, tol: float = 1e-12) -> list[Check]:
    """Logical-gate correspondence, unitarity and photon-number checks at the given angles."""
    q = DualRailQubit(0, 1)
    checks = []
    ps_err = bs_err = unit_err = cons_err = inv_err = 0.0
    probe = superposition(3, {(1, 1, 0): 0.6, (0, 2, 0): 0.3j, (1, 0, 1): -0.5, (2, 0, 0): 0.2,
                              (0, 1, 0): 0.4, (0, 0, 0): 0.1})
    before = probe.photon_number_weights()
    for a in angles:
        a = float(a)
        ps = logical_matrix(lambda f: phase_shifter(f, q.mode_a, a), q)
        ps_err = max(ps_err, _phase_aligned_error(ps, zrot_matrix(a)),
                     float(np.max(np.abs(ps - np.diag([1, cmath.exp(1j * a)])))))
        bs = logical_matrix(lambda f: beamsplitter(f, q.mode_a, q.mode_b, a), q)
        bs_err = max(bs_err, float(np.max(np.abs(bs - xrot_matrix(-2 * a)))))
        for m in (ps, bs):
            unit_err = max(unit_err, float(np.max(np.abs(m.conj().T @ m - np.eye(2)))))
        for out in (beamsplitter(probe, 0, 2, a), beamsplitter(probe, 1, 0, a), phase_shifter(probe, 1, a)):
            unit_err = max(unit_err, abs(out.norm - 1))
            after = out.photon_number_weights()
            cons_err = max(cons_err, max(abs(after.get(n, 0.0) - w) for n, w in before.items()))
        back = beamsplitter(beamsplitter(probe, 0, 1, a), 0, 1, -a)
        inv_err = max(inv_err, max(abs(back.amplitude(k) - v) for k, v in probe.amplitudes.items()))
    checks.append(Check("phase_shifter_is_z_rotation", ps_err, tol))
    checks.append(Check("beamsplitter_is_x_rotation_2theta", bs_err, tol))
    checks.append(Check("unitarity", unit_err, tol))
    checks.append(Check("photon_number_conservation", cons_err, tol))
    checks.append(Check("beamsplitter_inverse", inv_err, tol))
    return checks
