"""Gate-level models of the superposition-preparation and walk circuits.

The register holds m = ceil(log2 M) qubits addressing solution indices,
plus one ancilla.  Preparation marks the valid indices (an integer
comparator toggles the ancilla for values below M), rotates the marked
phase, and interleaves Hadamard layers so that a single fixed-point
rotation with angle

    theta = 2 * arcsin(sqrt(2^m / (4 M)))

maps |0...0> exactly onto the equal superposition over indices 0..M-1.
When M is a power of two the Hadamard layer alone suffices.  The walk
circuit conjugates a rotation about the zero state by the preparation,
which reproduces the closed-form complete-graph walk up to a global phase.

The final relabeling from index states to solution states is modeled as an
abstract bijection (identity on the index register); no reversible
synthesis of the index arithmetic is attempted.  All verification happens
in the index register via dense matrices, which bounds circuits to
``MAX_QUBITS`` total qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Union

import numpy as np

from .errors import ResourceLimitError, ValidationError

MAX_QUBITS = 14


@dataclass(frozen=True)
class HadamardLayer:
    """Hadamard on every register qubit, identity on the ancilla."""


@dataclass(frozen=True)
class Comparator:
    """Toggle the ancilla iff the register value is below ``threshold``."""

    threshold: int


@dataclass(frozen=True)
class AncillaRotation:
    """z-rotation diag(e^{-i angle/2}, e^{+i angle/2}) on the ancilla."""

    angle: float


@dataclass(frozen=True)
class ZeroControlledNot:
    """Toggle the ancilla iff every register qubit is |0>."""


@dataclass(frozen=True)
class IndexRelabel:
    """Abstract index-to-solution relabeling; identity on the index register."""


Gate = Union[HadamardLayer, Comparator, AncillaRotation, ZeroControlledNot, IndexRelabel]


@dataclass(frozen=True)
class GateCircuit:
    """An ordered gate list over ``register_qubits`` qubits plus one ancilla."""

    register_qubits: int
    gates: tuple[Gate, ...]

    @property
    def total_qubits(self) -> int:
        return self.register_qubits + 1


_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


def gate_matrix(gate: Gate, register_qubits: int) -> np.ndarray:
    """Dense unitary of one gate element; basis index is 2*register_value + ancilla."""
    dim = 2 ** register_qubits
    if isinstance(gate, HadamardLayer):
        layer = reduce(np.kron, [_HADAMARD] * register_qubits)
        return np.kron(layer, np.eye(2))
    if isinstance(gate, AncillaRotation):
        rz = np.diag(
            [np.exp(-0.5j * gate.angle), np.exp(0.5j * gate.angle)]
        )
        return np.kron(np.eye(dim), rz)
    if isinstance(gate, IndexRelabel):
        return np.eye(2 * dim, dtype=complex)
    if isinstance(gate, (Comparator, ZeroControlledNot)):
        mat = np.zeros((2 * dim, 2 * dim))
        for x in range(dim):
            toggled = (
                x < gate.threshold
                if isinstance(gate, Comparator)
                else x == 0
            )
            for a in (0, 1):
                mat[2 * x + (a ^ toggled), 2 * x + a] = 1.0
        return mat
    raise ValidationError(f"unknown gate element {gate!r}")


def circuit_unitary(circuit: GateCircuit) -> np.ndarray:
    """Exact product of gate matrices in circuit (time) order."""
    if circuit.total_qubits > MAX_QUBITS:
        raise ResourceLimitError(
            f"{circuit.total_qubits} qubits exceeds the dense bound of {MAX_QUBITS}"
        )
    dim = 2 ** circuit.total_qubits
    unitary = np.eye(dim, dtype=complex)
    for gate in circuit.gates:
        unitary = gate_matrix(gate, circuit.register_qubits) @ unitary
    return unitary


@dataclass(frozen=True)
class PrepAngle:
    """Fixed-point rotation angle plus register geometry for a given M."""

    theta: float
    register_qubits: int
    solutions: int
    hadamard_only: bool


def prep_angle(m_solutions: int) -> PrepAngle:
    """Rotation angle theta = 2 arcsin sqrt(2^m / 4M) with m = ceil(log2 M).

    For M a power of two the preparation degenerates to a plain Hadamard
    layer, which is flagged so circuits can take the shortcut.
    """
    if m_solutions < 1:
        raise ValidationError("number of solutions must be at least 1")
    qubits = max(0, (m_solutions - 1).bit_length())
    ratio = 2**qubits / (4.0 * m_solutions)
    theta = 2.0 * math.asin(math.sqrt(ratio))
    return PrepAngle(
        theta=theta,
        register_qubits=qubits,
        solutions=m_solutions,
        hadamard_only=m_solutions & (m_solutions - 1) == 0,
    )


def build_state_prep(m_solutions: int) -> GateCircuit:
    """Circuit sending |0..0>|0> to the equal superposition over indices < M.

    Layout: Hadamards, comparator-marked phase on valid indices, Hadamards,
    zero-marked phase, Hadamards, abstract relabeling.  Both phase marks
    are realised as toggle / ancilla-rotation / untoggle sandwiches.
    """
    angle = prep_angle(m_solutions)
    if angle.register_qubits < 1:
        raise ValidationError("state preparation needs at least one register qubit")
    if angle.hadamard_only:
        gates: tuple[Gate, ...] = (HadamardLayer(), IndexRelabel())
    else:
        gates = (
            HadamardLayer(),
            Comparator(m_solutions),
            AncillaRotation(angle.theta),
            Comparator(m_solutions),
            HadamardLayer(),
            ZeroControlledNot(),
            AncillaRotation(angle.theta),
            ZeroControlledNot(),
            HadamardLayer(),
            IndexRelabel(),
        )
    return GateCircuit(register_qubits=angle.register_qubits, gates=gates)


def _adjoint(gates: tuple[Gate, ...]) -> tuple[Gate, ...]:
    # Every element is self-inverse except the ancilla rotation.
    return tuple(
        AncillaRotation(-g.angle) if isinstance(g, AncillaRotation) else g
        for g in reversed(gates)
    )


def build_walk_circuit(m_solutions: int, t: float) -> GateCircuit:
    """Walk circuit: unprepare, rotate about the zero state, re-prepare.

    The zero-state rotation uses ancilla angle -2*phi_t with
    phi_t = -M*t/2, marking the zero state with phase exp(i M t); the
    ancilla returns to |0> and the whole circuit equals the closed-form
    complete-graph walk up to a global phase.
    """
    if m_solutions < 2:
        raise ValidationError("walk circuit needs at least two solutions")
    prep = build_state_prep(m_solutions)
    phi_t = -m_solutions * t / 2.0
    zero_rotation: tuple[Gate, ...] = (
        ZeroControlledNot(),
        AncillaRotation(-2.0 * phi_t),
        ZeroControlledNot(),
    )
    return GateCircuit(
        register_qubits=prep.register_qubits,
        gates=_adjoint(prep.gates) + zero_rotation + prep.gates,
    )


def prepared_state(m_solutions: int) -> np.ndarray:
    """Full statevector produced by the preparation circuit from |0..0>|0>."""
    circuit = build_state_prep(m_solutions)
    state = np.zeros(2 ** circuit.total_qubits, dtype=complex)
    state[0] = 1.0
    return circuit_unitary(circuit) @ state


def global_phase_residual(actual: np.ndarray, target: np.ndarray) -> float:
    """Max elementwise deviation after aligning the global phase.

    The alignment phase is read off the largest-magnitude element of the
    target, so a zero target element never drives the alignment.
    """
    actual = np.asarray(actual).ravel()
    target = np.asarray(target).ravel()
    if actual.shape != target.shape:
        raise ValidationError("cannot compare arrays of different shapes")
    pivot = int(np.argmax(np.abs(target)))
    phase = actual[pivot] / target[pivot]
    magnitude = abs(phase)
    phase = phase / magnitude if magnitude > 0 else 1.0
    return float(np.max(np.abs(actual - phase * target)))


@dataclass(frozen=True)
class VerificationReport:
    """Deviation of a walk circuit from the closed-form target."""

    m_solutions: int
    t: float
    residual: float
    leakage: float
    ancilla_residual: float


def verify(m_solutions: int, t: float) -> VerificationReport:
    """Compare the walk circuit against I + (e^{iMt}-1)|s><s| on valid indices.

    ``residual`` is the phase-aligned deviation on the valid-index block,
    ``leakage`` the largest amplitude reaching indices >= M, and
    ``ancilla_residual`` the largest amplitude leaving the ancilla in |1>.
    """
    circuit = build_walk_circuit(m_solutions, t)
    unitary = circuit_unitary(circuit)
    dim = 2 ** circuit.register_qubits
    valid = [2 * x for x in range(m_solutions)]
    invalid = [2 * x for x in range(m_solutions, dim)]
    ancilla_up = [2 * x + 1 for x in range(dim)]
    columns = unitary[:, valid]
    block = columns[valid, :]
    leakage = float(np.max(np.abs(columns[invalid, :]))) if invalid else 0.0
    ancilla_residual = float(np.max(np.abs(columns[ancilla_up, :])))
    phase = np.exp(1j * math.fmod(m_solutions * t, 2.0 * math.pi))
    target = np.eye(m_solutions, dtype=complex) + (phase - 1.0) / m_solutions
    residual = global_phase_residual(block, target)
    return VerificationReport(
        m_solutions=m_solutions,
        t=t,
        residual=residual,
        leakage=leakage,
        ancilla_residual=ancilla_residual,
    )
