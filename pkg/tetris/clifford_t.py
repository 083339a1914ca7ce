# ============================================================================
# tetris/clifford_t.py - Clifford+T Circuits and the T-Gate Sampling Gadget
# ============================================================================
"""
Phase convention: T = diag(1, e^{i pi/4}) = e^{i pi/8} e^{-i pi/8 Z}.

The gadget replaces e^{-i pi/8 Z} by e^{-i pi/4 Z} (an S gate up to a global
phase) or by nothing, each with probability 1/2. This is the mixing identity
with O = Z, tau' = -pi/8 and tau = -pi/4; the average is
cos(pi/8) e^{-i pi/8 Z}.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from tetris.pauli import PauliString, as_weighted_paulis
from tetris.sampler import mixing_params
from tetris.schemas import AttenuationReport, EstimatorResult
from tetris.statevector import State, init_basis_state, matrix_element, rotate_amplitudes
from tetris.streams import STREAM_T_GADGET, map_samples, sample_rng
from utils.data_processor import DataProcessor
from utils.file_handler import ParseError, TextSource, iter_data_lines

logger = logging.getLogger(__name__)

GATE_ARITY = {"H": 1, "S": 1, "T": 1, "CX": 2}

_SQRT2_INV = 1 / math.sqrt(2)
_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
}

GADGET_ANGLE = -math.pi / 4
GADGET_TARGET = -math.pi / 8
GADGET_ATTENUATION = math.cos(math.pi / 8)


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: Tuple[int, ...]


@dataclass(frozen=True)
class GateCircuit:
    n_qubits: int
    gates: Tuple[Gate, ...]

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        for gate in self.gates:
            if gate.name not in GATE_ARITY or len(gate.qubits) != GATE_ARITY[gate.name]:
                raise ValueError(f"bad gate {gate}")
            if any(not 0 <= q < self.n_qubits for q in gate.qubits):
                raise ValueError(f"qubit index out of range in {gate}")
            if len(set(gate.qubits)) != len(gate.qubits):
                raise ValueError(f"repeated qubit in {gate}")

    @property
    def t_count(self) -> int:
        return sum(1 for gate in self.gates if gate.name == "T")


def circuit_parse(source: TextSource, n_qubits: int = None) -> GateCircuit:
    """
    Lines ``H q``, ``S q``, ``T q`` or ``CX control target``. The register
    size defaults to the largest qubit index plus one.
    """
    gates: List[Gate] = []
    for line_number, tokens in iter_data_lines(source):
        name = tokens[0].upper()
        if name not in GATE_ARITY:
            raise ParseError(f"unknown gate {tokens[0]!r}", line_number)
        if len(tokens) != 1 + GATE_ARITY[name]:
            raise ParseError(f"{name} takes {GATE_ARITY[name]} qubit index(es)", line_number)
        try:
            qubits = tuple(int(v) for v in tokens[1:])
        except ValueError:
            raise ParseError(f"bad qubit index in {' '.join(tokens)!r}", line_number)
        if any(q < 0 for q in qubits):
            raise ParseError("negative qubit index", line_number)
        gates.append(Gate(name, qubits))

    if n_qubits is None:
        n_qubits = 1 + max((q for gate in gates for q in gate.qubits), default=0)
    try:
        return GateCircuit(n_qubits, tuple(gates))
    except ValueError as e:
        raise ParseError(str(e))


# -- kernels ----------------------------------------------------------------

def _axis(qubit: int, n_qubits: int) -> int:
    # C-order reshape puts the most significant bit first
    return n_qubits - 1 - qubit


def _apply_single(amplitudes: np.ndarray, matrix: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    tensor = amplitudes.reshape([2] * n_qubits)
    axis = _axis(qubit, n_qubits)
    tensor = np.tensordot(matrix, tensor, axes=([1], [axis]))
    return np.moveaxis(tensor, 0, axis).reshape(-1)


def _apply_cx(amplitudes: np.ndarray, control: int, target: int, n_qubits: int) -> np.ndarray:
    tensor = amplitudes.reshape([2] * n_qubits).copy()
    index = [slice(None)] * n_qubits
    index[_axis(control, n_qubits)] = 1
    sub = tensor[tuple(index)]
    # the control axis is gone from ``sub``; shift the target axis if it was after it
    target_axis = _axis(target, n_qubits)
    if target_axis > _axis(control, n_qubits):
        target_axis -= 1
    tensor[tuple(index)] = np.flip(sub, axis=target_axis).copy()
    return tensor.reshape(-1)


def _apply_gate(amplitudes: np.ndarray, gate: Gate, n_qubits: int) -> np.ndarray:
    if gate.name == "CX":
        return _apply_cx(amplitudes, gate.qubits[0], gate.qubits[1], n_qubits)
    return _apply_single(amplitudes, _MATRICES[gate.name], gate.qubits[0], n_qubits)


def run_circuit(circuit: GateCircuit, initial: State = None) -> State:
    """Exact statevector of the circuit (T gates included)."""
    state = initial or init_basis_state(circuit.n_qubits, "0" * circuit.n_qubits)
    if state.n_qubits != circuit.n_qubits:
        raise ValueError(f"size mismatch: {state.n_qubits} vs {circuit.n_qubits} qubits")
    amplitudes = state.amplitudes
    for gate in circuit.gates:
        amplitudes = _apply_gate(amplitudes, gate, circuit.n_qubits)
    return State(circuit.n_qubits, amplitudes)


def run_gadget_circuit(circuit: GateCircuit, amplitudes: np.ndarray, fire: Sequence[bool]) -> np.ndarray:
    """Run with the k-th T gate replaced by e^{-i pi/4 Z} if fire[k], else by nothing."""
    k = 0
    for gate in circuit.gates:
        if gate.name == "T":
            if fire[k]:
                z = PauliString.single(circuit.n_qubits, gate.qubits[0], "Z")
                amplitudes = rotate_amplitudes(amplitudes, z, GADGET_ANGLE)
            k += 1
        else:
            amplitudes = _apply_gate(amplitudes, gate, circuit.n_qubits)
    return amplitudes


def t_gadget_estimate(
    circuit: GateCircuit,
    observable,
    n_samples: int,
    master_seed: int = 0,
    initial: State = None,
    copies: str = "two",
    threads: int = None,
) -> EstimatorResult:
    """
    Estimate <psi|M|psi> (``copies="two"``, default) or the amplitude
    <initial|M|psi> (``copies="single"``) for psi = circuit|initial>,
    simulating every T gate by the gadget.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    if copies not in ("two", "single"):
        raise ValueError(f"copies must be 'two' or 'single', got {copies!r}")
    terms = as_weighted_paulis(observable)
    for _, pauli in terms:
        if pauli.n_qubits != circuit.n_qubits:
            raise ValueError(f"observable {pauli.label} does not match {circuit.n_qubits} qubits")
    initial = initial or init_basis_state(circuit.n_qubits, "0" * circuit.n_qubits)
    start = initial.amplitudes
    g = circuit.t_count
    p_fire = mixing_params(GADGET_TARGET, GADGET_ANGLE).p

    def one_sample(i: int) -> complex:
        rng = sample_rng(master_seed, STREAM_T_GADGET, i)
        ket = run_gadget_circuit(circuit, start, rng.random(g) < p_fire)
        if copies == "two":
            bra = run_gadget_circuit(circuit, start, rng.random(g) < p_fire)
        else:
            bra = start
        return matrix_element(bra, terms, ket)

    logger.info(f"T-gadget: {g} T gates, {copies} copies, {n_samples} samples")
    samples = np.asarray(map_samples(one_sample, n_samples, threads), dtype=complex)

    n_copies = 2 if copies == "two" else 1
    scale = GADGET_ATTENUATION ** (n_copies * g)
    raw = DataProcessor().complex_statistics(samples)
    if copies == "single":
        # undo the e^{-i pi/8} left behind by every T = e^{i pi/8} e^{-i pi/8 Z}
        samples = samples * np.exp(1j * math.pi * g / 8)
    stats = DataProcessor().complex_statistics(samples)

    report = AttenuationReport(lambda_att=scale, q_att=1.0, expected_gates=0.5 * g)
    mean = stats["mean"]
    return EstimatorResult(
        kind=f"t_gadget_{copies}",
        mean_re=mean.real / scale,
        mean_im=mean.imag / scale,
        stderr_re=stats["stderr_re"] / scale,
        stderr_im=stats["stderr_im"] / scale,
        cov_re_im=stats["cov_re_im"] / scale ** 2,
        raw_mean_re=raw["mean"].real,
        raw_mean_im=raw["mean"].imag,
        n_samples=n_samples,
        scale=scale,
        report=report,
        mean_gates=float(n_copies * g * p_fire),
    )
