# ============================================================================
# tetris/statevector.py - Statevector Engine and Exact Oracles
# ============================================================================
"""
Dense statevector simulation.

Amplitude index j encodes the computational basis state whose qubit q is bit q
of j (qubit 0 is the least significant bit). Gates never build 2^n x 2^n
matrices: a Pauli string acts as a signed, phased permutation of amplitudes
(see ``tetris.pauli.pauli_action``).

Global phases are physical here (Loschmidt echoes are amplitudes), so nothing
in this module normalizes them away.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import integrate, linalg, sparse

from config import Config
from tetris.hamiltonian import Hamiltonian
from tetris.pauli import PauliString, as_weighted_paulis

logger = logging.getLogger(__name__)

KRYLOV_MAX_DIM = 40
KRYLOV_NORM_STEP = 4.0


class State:
    """Complex amplitude vector of an n-qubit register."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape != (1 << n_qubits,):
            raise ValueError(
                f"expected {1 << n_qubits} amplitudes for {n_qubits} qubits, got {amplitudes.shape}"
            )
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    def copy(self) -> "State":
        return State(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self) -> str:
        return f"State(n_qubits={self.n_qubits}, norm={self.norm():.12f})"


def _check_sizes(n_a: int, n_b: int):
    if n_a != n_b:
        raise ValueError(f"size mismatch: {n_a} vs {n_b} qubits")


def bits_to_index(bits: str) -> int:
    """Bit k of the string is qubit k, so ``"10"`` is index 1."""
    if not bits or any(ch not in "01" for ch in bits):
        raise ValueError(f"invalid bitstring {bits!r}")
    return sum(1 << q for q, ch in enumerate(bits) if ch == "1")


def init_basis_state(n_qubits: int, bits: str) -> State:
    if len(bits) != n_qubits:
        raise ValueError(f"bitstring {bits!r} has length {len(bits)}, expected {n_qubits}")
    amplitudes = np.zeros(1 << n_qubits, dtype=complex)
    amplitudes[bits_to_index(bits)] = 1.0
    return State(n_qubits, amplitudes)


# -- kernels on raw amplitude arrays ----------------------------------------

def pauli_amplitudes(amplitudes: np.ndarray, pauli: PauliString) -> np.ndarray:
    perm, factor = pauli.action()
    return factor * amplitudes[perm]


def rotate_amplitudes(amplitudes: np.ndarray, pauli: PauliString, theta: float) -> np.ndarray:
    """e^{i theta P} psi = cos(theta) psi + i sin(theta) P psi."""
    if pauli.is_identity:
        return np.exp(1j * theta) * amplitudes
    perm, factor = pauli.action()
    return math.cos(theta) * amplitudes + (1j * math.sin(theta)) * (factor * amplitudes[perm])


# -- State operations --------------------------------------------------------

def apply_pauli(s: State, pauli: PauliString) -> State:
    _check_sizes(s.n_qubits, pauli.n_qubits)
    return State(s.n_qubits, pauli_amplitudes(s.amplitudes, pauli))


def apply_pauli_rotation(s: State, pauli: PauliString, theta: float) -> State:
    _check_sizes(s.n_qubits, pauli.n_qubits)
    return State(s.n_qubits, rotate_amplitudes(s.amplitudes, pauli, theta))


def inner_product(bra: State, ket: State) -> complex:
    _check_sizes(bra.n_qubits, ket.n_qubits)
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


def matrix_element(bra: np.ndarray, observable, ket: np.ndarray) -> complex:
    """sum_k w_k <bra|P_k|ket> on raw amplitude arrays."""
    total = 0j
    for weight, pauli in as_weighted_paulis(observable):
        total += weight * complex(np.vdot(bra, pauli_amplitudes(ket, pauli)))
    return total


def expectation(s: State, observable) -> float:
    """Re <s|M|s> for a Pauli string, a label or a weighted list of strings."""
    terms = as_weighted_paulis(observable)
    for _, pauli in terms:
        _check_sizes(s.n_qubits, pauli.n_qubits)
    return float(matrix_element(s.amplitudes, terms, s.amplitudes).real)


# ============================================================================
# Exact oracles
# ============================================================================

def _check_oracle_size(n_qubits: int):
    if n_qubits > Config.KRYLOV_MAX_QUBITS:
        raise ValueError(
            f"{n_qubits} qubits exceeds the oracle limit of {Config.KRYLOV_MAX_QUBITS}"
        )


def _lanczos_step(matrix: sparse.csr_matrix, psi: np.ndarray, dt: float, tol: float) -> Tuple[np.ndarray, bool]:
    """e^{i dt A} psi in a Krylov space with full reorthogonalization."""
    beta0 = np.linalg.norm(psi)
    if beta0 == 0.0:
        return psi.copy(), True
    basis: List[np.ndarray] = [psi / beta0]
    alphas: List[float] = []
    betas: List[float] = []

    for j in range(KRYLOV_MAX_DIM):
        w = matrix @ basis[j]
        alpha = float(np.vdot(basis[j], w).real)
        w = w - alpha * basis[j]
        if j > 0:
            w = w - betas[-1] * basis[j - 1]
        stacked = np.array(basis)
        w = w - stacked.T @ (stacked.conj() @ w)
        alphas.append(alpha)
        beta = float(np.linalg.norm(w))

        tri = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
        coeffs = linalg.expm(1j * dt * tri)[:, 0]
        # a-posteriori estimate: weight leaking into the next Krylov vector
        if beta * abs(coeffs[-1]) * beta0 < tol or beta < 1e-14:
            return beta0 * (stacked.T @ coeffs), True
        betas.append(beta)
        basis.append(w / beta)

    return beta0 * (np.array(basis[:-1]).T @ coeffs), False


def krylov_evolve(matrix: sparse.csr_matrix, t: float, psi: np.ndarray, norm_bound: float, tol: float) -> np.ndarray:
    """e^{i t A} psi for Hermitian sparse A, in substeps with dt * norm_bound <= 4."""
    n_steps = max(1, math.ceil(abs(t) * norm_bound / KRYLOV_NORM_STEP))
    dt = t / n_steps
    elapsed = 0.0
    out = psi.astype(complex, copy=True)
    while abs(t - elapsed) > 1e-15 * max(1.0, abs(t)):
        step = dt if abs(dt) <= abs(t - elapsed) else t - elapsed
        result, converged = _lanczos_step(matrix, out, step, tol)
        if not converged:
            dt = 0.5 * dt
            logger.warning(f"Krylov step did not converge; halving dt to {dt:.3e}")
            continue
        out = result
        elapsed += step
    return out


def exact_evolve(h: Hamiltonian, t: float, s: State) -> State:
    """
    e^{+itH}|s> for constant H. Dense exponential up to
    ``Config.DENSE_MAX_QUBITS``, Lanczos propagator up to
    ``Config.KRYLOV_MAX_QUBITS``.
    """
    if not h.is_constant:
        raise ValueError("exact_evolve needs a time-independent Hamiltonian; use exact_evolve_td")
    _check_sizes(h.n_qubits, s.n_qubits)
    _check_oracle_size(h.n_qubits)
    if t == 0:
        return s.copy()

    matrix = h.to_sparse()
    if h.n_qubits <= Config.DENSE_MAX_QUBITS:
        out = linalg.expm(1j * t * matrix.toarray()) @ s.amplitudes
    else:
        logger.debug(f"Krylov propagation on {h.n_qubits} qubits, t={t}")
        out = krylov_evolve(matrix, t, s.amplitudes, h.abs_sum(), Config.KRYLOV_TOL)
    return State(s.n_qubits, out)


def _grouped_generators(h: Hamiltonian) -> List[Tuple[object, sparse.csr_matrix]]:
    """Terms sharing one schedule object are summed into a single sparse matrix."""
    dim = 1 << h.n_qubits
    groups: Dict[int, Tuple[object, List]] = {}
    for term in h.terms:
        key = "constant" if term.schedule.is_constant else id(term.schedule)
        schedule, members = groups.setdefault(key, (term.schedule, []))
        members.append(term)

    out = []
    for key, (schedule, members) in groups.items():
        matrix = sparse.csr_matrix((dim, dim), dtype=complex)
        for term in members:
            perm, factor = term.pauli.action()
            weight = term.schedule.value(0.0) if key == "constant" else 1.0
            matrix = matrix + sparse.csr_matrix(
                (weight * factor, (np.arange(dim), perm)), shape=(dim, dim)
            )
        out.append((None if key == "constant" else schedule, matrix))
    return out


def exact_evolve_td(h: Hamiltonian, t: float, s: State, rtol: float = None, atol: float = 1e-12) -> State:
    """
    Time-ordered evolution d|psi>/dt = +i H(t)|psi> from 0 to t, integrated
    with an adaptive 8th-order Runge-Kutta scheme.
    """
    _check_sizes(h.n_qubits, s.n_qubits)
    _check_oracle_size(h.n_qubits)
    if t == 0:
        return s.copy()
    rtol = Config.ODE_RTOL if rtol is None else rtol
    generators = _grouped_generators(h)

    def rhs(time, psi):
        out = np.zeros_like(psi)
        for schedule, matrix in generators:
            coef = 1.0 if schedule is None else schedule.value(time)
            if coef != 0.0:
                out += coef * (matrix @ psi)
        return 1j * out

    solution = integrate.solve_ivp(
        rhs, (0.0, t), s.amplitudes.astype(complex), method="DOP853", rtol=rtol, atol=atol
    )
    if not solution.success:
        raise RuntimeError(f"ODE integration failed: {solution.message}")
    logger.debug(f"ODE oracle: {solution.nfev} evaluations up to t={t}")
    return State(s.n_qubits, solution.y[:, -1])


# ============================================================================
# First-order Trotter baseline
# ============================================================================

def trotter_steps(t: float, step: float) -> Tuple[int, float]:
    """Full steps and the length of the shorter final step (0 if none)."""
    if step <= 0:
        raise ValueError(f"Trotter step must be positive, got {step}")
    full = int(math.floor(t / step + 1e-9))
    residual = t - full * step
    if residual <= 1e-12 * max(1.0, t):
        residual = 0.0
    return full, residual


def trotter_evolve(h: Hamiltonian, t: float, step: float, s: State) -> State:
    """
    Apply (e^{i tau c_1 O_1} ... e^{i tau c_N O_N})^{t/tau}; within a step the
    gates hit the state in term order, and a remainder of t is covered by one
    shorter final step.
    """
    if not h.is_constant:
        raise ValueError("trotter_evolve needs a time-independent Hamiltonian")
    _check_sizes(h.n_qubits, s.n_qubits)
    full, residual = trotter_steps(t, step)
    coefficients = h.coefficients()
    paulis = h.paulis

    amplitudes = s.amplitudes.copy()
    for length in [step] * full + ([residual] if residual else []):
        for pauli, coef in zip(paulis, coefficients):
            amplitudes = rotate_amplitudes(amplitudes, pauli, length * coef)
    return State(s.n_qubits, amplitudes)
