# ============================================================================
# tetris/hamiltonian.py - Hamiltonians, Fermionic Terms and Lattice Models
# ============================================================================

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from tetris.pauli import PauliString, PauliSum, pauli_commutes
from tetris.schedules import CoefficientSchedule, ConstantSchedule
from utils.file_handler import ParseError, TextSource, iter_data_lines

logger = logging.getLogger(__name__)

Field = Union[float, CoefficientSchedule]


@dataclass(frozen=True)
class HamiltonianTerm:
    pauli: PauliString
    schedule: CoefficientSchedule


class Hamiltonian:
    """
    H(t) = sum_n c_n(t) O_n with phase-free Pauli strings O_n.

    Terms keep their construction order; index n in this order is the term
    index used by tetrises, angle assignments and noise rates.
    """

    def __init__(self, n_qubits: int, terms: Iterable[Tuple[PauliString, Union[float, CoefficientSchedule]]]):
        built: List[HamiltonianTerm] = []
        seen = set()
        for pauli, schedule in terms:
            if pauli.n_qubits != n_qubits:
                raise ValueError(
                    f"term {pauli.label} has {pauli.n_qubits} qubits, expected {n_qubits}"
                )
            key = (pauli.x, pauli.z)
            if key in seen:
                raise ValueError(f"duplicate Pauli string {pauli.label}")
            seen.add(key)
            if not isinstance(schedule, CoefficientSchedule):
                schedule = ConstantSchedule(float(schedule))
            built.append(HamiltonianTerm(pauli, schedule))
        if not built:
            raise ValueError("Hamiltonian needs at least one term")
        self.n_qubits = n_qubits
        self.terms: Tuple[HamiltonianTerm, ...] = tuple(built)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_terms(cls, coefficients: Sequence[float], labels: Sequence[str]) -> "Hamiltonian":
        """Constant Hamiltonian from parallel lists; duplicate strings are merged."""
        merged: Dict[str, float] = {}
        for coef, label in zip(coefficients, labels):
            merged[label] = merged.get(label, 0.0) + float(coef)
        paulis = [PauliString.from_label(label) for label in merged]
        return cls(paulis[0].n_qubits, zip(paulis, merged.values()))

    @classmethod
    def from_pauli_sum(cls, operator: PauliSum, atol: float = 1e-12) -> "Hamiltonian":
        terms = []
        for pauli, coef in operator.items():
            if abs(coef.imag) > atol:
                raise ValueError(f"non-Hermitian coefficient {coef} on {pauli.label}")
            terms.append((pauli, coef.real))
        return cls(operator.n_qubits, terms)

    # -- views --------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @property
    def paulis(self) -> Tuple[PauliString, ...]:
        return tuple(term.pauli for term in self.terms)

    @property
    def schedules(self) -> Tuple[CoefficientSchedule, ...]:
        return tuple(term.schedule for term in self.terms)

    @property
    def is_constant(self) -> bool:
        return all(term.schedule.is_constant for term in self.terms)

    @property
    def horizon(self) -> float:
        return min(term.schedule.horizon for term in self.terms)

    def coefficients(self, t: float = 0.0) -> np.ndarray:
        return np.array([term.schedule.value(t) for term in self.terms], dtype=float)

    def integrated_weights(self, t: float) -> np.ndarray:
        """z_n(t) for every term."""
        return np.array([term.schedule.z(t) for term in self.terms], dtype=float)

    def abs_sum(self, t: float = 0.0) -> float:
        return float(np.sum(np.abs(self.coefficients(t))))

    def to_sparse(self, t: float = 0.0) -> sparse.csr_matrix:
        dim = 1 << self.n_qubits
        rows = np.arange(dim)
        data, cols = [], []
        for term, coef in zip(self.terms, self.coefficients(t)):
            perm, factor = term.pauli.action()
            data.append(coef * factor)
            cols.append(perm)
        matrix = sparse.coo_matrix(
            (np.concatenate(data), (np.tile(rows, len(data)), np.concatenate(cols))),
            shape=(dim, dim),
        )
        return matrix.tocsr()

    def to_dense(self, t: float = 0.0) -> np.ndarray:
        return self.to_sparse(t).toarray()

    def observable(self, t: float = 0.0, scale: float = 1.0) -> Tuple[Tuple[float, PauliString], ...]:
        """H(t) * scale as weighted Pauli terms (e.g. energy per site)."""
        return tuple((scale * c, p) for c, p in zip(self.coefficients(t), self.paulis))

    def select(self, pattern: Union[str, Sequence[int], None]) -> Tuple[int, ...]:
        """
        Term indices for a background selector: ``"none"``, ``"diagonal"``,
        ``"all-<letters>"`` (e.g. ``"all-ZZ"``: every term whose non-identity
        letters read ``ZZ``) or an explicit index list.
        """
        if pattern is None or pattern == "none":
            return ()
        if not isinstance(pattern, str):
            indices = tuple(int(i) for i in pattern)
            bad = [i for i in indices if not 0 <= i < self.n_terms]
            if bad:
                raise ValueError(f"background indices out of range: {bad}")
            return indices
        if pattern == "diagonal":
            return tuple(n for n, p in enumerate(self.paulis) if p.is_diagonal and not p.is_identity)
        if pattern.startswith("all-"):
            letters = pattern[4:].upper()
            return tuple(
                n for n, p in enumerate(self.paulis)
                if "".join(p.letter(q) for q in p.support) == letters
            )
        raise ValueError(f"Unknown term selector {pattern!r}")

    def check_commuting(self, indices: Sequence[int]) -> None:
        for a_pos, a in enumerate(indices):
            for b in indices[a_pos + 1:]:
                if not pauli_commutes(self.terms[a].pauli, self.terms[b].pauli):
                    raise ValueError(
                        f"background terms {self.terms[a].pauli.label} and "
                        f"{self.terms[b].pauli.label} do not commute"
                    )

    def describe(self) -> Dict:
        return {
            "n_qubits": self.n_qubits,
            "terms": [[term.pauli.label, term.schedule.describe()] for term in self.terms],
        }

    def __repr__(self) -> str:
        return f"Hamiltonian(n_qubits={self.n_qubits}, n_terms={self.n_terms})"


# ============================================================================
# Pauli-sum files
# ============================================================================

def hamiltonian_parse(source: TextSource) -> Hamiltonian:
    """
    Parse ``<coefficient> <IXYZ string>`` lines. Duplicate strings are merged
    into the first occurrence; otherwise file order is kept.
    """
    merged: Dict[str, float] = {}
    n_qubits: Optional[int] = None

    for line_number, tokens in iter_data_lines(source):
        if len(tokens) != 2:
            raise ParseError(f"expected '<coefficient> <pauli string>', got {' '.join(tokens)!r}", line_number)
        try:
            coef = float(tokens[0])
        except ValueError:
            raise ParseError(f"bad coefficient {tokens[0]!r}", line_number)
        if not math.isfinite(coef):
            raise ParseError(f"non-finite coefficient {tokens[0]!r}", line_number)
        try:
            pauli = PauliString.from_label(tokens[1])
        except ValueError as e:
            raise ParseError(str(e), line_number)
        if n_qubits is None:
            n_qubits = pauli.n_qubits
        elif pauli.n_qubits != n_qubits:
            raise ParseError(
                f"inconsistent qubit counts: {tokens[1]!r} has {pauli.n_qubits}, expected {n_qubits}",
                line_number,
            )
        label = pauli.label
        if label in merged:
            logger.warning(f"Merging duplicate term {label} (line {line_number})")
        merged[label] = merged.get(label, 0.0) + coef

    if not merged:
        raise ParseError("no terms found")
    return Hamiltonian.from_terms(list(merged.values()), list(merged.keys()))


# ============================================================================
# Fermionic Hamiltonians
# ============================================================================

@dataclass(frozen=True)
class FermionTermSet:
    """sum h_ij c_i^dag c_j + sum h_ijkl c_i^dag c_j^dag c_k c_l over spin orbitals."""

    n_orbitals: int
    one_body: Tuple[Tuple[int, int, float], ...] = ()
    two_body: Tuple[Tuple[int, int, int, int, float], ...] = ()

    def __post_init__(self):
        if self.n_orbitals < 1:
            raise ValueError(f"n_orbitals must be positive, got {self.n_orbitals}")
        for entry in tuple(self.one_body) + tuple(self.two_body):
            *indices, value = entry
            if any(not 0 <= i < self.n_orbitals for i in indices):
                raise ValueError(f"orbital index out of range in {entry}")
            if not math.isfinite(value):
                raise ValueError(f"non-finite coefficient in {entry}")


def fermion_parse(source: TextSource) -> FermionTermSet:
    """``norb N`` header, then ``ob i j v`` and ``tb i j k l v`` lines."""
    n_orbitals = None
    one_body, two_body = [], []
    for line_number, tokens in iter_data_lines(source):
        kind = tokens[0].lower()
        try:
            if kind == "norb":
                if n_orbitals is not None or len(tokens) != 2:
                    raise ParseError("expected a single 'norb <N>' header", line_number)
                n_orbitals = int(tokens[1])
                continue
            if n_orbitals is None:
                raise ParseError("'norb <N>' must come first", line_number)
            if kind == "ob" and len(tokens) == 4:
                i, j = (int(v) for v in tokens[1:3])
                one_body.append((i, j, float(tokens[3])))
            elif kind == "tb" and len(tokens) == 6:
                i, j, k, l = (int(v) for v in tokens[1:5])
                two_body.append((i, j, k, l, float(tokens[5])))
            else:
                raise ParseError(f"unrecognized line {' '.join(tokens)!r}", line_number)
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(str(e), line_number)

    if n_orbitals is None:
        raise ParseError("missing 'norb <N>' header")
    try:
        return FermionTermSet(n_orbitals, tuple(one_body), tuple(two_body))
    except ValueError as e:
        raise ParseError(str(e))


def annihilation_operator(orbital: int, n_orbitals: int) -> PauliSum:
    """c_j = (prod_{k<j} Z_k) (X_j + i Y_j) / 2; qubit q hosts spin orbital q."""
    string = (1 << orbital) - 1
    bit = 1 << orbital
    x_part = PauliString(n_orbitals, bit, string)
    y_part = PauliString(n_orbitals, bit, string | bit)
    return PauliSum.from_pauli(x_part, 0.5) + PauliSum.from_pauli(y_part, 0.5j)


def jordan_wigner(terms: FermionTermSet, atol: float = 1e-14) -> Hamiltonian:
    """
    Map a fermionic Hamiltonian to Pauli strings. The input is made Hermitian
    as (A + A^dag)/2, which pairs (i,j) with (j,i) one-body entries and each
    two-body entry with its adjoint (l,k,j,i). The identity component is kept
    as an explicit all-I term.
    """
    n = terms.n_orbitals
    lower = [annihilation_operator(j, n) for j in range(n)]
    raise_ = [op.adjoint() for op in lower]

    total = PauliSum(n)
    for i, j, value in terms.one_body:
        total = total + (raise_[i] * lower[j]) * value
    for i, j, k, l, value in terms.two_body:
        total = total + (raise_[i] * raise_[j] * lower[k] * lower[l]) * value

    mapped = total.hermitian_part().simplify(atol)
    if len(mapped) == 0:
        mapped = PauliSum.identity(n, 0.0)
    logger.info(f"Jordan-Wigner: {n} orbitals -> {len(mapped)} Pauli terms")
    return Hamiltonian.from_pauli_sum(mapped)


# ============================================================================
# Lattice models
# ============================================================================

def square_lattice_bonds(rows: int, cols: int, periodic: bool) -> List[Tuple[int, int]]:
    """Nearest-neighbour pairs; site (r, c) is qubit r * cols + c."""
    bonds: List[Tuple[int, int]] = []
    seen = set()
    for r in range(rows):
        for c in range(cols):
            site = r * cols + c
            neighbours = []
            if c + 1 < cols or periodic:
                neighbours.append(r * cols + (c + 1) % cols)
            if r + 1 < rows or periodic:
                neighbours.append(((r + 1) % rows) * cols + c)
            for other in neighbours:
                pair = (min(site, other), max(site, other))
                # size-1 and size-2 periodic dimensions produce self and repeated bonds
                if other == site or pair in seen:
                    continue
                seen.add(pair)
                bonds.append(pair)
    return bonds


def build_ising2d(rows: int, cols: int, h: Field, periodic: bool = True, coupling: float = 1.0) -> Hamiltonian:
    """
    H = -J sum_<ij> Z_i Z_j - h sum_j X_j. ``h`` may be a number or a
    schedule h(t); the X terms then carry -h(t).
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"lattice dimensions must be positive, got {rows}x{cols}")
    n = rows * cols
    terms: List[Tuple[PauliString, Field]] = []
    for a, b in square_lattice_bonds(rows, cols, periodic):
        terms.append((PauliString(n, 0, (1 << a) | (1 << b)), ConstantSchedule(-coupling)))

    if isinstance(h, CoefficientSchedule):
        field = h.scaled(-1.0)
    elif h != 0:
        field = ConstantSchedule(-float(h))
    else:
        field = None
    if field is not None:
        for q in range(n):
            terms.append((PauliString(n, 1 << q, 0), field))

    if not terms:
        raise ValueError("empty Ising model (single site with zero field)")
    return Hamiltonian(n, terms)


def build_ising_chain(length: int, h: Field, periodic: bool = True, coupling: float = 1.0) -> Hamiltonian:
    return build_ising2d(1, length, h, periodic, coupling)
