# ============================================================================
# tetris/pauli.py - Pauli String Algebra
# ============================================================================
"""
Pauli strings as symplectic bit masks.

A string on n qubits is stored as two integers ``x`` and ``z``; bit q of each
mask belongs to qubit q. The operator is the Hermitian tensor product

    P(x, z) = i^{|x & z|} X^x Z^z

so that a Y letter (both bits set) is exactly the Pauli Y = iXZ. Labels are read
left to right as qubit 0, 1, ..., n-1; qubit 0 is the least significant bit of
an amplitude index everywhere in the package.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, Tuple

import numpy as np

logger = logging.getLogger(__name__)

PAULI_LETTERS = "IXYZ"
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_PHASES = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def _popcount(value: int) -> int:
    return bin(value).count("1")


@dataclass(frozen=True)
class PauliString:
    """Phase-free Hermitian Pauli string (self-inverse, P @ P = I)."""

    n_qubits: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("Pauli masks exceed the register size")

    @classmethod
    def from_label(cls, text: str) -> "PauliString":
        """Parse a label such as ``"IXYZ"`` (character k acts on qubit k)."""
        if not isinstance(text, str) or not text:
            raise ValueError("Pauli label must be a non-empty string")
        x = z = 0
        for q, letter in enumerate(text.upper()):
            if letter not in _LETTER_BITS:
                raise ValueError(f"Invalid Pauli letter {letter!r} in {text!r}")
            bx, bz = _LETTER_BITS[letter]
            x |= bx << q
            z |= bz << q
        return cls(len(text), x, z)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> "PauliString":
        if not 0 <= qubit < n_qubits:
            raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
        bx, bz = _LETTER_BITS[letter.upper()]
        return cls(n_qubits, bx << qubit, bz << qubit)

    @property
    def label(self) -> str:
        return "".join(self.letter(q) for q in range(self.n_qubits))

    def letter(self, qubit: int) -> str:
        bx = (self.x >> qubit) & 1
        bz = (self.z >> qubit) & 1
        return "IZXY"[bx * 2 + bz]

    @property
    def support(self) -> Tuple[int, ...]:
        mask = self.x | self.z
        return tuple(q for q in range(self.n_qubits) if (mask >> q) & 1)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def n_y(self) -> int:
        return _popcount(self.x & self.z)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def is_diagonal(self) -> bool:
        return self.x == 0

    def commutes(self, other: "PauliString") -> bool:
        return pauli_commutes(self, other)

    def action(self) -> Tuple[np.ndarray, np.ndarray]:
        """(perm, factor) with ``P @ psi == factor * psi[perm]``."""
        return pauli_action(self.n_qubits, self.x, self.z)

    def to_dense(self) -> np.ndarray:
        perm, factor = self.action()
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        mat[np.arange(dim), perm] = factor
        return mat

    def __str__(self) -> str:
        return self.label


def pauli_parse(text: str) -> PauliString:
    return PauliString.from_label(text)


def pauli_commutes(p: PauliString, q: PauliString) -> bool:
    """True iff [P, Q] = 0, i.e. an even number of anticommuting positions."""
    if p.n_qubits != q.n_qubits:
        raise ValueError(f"Mismatched Pauli lengths: {p.n_qubits} vs {q.n_qubits}")
    return (_popcount(p.x & q.z) + _popcount(p.z & q.x)) % 2 == 0


def pauli_product(p: PauliString, q: PauliString) -> Tuple[complex, PauliString]:
    """P·Q = phase · R with R phase-free."""
    if p.n_qubits != q.n_qubits:
        raise ValueError(f"Mismatched Pauli lengths: {p.n_qubits} vs {q.n_qubits}")
    x = p.x ^ q.x
    z = p.z ^ q.z
    power = p.n_y + q.n_y - _popcount(x & z) + 2 * _popcount(p.z & q.x)
    return _PHASES[power % 4], PauliString(p.n_qubits, x, z)


def _parity_of_masked(indices: np.ndarray, mask: int, n_qubits: int) -> np.ndarray:
    parity = np.zeros(indices.shape, dtype=np.int64)
    for q in range(n_qubits):
        if (mask >> q) & 1:
            parity ^= (indices >> q) & 1
    return parity


@lru_cache(maxsize=4096)
def pauli_action(n_qubits: int, x: int, z: int) -> Tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    perm = idx ^ x
    # P|j> = i^{n_y} (-1)^{|j & z|} |j ^ x>, read off at the target index
    parity = _parity_of_masked(perm, z, n_qubits)
    factor = _PHASES[_popcount(x & z) % 4] * (1 - 2 * parity).astype(complex)
    perm.setflags(write=False)
    factor.setflags(write=False)
    return perm, factor


class PauliSum:
    """
    Linear combination of Pauli strings with complex coefficients.

    Used for Jordan-Wigner images and weighted observables; Hamiltonians with
    time-dependent coefficients are built on top of it in ``hamiltonian.py``.
    """

    def __init__(self, n_qubits: int, terms: Dict[Tuple[int, int], complex] = None):
        self.n_qubits = n_qubits
        self._terms: Dict[Tuple[int, int], complex] = dict(terms or {})

    @classmethod
    def from_pauli(cls, p: PauliString, coefficient: complex = 1.0) -> "PauliSum":
        return cls(p.n_qubits, {(p.x, p.z): complex(coefficient)})

    @classmethod
    def identity(cls, n_qubits: int, coefficient: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {(0, 0): complex(coefficient)})

    def _check(self, other: "PauliSum"):
        if other.n_qubits != self.n_qubits:
            raise ValueError(f"Mismatched sizes: {self.n_qubits} vs {other.n_qubits}")

    def __add__(self, other: "PauliSum") -> "PauliSum":
        self._check(other)
        out = dict(self._terms)
        for key, coef in other._terms.items():
            out[key] = out.get(key, 0j) + coef
        return PauliSum(self.n_qubits, out)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other * -1.0

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            self._check(other)
            out: Dict[Tuple[int, int], complex] = {}
            for (x1, z1), c1 in self._terms.items():
                p = PauliString(self.n_qubits, x1, z1)
                for (x2, z2), c2 in other._terms.items():
                    phase, r = pauli_product(p, PauliString(self.n_qubits, x2, z2))
                    key = (r.x, r.z)
                    out[key] = out.get(key, 0j) + phase * c1 * c2
            return PauliSum(self.n_qubits, out)
        scale = complex(other)
        return PauliSum(self.n_qubits, {k: c * scale for k, c in self._terms.items()})

    __rmul__ = __mul__

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: c.conjugate() for k, c in self._terms.items()})

    def hermitian_part(self) -> "PauliSum":
        """(A + A^dagger) / 2; with Hermitian strings this keeps Re of each coefficient."""
        return PauliSum(self.n_qubits, {k: complex(c.real) for k, c in self._terms.items()})

    def simplify(self, atol: float = 1e-14) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: c for k, c in self._terms.items() if abs(c) > atol})

    def items(self) -> Iterator[Tuple[PauliString, complex]]:
        for (x, z), coef in self._terms.items():
            yield PauliString(self.n_qubits, x, z), coef

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, p: PauliString) -> complex:
        return self._terms.get((p.x, p.z), 0j)

    def to_dense(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        for p, coef in self.items():
            mat += coef * p.to_dense()
        return mat

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g}){p.label}" for p, c in self.items())
        return f"PauliSum[{self.n_qubits}]({body or '0'})"


def as_weighted_paulis(observable) -> Tuple[Tuple[float, PauliString], ...]:
    """Normalize a PauliString, a label, or ``[(w, P), ...]`` into weighted terms."""
    if isinstance(observable, str):
        return ((1.0, PauliString.from_label(observable)),)
    if isinstance(observable, PauliString):
        return ((1.0, observable),)
    if isinstance(observable, PauliSum):
        return tuple((float(c.real), p) for p, c in observable.items())
    terms = tuple((float(w), p) for w, p in observable)
    if not terms:
        raise ValueError("Observable has no terms")
    return terms


def site_average(n_qubits: int, letter: str) -> Tuple[Tuple[float, PauliString], ...]:
    """(1/n) sum_j letter_j, e.g. the site-averaged magnetization."""
    return tuple(
        (1.0 / n_qubits, PauliString.single(n_qubits, q, letter)) for q in range(n_qubits)
    )
