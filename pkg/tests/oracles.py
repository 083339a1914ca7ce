"""Dense reference matrices built with Kronecker products, independent of the bit-mask code."""

from pathlib import Path

import numpy as np

DATA = Path(__file__).resolve().parent.parent / "data"
CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# |0><1|: removes a fermion from an occupied orbital
LOWER = np.array([[0, 1], [0, 0]], dtype=complex)


def kron_qubits(ops):
    """ops[q] acts on qubit q; qubit 0 is the least significant index bit."""
    out = np.eye(1, dtype=complex)
    for op in reversed(ops):
        out = np.kron(out, op)
    return out


def dense_label(label):
    return kron_qubits([SINGLE[ch] for ch in label])


def dense_annihilation(j, n):
    ops = [SINGLE["Z"]] * j + [LOWER] + [SINGLE["I"]] * (n - j - 1)
    return kron_qubits(ops)


def random_label(rng, n, letters="IXYZ"):
    return "".join(rng.choice(list(letters)) for _ in range(n))
