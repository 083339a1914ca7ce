import numpy as np
import pytest

from tetris.hamiltonian import (
    FermionTermSet,
    Hamiltonian,
    build_ising2d,
    build_ising_chain,
    fermion_parse,
    hamiltonian_parse,
    jordan_wigner,
    square_lattice_bonds,
)
from tetris.pauli import pauli_parse
from tetris.schedules import adiabatic_field
from tests.oracles import DATA, dense_annihilation
from utils.file_handler import ParseError


def coefficient_map(h):
    return {p.label: c for p, c in zip(h.paulis, h.coefficients())}


# ----------------------------------------------------------------------------
# Pauli-sum files
# ----------------------------------------------------------------------------

def test_parse_two_site_ising():
    h = hamiltonian_parse("-1.0 ZZ\n-3.0 XI\n-3.0 IX\n")
    assert h.n_qubits == 2
    assert h.n_terms == 3
    assert [p.label for p in h.paulis] == ["ZZ", "XI", "IX"]
    np.testing.assert_allclose(h.coefficients(), [-1.0, -3.0, -3.0])


def test_parse_skips_comments_and_blank_lines():
    h = hamiltonian_parse(b"# header\n\n0.5 ZI  # trailing\n0.25 IZ\n")
    assert coefficient_map(h) == {"ZI": 0.5, "IZ": 0.25}


def test_parse_merges_duplicates_in_first_position():
    h = hamiltonian_parse("1.0 XX\n2.0 ZZ\n0.5 XX\n")
    assert [p.label for p in h.paulis] == ["XX", "ZZ"]
    assert coefficient_map(h)["XX"] == pytest.approx(1.5)


def test_parse_reports_inconsistent_qubit_count_with_line():
    with pytest.raises(ParseError) as info:
        hamiltonian_parse("1.0 XX\n1.0 XXX\n")
    assert info.value.line_number == 2
    assert "line 2" in str(info.value)


@pytest.mark.parametrize("text", ["abc ZZ\n", "nan ZZ\n", "1.0 ZQ\n", "1.0\n", ""])
def test_parse_rejects_malformed_input(text):
    with pytest.raises(ParseError):
        hamiltonian_parse(text)


def test_bundled_ising_file():
    with open(DATA / "ising_2site.txt", "rb") as handle:
        h = hamiltonian_parse(handle)
    assert h.abs_sum() == pytest.approx(7.0)


# ----------------------------------------------------------------------------
# Hamiltonian container
# ----------------------------------------------------------------------------

def test_hamiltonian_rejects_duplicates_and_size_mismatch():
    with pytest.raises(ValueError):
        Hamiltonian(2, [(pauli_parse("XX"), 1.0), (pauli_parse("XX"), 2.0)])
    with pytest.raises(ValueError):
        Hamiltonian(2, [(pauli_parse("XXX"), 1.0)])
    with pytest.raises(ValueError):
        Hamiltonian(2, [])


def test_dense_matrix_is_hermitian_sum():
    h = hamiltonian_parse("-1.0 ZZ\n-3.0 XI\n-3.0 IX\n")
    expected = -pauli_parse("ZZ").to_dense() - 3 * pauli_parse("XI").to_dense() - 3 * pauli_parse("IX").to_dense()
    np.testing.assert_allclose(h.to_dense(), expected)


def test_select_patterns():
    h = build_ising_chain(4, 1.0)
    zz = h.select("all-ZZ")
    assert len(zz) == 4
    assert all(h.paulis[n].label.count("Z") == 2 for n in zz)
    assert h.select("diagonal") == zz
    assert h.select("none") == ()
    assert h.select([0, 5]) == (0, 5)
    with pytest.raises(ValueError):
        h.select([99])
    with pytest.raises(ValueError):
        h.select("odd")


def test_check_commuting():
    h = build_ising_chain(3, 1.0)
    h.check_commuting(h.select("all-ZZ"))
    with pytest.raises(ValueError):
        # Z0 Z1 and X0
        h.check_commuting([0, 3])


# ----------------------------------------------------------------------------
# Lattice models
# ----------------------------------------------------------------------------

def test_ising_3x4_term_counts():
    h = build_ising2d(3, 4, 3.0, periodic=True)
    assert h.n_qubits == 12
    assert h.n_terms == 36
    coefficients = h.coefficients()
    assert np.sum(coefficients == -1.0) == 24
    assert np.sum(coefficients == -3.0) == 12
    assert h.abs_sum() == pytest.approx(60.0)


def test_ising_without_field():
    h = build_ising2d(1, 2, 0.0, periodic=False)
    assert [p.label for p in h.paulis] == ["ZZ"]
    assert h.coefficients()[0] == -1.0


def test_small_periodic_lattices_deduplicate_bonds():
    assert len(square_lattice_bonds(2, 2, True)) == 4
    assert len(square_lattice_bonds(1, 2, True)) == 1
    assert square_lattice_bonds(1, 1, True) == []


def test_single_site_chain():
    with pytest.raises(ValueError):
        build_ising_chain(1, 0.0)
    h = build_ising_chain(1, 2.0)
    assert [p.label for p in h.paulis] == ["X"]


def test_site_index_convention():
    h = build_ising2d(2, 3, 0.0, periodic=False)
    labels = {p.label for p in h.paulis}
    # site (0, 0) is qubit 0 and site (1, 0) is qubit 3
    assert "ZIIZII" in labels
    assert "ZZIIII" in labels


def test_time_dependent_field():
    h = build_ising_chain(3, adiabatic_field(2.5, 1.0))
    assert not h.is_constant
    assert h.horizon == pytest.approx(1.0)
    x_values = [c for p, c in zip(h.paulis, h.coefficients(1.0)) if p.label.count("X") == 1]
    np.testing.assert_allclose(x_values, [-2.5] * 3)


# ----------------------------------------------------------------------------
# Fermionic input and Jordan-Wigner
# ----------------------------------------------------------------------------

def dense_fermion(terms):
    n = terms.n_orbitals
    lower = [dense_annihilation(j, n) for j in range(n)]
    raise_ = [op.conj().T for op in lower]
    total = np.zeros((1 << n, 1 << n), dtype=complex)
    for i, j, v in terms.one_body:
        total += v * raise_[i] @ lower[j]
    for i, j, k, l, v in terms.two_body:
        total += v * raise_[i] @ raise_[j] @ lower[k] @ lower[l]
    return 0.5 * (total + total.conj().T)


def test_hopping_maps_to_xx_plus_yy():
    h = jordan_wigner(FermionTermSet(2, one_body=((0, 1, 0.3), (1, 0, 0.3))))
    assert coefficient_map(h) == pytest.approx({"XX": 0.15, "YY": 0.15})


def test_number_operator():
    h = jordan_wigner(FermionTermSet(3, one_body=((2, 2, 1.0),)))
    assert coefficient_map(h) == pytest.approx({"III": 0.5, "IIZ": -0.5})


def test_jordan_wigner_matches_dense_oracle():
    rng = np.random.default_rng(7)
    for _ in range(5):
        n = 4
        one_body = tuple((int(i), int(j), float(rng.normal())) for i, j in rng.integers(0, n, size=(4, 2)))
        two_body = tuple(
            tuple(int(v) for v in idx) + (float(rng.normal()),) for idx in rng.integers(0, n, size=(3, 4))
        )
        terms = FermionTermSet(n, one_body, two_body)
        np.testing.assert_allclose(jordan_wigner(terms).to_dense(), dense_fermion(terms), atol=1e-12)


def test_toy_fermion_file():
    with open(DATA / "toy_fermion.txt", "rb") as handle:
        terms = fermion_parse(handle)
    assert terms.n_orbitals == 4
    h = jordan_wigner(terms)
    assert h.n_qubits == 4
    np.testing.assert_allclose(h.to_dense(), dense_fermion(terms), atol=1e-12)


@pytest.mark.parametrize("text", [
    "ob 0 1 0.5\n",
    "norb 2\nob 0 2 0.5\n",
    "norb 2\nob 0 x 0.5\n",
    "norb 2\nqb 0 1 0.5\n",
    "norb 2\nnorb 2\n",
])
def test_fermion_parse_errors(text):
    with pytest.raises(ParseError):
        fermion_parse(text)
