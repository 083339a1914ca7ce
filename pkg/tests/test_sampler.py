import math

import numpy as np
import pytest
from scipy import linalg, stats

from tetris.hamiltonian import Hamiltonian, build_ising2d, build_ising_chain
from tetris.pauli import pauli_parse
from tetris.sampler import (
    AngleAssignment,
    TetrisSampler,
    apply_tetris,
    attenuation_report,
    draw_tetris,
    draw_tetris_background,
    draw_tetris_td,
    format_tetris,
    mixing_params,
    random_support_pauli,
    subset_identity_check,
)
from tetris.schedules import linear_ramp
from tetris.schemas import NoiseModel
from tetris.statevector import State, exact_evolve, init_basis_state
from tests.oracles import dense_label, random_label


# ----------------------------------------------------------------------------
# Mixing identity
# ----------------------------------------------------------------------------

def test_gadget_angles_give_half_probability():
    mix = mixing_params(math.pi / 8, math.pi / 4)
    assert mix.p == pytest.approx(0.5, abs=1e-15)
    assert mix.attenuation == pytest.approx(math.cos(math.pi / 8), abs=1e-15)


def test_mixing_limits():
    same = mixing_params(0.3, 0.3)
    assert same.p == pytest.approx(1.0)
    assert same.attenuation == pytest.approx(1.0)
    off = mixing_params(0.0, 0.3)
    assert off.p == 0.0
    assert off.attenuation == 1.0


def test_mixing_identity_on_both_branches():
    rng = np.random.default_rng(0)
    tau = rng.uniform(1e-6, math.pi / 2, size=10_000)
    target = tau * rng.uniform(0.0, 1.0, size=10_000)
    sign = rng.choice([-1.0, 1.0], size=10_000)
    worst = 0.0
    for a, b, s in zip(tau, target, sign):
        mix = mixing_params(s * b, s * a)
        for branch in (1.0, -1.0):
            lhs = (1 - mix.p) + mix.p * np.exp(1j * branch * s * a)
            rhs = mix.attenuation * np.exp(1j * branch * s * b)
            worst = max(worst, abs(lhs - rhs))
    assert worst < 1e-14


@pytest.mark.parametrize("target, tau", [(0.5, 0.3), (0.2, -0.3), (-0.1, 0.3), (0.1, 2.0)])
def test_mixing_rejects_bad_angles(target, tau):
    with pytest.raises(ValueError):
        mixing_params(target, tau)


def test_subset_identity_without_gates():
    s = init_basis_state(2, "10")
    lhs, rhs = subset_identity_check([], "ZI", s, 0.7)
    assert lhs == pytest.approx(-1.0)
    assert rhs == pytest.approx(-1.0)


def test_subset_identity_random_circuits():
    rng = np.random.default_rng(4)
    for _ in range(20):
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        s = State(3, psi / np.linalg.norm(psi))
        gates = [(pauli_parse(random_label(rng, 3)), float(rng.choice([-1, 1]) * 0.2)) for _ in range(4)]
        lhs, rhs = subset_identity_check(gates, random_label(rng, 3), s, 0.7)
        assert abs(lhs - rhs) < 1e-10


def test_subset_identity_full_probability():
    s = init_basis_state(1, "0")
    lhs, rhs = subset_identity_check([(pauli_parse("X"), 0.4)], "Z", s, 0.4)
    assert lhs == pytest.approx(math.cos(0.8))
    assert rhs == pytest.approx(math.cos(0.8))


def test_subset_identity_gate_limit():
    s = init_basis_state(1, "0")
    with pytest.raises(ValueError):
        subset_identity_check([(pauli_parse("X"), 0.1)] * 6, "Z", s, 0.4)


# ----------------------------------------------------------------------------
# Angles and drawing
# ----------------------------------------------------------------------------

def test_angle_assignment_range():
    assert AngleAssignment.uniform(0.1, 3).taus == (0.1, 0.1, 0.1)
    assert AngleAssignment((math.pi / 2,))[0] == math.pi / 2
    with pytest.raises(ValueError):
        AngleAssignment((0.0,))
    with pytest.raises(ValueError):
        AngleAssignment((2.0,))


def test_zero_time_gives_empty_tetris():
    h = build_ising_chain(3, 1.0)
    tetris = draw_tetris(h, 0.0, AngleAssignment.uniform(0.1, h.n_terms), np.random.default_rng(0))
    assert len(tetris) == 0


def test_single_term_count_mean():
    h = Hamiltonian(1, [(pauli_parse("X"), 1.0)])
    sampler = TetrisSampler(h, AngleAssignment.uniform(math.pi / 2, 1))
    rng = np.random.default_rng(10)
    counts = np.array([len(sampler.draw(1.0, rng)) for _ in range(100_000)])
    assert counts.mean() == pytest.approx(1.0, abs=4 * math.sqrt(1.0 / 100_000))
    assert counts.var() == pytest.approx(1.0, abs=0.03)


def test_counts_and_signs_follow_coefficients():
    h = Hamiltonian(2, [(pauli_parse("XI"), 2.0), (pauli_parse("IZ"), -1.0)])
    sampler = TetrisSampler(h, AngleAssignment.uniform(0.1, 2))
    rng = np.random.default_rng(12)
    totals = np.zeros(2)
    n_draws = 20_000
    for _ in range(n_draws):
        tetris = sampler.draw(0.5, rng)
        totals += tetris.counts(2)
        assert np.all(tetris.signs[tetris.terms == 0] == 1)
        assert np.all(tetris.signs[tetris.terms == 1] == -1)
        assert np.all(np.diff(tetris.times) >= 0)
    expected = np.array([1.0, 0.5]) / math.sin(0.1)
    np.testing.assert_allclose(totals / n_draws, expected, atol=4 * math.sqrt(expected.max() / n_draws))


def test_constant_times_are_uniform():
    h = build_ising_chain(2, 1.0, periodic=False)
    tetris = draw_tetris(h, 2.0, AngleAssignment.uniform(0.01, h.n_terms), np.random.default_rng(3))
    assert len(tetris) > 200
    assert stats.kstest(tetris.times / 2.0, "uniform").pvalue > 1e-3


def test_time_dependent_draw_follows_rate():
    h = Hamiltonian(1, [(pauli_parse("X"), linear_ramp(1.0, 1.0))])
    sampler = TetrisSampler(h, AngleAssignment.uniform(math.pi / 2, 1))
    rng = np.random.default_rng(8)
    times = np.concatenate([sampler.draw(1.0, rng).times for _ in range(20_000)])
    # mean count z(1) / sin(pi/2) = 1/2, event-time density 2s on [0, 1]
    assert len(times) / 20_000 == pytest.approx(0.5, abs=4 * math.sqrt(0.5 / 20_000))
    assert stats.kstest(times, lambda x: np.clip(x, 0, 1) ** 2).pvalue > 1e-3


def test_time_dependent_signs_follow_schedule():
    h = Hamiltonian(1, [(pauli_parse("Z"), linear_ramp(-2.0, 1.0))])
    tetris = draw_tetris_td(h, 1.0, AngleAssignment.uniform(0.05, 1), np.random.default_rng(2))
    assert len(tetris) > 0
    assert np.all(tetris.signs == -1)


def test_draw_tetris_needs_constant_coefficients():
    h = Hamiltonian(1, [(pauli_parse("Z"), linear_ramp(1.0, 1.0))])
    with pytest.raises(ValueError):
        draw_tetris(h, 0.5, AngleAssignment.uniform(0.1, 1), np.random.default_rng(0))


def test_draws_are_reproducible():
    h = build_ising_chain(3, 1.0)
    angles = AngleAssignment.uniform(0.2, h.n_terms)
    a = draw_tetris(h, 0.7, angles, np.random.default_rng(99))
    b = draw_tetris(h, 0.7, angles, np.random.default_rng(99))
    np.testing.assert_array_equal(a.times, b.times)
    np.testing.assert_array_equal(a.terms, b.terms)


# ----------------------------------------------------------------------------
# Background evolution
# ----------------------------------------------------------------------------

def test_empty_background_matches_plain_draw():
    h = build_ising_chain(3, 1.0)
    angles = AngleAssignment.uniform(0.2, h.n_terms)
    a = draw_tetris(h, 0.7, angles, np.random.default_rng(5))
    b = draw_tetris_background(h, [], 0.7, angles, np.random.default_rng(5))
    np.testing.assert_array_equal(a.times, b.times)
    np.testing.assert_array_equal(a.terms, b.terms)


def test_background_terms_never_fire():
    h = build_ising_chain(4, 1.0)
    background = h.select("all-ZZ")
    angles = AngleAssignment.uniform(0.2, h.n_terms)
    rng = np.random.default_rng(6)
    for _ in range(50):
        tetris = draw_tetris_background(h, background, 1.0, angles, rng)
        assert not set(tetris.terms.tolist()) & set(background)


def test_full_background_is_exact_evolution():
    h = Hamiltonian(2, [(pauli_parse("ZZ"), 0.8), (pauli_parse("ZI"), -0.3)])
    angles = AngleAssignment.uniform(0.1, 2)
    tetris = draw_tetris_background(h, [0, 1], 1.2, angles, np.random.default_rng(0))
    assert len(tetris) == 0
    s = State(2, np.ones(4) / 2)
    out = apply_tetris(s, tetris, h, angles)
    np.testing.assert_allclose(out.amplitudes, exact_evolve(h, 1.2, s).amplitudes, atol=1e-12)
    assert attenuation_report(h, 1.2, angles, background=[0, 1]).lambda_att == 1.0


def test_background_must_commute():
    h = build_ising_chain(2, 1.0, periodic=False)
    with pytest.raises(ValueError):
        TetrisSampler(h, AngleAssignment.uniform(0.1, h.n_terms), [0, 1])


def test_background_must_be_constant():
    h = build_ising_chain(2, linear_ramp(1.0, 1.0), periodic=False)
    with pytest.raises(ValueError):
        TetrisSampler(h, AngleAssignment.uniform(0.1, h.n_terms), [1])


def test_background_raises_attenuation():
    h = build_ising2d(3, 4, 3.0)
    angles = AngleAssignment.uniform(0.04, h.n_terms)
    plain = attenuation_report(h, 1.0, angles)
    reduced = attenuation_report(h, 1.0, angles, background=h.select("all-ZZ"))
    assert reduced.lambda_att > plain.lambda_att
    assert reduced.lambda_att == pytest.approx(math.exp(-72.0 * math.tan(0.02)))


# ----------------------------------------------------------------------------
# Applying tetrises and predictions
# ----------------------------------------------------------------------------

def test_apply_events_in_time_order():
    h = Hamiltonian(2, [(pauli_parse("XI"), 1.0), (pauli_parse("ZZ"), -1.0), (pauli_parse("IY"), 0.5)])
    angles = AngleAssignment((0.3, 0.5, 0.7))
    tetris = draw_tetris(h, 3.0, angles, np.random.default_rng(1))
    assert len(tetris) > 3
    s = init_basis_state(2, "00")
    expected = s.amplitudes
    for event in tetris.events:
        label = h.paulis[event.term_index].label
        expected = linalg.expm(1j * event.sign * angles[event.term_index] * dense_label(label)) @ expected
    np.testing.assert_allclose(apply_tetris(s, tetris, h, angles).amplitudes, expected, atol=1e-12)


def test_empty_tetris_is_identity():
    h = build_ising_chain(2, 1.0)
    angles = AngleAssignment.uniform(0.1, h.n_terms)
    tetris = draw_tetris(h, 0.0, angles, np.random.default_rng(0))
    s = init_basis_state(2, "10")
    np.testing.assert_allclose(apply_tetris(s, tetris, h, angles).amplitudes, s.amplitudes)


def test_right_angle_gates_keep_basis_states():
    h = build_ising_chain(4, 1.0)
    angles = AngleAssignment.uniform(math.pi / 2, h.n_terms)
    rng = np.random.default_rng(21)
    for _ in range(10):
        tetris = draw_tetris(h, 2.0, angles, rng)
        out = apply_tetris(init_basis_state(4, "0000"), tetris, h, angles).amplitudes
        large = np.abs(out) > 1e-9
        assert large.sum() == 1
        assert abs(out[large][0]) == pytest.approx(1.0, abs=1e-12)


def test_random_support_pauli_stays_on_support():
    rng = np.random.default_rng(0)
    pauli = pauli_parse("IXIZ")
    seen = set()
    for _ in range(400):
        error = random_support_pauli(pauli, rng)
        assert set(error.support) <= {1, 3}
        seen.add(error.label)
    assert len(seen) == 16


def test_attenuation_report_values():
    single = Hamiltonian(1, [(pauli_parse("X"), 1.0)])
    report = attenuation_report(single, 1.0, AngleAssignment.uniform(math.pi / 2, 1))
    assert report.lambda_att == pytest.approx(math.exp(-2.0))
    assert report.q_att == 1.0

    h = build_ising2d(3, 4, 3.0)
    report = attenuation_report(h, 1.0, AngleAssignment.uniform(0.04, h.n_terms))
    assert report.lambda_att == pytest.approx(math.exp(-120.0 * math.tan(0.02)))
    assert report.lambda_att == pytest.approx(0.0907, abs=2e-4)
    assert report.expected_gates_pair == pytest.approx(120.0 / math.sin(0.04))
    assert report.expected_gates_pair == pytest.approx(3001, abs=1)


def test_attenuation_report_long_times_underflow():
    single = Hamiltonian(1, [(pauli_parse("X"), 1.0)])
    report = attenuation_report(single, 400.0, AngleAssignment.uniform(math.pi / 2, 1), NoiseModel.uniform(1.0, 1))
    assert report.lambda_att == 0.0
    assert report.q_att == 0.0
    assert report.underflows
    assert report.log_lambda_att == pytest.approx(-800.0)
    assert report.log_q_att == pytest.approx(-800.0)
    assert report.expected_gates == pytest.approx(400.0)


def test_attenuation_report_logs_match_values():
    h = build_ising_chain(3, 1.0)
    report = attenuation_report(h, 0.7, AngleAssignment.uniform(0.3, h.n_terms), NoiseModel.uniform(0.02, h.n_terms))
    assert math.exp(report.log_lambda_att) == pytest.approx(report.lambda_att)
    assert math.exp(report.log_q_att) == pytest.approx(report.q_att)
    assert not report.underflows


def test_attenuation_report_with_noise():
    h = Hamiltonian(1, [(pauli_parse("X"), 1.0)])
    report = attenuation_report(h, 0.5, AngleAssignment.uniform(0.2, 1), NoiseModel.uniform(0.01, 1))
    assert report.q_att == pytest.approx(math.exp(-2 * 0.01 * 0.5 / math.sin(0.2)))
    assert NoiseModel.uniform(0.01, 2).error_probabilities == pytest.approx([1 - math.exp(-0.01)] * 2)
    with pytest.raises(ValueError):
        attenuation_report(h, 0.5, AngleAssignment.uniform(0.2, 1), NoiseModel.uniform(0.01, 2))


def test_format_tetris():
    h = build_ising_chain(3, 1.0)
    angles = AngleAssignment.uniform(0.3, h.n_terms)
    tetris = draw_tetris(h, 1.0, angles, np.random.default_rng(4))
    text = format_tetris(tetris, seed=7, sample_index=2)
    lines = text.splitlines()
    assert lines[0] == "# t 1.0"
    assert lines[1] == "# seed 7 sample 2"
    body = [line for line in lines if not line.startswith("#")]
    assert len(body) == len(tetris)
    for line, event in zip(body, tetris.events):
        time, index, sign = line.split()
        assert float(time) == event.time
        assert int(index) == event.term_index + 1
        assert int(sign) == event.sign
