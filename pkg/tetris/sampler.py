# ============================================================================
# tetris/sampler.py - Gate Mixing and Tetris Sampling
# ============================================================================
"""
Randomized compilation of e^{itH} into large-angle gates.

A small rotation e^{i tau' O} is replaced by a gate e^{i tau O} that fires with
probability p, which reproduces lambda * e^{i tau' O} on average. In the
continuous-time limit each term n fires as a Poisson process with rate
|c_n| / sin(tau_n); one realization of all event times is a tetris.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from tetris.hamiltonian import Hamiltonian
from tetris.pauli import PauliString
from tetris.schedules import coefficient_sign
from tetris.schemas import AttenuationReport, MixingParams, NoiseModel
from tetris.statevector import (
    State,
    matrix_element,
    pauli_amplitudes,
    rotate_amplitudes,
)

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
ANGLE_TOL = 1e-12
MAX_SUBSET_GATES = 5


# ============================================================================
# Mixing identity
# ============================================================================

def mixing_params(tau_target: float, tau: float) -> MixingParams:
    """
    p and lambda with (1 - p) + p e^{+-i tau} = lambda e^{+-i tau_target}.

    Uses p = sin|tau'| / (sin(|tau| - |tau'|) + sin|tau'|), algebraically equal
    to tan(tau') / (sin(tau) + (1 - cos(tau)) tan(tau')) but without the
    0/0 at tau' = 0.
    """
    a, b = abs(tau), abs(tau_target)
    if a > HALF_PI + ANGLE_TOL:
        raise ValueError(f"|tau| must not exceed pi/2, got {tau}")
    if b > a + ANGLE_TOL:
        raise ValueError(f"|tau'| = {b} exceeds |tau| = {a}")
    if tau_target != 0 and math.copysign(1.0, tau_target) != math.copysign(1.0, tau):
        raise ValueError(f"tau' = {tau_target} and tau = {tau} differ in sign")
    if a == 0.0:
        return MixingParams(p=0.0, tau=tau, tau_target=tau_target, attenuation=1.0)

    b = min(b, a)
    denominator = math.sin(a - b) + math.sin(b)
    p = math.sin(b) / denominator
    attenuation = math.sin(a) / denominator
    return MixingParams(p=min(p, 1.0), tau=tau, tau_target=tau_target, attenuation=min(attenuation, 1.0))


def subset_identity_check(
    gates: Sequence[Tuple[PauliString, float]],
    observable,
    initial: State,
    tau: float,
) -> Tuple[complex, complex]:
    """
    Brute-force check of the two-copy mixing identity.

    Every gate (P_g, tau'_g) is realized as e^{i sgn(tau'_g)|tau| P_g} firing
    with probability p_g. Returns

        lhs = sum over fired sets F, F' of w(F) w(F') <psi_F'|M|psi_F>
        rhs = prod_g lambda_g^2 <psi|M|psi>,   psi = prod_g e^{i tau'_g P_g} psi_0

    Enumerates 4^G pairs, so only for G <= 5.
    """
    if len(gates) > MAX_SUBSET_GATES:
        raise ValueError(f"at most {MAX_SUBSET_GATES} gates, got {len(gates)}")
    for pauli, _ in gates:
        if pauli.n_qubits != initial.n_qubits:
            raise ValueError("gate and state sizes differ")

    params = [mixing_params(target, math.copysign(abs(tau), target) if target else abs(tau))
              for _, target in gates]

    branches: List[Tuple[float, np.ndarray]] = []
    for fired in itertools.product((False, True), repeat=len(gates)):
        weight = 1.0
        amplitudes = initial.amplitudes
        for (pauli, _), mix, on in zip(gates, params, fired):
            weight *= mix.p if on else 1.0 - mix.p
            if on:
                amplitudes = rotate_amplitudes(amplitudes, pauli, mix.tau)
        branches.append((weight, amplitudes))

    lhs = 0j
    for w_ket, ket in branches:
        for w_bra, bra in branches:
            if w_ket and w_bra:
                lhs += w_ket * w_bra * matrix_element(bra, observable, ket)

    target = initial.amplitudes
    attenuation = 1.0
    for (pauli, tau_target), mix in zip(gates, params):
        target = rotate_amplitudes(target, pauli, tau_target)
        attenuation *= mix.attenuation
    rhs = attenuation ** 2 * matrix_element(target, observable, target)
    return lhs, rhs


# ============================================================================
# Angles and tetrises
# ============================================================================

@dataclass(frozen=True)
class AngleAssignment:
    """Realized gate angle tau_n in (0, pi/2] for every term."""

    taus: Tuple[float, ...]

    def __post_init__(self):
        taus = tuple(float(v) for v in self.taus)
        bad = [v for v in taus if not (0.0 < v <= HALF_PI + ANGLE_TOL)]
        if bad:
            raise ValueError(f"angles must lie in (0, pi/2], got {bad}")
        object.__setattr__(self, "taus", tuple(min(v, HALF_PI) for v in taus))

    @classmethod
    def uniform(cls, tau: float, n_terms: int) -> "AngleAssignment":
        return cls((tau,) * n_terms)

    def __len__(self) -> int:
        return len(self.taus)

    def __getitem__(self, index: int) -> float:
        return self.taus[index]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.taus, dtype=float)


@dataclass(frozen=True)
class TetrisEvent:
    time: float
    term_index: int   # 0-based position in the Hamiltonian
    sign: int


@dataclass(frozen=True, eq=False)
class Tetris:
    """Time-sorted gate events; equal times are ordered by term index."""

    horizon: float
    times: np.ndarray
    terms: np.ndarray
    signs: np.ndarray
    angles: AngleAssignment
    background: Tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.times)

    @property
    def events(self) -> List[TetrisEvent]:
        return [TetrisEvent(float(t), int(n), int(s)) for t, n, s in zip(self.times, self.terms, self.signs)]

    def counts(self, n_terms: int) -> np.ndarray:
        """m_n for every term."""
        return np.bincount(self.terms, minlength=n_terms)


class BackgroundEvolution:
    """Exact e^{i ds H_bg} for a set of mutually commuting constant terms."""

    def __init__(self, h: Hamiltonian, indices: Sequence[int]):
        self.indices = tuple(indices)
        self.paulis = [h.terms[n].pauli for n in self.indices]
        self.coefficients = [float(h.terms[n].schedule.value(0.0)) for n in self.indices]
        self.diagonal = None
        if all(p.is_diagonal for p in self.paulis):
            energies = np.zeros(1 << h.n_qubits)
            for pauli, coef in zip(self.paulis, self.coefficients):
                energies += coef * pauli.action()[1].real
            self.diagonal = energies

    def evolve(self, amplitudes: np.ndarray, ds: float) -> np.ndarray:
        if ds <= 0.0:
            return amplitudes
        if self.diagonal is not None:
            return np.exp(1j * ds * self.diagonal) * amplitudes
        for pauli, coef in zip(self.paulis, self.coefficients):
            amplitudes = rotate_amplitudes(amplitudes, pauli, ds * coef)
        return amplitudes


def random_support_pauli(pauli: PauliString, rng: np.random.Generator) -> PauliString:
    """Uniformly random Pauli (identity included) on the support of ``pauli``."""
    x = z = 0
    letters = rng.integers(0, 4, size=pauli.weight)
    for q, letter in zip(pauli.support, letters):
        x |= int(letter & 1) << q
        z |= int(letter >> 1) << q
    return PauliString(pauli.n_qubits, x, z)


class TetrisSampler:
    """
    Draws and applies tetrises for one (Hamiltonian, angles, background)
    combination. Rates and the background propagator are prepared once and
    shared read-only by all samples.
    """

    def __init__(self, h: Hamiltonian, angles: AngleAssignment, background: Iterable[int] = ()):
        if len(angles) != h.n_terms:
            raise ValueError(f"{len(angles)} angles for {h.n_terms} terms")
        background = tuple(sorted(set(int(n) for n in background)))
        if any(not 0 <= n < h.n_terms for n in background):
            raise ValueError(f"background indices out of range: {background}")
        if background:
            h.check_commuting(background)
            varying = [h.terms[n].pauli.label for n in background if not h.terms[n].schedule.is_constant]
            if varying:
                raise ValueError(f"background terms must have constant coefficients: {varying}")

        self.h = h
        self.angles = angles
        self.background = background
        self.active = np.array([n for n in range(h.n_terms) if n not in set(background)], dtype=np.int64)
        self.inv_sin = 1.0 / np.sin(angles.as_array())
        self.taus = angles.as_array()
        self.paulis = h.paulis
        self.background_op = BackgroundEvolution(h, background) if background else None
        self._weights: Dict[float, np.ndarray] = {}

    # -- rates --------------------------------------------------------------

    def weights(self, t: float) -> np.ndarray:
        """z_n(t) for every term (|c_n| t for constant coefficients)."""
        if t < 0:
            raise ValueError(f"t must be non-negative, got {t}")
        if t not in self._weights:
            self._weights[t] = self.h.integrated_weights(t)
        return self._weights[t]

    def rates(self, t: float) -> np.ndarray:
        """Poisson means z_n(t) / sin(tau_n); background terms get 0."""
        out = self.weights(t) * self.inv_sin
        out[list(self.background)] = 0.0
        return out

    # -- drawing ------------------------------------------------------------

    def draw(self, t: float, rng: np.random.Generator) -> Tetris:
        rates = self.rates(t)[self.active]
        counts = rng.poisson(rates)
        terms = np.repeat(self.active, counts)
        total = int(counts.sum())

        if self.h.is_constant:
            times = rng.uniform(0.0, t, size=total)
            signs = coefficient_sign(self.h.coefficients())[terms]
        else:
            u = rng.uniform(0.0, 1.0, size=total) * self.weights(t)[terms]
            times, signs = self._invert(terms, u)

        order = np.lexsort((terms, times))
        return Tetris(
            horizon=t,
            times=times[order],
            terms=terms[order],
            signs=np.asarray(signs, dtype=np.int8)[order],
            angles=self.angles,
            background=self.background,
        )

    def _invert(self, terms: np.ndarray, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Map uniform draws on [0, z_n(t)] to event times and signs sgn(c_n(s))."""
        times = np.empty(len(terms))
        signs = np.empty(len(terms), dtype=np.int8)
        groups: Dict[int, Tuple[object, List[int]]] = {}
        for n in range(self.h.n_terms):
            schedule = self.h.terms[n].schedule
            groups.setdefault(id(schedule), (schedule, []))[1].append(n)
        for schedule, members in groups.values():
            mask = np.isin(terms, members)
            if not mask.any():
                continue
            mapped = np.atleast_1d(schedule.z_inverse(u[mask]))
            times[mask] = mapped
            signs[mask] = coefficient_sign(np.atleast_1d(schedule.value(mapped)))
        return times, signs

    # -- application --------------------------------------------------------

    def apply(
        self,
        amplitudes: np.ndarray,
        tetris: Tetris,
        error_probabilities: Optional[np.ndarray] = None,
        rng: Optional[np.random.Generator] = None,
    ) -> np.ndarray:
        """
        Apply the events in time order. With error probabilities, each gate
        is followed (with probability p_n) by a uniformly random Pauli on its
        support carrying a random sign.
        """
        previous = 0.0
        for time, n, sign in zip(tetris.times, tetris.terms, tetris.signs):
            if self.background_op is not None:
                amplitudes = self.background_op.evolve(amplitudes, time - previous)
                previous = time
            pauli = self.paulis[n]
            amplitudes = rotate_amplitudes(amplitudes, pauli, sign * self.taus[n])
            if error_probabilities is not None and rng.random() < error_probabilities[n]:
                # the sign makes the average over insertions proportional to the identity
                error = random_support_pauli(pauli, rng)
                amplitudes = (1 - 2 * int(rng.integers(0, 2))) * pauli_amplitudes(amplitudes, error)
        if self.background_op is not None:
            amplitudes = self.background_op.evolve(amplitudes, tetris.horizon - previous)
        return amplitudes

    # -- predictions --------------------------------------------------------

    def report(self, t: float, noise: Optional[NoiseModel] = None) -> AttenuationReport:
        z = self.weights(t)
        active = self.active
        taus = self.taus[active]
        log_lambda = -2.0 * float(np.sum(z[active] * np.tan(0.5 * taus)))
        expected = float(np.sum(z[active] * self.inv_sin[active]))
        log_q = 0.0
        if noise is not None:
            rates = np.asarray(noise.rates, dtype=float)
            if len(rates) != self.h.n_terms:
                raise ValueError(f"{len(rates)} noise rates for {self.h.n_terms} terms")
            log_q = -2.0 * float(np.sum(rates[active] * z[active] * self.inv_sin[active]))
        lambda_att = math.exp(log_lambda)
        if lambda_att == 0.0:
            logger.warning(f"lambda_att underflows at t={t} (log lambda_att = {log_lambda:.4g})")
        return AttenuationReport(
            lambda_att=lambda_att,
            q_att=math.exp(log_q),
            log_lambda_att=log_lambda,
            log_q_att=log_q,
            expected_gates=expected,
            z_values=z.tolist(),
            background=list(self.background),
        )


# ============================================================================
# Module-level operations
# ============================================================================

def draw_tetris(h: Hamiltonian, t: float, angles: AngleAssignment, rng: np.random.Generator) -> Tetris:
    if not h.is_constant:
        raise ValueError("draw_tetris needs constant coefficients; use draw_tetris_td")
    return TetrisSampler(h, angles).draw(t, rng)


def draw_tetris_td(h: Hamiltonian, t: float, angles: AngleAssignment, rng: np.random.Generator) -> Tetris:
    return TetrisSampler(h, angles).draw(t, rng)


def draw_tetris_background(
    h: Hamiltonian,
    background: Iterable[int],
    t: float,
    angles: AngleAssignment,
    rng: np.random.Generator,
) -> Tetris:
    return TetrisSampler(h, angles, background).draw(t, rng)


def apply_tetris(
    s: State,
    tetris: Tetris,
    h: Hamiltonian,
    angles: AngleAssignment,
    background: Optional[Iterable[int]] = None,
) -> State:
    if s.n_qubits != h.n_qubits:
        raise ValueError(f"size mismatch: {s.n_qubits} vs {h.n_qubits} qubits")
    background = tetris.background if background is None else background
    sampler = TetrisSampler(h, angles, background)
    return State(s.n_qubits, sampler.apply(s.amplitudes, tetris))


def attenuation_report(
    h: Hamiltonian,
    t: float,
    angles: AngleAssignment,
    noise: Optional[NoiseModel] = None,
    background: Iterable[int] = (),
) -> AttenuationReport:
    return TetrisSampler(h, angles, background).report(t, noise)


def format_tetris(tetris: Tetris, seed: int, sample_index: int) -> str:
    """Plain-text dump: header lines, then ``time term_index sign`` with 1-based terms."""
    lines = [
        f"# t {tetris.horizon!r}",
        f"# seed {seed} sample {sample_index}",
        "# angles " + " ".join(repr(v) for v in tetris.angles.taus),
    ]
    if tetris.background:
        lines.append("# background " + " ".join(str(n + 1) for n in tetris.background))
    lines.append("# time term_index sign")
    lines.extend(f"{t!r} {n + 1} {s:+d}" for t, n, s in zip(tetris.times.tolist(), tetris.terms.tolist(),
                                                           tetris.signs.tolist()))
    return "\n".join(lines) + "\n"
