# ============================================================================
# tetris/estimator.py - Amplified Monte Carlo Estimators
# ============================================================================
"""
Estimators built on tetris sampling.

    <psi(t)|M|psi(t)> = E[<psi_T'|M|psi_T>] / lambda_att
    L(t)              = E[<psi_0|psi_T>] / sqrt(lambda_att)

Every sample is a pure function of (master_seed, sample index); see
``tetris.streams``.
"""

import logging
import math
from typing import Iterable, Optional

import numpy as np

from tetris.hamiltonian import Hamiltonian
from tetris.pauli import as_weighted_paulis
from tetris.sampler import AngleAssignment, TetrisSampler
from tetris.schemas import AttenuationReport, EstimatorResult, NoiseMode, NoiseModel
from tetris.statevector import State, matrix_element
from tetris.streams import STREAM_EXPECTATION, STREAM_LOSCHMIDT, map_samples, sample_rng
from utils.data_processor import DataProcessor

logger = logging.getLogger(__name__)

RATIO_FLOOR_SIGMA = 10.0


class RatioUndefinedError(ValueError):
    """Re L is statistically indistinguishable from zero."""


def _noise_arrays(noise: Optional[NoiseModel], n_terms: int):
    if noise is None:
        return None, None
    rates = np.asarray(noise.rates, dtype=float)
    if len(rates) != n_terms:
        raise ValueError(f"{len(rates)} noise rates for {n_terms} terms")
    if noise.mode == NoiseMode.STOCHASTIC:
        return None, np.asarray(noise.error_probabilities)
    return rates, None


def _check_attenuation(report: AttenuationReport, noise: Optional[NoiseModel], t: float):
    """Raise before sampling when the divisor has underflowed to 0."""
    if report.underflows or (noise is not None and noise.mitigate and report.q_att == 0.0):
        raise ValueError(
            f"attenuation underflows at t={t} (log lambda_att = {report.log_lambda_att:.4g}, "
            f"log q_att = {report.log_q_att:.4g}); shorten t or raise tau"
        )


def _summarize(samples, gate_counts, scale, report, kind, t) -> EstimatorResult:
    stats = DataProcessor().complex_statistics(np.asarray(samples))
    mean = stats["mean"]
    return EstimatorResult(
        kind=kind,
        t=t,
        mean_re=mean.real / scale,
        mean_im=mean.imag / scale,
        stderr_re=stats["stderr_re"] / scale,
        stderr_im=stats["stderr_im"] / scale,
        cov_re_im=stats["cov_re_im"] / scale ** 2,
        raw_mean_re=mean.real,
        raw_mean_im=mean.imag,
        n_samples=stats["count"],
        scale=scale,
        report=report,
        mean_gates=float(np.mean(gate_counts)),
    )


def estimate_expectation(
    h: Hamiltonian,
    observable,
    t: float,
    initial: State,
    angles: AngleAssignment,
    n_samples: int,
    noise: Optional[NoiseModel] = None,
    background: Iterable[int] = (),
    master_seed: int = 0,
    threads: int = None,
) -> EstimatorResult:
    """
    Estimate <psi(t)|M|psi(t)> from n_samples independent tetris pairs.

    The bra is drawn as its own +tau tetris, which equals the adjoint circuit
    of the hardware protocol. ``observable`` may be a Pauli string, a label or
    a weighted list of strings.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    terms = as_weighted_paulis(observable)
    for _, pauli in terms:
        if pauli.n_qubits != h.n_qubits:
            raise ValueError(f"observable {pauli.label} does not match {h.n_qubits} qubits")
    if initial.n_qubits != h.n_qubits:
        raise ValueError(f"initial state has {initial.n_qubits} qubits, expected {h.n_qubits}")

    sampler = TetrisSampler(h, angles, background)
    report = sampler.report(t, noise)
    _check_attenuation(report, noise, t)
    attenuation_rates, error_probabilities = _noise_arrays(noise, h.n_terms)
    start = initial.amplitudes

    def one_sample(i: int):
        rng = sample_rng(master_seed, STREAM_EXPECTATION, i)
        ket_tetris = sampler.draw(t, rng)
        bra_tetris = sampler.draw(t, rng)
        ket = sampler.apply(start, ket_tetris, error_probabilities, rng)
        bra = sampler.apply(start, bra_tetris, error_probabilities, rng)
        value = matrix_element(bra, terms, ket)
        if attenuation_rates is not None:
            value *= math.exp(-float(attenuation_rates[ket_tetris.terms].sum()
                                     + attenuation_rates[bra_tetris.terms].sum()))
        return value, len(ket_tetris) + len(bra_tetris)

    logger.info(
        f"Expectation at t={t}: {n_samples} samples, lambda_att={report.lambda_att:.6g}, "
        f"~{report.expected_gates_pair:.1f} gates per pair"
    )
    results = map_samples(one_sample, n_samples, threads)

    scale = report.lambda_att
    if noise is not None and noise.mitigate:
        scale *= report.q_att
    return _summarize([r[0] for r in results], [r[1] for r in results], scale, report, "expectation", t)


def estimate_loschmidt(
    h: Hamiltonian,
    t: float,
    initial: State,
    angles: AngleAssignment,
    n_samples: int,
    noise: Optional[NoiseModel] = None,
    master_seed: int = 0,
    background: Iterable[int] = (),
    threads: int = None,
) -> EstimatorResult:
    """L(t) = <initial|e^{itH}|initial> from one tetris per sample."""
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    if initial.n_qubits != h.n_qubits:
        raise ValueError(f"initial state has {initial.n_qubits} qubits, expected {h.n_qubits}")

    sampler = TetrisSampler(h, angles, background)
    report = sampler.report(t, noise)
    _check_attenuation(report, noise, t)
    attenuation_rates, error_probabilities = _noise_arrays(noise, h.n_terms)
    start = initial.amplitudes

    def one_sample(i: int):
        rng = sample_rng(master_seed, STREAM_LOSCHMIDT, i)
        tetris = sampler.draw(t, rng)
        ket = sampler.apply(start, tetris, error_probabilities, rng)
        value = complex(np.vdot(start, ket))
        if attenuation_rates is not None:
            value *= math.exp(-float(attenuation_rates[tetris.terms].sum()))
        return value, len(tetris)

    logger.info(f"Loschmidt echo at t={t}: {n_samples} samples")
    results = map_samples(one_sample, n_samples, threads)

    # one tetris per sample carries half of the pair attenuation
    scale = math.sqrt(report.lambda_att)
    if noise is not None and noise.mitigate:
        scale *= math.sqrt(report.q_att)
    return _summarize([r[0] for r in results], [r[1] for r in results], scale, report, "loschmidt", t)


def ratio_R(value, floor_sigma: float = RATIO_FLOOR_SIGMA) -> float:
    """
    R = Im L / Re L. Given an EstimatorResult, Re L must exceed
    ``floor_sigma`` standard errors; a plain complex only needs Re L != 0.
    Scaling L by a positive constant leaves R unchanged.
    """
    if isinstance(value, EstimatorResult):
        if not abs(value.mean_re) > floor_sigma * value.stderr_re:
            raise RatioUndefinedError(
                f"ratio undefined at t={value.t}: |Re L| = {abs(value.mean_re):.3g} "
                f"<= {floor_sigma} x stderr {value.stderr_re:.3g}"
            )
        value = value.mean
    value = complex(value)
    if value.real == 0.0:
        raise RatioUndefinedError("ratio undefined: Re L = 0")
    return value.imag / value.real


def ratio_R_error(result: EstimatorResult) -> float:
    """First-order (delta method) standard error of Im/Re."""
    a, b = result.mean_re, result.mean_im
    if a == 0.0:
        raise RatioUndefinedError("ratio undefined: Re L = 0")
    variance = (
        result.stderr_im ** 2 / a ** 2
        + b ** 2 * result.stderr_re ** 2 / a ** 4
        - 2.0 * b * result.cov_re_im / a ** 3
    )
    return math.sqrt(max(variance, 0.0))
