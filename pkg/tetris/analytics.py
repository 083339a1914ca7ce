# ============================================================================
# tetris/analytics.py - Angle Optimization and Shot Budgets
# ============================================================================

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from config import Config
from tetris.hamiltonian import Hamiltonian
from tetris.sampler import HALF_PI, AngleAssignment, attenuation_report
from tetris.schemas import NoiseModel, PlanReport, ShotEstimate

logger = logging.getLogger(__name__)

OPTIMIZER_XTOL = 1e-10


def attenuation_exponent(tau, rate: float):
    """tan(tau/2) + r/sin(tau): per-unit-weight exponent of lambda_att * q_att (up to a factor -2)."""
    tau = np.asarray(tau, dtype=float)
    return np.tan(0.5 * tau) + rate / np.sin(tau)


def optimal_angle(rate: float, method: str = "small_r", floor: float = None) -> float:
    floor = Config.FLOOR_ANGLE if floor is None else floor
    if rate < 0 or not math.isfinite(rate):
        raise ValueError(f"noise rate must be finite and non-negative, got {rate}")
    if rate == 0.0:
        return floor
    if method == "small_r":
        return min(math.sqrt(2.0 * rate), HALF_PI)
    if method == "numeric":
        result = optimize.minimize_scalar(
            lambda tau: float(attenuation_exponent(tau, rate)),
            bounds=(floor * 1e-3, HALF_PI),
            method="bounded",
            options={"xatol": OPTIMIZER_XTOL},
        )
        return float(min(result.x, HALF_PI))
    raise ValueError(f"Unknown method {method!r}; use 'small_r' or 'numeric'")


def optimal_angles(rates: Sequence[float], method: str = "small_r", floor: float = None) -> AngleAssignment:
    """tau_n* minimizing the combined attenuation for each term's noise rate."""
    cache = {}
    taus = []
    for rate in rates:
        if rate not in cache:
            cache[rate] = optimal_angle(rate, method, floor)
        taus.append(cache[rate])
    return AngleAssignment(tuple(taus))


def _total_weight(h: Hamiltonian, t: float) -> float:
    """sum_n z_n(t); equals t * sum|c_n| for constant coefficients."""
    return float(np.sum(h.integrated_weights(t)))


def shots_tetris(h: Hamiltonian, t: float, epsilon: float, rate: float) -> float:
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    exponent = 4.0 * math.sqrt(2.0 * rate) * _total_weight(h, t)
    return math.exp(exponent) / epsilon ** 2 if exponent < 709.0 else math.inf


def shots_trotter(n_terms: int, t: float, epsilon: float, coefficient: float, rate: float) -> float:
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    exponent = 2.0 * n_terms ** 2 * t ** 3 * coefficient * rate / epsilon
    return math.exp(exponent) / epsilon ** 2 if exponent < 709.0 else math.inf


def crossover_epsilon(h: Hamiltonian, n_terms: int, t: float, coefficient: float, rate: float) -> float:
    """Precision below which the tetris estimator needs exponentially fewer shots."""
    weight = _total_weight(h, t)
    if weight == 0.0:
        return math.inf
    return t ** 3 * n_terms ** 2 * coefficient * math.sqrt(rate) / (2.0 * math.sqrt(2.0) * weight)


def shot_estimate(h: Hamiltonian, t: float, epsilon: float, coefficient: float, rate: float) -> ShotEstimate:
    return ShotEstimate(
        m_tetris=shots_tetris(h, t, epsilon, rate),
        m_trotter=shots_trotter(h.n_terms, t, epsilon, coefficient, rate),
        epsilon=epsilon,
        trotter_error_coefficient=coefficient,
        crossover_epsilon=crossover_epsilon(h, h.n_terms, t, coefficient, rate),
    )


def plan_report(
    h: Hamiltonian,
    t: float,
    epsilon: float,
    coefficient: float,
    rate: float,
    angles: Optional[AngleAssignment] = None,
    method: str = "small_r",
) -> PlanReport:
    """Angles, attenuation, gate counts and shot budgets for one run."""
    if angles is None:
        angles = optimal_angles([rate] * h.n_terms, method)
    noise = NoiseModel.uniform(rate, h.n_terms)
    report = attenuation_report(h, t, angles, noise)
    shots = shot_estimate(h, t, epsilon, coefficient, rate)
    logger.info(
        f"Plan at t={t}: lambda_att={report.lambda_att:.4g}, q_att={report.q_att:.4g}, "
        f"M_tetris={shots.m_tetris:.4g}, M_trotter={shots.m_trotter:.4g}"
    )
    return PlanReport(t=t, angles=list(angles.taus), attenuation=report, shots=shots)
