# ============================================================================
# tetris/schemas.py - Result and Parameter Models
# ============================================================================

import math
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator


class MixingParams(BaseModel):
    """Fire a tau gate with probability p to realize lambda * e^{i tau_target O}."""

    model_config = ConfigDict(frozen=True)

    p: float = Field(ge=0.0, le=1.0)
    tau: float
    tau_target: float
    attenuation: float = Field(gt=0.0, le=1.0)


class AttenuationReport(BaseModel):
    """
    Predicted attenuation of a tetris pair. The log fields stay finite when
    lambda_att or q_att underflow to 0.0 for long evolution times.
    """

    model_config = ConfigDict(frozen=True)

    lambda_att: float = Field(ge=0.0, le=1.0)
    q_att: float = Field(default=1.0, ge=0.0, le=1.0)
    log_lambda_att: float = Field(default=0.0, le=0.0)
    log_q_att: float = Field(default=0.0, le=0.0)
    expected_gates: float = Field(ge=0.0)
    z_values: List[float] = []
    background: List[int] = []

    @model_validator(mode="before")
    @classmethod
    def _fill_logs(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            for name in ("lambda_att", "q_att"):
                value = data.get(name, 1.0)
                if data.get(f"log_{name}") is None:
                    data[f"log_{name}"] = math.log(value) if value > 0 else -math.inf
        return data

    @property
    def underflows(self) -> bool:
        return self.lambda_att == 0.0

    @computed_field
    @property
    def expected_gates_pair(self) -> float:
        """Mean gate count of the (T, T') pair that makes up one sample."""
        return 2.0 * self.expected_gates


class NoiseMode(str, Enum):
    DETERMINISTIC = "deterministic"
    STOCHASTIC = "stochastic"


class NoiseModel(BaseModel):
    """
    Per-term attenuation rates r_n. In deterministic mode each applied gate
    multiplies the sample by e^{-r_n}. In stochastic mode, with probability
    p = 1 - e^{-r_n} after each gate, the state is hit by a uniformly random
    Pauli on the gate's support (identity included) times a random sign +-1.
    """

    model_config = ConfigDict(frozen=True)

    rates: List[float]
    mode: NoiseMode = NoiseMode.STOCHASTIC
    mitigate: bool = False

    @field_validator("rates")
    @classmethod
    def _check_rates(cls, rates: List[float]) -> List[float]:
        bad = [r for r in rates if not (math.isfinite(r) and r >= 0.0)]
        if bad:
            raise ValueError(f"rates must be finite and non-negative, got {bad}")
        return rates

    @classmethod
    def uniform(cls, rate: float, n_terms: int, **kwargs) -> "NoiseModel":
        return cls(rates=[rate] * n_terms, **kwargs)

    @property
    def error_probabilities(self) -> List[float]:
        return [-math.expm1(-r) for r in self.rates]


class EstimatorResult(BaseModel):
    """
    Monte Carlo estimate after dividing out the known attenuation.

    ``scale`` is the divisor applied to the raw sample mean (lambda_att, times
    q_att when mitigating; square roots of both for single-copy estimators).
    Standard errors and the re/im covariance are reported for the divided mean.
    """

    kind: str = "expectation"
    t: float = 0.0
    mean_re: float
    mean_im: float
    stderr_re: float
    stderr_im: float
    cov_re_im: float = 0.0
    raw_mean_re: float
    raw_mean_im: float
    n_samples: int = Field(gt=0)
    scale: float = Field(gt=0.0)
    report: AttenuationReport
    mean_gates: Optional[float] = None

    @property
    def mean(self) -> complex:
        return complex(self.mean_re, self.mean_im)

    @property
    def stderr(self) -> float:
        return self.stderr_re

    @property
    def raw_stderr_re(self) -> float:
        return self.stderr_re * self.scale

    @property
    def raw_stderr_im(self) -> float:
        return self.stderr_im * self.scale

    def csv_row(self) -> dict:
        return {
            "t": self.t,
            "mean_re": self.mean_re,
            "mean_im": self.mean_im,
            "stderr_re": self.stderr_re,
            "stderr_im": self.stderr_im,
            "n_samples": self.n_samples,
            "lambda_att": self.report.lambda_att,
            "q_att": self.report.q_att,
        }


class ShotEstimate(BaseModel):
    """Shot counts needed for precision epsilon (tetris vs first-order Trotter)."""

    m_tetris: float = Field(gt=0.0)
    m_trotter: float = Field(gt=0.0)
    epsilon: float = Field(gt=0.0)
    trotter_error_coefficient: float = Field(ge=0.0)
    crossover_epsilon: Optional[float] = None

    @computed_field
    @property
    def log_advantage(self) -> float:
        """log(M_Trotter / M_Tetris); positive where the tetris estimator wins."""
        return math.log(self.m_trotter) - math.log(self.m_tetris)


class PlanReport(BaseModel):
    """Everything the ``analyze`` command reports for one evolution time."""

    t: float
    angles: List[float]
    attenuation: AttenuationReport
    shots: ShotEstimate
