# ============================================================================
# tetris/experiment_config.py - Experiment Configuration (TOML)
# ============================================================================

import hashlib
import json
import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from config import Config
from tetris.hamiltonian import Hamiltonian, build_ising2d, fermion_parse, hamiltonian_parse, jordan_wigner
from tetris.schedules import CoefficientSchedule, schedule_from_config
from tetris.schemas import NoiseMode
from utils.file_handler import read_text

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HamiltonianSection(_Section):
    model: Literal["ising2d", "ising_chain", "pauli_file", "fermion_file"]
    rows: int = Field(1, ge=1)
    cols: int = Field(1, ge=1)
    length: Optional[int] = Field(None, ge=1)
    h: float = 0.0
    coupling: float = 1.0
    periodic: bool = True
    # h(t) as a schedule mapping, e.g. {kind = "analytic", name = "sine", ...}
    field_schedule: Optional[Dict[str, Any]] = None
    path: Optional[str] = None

    @model_validator(mode="after")
    def _check_model(self):
        if self.model in ("pauli_file", "fermion_file") and not self.path:
            raise ValueError(f"model '{self.model}' needs 'path'")
        if self.model == "ising_chain" and self.length is None:
            raise ValueError("model 'ising_chain' needs 'length'")
        return self

    @property
    def is_lattice(self) -> bool:
        return self.model in ("ising2d", "ising_chain")

    def build(self, base_dir: Path, field: Union[float, CoefficientSchedule, None] = None) -> Hamiltonian:
        """Build H; ``field`` overrides h for the lattice models."""
        if self.model == "pauli_file":
            return hamiltonian_parse(read_text(base_dir / self.path))
        if self.model == "fermion_file":
            return jordan_wigner(fermion_parse(read_text(base_dir / self.path)))

        if field is None:
            field = schedule_from_config(self.field_schedule) if self.field_schedule else self.h
        rows, cols = (1, self.length) if self.model == "ising_chain" else (self.rows, self.cols)
        return build_ising2d(rows, cols, field, self.periodic, self.coupling)


class TimeGrid(_Section):
    start: float = Field(0.0, ge=0.0)
    stop: float = Field(1.0, ge=0.0)
    num: int = Field(11, ge=1)
    values: Optional[List[float]] = None

    @field_validator("values")
    @classmethod
    def _check_values(cls, values):
        if values is not None and (not values or any(v < 0 or not math.isfinite(v) for v in values)):
            raise ValueError("time values must be a non-empty list of non-negative numbers")
        return values

    def points(self) -> List[float]:
        if self.values is not None:
            return [float(v) for v in self.values]
        if self.num == 1:
            return [self.stop]
        step = (self.stop - self.start) / (self.num - 1)
        return [self.start + k * step for k in range(self.num)]


class AngleSection(_Section):
    mode: Literal["uniform", "optimal", "explicit"] = "uniform"
    tau: float = Field(0.04, gt=0.0, le=math.pi / 2)
    values: Optional[List[float]] = None
    method: Literal["small_r", "numeric"] = "small_r"

    @model_validator(mode="after")
    def _check_values(self):
        if self.mode == "explicit" and not self.values:
            raise ValueError("mode 'explicit' needs 'values'")
        return self


class NoiseSection(_Section):
    rate: float = Field(0.0, ge=0.0)
    rates: Optional[List[float]] = None
    mode: NoiseMode = NoiseMode.STOCHASTIC
    mitigate: bool = False


class AdiabaticSection(_Section):
    h_final: float = 2.5
    ramp_times: List[float] = [0.25, 0.5, 1.0]

    @field_validator("ramp_times")
    @classmethod
    def _positive(cls, values):
        if not values or any(v <= 0 for v in values):
            raise ValueError("ramp times must be a non-empty list of positive numbers")
        return values


class AnalysisSection(_Section):
    epsilon: float = Field(0.01, gt=0.0)
    trotter_coefficient: float = Field(1.0, ge=0.0)
    rate: float = Field(2e-3, ge=0.0)


class TrotterSection(_Section):
    step: float = Field(0.04, gt=0.0)


class SampleSection(_Section):
    count: int = Field(1, ge=1)


class CircuitSection(_Section):
    path: str
    copies: Literal["two", "single"] = "two"


class ExperimentConfig(_Section):
    """A complete, validated experiment description."""

    hamiltonian: Optional[HamiltonianSection] = None
    initial_state: Optional[str] = None
    # Pauli label, "avg:<letter>", "energy" or "loschmidt"
    observable: str = "avg:Z"
    time_grid: TimeGrid = TimeGrid()
    angles: AngleSection = AngleSection()
    noise: Optional[NoiseSection] = None
    n_samples: int = Field(1000, gt=0)
    background: Union[str, List[int]] = "none"
    seed: int = Field(Config.DEFAULT_SEED, ge=0, lt=2 ** 64)
    output: str = "results/output.csv"
    adiabatic: AdiabaticSection = AdiabaticSection()
    analysis: AnalysisSection = AnalysisSection()
    trotter: TrotterSection = TrotterSection()
    sample: SampleSection = SampleSection()
    circuit: Optional[CircuitSection] = None

    _base_dir: Path = PrivateAttr(default=Path("."))

    @field_validator("initial_state")
    @classmethod
    def _check_bits(cls, bits):
        if bits is not None and (not bits or set(bits) - {"0", "1"}):
            raise ValueError("initial_state must be a bitstring of 0s and 1s")
        return bits

    @property
    def base_dir(self) -> Path:
        return self._base_dir

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def load_config(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Read a TOML file and validate it. ``overrides`` (e.g. from CLI flags)
    replace top-level keys before validation. Raises pydantic.ValidationError.
    """
    path = Path(path)
    with open(path, "rb") as handle:
        data = tomllib.load(handle)
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    config = ExperimentConfig.model_validate(data)
    config._base_dir = path.parent
    logger.info(f"Loaded config {path} (sha256 {config.config_hash()[:12]})")
    return config
