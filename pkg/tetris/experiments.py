# ============================================================================
# tetris/experiments.py - Experiment Orchestration
# ============================================================================

import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import pandas as pd

from config import Config
from tetris.analytics import optimal_angles, plan_report
from tetris.clifford_t import circuit_parse, run_circuit, t_gadget_estimate
from tetris.command_registry import registry
from tetris.estimator import RatioUndefinedError, estimate_expectation, estimate_loschmidt, ratio_R, ratio_R_error
from tetris.experiment_config import ExperimentConfig
from tetris.hamiltonian import Hamiltonian
from tetris.pauli import PauliString, as_weighted_paulis, site_average
from tetris.sampler import AngleAssignment, TetrisSampler, format_tetris
from tetris.schedules import adiabatic_field
from tetris.schemas import NoiseModel
from tetris.statevector import (
    State,
    apply_pauli,
    exact_evolve,
    exact_evolve_td,
    expectation,
    init_basis_state,
    inner_product,
    trotter_evolve,
)
from tetris.streams import STREAM_DUMP, grid_seed, sample_rng
from utils.file_handler import ResultWriter, read_text

logger = logging.getLogger(__name__)

SERIES_COLUMNS = ["t", "mean_re", "mean_im", "stderr_re", "stderr_im", "n_samples", "lambda_att", "q_att"]


def _oracle_row(t: float, value: complex) -> Dict:
    return {
        "t": t, "mean_re": value.real, "mean_im": value.imag,
        "stderr_re": 0.0, "stderr_im": 0.0, "n_samples": 0,
        "lambda_att": 1.0, "q_att": 1.0,
    }


class ExperimentRunner:
    """
    Runs one sub-command for a validated config.

        runner = ExperimentRunner(config)
        output_path = runner.run("evolve")

    Grid points are independent runs; point k uses a master seed derived
    from (config.seed, k).
    """

    def __init__(self, config: ExperimentConfig, threads: int = None):
        self.config = config
        self.threads = Config.THREADS if threads is None else threads
        self.writer = ResultWriter()

    # ----------------------
    # shared building blocks
    # ----------------------

    def hamiltonian(self, field=None) -> Hamiltonian:
        if self.config.hamiltonian is None:
            raise ValueError("config has no [hamiltonian] section")
        return self.config.hamiltonian.build(self.config.base_dir, field)

    def initial_state(self, h: Hamiltonian) -> State:
        bits = self.config.initial_state or "0" * h.n_qubits
        return init_basis_state(h.n_qubits, bits)

    def observable(self, h: Hamiltonian, t: float):
        name = self.config.observable
        if name.startswith("avg:"):
            return site_average(h.n_qubits, name[4:])
        if name == "energy":
            return h.observable(t, 1.0 / h.n_qubits)
        return as_weighted_paulis(PauliString.from_label(name))

    def noise(self, h: Hamiltonian) -> Optional[NoiseModel]:
        section = self.config.noise
        if section is None:
            return None
        rates = section.rates if section.rates is not None else [section.rate] * h.n_terms
        return NoiseModel(rates=rates, mode=section.mode, mitigate=section.mitigate)

    def angles(self, h: Hamiltonian) -> AngleAssignment:
        section = self.config.angles
        if section.mode == "explicit":
            return AngleAssignment(tuple(section.values))
        if section.mode == "optimal":
            noise = self.noise(h)
            rates = noise.rates if noise is not None else [0.0] * h.n_terms
            return optimal_angles(rates, section.method)
        return AngleAssignment.uniform(section.tau, h.n_terms)

    def header(self, command: str) -> List[str]:
        return [
            f"tetris-dynamics {Config.VERSION}",
            f"command: {command}",
            f"seed: {self.config.seed}",
            f"config_sha256: {self.config.config_hash()}",
            f"config: {self.config.canonical_json()}",
        ]

    # ----------------------
    # dispatch
    # ----------------------

    def run(self, command: str, output: Optional[str] = None) -> Path:
        target = Path(output or self.config.output)
        logger.info(f"Running '{command}' -> {target}")
        frame, kind = registry.execute(command, self)
        if kind == "json":
            return self.writer.write_text(target, json.dumps(frame, indent=2, sort_keys=True) + "\n")
        if kind == "text":
            return self.writer.write_text(target, frame)
        return self.writer.write(target, self.header(command), frame)

    # ----------------------
    # commands
    # ----------------------

    @registry.register("evolve", "Tetris estimator time series", columns=SERIES_COLUMNS)
    def evolve(self) -> Tuple[pd.DataFrame, str]:
        if self.config.observable == "loschmidt":
            return self.loschmidt()
        h = self.hamiltonian()
        angles = self.angles(h)
        noise = self.noise(h)
        background = h.select(self.config.background)
        initial = self.initial_state(h)

        rows = []
        for k, t in enumerate(self.config.time_grid.points()):
            result = estimate_expectation(
                h, self.observable(h, t), t, initial, angles, self.config.n_samples,
                noise=noise, background=background,
                master_seed=grid_seed(self.config.seed, k), threads=self.threads,
            )
            rows.append(result.csv_row())
            logger.info(f"t={t:.6g}: {result.mean_re:.6f} +- {result.stderr_re:.2g}")
        return pd.DataFrame(rows, columns=SERIES_COLUMNS), "csv"

    @registry.register("exact", "Exact oracle time series", columns=SERIES_COLUMNS)
    def exact(self) -> Tuple[pd.DataFrame, str]:
        h = self.hamiltonian()
        initial = self.initial_state(h)
        evolve = exact_evolve if h.is_constant else exact_evolve_td

        rows = []
        for t in self.config.time_grid.points():
            state = evolve(h, t, initial)
            if self.config.observable == "loschmidt":
                value = inner_product(initial, state)
            else:
                value = complex(expectation(state, self.observable(h, t)))
            rows.append(_oracle_row(t, value))
        return pd.DataFrame(rows, columns=SERIES_COLUMNS), "csv"

    @registry.register("trotter", "First-order Trotter baseline series", columns=SERIES_COLUMNS)
    def trotter(self) -> Tuple[pd.DataFrame, str]:
        h = self.hamiltonian()
        initial = self.initial_state(h)
        step = self.config.trotter.step

        rows = []
        for t in self.config.time_grid.points():
            state = trotter_evolve(h, t, step, initial)
            if self.config.observable == "loschmidt":
                value = inner_product(initial, state)
            else:
                value = complex(expectation(state, self.observable(h, t)))
            rows.append(_oracle_row(t, value))
        return pd.DataFrame(rows, columns=SERIES_COLUMNS), "csv"

    @registry.register("adiabatic", "Final energy per site vs ramp time",
                       columns=SERIES_COLUMNS + ["exact"])
    def adiabatic(self) -> Tuple[pd.DataFrame, str]:
        section = self.config.hamiltonian
        if section is None or not section.is_lattice:
            raise ValueError("'adiabatic' needs an ising2d or ising_chain Hamiltonian")
        params = self.config.adiabatic

        rows = []
        for k, ramp_time in enumerate(params.ramp_times):
            h = self.hamiltonian(adiabatic_field(params.h_final, ramp_time))
            initial = self.initial_state(h)
            energy = h.observable(ramp_time, 1.0 / h.n_qubits)
            result = estimate_expectation(
                h, energy, ramp_time, initial, self.angles(h), self.config.n_samples,
                noise=self.noise(h), background=h.select(self.config.background),
                master_seed=grid_seed(self.config.seed, k), threads=self.threads,
            )
            exact = expectation(exact_evolve_td(h, ramp_time, initial), energy)
            row = result.csv_row()
            row["exact"] = exact
            rows.append(row)
            logger.info(f"T_f={ramp_time}: {result.mean_re:.6f} +- {result.stderr_re:.2g} (exact {exact:.6f})")
        return pd.DataFrame(rows, columns=SERIES_COLUMNS + ["exact"]), "csv"

    @registry.register("loschmidt", "Loschmidt echo and R(t) series",
                       columns=SERIES_COLUMNS + ["ratio_R", "stderr_R"])
    def loschmidt(self) -> Tuple[pd.DataFrame, str]:
        h = self.hamiltonian()
        angles = self.angles(h)
        noise = self.noise(h)
        background = h.select(self.config.background)
        initial = self.initial_state(h)

        rows = []
        for k, t in enumerate(self.config.time_grid.points()):
            result = estimate_loschmidt(
                h, t, initial, angles, self.config.n_samples, noise=noise,
                master_seed=grid_seed(self.config.seed, k), background=background, threads=self.threads,
            )
            row = result.csv_row()
            try:
                row["ratio_R"] = ratio_R(result)
                row["stderr_R"] = ratio_R_error(result)
            except RatioUndefinedError as e:
                logger.warning(str(e))
                row["ratio_R"] = row["stderr_R"] = math.nan
            rows.append(row)
        return pd.DataFrame(rows, columns=SERIES_COLUMNS + ["ratio_R", "stderr_R"]), "csv"

    @registry.register("analyze", "Angles, attenuation and shot budgets (JSON)", output="json")
    def analyze(self) -> Tuple[Dict, str]:
        h = self.hamiltonian()
        params = self.config.analysis
        angles = self.angles(h) if self.config.angles.mode == "explicit" else None
        reports = [
            plan_report(h, t, params.epsilon, params.trotter_coefficient, params.rate, angles,
                        self.config.angles.method).model_dump(mode="json")
            for t in self.config.time_grid.points()
        ]
        return {
            "version": Config.VERSION,
            "seed": self.config.seed,
            "config_sha256": self.config.config_hash(),
            "config": json.loads(self.config.canonical_json()),
            "reports": reports,
        }, "json"

    @registry.register("sample", "Dump tetrises at the last grid time", output="text")
    def sample(self) -> Tuple[str, str]:
        h = self.hamiltonian()
        sampler = TetrisSampler(h, self.angles(h), h.select(self.config.background))
        t = self.config.time_grid.points()[-1]
        blocks = []
        for i in range(self.config.sample.count):
            tetris = sampler.draw(t, sample_rng(self.config.seed, STREAM_DUMP, i))
            blocks.append(format_tetris(tetris, self.config.seed, i))
        header = "".join(f"# {line}\n" for line in self.header("sample"))
        return header + "\n".join(blocks), "text"

    @registry.register("tgadget", "Clifford+T expectation via the T-gate gadget",
                       columns=SERIES_COLUMNS + ["exact_re", "exact_im"])
    def tgadget(self) -> Tuple[pd.DataFrame, str]:
        section = self.config.circuit
        if section is None:
            raise ValueError("'tgadget' needs a [circuit] section")
        circuit = circuit_parse(read_text(self.config.base_dir / section.path))
        bits = self.config.initial_state or "0" * circuit.n_qubits
        initial = init_basis_state(circuit.n_qubits, bits)
        observable = as_weighted_paulis(PauliString.from_label(self.config.observable))

        result = t_gadget_estimate(
            circuit, observable, self.config.n_samples, master_seed=self.config.seed,
            initial=initial, copies=section.copies, threads=self.threads,
        )
        final = run_circuit(circuit, initial)
        if section.copies == "two":
            exact = complex(expectation(final, observable))
        else:
            exact = sum(w * inner_product(initial, apply_pauli(final, p)) for w, p in observable)
        row = result.csv_row()
        row.update({"t": 0.0, "exact_re": exact.real, "exact_im": exact.imag})
        return pd.DataFrame([row], columns=SERIES_COLUMNS + ["exact_re", "exact_im"]), "csv"
