# ============================================================================
# config.py - Configuration Management
# ============================================================================

import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    # Logging
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

    # Sampling
    THREADS = int(os.getenv("TETRIS_THREADS", "1"))
    DEFAULT_SEED = int(os.getenv("TETRIS_DEFAULT_SEED", "0"))

    # Oracle limits
    DENSE_MAX_QUBITS = int(os.getenv("TETRIS_DENSE_MAX_QUBITS", "10"))
    KRYLOV_MAX_QUBITS = int(os.getenv("TETRIS_KRYLOV_MAX_QUBITS", "14"))
    KRYLOV_TOL = float(os.getenv("TETRIS_KRYLOV_TOL", "1e-10"))
    ODE_RTOL = float(os.getenv("TETRIS_ODE_RTOL", "1e-10"))

    # Noiseless optimum is tau -> 0; this keeps circuits finite
    FLOOR_ANGLE = float(os.getenv("TETRIS_FLOOR_ANGLE", "1e-4"))

    VERSION = "1.0.0"

    @classmethod
    def validate(cls):
        """Validate that process settings are usable"""
        problems = []
        if cls.LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            problems.append(f"LOG_LEVEL={cls.LOG_LEVEL}")
        if cls.THREADS < 1:
            problems.append(f"TETRIS_THREADS={cls.THREADS}")
        if not 1 <= cls.DENSE_MAX_QUBITS <= cls.KRYLOV_MAX_QUBITS:
            problems.append(
                f"TETRIS_DENSE_MAX_QUBITS={cls.DENSE_MAX_QUBITS} / "
                f"TETRIS_KRYLOV_MAX_QUBITS={cls.KRYLOV_MAX_QUBITS}"
            )
        if not 0 < cls.KRYLOV_TOL < 1 or not 0 < cls.ODE_RTOL < 1:
            problems.append("tolerances must lie in (0, 1)")
        if not 0 < cls.FLOOR_ANGLE <= 1.5707963267948966:
            problems.append(f"TETRIS_FLOOR_ANGLE={cls.FLOOR_ANGLE}")

        if problems:
            raise ValueError(f"Invalid config: {', '.join(problems)}")

        return True
