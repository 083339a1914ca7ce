# ============================================================================
# utils/data_processor.py - Sample Statistics
# ============================================================================

import numpy as np
from typing import Dict, Sequence
import logging

logger = logging.getLogger(__name__)


class DataProcessor:
    """
    Statistics over Monte Carlo samples
    """

    def complex_statistics(self, samples: np.ndarray) -> Dict[str, float]:
        """
        Mean and standard errors of complex samples.

        Reduction runs in index order, so the result only depends on the
        sample values, never on how they were produced.
        """
        samples = np.asarray(samples, dtype=complex)
        n = len(samples)
        if n == 0:
            raise ValueError("No samples")

        mean = complex(np.mean(samples))
        if n > 1:
            re = samples.real
            im = samples.imag
            stderr_re = float(np.std(re, ddof=1) / np.sqrt(n))
            stderr_im = float(np.std(im, ddof=1) / np.sqrt(n))
            cov_re_im = float(np.cov(re, im, ddof=1)[0, 1] / n)
        else:
            stderr_re = stderr_im = float("nan")
            cov_re_im = float("nan")

        return {
            "mean": mean,
            "stderr_re": stderr_re,
            "stderr_im": stderr_im,
            "cov_re_im": cov_re_im,
            "count": n,
        }

    def loglog_slope(self, x: Sequence[float], y: Sequence[float]) -> float:
        """Least-squares slope of log(y) against log(x)"""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(x <= 0) or np.any(y <= 0):
            raise ValueError("log-log fit needs positive data")
        slope, _ = np.polyfit(np.log(x), np.log(y), 1)
        return float(slope)

    def within_sigma(self, estimate: float, reference: float, stderr: float, n_sigma: float = 3.0) -> bool:
        """|estimate - reference| < n_sigma * stderr (exact match when stderr is 0)"""
        if stderr == 0 or not np.isfinite(stderr):
            return bool(np.isclose(estimate, reference, rtol=0, atol=1e-12))
        return abs(estimate - reference) < n_sigma * stderr
