# ============================================================================
# tetris/schedules.py - Coefficient Schedules c_n(t)
# ============================================================================
"""
Time-dependent Hamiltonian coefficients and their integrated weight

    z(u) = integral_0^u |c(s)| ds

together with the inverse z^{-1}, which turns uniform draws on [0, z(t)] into
event times of the inhomogeneous Poisson process with rate |c(s)|.

Non-constant schedules are integrated on a fixed cell grid. Zero crossings of c
are inserted as extra grid points, so |c| is smooth inside every cell; each cell
is integrated once with adaptive quadrature and partial cells with a 16-point
Gauss-Legendre rule, which is exact to rounding for smooth integrands on such
short intervals.
"""

from __future__ import annotations

import logging
import math
from functools import cached_property
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

logger = logging.getLogger(__name__)

QUAD_ABS_TOL = 1e-10
INVERSE_REL_TOL = 1e-12
GRID_CELLS = 256

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def coefficient_sign(values) -> np.ndarray:
    """sgn(c) with sgn(0) := +1."""
    return np.where(np.asarray(values) >= 0.0, 1, -1).astype(np.int8)


class CoefficientSchedule:
    """Base class: subclasses provide ``value`` and ``horizon``."""

    horizon: float = math.inf

    def value(self, t):
        raise NotImplementedError

    def scaled(self, factor: float) -> "CoefficientSchedule":
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        return False

    def describe(self) -> Dict:
        raise NotImplementedError

    def _check_time(self, t: np.ndarray):
        if np.any(t < -1e-12) or np.any(t > self.horizon * (1 + 1e-12) + 1e-12):
            raise ValueError(
                f"time outside schedule horizon [0, {self.horizon}]: "
                f"min={float(np.min(t))}, max={float(np.max(t))}"
            )

    # -- integrated weight --------------------------------------------------

    @cached_property
    def _table(self) -> Tuple[np.ndarray, np.ndarray]:
        grid = self._cell_grid()
        cells = np.empty(len(grid) - 1)
        for k, (a, b) in enumerate(zip(grid[:-1], grid[1:])):
            cells[k], _ = integrate.quad(
                lambda s: abs(float(self.value(s))), a, b, epsabs=QUAD_ABS_TOL * 1e-2, limit=200
            )
        cumulative = np.concatenate(([0.0], np.cumsum(cells)))
        logger.debug(f"Built z-table for {self.describe()} with {len(cells)} cells")
        return grid, cumulative

    def _cell_grid(self) -> np.ndarray:
        if not math.isfinite(self.horizon):
            raise ValueError("Schedule needs a finite horizon for tabulated integration")
        base = np.unique(np.concatenate((np.linspace(0.0, self.horizon, GRID_CELLS + 1), self._knots())))
        values = np.asarray(self.value(base), dtype=float)
        roots = []
        for a, b, va, vb in zip(base[:-1], base[1:], values[:-1], values[1:]):
            if va * vb < 0.0:
                roots.append(optimize.brentq(lambda s: float(self.value(s)), a, b, xtol=1e-15))
        return np.unique(np.concatenate((base, roots)))

    def _knots(self) -> np.ndarray:
        return np.empty(0)

    def _partial(self, a: np.ndarray, s: np.ndarray) -> np.ndarray:
        """integral_a^s |c| for arrays a <= s inside one cell."""
        a = np.asarray(a, dtype=float)
        s = np.asarray(s, dtype=float)
        half = 0.5 * (s - a)
        mid = 0.5 * (s + a)
        points = mid[..., None] + half[..., None] * _GL_NODES
        return half * (np.abs(self.value(points)) @ _GL_WEIGHTS)

    def z(self, t):
        t_arr = np.asarray(t, dtype=float)
        self._check_time(t_arr)
        t_arr = np.clip(t_arr, 0.0, self.horizon)
        grid, cumulative = self._table
        cell = np.clip(np.searchsorted(grid, t_arr, side="right") - 1, 0, len(grid) - 2)
        out = cumulative[cell] + self._partial(grid[cell], t_arr)
        return float(out) if out.ndim == 0 else out

    def z_inverse(self, u):
        """
        Smallest s with z(s) = u, found by safeguarded Newton inside the cell
        that brackets u. On a flat stretch (c = 0) the left endpoint is returned.
        """
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        grid, cumulative = self._table
        total = cumulative[-1]
        tol = INVERSE_REL_TOL * max(1.0, total)
        if np.any(u_arr < -tol) or np.any(u_arr > total + tol):
            raise ValueError(f"u outside [0, {total}]")
        u_arr = np.clip(u_arr, 0.0, total)

        k = np.searchsorted(cumulative, u_arr, side="left")
        exact = cumulative[np.minimum(k, len(grid) - 1)] == u_arr
        cell = np.clip(k - 1, 0, len(grid) - 2)
        lo = grid[cell].copy()
        hi = grid[cell + 1].copy()
        base = cumulative[cell]
        width = cumulative[cell + 1] - base
        frac = np.divide(u_arr - base, width, out=np.zeros_like(u_arr), where=width > 0)
        s = lo + frac * (hi - lo)

        active = ~exact
        for _ in range(60):
            if not np.any(active):
                break
            idx = np.flatnonzero(active)
            resid = base[idx] + self._partial(grid[cell[idx]], s[idx]) - u_arr[idx]
            done = np.abs(resid) <= tol * 1e-2
            below = resid < 0
            lo[idx] = np.where(below, s[idx], lo[idx])
            hi[idx] = np.where(below, hi[idx], s[idx])
            slope = np.abs(self.value(s[idx]))
            step = np.divide(resid, slope, out=np.full_like(resid, np.inf), where=slope > 0)
            candidate = s[idx] - step
            inside = (candidate > lo[idx]) & (candidate < hi[idx])
            moved = np.where(inside, candidate, 0.5 * (lo[idx] + hi[idx]))
            s[idx] = np.where(done, s[idx], moved)
            stalled = (hi[idx] - lo[idx]) <= 1e-15 * max(1.0, self.horizon)
            active[idx[done | stalled]] = False

        s = np.where(exact, grid[np.minimum(k, len(grid) - 1)], s)
        return float(s[0]) if np.ndim(u) == 0 else s

    def sign(self, t) -> np.ndarray:
        return coefficient_sign(self.value(t))


class ConstantSchedule(CoefficientSchedule):
    def __init__(self, value: float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite coefficient {value}")
        self.constant = float(value)

    @property
    def is_constant(self) -> bool:
        return True

    def value(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.full(t_arr.shape, self.constant)
        return float(out) if out.ndim == 0 else out

    def scaled(self, factor: float) -> "ConstantSchedule":
        return ConstantSchedule(self.constant * factor)

    def z(self, t):
        t_arr = np.asarray(t, dtype=float)
        self._check_time(t_arr)
        out = abs(self.constant) * t_arr
        return float(out) if out.ndim == 0 else out

    def z_inverse(self, u):
        u_arr = np.asarray(u, dtype=float)
        if np.any(u_arr < 0):
            raise ValueError("u must be non-negative")
        if self.constant == 0.0:
            if np.any(u_arr > 0):
                raise ValueError("u outside [0, 0] for a zero coefficient")
            out = np.zeros_like(u_arr)
        else:
            out = u_arr / abs(self.constant)
        return float(out) if out.ndim == 0 else out

    def describe(self) -> Dict:
        return {"kind": "constant", "value": self.constant}

    def __repr__(self) -> str:
        return f"ConstantSchedule({self.constant!r})"


def _adiabatic(t, h_final: float, ramp_time: float):
    return h_final * np.sin(0.5 * np.pi * np.sin(np.pi * t / (2.0 * ramp_time)) ** 2) ** 2


def _ramp(t, slope: float):
    return slope * np.asarray(t, dtype=float)


def _sine(t, amplitude: float, omega: float, phase: float = 0.0):
    return amplitude * np.sin(omega * np.asarray(t, dtype=float) + phase)


ANALYTIC_FUNCTIONS: Dict[str, Callable] = {
    "adiabatic": _adiabatic,
    "ramp": _ramp,
    "sine": _sine,
}


class AnalyticSchedule(CoefficientSchedule):
    """Named closed-form schedule ``factor * f(t; **params)`` on [0, horizon]."""

    def __init__(self, name: str, horizon: float, factor: float = 1.0, **params):
        if name not in ANALYTIC_FUNCTIONS:
            raise ValueError(f"Unknown analytic schedule {name!r}; known: {sorted(ANALYTIC_FUNCTIONS)}")
        if not (horizon > 0 and math.isfinite(horizon)):
            raise ValueError(f"horizon must be positive and finite, got {horizon}")
        self.name = name
        self.horizon = float(horizon)
        self.factor = float(factor)
        self.params = dict(params)
        self._fn = ANALYTIC_FUNCTIONS[name]

    def value(self, t):
        out = self.factor * np.asarray(self._fn(np.asarray(t, dtype=float), **self.params), dtype=float)
        return float(out) if out.ndim == 0 else out

    def scaled(self, factor: float) -> "AnalyticSchedule":
        return AnalyticSchedule(self.name, self.horizon, self.factor * factor, **self.params)

    def describe(self) -> Dict:
        return {"kind": "analytic", "name": self.name, "horizon": self.horizon,
                "factor": self.factor, **self.params}

    def __repr__(self) -> str:
        return f"AnalyticSchedule({self.name!r}, horizon={self.horizon}, factor={self.factor}, {self.params})"


class TabulatedSchedule(CoefficientSchedule):
    """Knot values with ``linear`` or ``previous`` (step) interpolation."""

    def __init__(self, times: Sequence[float], values: Sequence[float], interpolation: str = "linear"):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or len(times) < 2:
            raise ValueError("need at least two knots with matching times/values")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise ValueError("knot times must start at 0 and increase strictly")
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite knot value")
        if interpolation not in ("linear", "previous"):
            raise ValueError(f"unknown interpolation {interpolation!r}")
        self.times = times
        self.values = values
        self.interpolation = interpolation
        self.horizon = float(times[-1])

    def value(self, t):
        t_arr = np.asarray(t, dtype=float)
        if self.interpolation == "linear":
            out = np.interp(t_arr, self.times, self.values)
        else:
            idx = np.clip(np.searchsorted(self.times, t_arr, side="right") - 1, 0, len(self.times) - 1)
            out = self.values[idx]
        return float(out) if np.ndim(out) == 0 else out

    def _knots(self) -> np.ndarray:
        return self.times

    def scaled(self, factor: float) -> "TabulatedSchedule":
        return TabulatedSchedule(self.times, self.values * factor, self.interpolation)

    def describe(self) -> Dict:
        return {"kind": "tabulated", "interpolation": self.interpolation,
                "times": self.times.tolist(), "values": self.values.tolist()}


def schedule_z(c: CoefficientSchedule, t: float) -> float:
    return c.z(t)


def schedule_z_inverse(c: CoefficientSchedule, u: float) -> float:
    return c.z_inverse(u)


def adiabatic_field(h_final: float, ramp_time: float) -> AnalyticSchedule:
    """h(t) = h_f sin(pi/2 sin(pi t / 2 T_f)^2)^2, rising from 0 to h_f at T_f."""
    if ramp_time <= 0:
        raise ValueError(f"T_f must be positive, got {ramp_time}")
    return AnalyticSchedule("adiabatic", ramp_time, h_final=h_final, ramp_time=ramp_time)


def linear_ramp(slope: float, horizon: float) -> AnalyticSchedule:
    return AnalyticSchedule("ramp", horizon, slope=slope)


def schedule_from_config(entry) -> CoefficientSchedule:
    """Build a schedule from a number or a ``{"kind": ...}`` mapping (config files)."""
    if isinstance(entry, (int, float)):
        return ConstantSchedule(float(entry))
    entry = dict(entry)
    kind = entry.pop("kind")
    if kind == "constant":
        return ConstantSchedule(float(entry["value"]))
    if kind == "analytic":
        name = entry.pop("name")
        horizon = entry.pop("horizon")
        factor = entry.pop("factor", 1.0)
        return AnalyticSchedule(name, horizon, factor, **entry)
    if kind == "tabulated":
        return TabulatedSchedule(entry["times"], entry["values"], entry.get("interpolation", "linear"))
    raise ValueError(f"Unknown schedule kind {kind!r}")
