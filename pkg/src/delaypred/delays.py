"""Time-varying delay functions and their admissibility checks.

A delay D(t) enters the plant through the delay time phi(t) = t - D(t).
The controller is well posed when, uniformly on the interval of interest,

    D(t) >= pi0* > 0          (strictly positive delay)
    D(t) <= 1/pi1*            (bounded delay)
    phi'(t) >= pi2* > 0       (phi invertible, horizon finite)
    phi'(t) <= 1/pi3*         (bounded rate)

The oscillatory family used throughout is

    D(t) = a + b/(1+t) + alpha*sin(omega*t + varphi)

with analytic first and second derivatives, which the ODE-based horizon
integrators consume directly (never finite differences).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

from .errors import RejectionLimitExceeded
from .rng import SplitMix64


@runtime_checkable
class DelayFunction(Protocol):
    """Anything exposing D, D' and D'' on scalars or arrays."""

    def value(self, t): ...

    def slope(self, t): ...

    def curvature(self, t): ...


@dataclass(frozen=True)
class DelayParams:
    """Oscillatory delay D(t) = a + b/(1+t) + alpha*sin(omega*t + varphi).

    Only defined for t > -1 when b != 0 (the 1/(1+t) term has a pole);
    all admissibility checks run on t >= 0.
    """

    a: float
    b: float
    alpha: float
    omega: float
    varphi: float

    def value(self, t):
        t = np.asarray(t, dtype=float)
        out = self.a + self.b / (1.0 + t) + self.alpha * np.sin(self.omega * t + self.varphi)
        return out if out.ndim else float(out)

    def slope(self, t):
        t = np.asarray(t, dtype=float)
        out = -self.b / (1.0 + t) ** 2 + self.alpha * self.omega * np.cos(self.omega * t + self.varphi)
        return out if out.ndim else float(out)

    def curvature(self, t):
        t = np.asarray(t, dtype=float)
        out = 2.0 * self.b / (1.0 + t) ** 3 - self.alpha * self.omega ** 2 * np.sin(self.omega * t + self.varphi)
        return out if out.ndim else float(out)

    def as_row(self) -> np.ndarray:
        return np.array([self.a, self.b, self.alpha, self.omega, self.varphi], dtype=float)

    @classmethod
    def from_row(cls, row) -> "DelayParams":
        a, b, alpha, omega, varphi = (float(x) for x in row)
        return cls(a, b, alpha, omega, varphi)


@dataclass(frozen=True)
class LinearDelay:
    """Test stub D(t) = c + m*t; phi is affine, the horizon has a closed form."""

    c: float
    m: float

    def value(self, t):
        t = np.asarray(t, dtype=float)
        out = self.c + self.m * t
        return out if out.ndim else float(out)

    def slope(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.m)
        return out if out.ndim else float(out)

    def curvature(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        return out if out.ndim else float(out)


class TabulatedDelay:
    """Escape hatch for tests: D given by samples on a uniform grid.

    Values interpolate linearly; derivatives come from central finite
    differences on the table (one-sided at the edges), so anything
    consuming analytic derivatives sees O(step^2) surrogates.
    """

    def __init__(self, times, values):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ValueError("times/values must be matching 1-D arrays")
        if self.times.size < 3:
            raise ValueError("need at least 3 samples")
        self._d1 = np.gradient(self.values, self.times)
        self._d2 = np.gradient(self._d1, self.times)

    def value(self, t):
        out = np.interp(t, self.times, self.values)
        return out if np.ndim(t) else float(out)

    def slope(self, t):
        out = np.interp(t, self.times, self._d1)
        return out if np.ndim(t) else float(out)

    def curvature(self, t):
        out = np.interp(t, self.times, self._d2)
        return out if np.ndim(t) else float(out)


def phi(delay: DelayFunction, t):
    """Delay time phi(t) = t - D(t)."""
    return np.asarray(t, dtype=float) - delay.value(t) if np.ndim(t) else t - delay.value(t)


def phi_slope(delay: DelayFunction, t):
    return 1.0 - delay.slope(t)


@dataclass(frozen=True)
class AssumptionReport:
    """Grid-scan admissibility constants for one delay on [0, t_end]."""

    pi0_star: float            # min D
    pi1_star: float            # 1 / max D
    pi2_star: float            # min phi'
    pi3_star: float            # 1 / max phi'
    valid: bool
    first_violation_time: float | None
    t_end: float
    grid_step: float

    @property
    def psi_min(self) -> float:
        return self.pi0_star

    @property
    def psi_max(self) -> float:
        return 1.0 / self.pi1_star

    @staticmethod
    def combine(*reports: "AssumptionReport") -> "AssumptionReport":
        """Uniform constants over several delays (elementwise worst case)."""
        first_bad = [r.first_violation_time for r in reports if r.first_violation_time is not None]
        return AssumptionReport(
            pi0_star=min(r.pi0_star for r in reports),
            pi1_star=min(r.pi1_star for r in reports),
            pi2_star=min(r.pi2_star for r in reports),
            pi3_star=min(r.pi3_star for r in reports),
            valid=all(r.valid for r in reports),
            first_violation_time=min(first_bad) if first_bad else None,
            t_end=min(r.t_end for r in reports),
            grid_step=max(r.grid_step for r in reports),
        )


def check_assumptions(delay: DelayFunction, t_end: float = 12.0,
                      grid_step: float = 1e-3) -> AssumptionReport:
    """Scan D and phi' = 1 - D' on a uniform grid over [0, t_end].

    A grid scan can miss violations between nodes for adversarial inputs;
    1e-3 against the sampled family's curvature bounds is conservative.
    """
    ts = np.arange(0.0, t_end + grid_step / 2, grid_step)
    d = np.asarray(delay.value(ts), dtype=float)
    ps = 1.0 - np.asarray(delay.slope(ts), dtype=float)

    d_min = float(d.min())
    d_max = float(d.max())
    ps_min = float(ps.min())
    ps_max = float(ps.max())

    bad = (d <= 0.0) | (ps <= 0.0)
    valid = not bool(bad.any())
    first_violation = None if valid else float(ts[int(np.argmax(bad))])

    return AssumptionReport(
        pi0_star=d_min,
        pi1_star=(1.0 / d_max) if d_max > 0 else math.nan,
        pi2_star=ps_min,
        pi3_star=(1.0 / ps_max) if ps_max > 0 else math.nan,
        valid=valid,
        first_violation_time=first_violation,
        t_end=float(t_end),
        grid_step=float(grid_step),
    )


@dataclass(frozen=True)
class ParamRanges:
    """Uniform sampling boxes for the oscillatory family."""

    a: tuple = (0.2, 3.0)
    b: tuple = (0.0, 10.0)
    alpha: tuple = (-0.3, 0.3)
    omega: tuple = (0.2, 3.0)
    varphi: tuple = (0.0, 2.0 * math.pi)


DEFAULT_RANGES = ParamRanges()

REJECTION_CAP = 10_000


def sample_delay(seed: int, ranges: ParamRanges = DEFAULT_RANGES,
                 horizon: float = 12.0, grid_step: float = 1e-3,
                 max_attempts: int = REJECTION_CAP) -> tuple[DelayParams, int]:
    """Draw an admissible DelayParams; returns (params, rejection count).

    The draw order (a, b, alpha, omega, varphi) and the SplitMix64 stream
    are part of the reproducibility contract; a rejected attempt consumes
    exactly five uniforms.
    """
    rng = SplitMix64(seed)
    for attempt in range(max_attempts):
        p = DelayParams(
            a=rng.uniform(*ranges.a),
            b=rng.uniform(*ranges.b),
            alpha=rng.uniform(*ranges.alpha),
            omega=rng.uniform(*ranges.omega),
            varphi=rng.uniform(*ranges.varphi),
        )
        if check_assumptions(p, horizon, grid_step).valid:
            return p, attempt
    raise RejectionLimitExceeded(
        f"no admissible delay in {max_attempts} attempts (seed {seed}); "
        "ranges likely force phi' <= 0")


@dataclass(frozen=True)
class DelayPair:
    """Input delay d1 and measurement delay d2 for one scenario."""

    d1: DelayFunction
    d2: DelayFunction

    def reports(self, t_end: float = 12.0, grid_step: float = 1e-3):
        return (check_assumptions(self.d1, t_end, grid_step),
                check_assumptions(self.d2, t_end, grid_step))


# Delay pair of the bundled "fig2" demo scenario (see configs/fig2.cfg).
DEMO_D1 = DelayParams(a=0.4, b=0.31, alpha=-0.10, omega=4.95, varphi=0.95)
DEMO_D2 = DelayParams(a=0.28, b=0.15, alpha=-0.06, omega=1.28, varphi=0.82)
