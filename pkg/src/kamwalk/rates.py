"""The explicit rate calculus of the sped-up walk.

Everything here is scalar and closed-form.  The jump cumulant of the
nearest-neighbour walk is

    H(lam) = exp(lam) + exp(-lam) - 2,

its Fenchel-Legendre transform is

    L(v) = v*log((v + sqrt(v^2+4))/2) - sqrt(v^2+4) + 2,

with the supremum attained at lam_v = log((v + sqrt(v^2+4))/2), so that
H'(lam_v) = exp(lam_v) - exp(-lam_v) = v holds exactly.  L is even, convex,
superlinear and vanishes only at v = 0.

The path functionals integrate these: the free rate of a piecewise-linear
path is sum over segments of duration * L(slope) (exact, the integrand is
constant per segment), and the potential-corrected action adds
-V(path) + c per unit time, integrated with composite Gauss-Legendre
panels because V varies along a segment.

Paths carry lifted (unwrapped) real positions so slopes across the circle
seam are unambiguous; the circle projection happens only when a potential
is evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import Potential

__all__ = [
    "cumulant_H",
    "legendre_L",
    "optimal_tilt",
    "lagrangian",
    "hamiltonian",
    "PiecewisePath",
    "TiltSchedule",
    "path_rate",
    "action_functional",
]

_EXP_RANGE = 700.0

# nodes/weights of 8-point Gauss-Legendre on [0,1]
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL_NODES = (_GL_NODES + 1.0) / 2.0
_GL_WEIGHTS = _GL_WEIGHTS / 2.0


def cumulant_H(lam: float) -> float:
    """exp(lam) + exp(-lam) - 2; raises instead of silently overflowing."""
    if not math.isfinite(lam):
        raise ValueError(f"tilt must be finite, got {lam}")
    if abs(lam) > _EXP_RANGE:
        raise OverflowError(f"|tilt|={abs(lam)} exceeds the floating range")
    return math.expm1(lam) + math.expm1(-lam)


def _dual_point(v: float) -> float:
    # (v + sqrt(v^2+4))/2, evaluated without cancellation for v < 0
    r = math.sqrt(v * v + 4.0)
    return (v + r) / 2.0 if v >= 0.0 else 2.0 / (r - v)


def legendre_L(v: float) -> float:
    """Legendre transform of the jump cumulant, evaluated in closed form."""
    if not math.isfinite(v):
        raise ValueError(f"velocity must be finite, got {v}")
    r = math.sqrt(v * v + 4.0)
    return v * math.log(_dual_point(v)) - r + 2.0


def optimal_tilt(v: float) -> float:
    """The tilt attaining the supremum in the Legendre transform."""
    if not math.isfinite(v):
        raise ValueError(f"velocity must be finite, got {v}")
    return math.log(_dual_point(v))


def lagrangian(x: float, v: float, V: Potential) -> float:
    """Running cost -V(x) + L(v) of moving at velocity v through x."""
    return -float(V(x)) + legendre_L(v)


def hamiltonian(x: float, p: float, V: Potential) -> float:
    """Convex dual of the Lagrangian in v: V(x) + H(p)."""
    return float(V(x)) + cumulant_H(p)


@dataclass(frozen=True)
class PiecewisePath:
    """Continuous piecewise-linear path with lifted real positions."""

    times: np.ndarray
    positions: np.ndarray
    T: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).copy()
        x = np.asarray(self.positions, dtype=float).copy()
        if t.ndim != 1 or t.shape != x.shape or len(t) < 2:
            raise ValueError("times and positions must be equal-length 1d arrays (>= 2)")
        if t[0] != 0.0:
            raise ValueError(f"first breakpoint time must be 0, got {t[0]}")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("breakpoint times must be strictly increasing")
        if abs(t[-1] - self.T) > 1e-12:
            raise ValueError(f"last breakpoint {t[-1]} does not match horizon T={self.T}")
        t.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", x)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.positions) / np.diff(self.times)

    def __call__(self, s):
        return np.interp(s, self.times, self.positions)


@dataclass(frozen=True)
class TiltSchedule:
    """Piecewise-linear tilt lam(t) on [0,T]; same shape as a path."""

    times: np.ndarray
    values: np.ndarray
    T: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).copy()
        y = np.asarray(self.values, dtype=float).copy()
        if t.ndim != 1 or t.shape != y.shape or len(t) < 2:
            raise ValueError("times and values must be equal-length 1d arrays (>= 2)")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0.0):
            raise ValueError("times must start at 0 and increase strictly")
        if abs(t[-1] - self.T) > 1e-12:
            raise ValueError(f"last breakpoint {t[-1]} does not match horizon T={self.T}")
        if not np.all(np.isfinite(y)):
            raise ValueError("tilt values must be finite")
        t.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", y)

    @staticmethod
    def constant(lam: float, T: float) -> "TiltSchedule":
        return TiltSchedule(np.array([0.0, T]), np.array([lam, lam]), T)

    def __call__(self, s):
        return np.interp(s, self.times, self.values)

    def segments(self):
        """Yield (t0, t1, lam0, lam1) per linear piece."""
        for i in range(len(self.times) - 1):
            yield self.times[i], self.times[i + 1], self.values[i], self.values[i + 1]


def path_rate(gamma: PiecewisePath) -> float:
    """Free rate functional: integral of L(slope), exact per segment."""
    durations = np.diff(gamma.times)
    return float(sum(d * legendre_L(v) for d, v in zip(durations, gamma.slopes)))


def action_functional(gamma: PiecewisePath, V: Potential, c: float) -> float:
    """Integral of [L(slope) - V(path)] plus c*T.

    The L part is exact; the V part uses composite 8-point Gauss-Legendre
    panels, subdivided so each panel spans at most 0.1 in position.
    """
    total = c * gamma.T
    durations = np.diff(gamma.times)
    for i, (d, v) in enumerate(zip(durations, gamma.slopes)):
        total += d * legendre_L(v)
        t0, x0 = gamma.times[i], gamma.positions[i]
        panels = max(1, int(math.ceil(abs(v * d) / 0.1)), int(math.ceil(d / 0.5)))
        h = d / panels
        offsets = (np.arange(panels)[:, None] + _GL_NODES[None, :]) * h
        xs = x0 + v * offsets
        total -= h * float(np.sum(_GL_WEIGHTS[None, :] * V(xs)))
    return total
