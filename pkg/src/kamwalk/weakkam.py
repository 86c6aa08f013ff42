"""Critical value, Mane potential, weak KAM solutions and the deviation function.

With Hamiltonian H(x,p) = V(x) + e^p + e^-p - 2 and critical value
c = max V, the stationary Hamilton-Jacobi equation H(x, u') = c pins the
slope magnitude

    g(x) = arccosh(1 + (c - V(x))/2),

the nonnegative momentum solving e^p + e^-p - 2 = c - V(x).  The Mane
potential between two circle points is the cheaper of the two arc
integrals of g, the weak KAM solutions are its one-sided sections through
the maximizer x0,

    u_minus(x) = Phi(x0, x),   u_plus(x) = Phi(x, x0),

(equal here because the velocity cost is even), and the deviation
function governing the concentration of the Gibbs stationary laws is
I = u_plus + u_minus, nonnegative, vanishing at x0, with a single kink at
the antipodal cut where the two arcs tie.

A Lax-Oleinik value iteration provides an independent route to the same
objects: dynamic programming over short time steps with a discrete
velocity fan, run to its additive fixed point.  Note that the forward
(sup) semigroup fixes the negative Mane profile const - Phi(.,x0), the
mirror image of u_plus through the evenness of the cost; the fixed-point
driver therefore iterates the backward (inf) operator, whose fixed point
is the + representative the deviation function is built from.

Constant potentials are degenerate but harmless (g vanishes identically,
every solution is constant); any other potential without a unique
maximizer is refused rather than guessing a selection.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import IterationLimitError, UnsupportedConfigError
from .lattice import Potential
from .rates import legendre_L

__all__ = [
    "WeakKamSolution",
    "DeviationFunction",
    "critical_value",
    "momentum_profile",
    "mane_potential",
    "peierls_barrier",
    "weak_kam_minus",
    "weak_kam_plus",
    "lax_oleinik_apply",
    "lax_oleinik_fixed_point",
    "deviation_function",
    "hj_residual",
]

_DOMAIN_GUARD = 1e-9

# nodes/weights of 8-point Gauss-Legendre on [0,1]
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL_NODES = (_GL_NODES + 1.0) / 2.0
_GL_WEIGHTS = _GL_WEIGHTS / 2.0


@dataclass(frozen=True)
class WeakKamSolution:
    """A weak KAM solution sampled on the uniform n-point grid."""

    n: int
    values: np.ndarray
    sign: str
    c: float
    kink_locations: Tuple[float, ...]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.n) / self.n


@dataclass(frozen=True)
class DeviationFunction:
    """Rate function for the concentration of the Gibbs stationary laws."""

    n: int
    values: np.ndarray
    minimizer: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.n) / self.n


def critical_value(V: Potential) -> float:
    """max V: closed form for symbolic kinds, golden-refined for tables."""
    return V.max_value()


def _require_unique_max(V: Potential) -> float:
    if V.is_constant():
        return 0.0  # degenerate: every point is static, x0 is arbitrary
    if not V.unique_max():
        raise UnsupportedConfigError(
            "potential has several maximizers; weak KAM selection is not supported"
        )
    return V.argmax()


def _g_values(V: Potential, x: np.ndarray, c: float) -> np.ndarray:
    w = c - np.asarray(V(x), dtype=float)
    if np.any(w < -_DOMAIN_GUARD):
        raise ValueError(
            f"potential exceeds its critical value by {-w.min():.2e}; "
            "inconsistent critical value"
        )
    return np.arccosh(1.0 + np.maximum(w, 0.0) / 2.0)


def momentum_profile(V: Potential, n: int) -> np.ndarray:
    """The slope field g >= 0 on the n-point grid; vanishes at maximizers."""
    if n < 16:
        raise ValueError(f"momentum profile needs n >= 16, got {n}")
    c = critical_value(V)
    return _g_values(V, np.arange(n) / n, c)


def _integrate_g(V: Potential, c: float, a: float, b: float, n: int) -> float:
    """Integral of g over [a, b] (lifted reals), composite 8-point panels."""
    if b <= a:
        return 0.0
    panels = max(16, int(math.ceil((b - a) * max(n, 64))))
    h = (b - a) / panels
    xs = a + (np.arange(panels)[:, None] + _GL_NODES[None, :]) * h
    return h * float(np.sum(_GL_WEIGHTS[None, :] * _g_values(V, xs, c)))


def mane_potential(x: float, y: float, V: Potential, n: int = 4096) -> float:
    """Minimal action between x and y: the cheaper arc integral of g.

    Symmetric in (x, y) because the two arcs swap roles; zero iff the two
    points coincide or g vanishes along an arc between them.
    """
    x, y = x % 1.0, y % 1.0
    c = critical_value(V)
    lo, hi = min(x, y), max(x, y)
    inner = _integrate_g(V, c, lo, hi, n)
    outer = _integrate_g(V, c, hi, lo + 1.0, n)
    return min(inner, outer)


def peierls_barrier(x: float, y: float, V: Potential, n: int = 4096) -> float:
    """Asymptotic connection cost routed through the unique static point."""
    x0 = _require_unique_max(V)
    return mane_potential(x, x0, V, n) + mane_potential(x0, y, V, n)


def _cumulative_momentum(V: Potential, n: int, refine: int = 4):
    """Trapezoid cumulative of g on a refine*n grid over [0, 1]."""
    c = critical_value(V)
    M = refine * n
    g = _g_values(V, np.arange(M + 1) / M, c)
    G = np.concatenate([[0.0], np.cumsum((g[1:] + g[:-1]) / (2.0 * M))])
    return G, float(G[-1]), M


def _one_sided_profile(V: Potential, n: int):
    """min(R, total - R) with R the rightward integral of g from x0.

    Returns (values, x0, cut, c); values is zero at x0 and kinks only at
    the cut point where the two arc integrals tie.
    """
    c = critical_value(V)
    x0 = _require_unique_max(V)
    if V.is_constant():
        return np.zeros(n), x0, None, float(V(0.0))
    G, total, M = _cumulative_momentum(V, n)
    Gx0 = float(np.interp(x0, np.arange(M + 1) / M, G))
    R = (G[: M : M // n] - Gx0) % total
    values = np.minimum(R, total - R)
    # cut point: circular crossing of R through total/2, scanned away from x0
    Rr = (G[:-1] - Gx0) % total
    start = (int(math.floor(x0 * M)) + 1) % M
    order = (np.arange(M) + start) % M
    Rc = Rr[order]
    idx = int(np.searchsorted(Rc, total / 2.0, side="left"))
    idx = min(max(idx, 1), M - 1)
    j0, j1 = order[idx - 1], order[idx]
    r0, r1 = Rc[idx - 1], Rc[idx]
    frac = 0.0 if r1 == r0 else (total / 2.0 - r0) / (r1 - r0)
    cut = ((j0 + frac * ((j1 - j0) % M)) / M) % 1.0
    return values, x0, cut, c


def weak_kam_minus(V: Potential, n: int) -> WeakKamSolution:
    """u_minus(x) = Phi(x0, x), normalized to minimum zero."""
    values, x0, cut, c = _one_sided_profile(V, n)
    values = values - values.min()
    kinks = () if cut is None else (cut,)
    return WeakKamSolution(n=n, values=values, sign="-", c=c, kink_locations=kinks)


def weak_kam_plus(V: Potential, n: int) -> WeakKamSolution:
    """u_plus(x) = Phi(x, x0); coincides with u_minus by evenness of the cost."""
    sol = weak_kam_minus(V, n)
    return WeakKamSolution(
        n=n, values=sol.values, sign="+", c=sol.c, kink_locations=sol.kink_locations
    )


def deviation_function(V: Potential, n: int) -> DeviationFunction:
    """I = u_plus + u_minus, shifted to minimum zero, vanishing at x0."""
    minus = weak_kam_minus(V, n)
    plus = weak_kam_plus(V, n)
    vals = minus.values + plus.values
    vals = vals - vals.min()
    x0 = 0.0 if V.is_constant() else V.argmax()
    return DeviationFunction(n=n, values=vals, minimizer=x0)


# -- Lax-Oleinik dynamic programming ----------------------------------------


class _DpKernel:
    """Precomputed one-step DP data for a fixed (V, n, dt, velocity fan).

    One step moves mass along straight segments x -> x +/- v*dt, scoring
    the exact velocity cost L(v)*dt and the trapezoid potential integral
    dt*(V(start) + V(end))/2.  Landing points are evaluated by periodic
    linear interpolation (precomputed integer shift + fraction).
    """

    def __init__(self, V: Potential, n: int, dt: float, v_max: float, m: int):
        if m < 3 or m % 2 == 0:
            raise ValueError(f"velocity samples m must be odd and >= 3, got {m}")
        self.n, self.dt, self.v_max, self.m = n, dt, v_max, m
        x = np.arange(n) / n
        vel = np.linspace(-v_max, v_max, m)
        offs = vel * dt * n
        self.j0 = np.floor(offs).astype(int)
        self.frac = offs - self.j0
        self.cost = np.array([legendre_L(v) for v in vel]) * dt
        Vx = np.asarray(V(x), dtype=float)
        pos = (x[None, :] + vel[:, None] * dt) % 1.0
        self.pot = 0.5 * dt * (Vx[None, :] + np.asarray(V(pos), dtype=float))

    def _landed(self, u: np.ndarray, i: int) -> np.ndarray:
        j0, fr = self.j0[i], self.frac[i]
        return (1.0 - fr) * np.roll(u, -j0) + fr * np.roll(u, -(j0 + 1))

    def step_plus(self, u: np.ndarray) -> np.ndarray:
        """sup_v [u(x + v dt) - L(v) dt + int V]."""
        best = None
        for i in range(self.m):
            cand = self._landed(u, i) - self.cost[i] + self.pot[i]
            best = cand if best is None else np.maximum(best, cand)
        return best

    def step_minus(self, u: np.ndarray) -> np.ndarray:
        """inf_v [u(x - v dt) + L(v) dt - int V]; mirror fan, same tables."""
        best = None
        for i in range(self.m):
            cand = self._landed(u, self.m - 1 - i) + self.cost[i] - self.pot[self.m - 1 - i]
            best = cand if best is None else np.minimum(best, cand)
        return best


def _dp_defaults(V: Potential, n: int, dt: float, v_max, m):
    c = critical_value(V)
    lipschitz = float(np.arccosh(1.0 + (c - V.min_value()) / 2.0))
    if v_max is None:
        v_max = 2.0 * lipschitz + 1.0
    if m is None:
        m = 2 * int(math.ceil(v_max * dt * n)) + 1
        m = max(m, 9)
    clipped = v_max < lipschitz
    return v_max, m, clipped


def lax_oleinik_apply(
    u,
    t: float,
    direction: str,
    V: Potential,
    v_max: Optional[float] = None,
    m: Optional[int] = None,
) -> np.ndarray:
    """Apply the time-t Lax-Oleinik operator to a fine-grid function.

    direction "+" is the forward sup semigroup (terminal payoff u(path
    end), running reward V - L), direction "-" the backward inf semigroup
    (initial payoff, running cost L - V).  [0, t] is split into steps of
    at most 0.01.  A v_max below the Lipschitz bound of the true solution
    clips the fan; that raises a warning since the optimum may be cut off.
    """
    if t <= 0.0:
        raise ValueError(f"time must be positive, got {t}")
    if direction not in ("+", "-"):
        raise ValueError(f"direction must be '+' or '-', got {direction!r}")
    u = np.asarray(u, dtype=float)
    n = len(u)
    steps = max(1, int(math.ceil(t / 0.01)))
    dt = t / steps
    v_max, m, clipped = _dp_defaults(V, n, dt, v_max, m)
    if clipped:
        warnings.warn(
            f"v_max={v_max} is below the solution's Lipschitz bound; "
            "the optimization window may clip the optimum",
            RuntimeWarning,
        )
    kern = _DpKernel(V, n, dt, v_max, m)
    step = kern.step_plus if direction == "+" else kern.step_minus
    out = u.copy()
    for _ in range(steps):
        out = step(out)
    return out


def lax_oleinik_fixed_point(
    V: Potential,
    n: int,
    tol: float = 1e-8,
    dt: float = 0.005,
    v_max: Optional[float] = None,
    m: Optional[int] = None,
    max_sweeps: int = 60000,
):
    """Additive fixed point of the backward Lax-Oleinik step.

    Iterates u <- T_dt u + c_est*dt with c_est the mean decrement per unit
    time, re-centering to minimum zero each sweep; stops once successive
    iterates agree within tol in sup norm.  Returns (values, c_est); the
    drift estimate converges to the critical value as the grids refine.
    """
    v_max, m, _ = _dp_defaults(V, n, dt, v_max, m)
    kern = _DpKernel(V, n, dt, v_max, m)
    u = np.zeros(n)
    c_est = 0.0
    for _ in range(max_sweeps):
        w = kern.step_minus(u)
        c_est = float(np.mean(u - w)) / dt
        w -= w.min()
        gap = float(np.max(np.abs(w - u)))
        u = w
        if gap <= tol:
            return u, c_est
    raise IterationLimitError(
        f"Lax-Oleinik iteration stalled: sup-change {gap:.3e} after "
        f"{max_sweeps} sweeps (tol {tol})",
        residual=gap,
        iterations=max_sweeps,
    )


def hj_residual(values: np.ndarray, V: Potential, c: float, kinks=(), exclude: int = 5) -> float:
    """Max |H(x, u') - c| by central differences, masking near-kink points."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    slope = (np.roll(values, -1) - np.roll(values, 1)) * n / 2.0
    res = np.abs(np.asarray(V(np.arange(n) / n), dtype=float)
                 + np.exp(slope) + np.exp(-slope) - 2.0 - c)
    mask = np.ones(n, dtype=bool)
    for kx in kinks:
        center = int(round(kx * n))
        for d in range(-exclude, exclude + 1):
            mask[(center + d) % n] = False
    return float(res[mask].max())
