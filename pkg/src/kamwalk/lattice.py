"""Circle lattices, potentials, grid functions and walk generators.

The state space is the uniform lattice with k sites j/k embedded in the
circle [0,1).  The free walk jumps to each neighbour at rate 1 (total
rate 2), so its generator is the circulant tridiagonal matrix with -2 on
the diagonal and 1 on the two off-diagonals, corners included.  Potentials
are 1-periodic functions on the circle; restricting one to the lattice and
adding it (scaled by k) to the sped-up generator k*L produces the
Schroedinger-type matrix k*L + k*diag(V) that the Perron solver consumes.

Storage convention for circulant tridiagonal matrices: three length-k
arrays diag/up/down, where up[j] couples site j to (j+1) mod k and down[j]
couples j to (j-1) mod k.  The periodic corner entries are up[k-1] and
down[0].  For k = 2 the two couplings of a row land on the same column and
are summed when the matrix is materialized.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidLatticeError, InvalidResolutionError

__all__ = [
    "Potential",
    "Lattice",
    "GridFunction",
    "GeneratorMatrix",
    "parse_potential",
    "build_generator",
    "restrict_potential",
    "schrodinger_matrix",
    "nearest_site",
    "extend_profile",
]

_PROB_TOL = 1e-12


@functools.lru_cache(maxsize=64)
def _periodic_spline(samples: Tuple[float, ...]) -> CubicSpline:
    ys = np.asarray(samples, dtype=float)
    xs = np.arange(len(ys) + 1) / len(ys)
    return CubicSpline(xs, np.append(ys, ys[0]), bc_type="periodic")


@dataclass(frozen=True)
class Potential:
    """A 1-periodic potential on the circle.

    kind is one of "cosine", "shifted-cosine", "smooth-bump", "tabulated".
    params holds (amplitude, phase) for the cosine kinds and
    (center, width, height) for the bump; tabulated potentials carry their
    uniformly spaced samples and are evaluated with a periodic cubic
    spline (the minimal standard rule that keeps them C^2).
    """

    kind: str
    params: Tuple[float, ...] = ()
    samples: Optional[Tuple[float, ...]] = None

    @staticmethod
    def cosine(amplitude: float = 1.0, phase: float = 0.0) -> "Potential":
        kind = "cosine" if (amplitude == 1.0 and phase == 0.0) else "shifted-cosine"
        return Potential(kind, (float(amplitude), float(phase)))

    @staticmethod
    def bump(center: float, width: float, height: float) -> "Potential":
        if not (0.0 < width < 0.5):
            raise ValueError(f"bump width must lie in (0, 0.5), got {width}")
        return Potential("smooth-bump", (float(center) % 1.0, float(width), float(height)))

    @staticmethod
    def tabulated(samples) -> "Potential":
        vals = tuple(float(v) for v in samples)
        if len(vals) < 3:
            raise ValueError("tabulated potential needs at least 3 samples")
        return Potential("tabulated", (), vals)

    @staticmethod
    def constant(value: float) -> "Potential":
        return Potential.tabulated((value,) * 4)

    def __call__(self, x):
        x = np.asarray(x, dtype=float) % 1.0
        if self.kind in ("cosine", "shifted-cosine"):
            a, phase = self.params
            out = a * np.cos(2.0 * np.pi * (x - phase))
        elif self.kind == "smooth-bump":
            center, width, height = self.params
            d = np.abs(x - center)
            d = np.minimum(d, 1.0 - d)
            r2 = (d / width) ** 2
            out = np.zeros_like(x)
            inside = r2 < 1.0
            out[inside] = height * np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        elif self.kind == "tabulated":
            out = _periodic_spline(self.samples)(x)
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if out.ndim == 0:
            return float(out)
        return out

    # -- maximizer metadata -------------------------------------------------

    def is_constant(self) -> bool:
        if self.kind in ("cosine", "shifted-cosine"):
            return self.params[0] == 0.0
        if self.kind == "smooth-bump":
            return self.params[2] == 0.0
        return max(self.samples) - min(self.samples) == 0.0

    def unique_max(self) -> bool:
        """Whether the maximizer is unique (always false for constants)."""
        if self.is_constant():
            return False
        if self.kind in ("cosine", "shifted-cosine"):
            return True
        if self.kind == "smooth-bump":
            return self.params[2] > 0.0
        vals = np.asarray(self.samples)
        return int(np.sum(vals >= vals.max() - 1e-12)) == 1

    def argmax(self) -> float:
        """Location of the maximum in [0,1).

        Closed form for the symbolic kinds; for tabulated potentials the
        sample argmax refined by golden-section search on the spline.
        """
        if self.kind in ("cosine", "shifted-cosine"):
            a, phase = self.params
            return phase % 1.0 if a >= 0.0 else (phase + 0.5) % 1.0
        if self.kind == "smooth-bump":
            center, _, height = self.params
            if height < 0.0:
                raise ValueError("negative bump has no unique maximizer")
            return center
        return self._refine_extremum(np.argmax(self.samples), sign=1.0)

    def max_value(self) -> float:
        if self.kind in ("cosine", "shifted-cosine"):
            return abs(self.params[0])
        if self.kind == "smooth-bump":
            return max(self.params[2], 0.0)
        return float(self(self._refine_extremum(np.argmax(self.samples), sign=1.0)))

    def min_value(self) -> float:
        if self.kind in ("cosine", "shifted-cosine"):
            return -abs(self.params[0])
        if self.kind == "smooth-bump":
            return min(self.params[2], 0.0)
        return float(self(self._refine_extremum(np.argmin(self.samples), sign=-1.0)))

    def _refine_extremum(self, j: int, sign: float) -> float:
        # Golden-section search on the bracket of lattice neighbours.
        m = len(self.samples)
        a, b = (j - 1) / m, (j + 1) / m
        gr = (math.sqrt(5.0) - 1.0) / 2.0
        c, d = b - gr * (b - a), a + gr * (b - a)
        fc, fd = sign * self(c), sign * self(d)
        for _ in range(80):
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - gr * (b - a)
                fc = sign * self(c)
            else:
                a, c, fc = c, d, fd
                d = a + gr * (b - a)
                fd = sign * self(d)
        return ((a + b) / 2.0) % 1.0

    def spec_string(self) -> str:
        if self.kind in ("cosine", "shifted-cosine"):
            return f"cos({self.params[0]:g},{self.params[1]:g})"
        if self.kind == "smooth-bump":
            return f"bump({self.params[0]:g},{self.params[1]:g},{self.params[2]:g})"
        return f"table:<{len(self.samples)} samples>"


def parse_potential(spec: str) -> Potential:
    """Parse the potential grammar used by config files and the CLI.

    Accepted forms: ``cos(a,phase)``, ``bump(center,width,height)`` and
    ``table:<path>`` where the file holds one sample per line, uniformly
    spaced on [0,1).
    """
    spec = spec.strip()
    if spec.startswith("cos(") and spec.endswith(")"):
        parts = spec[4:-1].split(",")
        if len(parts) != 2:
            raise ValueError(f"cos() takes 2 parameters, got {spec!r}")
        return Potential.cosine(float(parts[0]), float(parts[1]))
    if spec.startswith("bump(") and spec.endswith(")"):
        parts = spec[5:-1].split(",")
        if len(parts) != 3:
            raise ValueError(f"bump() takes 3 parameters, got {spec!r}")
        return Potential.bump(float(parts[0]), float(parts[1]), float(parts[2]))
    if spec.startswith("table:"):
        path = spec[len("table:"):]
        with open(path) as fh:
            samples = [float(line) for line in fh if line.strip()]
        return Potential.tabulated(samples)
    raise ValueError(f"unrecognized potential spec {spec!r}")


@dataclass(frozen=True)
class Lattice:
    """The k-site uniform lattice {j/k : j = 0..k-1} on the circle."""

    k: int

    def __post_init__(self):
        if self.k < 2:
            raise InvalidLatticeError(f"lattice needs at least 2 sites, got k={self.k}")

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.k) / self.k


@dataclass(frozen=True)
class GridFunction:
    """Real values indexed by the sites of a lattice."""

    lattice: Lattice
    values: np.ndarray
    probability: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.lattice.k,):
            raise ValueError(
                f"values length {vals.shape} does not match lattice k={self.lattice.k}"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.probability:
            if np.any(vals < 0.0):
                raise ValueError("probability grid function has negative entries")
            if abs(vals.sum() - 1.0) > _PROB_TOL:
                raise ValueError(
                    f"probability grid function sums to {vals.sum()!r}, not 1"
                )

    @property
    def k(self) -> int:
        return self.lattice.k


@dataclass(frozen=True)
class GeneratorMatrix:
    """Circulant tridiagonal storage for rate/Schroedinger matrices."""

    k: int
    diag: np.ndarray
    up: np.ndarray
    down: np.ndarray

    def __post_init__(self):
        for name in ("diag", "up", "down"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            if arr.shape != (self.k,):
                raise ValueError(f"{name} must have length k={self.k}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return self.diag * v + self.up * np.roll(v, -1) + self.down * np.roll(v, 1)

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        """Transpose apply, v^T A evaluated as A^T v."""
        v = np.asarray(v, dtype=float)
        return self.diag * v + np.roll(self.up * v, 1) + np.roll(self.down * v, -1)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.k, self.k))
        idx = np.arange(self.k)
        out[idx, idx] = self.diag
        # += so the overlapping corners of k=2 are summed, not overwritten
        np.add.at(out, (idx, (idx + 1) % self.k), self.up)
        np.add.at(out, (idx, (idx - 1) % self.k), self.down)
        return out

    def row_sums(self) -> np.ndarray:
        return self.diag + self.up + self.down


def build_generator(k: int) -> GeneratorMatrix:
    """Generator of the unsped symmetric nearest-neighbour walk.

    Diagonal -2, both neighbour couplings 1, periodic corners included.
    Row sums vanish identically and the matrix is symmetric.
    """
    if k < 2:
        raise InvalidLatticeError(f"lattice needs at least 2 sites, got k={k}")
    ones = np.ones(k)
    return GeneratorMatrix(k=k, diag=-2.0 * ones, up=ones.copy(), down=ones.copy())


def restrict_potential(V: Potential, k: int) -> GridFunction:
    """Sample V at the lattice sites j/k."""
    lat = Lattice(k)
    return GridFunction(lat, np.asarray(V(lat.sites), dtype=float))


def schrodinger_matrix(k: int, V: Potential) -> GeneratorMatrix:
    """The perturbed operator k*L_k + k*diag(V_k).

    Not a stochastic generator: row sums equal k*V(j/k).  Symmetric for
    every potential since the walk part is symmetric.
    """
    Vk = restrict_potential(V, k).values
    ones = np.ones(k)
    return GeneratorMatrix(
        k=k,
        diag=k * (-2.0 * ones + Vk),
        up=k * ones,
        down=k * ones,
    )


def nearest_site(x: float, k: int) -> int:
    """Index of the lattice point floor(k*x)/k, the site just left of x."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"x must lie in [0,1), got {x}")
    if k < 2:
        raise InvalidLatticeError(f"lattice needs at least 2 sites, got k={k}")
    return int(math.floor(k * x)) % k


def extend_profile(f: GridFunction, fine_n: int) -> np.ndarray:
    """Periodic piecewise-linear extension of site values to a fine grid.

    Returns samples at i/fine_n for i = 0..fine_n-1.  Agrees with f exactly
    at the sites j/k whenever they lie on the fine grid.
    """
    k = f.lattice.k
    if fine_n < k:
        raise InvalidResolutionError(f"fine_n={fine_n} is below the lattice size k={k}")
    xp = np.arange(k + 1) / k
    fp = np.append(f.values, f.values[0])
    return np.interp(np.arange(fine_n) / fine_n, xp, fp)
