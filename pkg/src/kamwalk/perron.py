"""Perron eigendata and the Gibbs chain of the perturbed walk.

For the symmetric operator A = k*L_k + k*diag(V_k) the solver finds the
principal eigenvalue lambda_k together with a strictly positive right
eigenfunction u and a left probability eigenvector mu, jointly normalized
so that sum(u*mu) = 1.  The method is power iteration on the shifted
matrix A + s*I with s = k*(2 + max|V_k|), which has nonnegative entries,
so the iteration preserves positivity; convergence is declared on the
eigen-residual rather than on iterate distance.

Because A is symmetric the left eigenvector is mu = u/sum(u) and the
joint normalization amounts to rescaling u so that sum(u^2) = sum(u).
A general two-sided iteration (separate left and right vectors) is kept
as an internal cross-check for the symmetric shortcut.

Dense eigensolvers are deliberately not used here: their absolute error
floor of eps*||A|| wipes out the exponentially small eigenvector entries
that the log-profiles need, while the positive power iteration keeps
those entries accurate in relative terms.

Normalizing the semigroup of A by the eigendata yields a genuine Markov
chain, the Gibbs chain, with jump rates k*u[j+1]/u[j] to the right and
k*u[j-1]/u[j] to the left; its stationary law is pi = u*mu, and the
relative entropy rate of the Gibbs path measure with respect to the free
one is sum(k*V*pi) - lambda_k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InconsistentEigendataError,
    IrreducibilityError,
    IterationLimitError,
)
from .lattice import (
    GeneratorMatrix,
    GridFunction,
    Lattice,
    Potential,
    extend_profile,
    restrict_potential,
    schrodinger_matrix,
)

__all__ = [
    "PerronData",
    "GibbsChain",
    "StationaryMeasure",
    "perron_solve",
    "perron_solve_two_sided",
    "rayleigh_quotient",
    "gibbs_generator",
    "stationary_measure",
    "log_profiles",
    "entropy",
]

_RESIDUAL_CHECK_EVERY = 16


@dataclass(frozen=True)
class PerronData:
    """Principal eigendata of k*L_k + k*V_k."""

    lam: float
    u: GridFunction
    mu: GridFunction
    residual: float

    @property
    def k(self) -> int:
        return self.u.lattice.k


@dataclass(frozen=True)
class GibbsChain:
    """Jump rates of the eigenfunction-normalized chain."""

    lattice: Lattice
    rates_right: np.ndarray
    rates_left: np.ndarray

    def __post_init__(self):
        for name in ("rates_right", "rates_left"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            if arr.shape != (self.lattice.k,) or np.any(arr <= 0.0):
                raise ValueError(f"{name} must be strictly positive, length k")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def generator_matrix(self) -> GeneratorMatrix:
        """Generator with exactly zero row sums by construction."""
        return GeneratorMatrix(
            k=self.lattice.k,
            diag=-(self.rates_right + self.rates_left),
            up=self.rates_right,
            down=self.rates_left,
        )


@dataclass(frozen=True)
class StationaryMeasure:
    """Stationary law pi = u*mu of the Gibbs chain."""

    pi: GridFunction
    k: int
    potential_id: str


def _solve_inputs(k: int, V: Potential):
    A = schrodinger_matrix(k, V)
    Vk = restrict_potential(V, k).values
    shift = k * (2.0 + float(np.max(np.abs(Vk))))
    return A, shift


def _power_iterate(A: GeneratorMatrix, shift: float, tol: float, max_iters: int):
    """Shifted power iteration; returns (lam, v, residual, iterations)."""
    v = np.ones(A.k)
    lam = 0.0
    res = np.inf
    done = 0
    while done < max_iters:
        burst = min(_RESIDUAL_CHECK_EVERY, max_iters - done)
        for _ in range(burst):
            w = A.matvec(v) + shift * v
            m = w.max()
            if m <= 0.0:
                raise IrreducibilityError("shifted iterate lost positivity")
            v = w / m
        done += burst
        Av = A.matvec(v)
        lam = float(v @ Av) / float(v @ v)  # Rayleigh quotient
        res = float(np.max(np.abs(Av - lam * v)) / np.max(np.abs(v)))
        if res <= tol:
            return lam, v, res, done
    raise IterationLimitError(
        f"power iteration did not reach tol={tol} in {max_iters} iterations "
        f"(last residual {res:.3e})",
        residual=res,
        iterations=done,
    )


def perron_solve(
    k: int, V: Potential, tol: float = 1e-10, max_iters: int = 10**6
) -> PerronData:
    """Principal eigendata via the symmetric shortcut.

    u is rescaled so that sum(u^2) = sum(u) and mu = u/sum(u); together
    these force the joint normalization sum(u*mu) = 1.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    A, shift = _solve_inputs(k, V)
    lam, v, res, _ = _power_iterate(A, shift, tol, max_iters)
    if np.any(v <= 0.0):
        raise IrreducibilityError("Perron vector has a non-positive entry")
    u = v * (v.sum() / (v @ v))
    mu = u / u.sum()
    lat = Lattice(k)
    return PerronData(
        lam=lam,
        u=GridFunction(lat, u),
        mu=GridFunction(lat, mu, probability=True),
        residual=res,
    )


def perron_solve_two_sided(
    k: int, V: Potential, tol: float = 1e-10, max_iters: int = 10**6
) -> PerronData:
    """General (nonsymmetric-capable) path: separate left/right iteration.

    Exists as a cross-check oracle for the symmetric shortcut; not part of
    the public CLI surface.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    A, shift = _solve_inputs(k, V)
    v = np.ones(A.k)
    w = np.ones(A.k)
    lam = 0.0
    res_r = res_l = np.inf
    done = 0
    while done < max_iters:
        burst = min(_RESIDUAL_CHECK_EVERY, max_iters - done)
        for _ in range(burst):
            v = A.matvec(v) + shift * v
            v /= v.max()
            w = A.rmatvec(w) + shift * w
            w /= w.max()
        done += burst
        Av, Atw = A.matvec(v), A.rmatvec(w)
        lam = float(w @ Av) / float(w @ v)
        res_r = float(np.max(np.abs(Av - lam * v)) / np.max(np.abs(v)))
        res_l = float(np.max(np.abs(Atw - lam * w)) / np.max(np.abs(w)))
        if max(res_r, res_l) <= tol:
            break
    else:
        raise IterationLimitError(
            f"two-sided iteration did not converge (residuals {res_r:.3e}/{res_l:.3e})",
            residual=max(res_r, res_l),
            iterations=done,
        )
    if np.any(v <= 0.0) or np.any(w <= 0.0):
        raise IrreducibilityError("Perron vectors have a non-positive entry")
    mu = w / w.sum()
    u = v / float(v @ mu)
    lat = Lattice(k)
    return PerronData(
        lam=lam,
        u=GridFunction(lat, u),
        mu=GridFunction(lat, mu, probability=True),
        residual=max(res_r, res_l),
    )


def rayleigh_quotient(psi: GridFunction, k: int, V: Potential) -> float:
    """Discrete Rayleigh form (1/k) * <psi, (kL + kV) psi> against the
    uniform law, with psi renormalized to unit norm sqrt((1/k) sum psi^2).

    Bounded above by max V for every psi; the supremum over psi equals
    lambda_k/k and is attained at the square root of the stationary Gibbs
    density, i.e. at a positive multiple of the eigenfunction u.
    """
    if psi.lattice.k != k:
        raise ValueError(f"psi lives on k={psi.lattice.k}, expected {k}")
    vals = psi.values
    norm = np.sqrt(float(vals @ vals) / k)
    if norm == 0.0:
        raise ValueError("psi must be nonzero")
    p = vals / norm
    Vk = restrict_potential(V, k).values
    diff = np.roll(p, -1) - p
    return float((-(diff @ diff) + (p * p) @ Vk) / k)


def gibbs_generator(pd: PerronData, k: int) -> GibbsChain:
    """Doob-normalized chain: rates k*u[j+1]/u[j] and k*u[j-1]/u[j].

    Equals diag(u)^-1 (kL + kV - lam I) diag(u) up to the eigen-residual,
    with the diagonal replaced by the exact negative rate sum.
    """
    if pd.k != k:
        raise ValueError(f"eigendata lives on k={pd.k}, expected {k}")
    u = pd.u.values
    return GibbsChain(
        lattice=pd.u.lattice,
        rates_right=k * np.roll(u, -1) / u,
        rates_left=k * np.roll(u, 1) / u,
    )


def stationary_measure(pd: PerronData, potential_id: str = "") -> StationaryMeasure:
    """pi = u*mu, verified to annihilate the Gibbs generator from the left."""
    pi = pd.u.values * pd.mu.values
    chain = gibbs_generator(pd, pd.k)
    G = chain.generator_matrix()
    res = float(np.max(np.abs(G.rmatvec(pi))))
    if res > 1e-6:
        raise InconsistentEigendataError(
            f"stationarity residual {res:.3e} exceeds 1e-6; eigendata inconsistent"
        )
    return StationaryMeasure(
        pi=GridFunction(pd.u.lattice, pi / pi.sum(), probability=True),
        k=pd.k,
        potential_id=potential_id,
    )


def log_profiles(pd: PerronData, fine_n: int):
    """The profiles (1/k) log u and (1/k) log mu on a fine grid.

    Returns the pair (z_profile, p_profile); their sum is (1/k) log pi,
    whose re-centered negative approaches the deviation function.
    """
    u, mu = pd.u.values, pd.mu.values
    if np.any(u <= 0.0) or np.any(mu <= 0.0):
        raise ValueError("log profiles need strictly positive eigendata")
    k = pd.k
    z = extend_profile(GridFunction(pd.u.lattice, np.log(u) / k), fine_n)
    p = extend_profile(GridFunction(pd.u.lattice, np.log(mu) / k), fine_n)
    return z, p


def entropy(pd: PerronData, sm: StationaryMeasure, k: int, V: Potential) -> float:
    """Relative entropy rate sum_j k*V(j/k)*pi_j - lambda_k of the Gibbs chain."""
    if pd.k != k or sm.k != k:
        raise ValueError("eigendata, measure and k disagree")
    Vk = restrict_potential(V, k).values
    return float(k * (Vk @ sm.pi.values) - pd.lam)
