#!/usr/bin/env python3
"""
特徵值檢查 - Principal Neumann eigenvalue of -a Lap + V on an interval domain

Features:
1. Self-adjoint tridiagonal discretization (same control volumes as the conformal solver)
2. Tridiagonal eigensolve refined by inverse iteration; mu1 is the energy-form
   Rayleigh quotient of the refined eigenvector
3. Dense generalized eigensolve as a cross-check at coarse resolution
4. Eigenvalue scan over a smoothing sweep of a corner, with the case (a)/(b) classification
5. Pointwise supersolution check and the constant extension of an eigenfunction
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.linalg import LinAlgError, eigh, eigh_tridiagonal, solve_banded

from conformal import Potential, control_widths, conformal_coefficient
from corner import CornerMetric, Mollifier, mean_curvature_gap, miao_smooth
from errors import EigenError
from geometry import scalar_curvature_samples
from profiles import ProfileMetric, differentiate

logger = logging.getLogger(__name__)

MIN_DOMAIN_SAMPLES = 8
MAX_INVERSE_ITERATIONS = 8
DENSE_LIMIT = 2000


@dataclass(frozen=True, eq=False)
class EigenProblem:
    metric: ProfileMetric
    domain: Tuple[float, float]
    V: Potential
    a: Optional[float] = None

    def __post_init__(self):
        lo, hi = self.domain
        grid = self.metric.grid
        if not lo < hi or lo < grid[0] - 1e-12 or hi > grid[-1] + 1e-12:
            raise EigenError(f"domain {self.domain} not inside [{grid[0]}, {grid[-1]}]")
        self.V.aligned(self.metric)
        if self.a is None:
            object.__setattr__(self, "a", conformal_coefficient(self.metric.n))
        if self.a <= 0:
            raise EigenError(f"coefficient a={self.a} must be positive")

    @property
    def indices(self) -> np.ndarray:
        idx = np.nonzero(self.metric.mask(*self.domain))[0]
        if len(idx) < MIN_DOMAIN_SAMPLES:
            raise EigenError(f"degenerate domain {self.domain}: {len(idx)} samples, "
                             f"need {MIN_DOMAIN_SAMPLES}")
        return idx

    def discretize(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(conductances c, masses m, potential V) on the domain samples."""
        idx = self.indices
        n = self.metric.n
        grid, h = self.metric.grid[idx], self.metric.h[idx]
        areas = 0.5 * (h[:-1] ** (n - 1) + h[1:] ** (n - 1))
        return areas / np.diff(grid), control_widths(grid) * h ** (n - 1), self.V.values[idx]


@dataclass
class EigenResult:
    mu1: float
    mu2: float
    grid: np.ndarray
    u: np.ndarray
    rayleigh_residual: float
    iterations: int
    eigen_residual: float = float("nan")


def _energy(a: float, c: np.ndarray, m: np.ndarray, V: np.ndarray, x: np.ndarray) -> float:
    return float(a * np.sum(c * np.diff(x) ** 2) + np.sum(V * m * x ** 2))


def _banded(a: float, c: np.ndarray, m: np.ndarray, V: np.ndarray, shift: float) -> np.ndarray:
    size = len(m)
    band = np.zeros((3, size))
    band[0, 1:] = -a * c
    band[2, :-1] = -a * c
    diag = V * m - shift * m
    diag[:-1] += a * c
    diag[1:] += a * c
    band[1] = diag
    return band


def eigen_equation_residual(problem: EigenProblem, mu: float, x: np.ndarray) -> float:
    """Residual of K x = mu M x, K the stiffness and M the lumped masses.

    Returns |K x - mu M x| in the M^-1 norm over |x| in the M norm. Some eigenvalue of the
    discrete problem lies within this distance of mu.
    """
    c, m, V = problem.discretize()
    x = np.asarray(x, dtype=float)
    band = _banded(problem.a, c, m, V, 0.0)
    r = band[1] * x - mu * m * x
    r[:-1] += band[0, 1:] * x[1:]
    r[1:] += band[2, :-1] * x[:-1]
    norm = np.sqrt(np.sum(m * x ** 2))
    if norm == 0.0:
        raise EigenError("eigen residual of the zero vector")
    return float(np.sqrt(np.sum(r ** 2 / m)) / norm)


def neumann_principal_eigenvalue(problem: EigenProblem) -> EigenResult:
    """Smallest eigenvalue of -a Lap + V with zero flux at both ends of the domain."""
    a = problem.a
    c, m, V = problem.discretize()
    root = np.sqrt(m)
    diag = V.copy()
    diag[:-1] += a * c / m[:-1]
    diag[1:] += a * c / m[1:]
    off = -a * c / (root[:-1] * root[1:])
    try:
        w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 1))
    except (LinAlgError, ValueError) as e:
        raise EigenError(f"tridiagonal eigensolve failed: {e}")
    gap = float(w[1] - w[0])
    if gap <= 0.0:
        raise EigenError("principal eigenvalue is not simple")

    x = v[:, 0] / root
    shift = float(w[0]) - 0.01 * gap
    mu = _energy(a, c, m, V, x) / float(np.sum(m * x ** 2))
    change, iterations = np.inf, 0
    band = _banded(a, c, m, V, shift)
    while iterations < MAX_INVERSE_ITERATIONS and change > 1e-13 * max(1.0, abs(mu)):
        try:
            y = solve_banded((1, 1), band, m * x)
        except (LinAlgError, ValueError) as e:
            raise EigenError(f"inverse iteration failed: {e}")
        x = y / np.sqrt(np.sum(m * y ** 2))
        new_mu = _energy(a, c, m, V, x) / float(np.sum(m * x ** 2))
        change, mu = abs(new_mu - mu), new_mu
        iterations += 1

    omega = problem.metric.sphere.omega
    x = x / np.sqrt(omega * np.sum(m * x ** 2))
    if np.sum(x) < 0:
        x = -x
    if np.min(x) <= 0.0:
        raise EigenError(f"principal eigenfunction changes sign (min {np.min(x):.3e})")
    identity = abs(omega * _energy(a, c, m, V, x) - mu)
    residual = max(identity, change)
    certified = eigen_equation_residual(problem, mu, x)
    logger.debug(f"mu1={mu:.10g} on {problem.domain} after {iterations} inverse iterations, "
                 f"eigen residual {certified:.3e}")
    return EigenResult(float(mu), float(w[1]), problem.metric.grid[problem.indices], x,
                       float(residual), iterations, certified)


def dense_eigenvalues(problem: EigenProblem, count: int = 2) -> np.ndarray:
    """Lowest `count` eigenvalues of the same discretization from a dense generalized solve."""
    a = problem.a
    c, m, V = problem.discretize()
    if len(m) > DENSE_LIMIT:
        raise EigenError(f"dense cross-check limited to {DENSE_LIMIT} samples, got {len(m)}")
    band = _banded(a, c, m, V, 0.0)
    stiffness = np.diag(band[1]) + np.diag(band[0, 1:], 1) + np.diag(band[2, :-1], -1)
    return eigh(stiffness, np.diag(m), eigvals_only=True, subset_by_index=[0, count - 1])


# -- supersolutions -----------------------------------------------------------

@dataclass
class SupersolutionReport:
    holds: bool
    margin: float
    lower_bound: float


def supersolution_check(metric: ProfileMetric, V: Potential, u: np.ndarray,
                        a: Optional[float] = None, tol: float = 1e-8) -> SupersolutionReport:
    """-a Lap u + V u > 0 pointwise and delta < u < 1/delta for some delta > 0."""
    V.aligned(metric)
    a = conformal_coefficient(metric.n) if a is None else a
    u = np.asarray(u, dtype=float)
    du = differentiate(metric.grid, u, 1)
    ddu = differentiate(metric.grid, u, 2)
    laplacian = ddu + (metric.n - 1) * (metric.dh / metric.h) * du
    values = -a * laplacian + V.values * u
    margin = float(np.min(values))
    lower = float(min(np.min(u), 1.0 / np.max(u))) if np.all(u > 0) else 0.0
    return SupersolutionReport(margin > tol and lower > 0.0, margin, lower)


def extend_constant(metric: ProfileMetric, result: EigenResult) -> np.ndarray:
    """Eigenfunction on the domain, held at its end values outside.

    Zero flux at the domain ends makes the extension C1.
    """
    u = np.empty(metric.size)
    start = metric.index_of(result.grid[0])
    stop = start + len(result.u)
    u[start:stop] = result.u
    u[:start] = result.u[0]
    u[stop:] = result.u[-1]
    return u


# -- smoothing sweep ----------------------------------------------------------

def classify_case(corner: CornerMetric, domain: Tuple[float, float], tol: float = 1e-8) -> str:
    """'a' when R > 0 somewhere off the interface, 'b' when H+ < H-, both or 'none'."""
    cases: List[str] = []
    for side in (corner.left, corner.right):
        sel = side.mask(*domain) & (np.abs(side.grid - corner.s0) > 0.0)
        if sel.any() and np.max(scalar_curvature_samples(side)[sel]) > tol:
            cases.append("a")
            break
    h_plus, h_minus = mean_curvature_gap(corner)
    if h_plus < h_minus - tol:
        cases.append("b")
    return ",".join(cases) if cases else "none"


def _scan_entry(corner: CornerMetric, domain: Tuple[float, float], delta: float,
                mollifier: Optional[Mollifier]) -> dict:
    smoothed = miao_smooth(corner, delta, mollifier)
    potential = Potential(scalar_curvature_samples(smoothed), f"R delta={delta:g}")
    result = neumann_principal_eigenvalue(EigenProblem(smoothed, domain, potential))
    return {"delta": delta, "mu1": result.mu1, "mu2": result.mu2,
            "rayleigh_residual": result.rayleigh_residual, "eigen_residual": result.eigen_residual,
            "provenance": "smoothing_eigen_scan"}


@dataclass
class EigenScan:
    table: pd.DataFrame
    case: str
    threshold: Optional[float]
    floor: Optional[float]


def positivity_threshold(deltas: Sequence[float], mus: Sequence[float],
                         tol: float = 1e-8) -> Optional[float]:
    """Largest sweep delta below which every mu_delta is positive."""
    threshold = None
    for delta, mu in sorted(zip(deltas, mus)):
        if mu <= tol:
            break
        threshold = delta
    return threshold


def smoothing_eigen_scan(corner: CornerMetric, domain: Tuple[float, float],
                         deltas: Sequence[float], mollifier: Optional[Mollifier] = None,
                         jobs: int = 1, tol: float = 1e-8) -> EigenScan:
    lo, hi = domain
    if not lo < corner.s0 < hi:
        raise EigenError(f"domain {domain} does not contain the interface s0={corner.s0}")
    rows = Parallel(n_jobs=jobs)(delayed(_scan_entry)(corner, domain, d, mollifier)
                                 for d in deltas)
    table = pd.DataFrame(rows).sort_values("delta", ascending=False).reset_index(drop=True)
    case = classify_case(corner, domain, tol)
    threshold = positivity_threshold(table["delta"], table["mu1"], tol)
    positive = table.loc[table["mu1"] > tol, "mu1"]
    floor = float(positive.min()) if len(positive) == len(table) and len(table) else None
    logger.info(f"📈 eigen scan on {corner.left.name}|{corner.right.name}: case {case}, "
                f"threshold {threshold}")
    return EigenScan(table, case, threshold, floor)
