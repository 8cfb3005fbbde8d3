#!/usr/bin/env python3
"""
共形修正求解器 - Conformal correction -a Lap u + V u = 0 on profile metrics

Features:
1. Potential: constant, bump, negative part of scalar curvature, CSV, smooth filter
2. Weighted norms of the smallness hypothesis (L^{n/2}, L^p_{-q-2}, L^{2n/(n+2)})
3. Finite-volume solve of (h^{n-1} u')' = (V/a) h^{n-1} u with a banded solver:
   zero flux (or a prescribed slope) at the inner end, Robin decay at the outer end
4. Corrected metric u^{4/(n-2)} g, its scalar curvature, mass change and energy
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate as sp_integrate
from scipy.linalg import LinAlgError, solve_banded

from corner import Mollifier, default_mollifier, smooth_transition
from errors import (AdmMassError, ConformalSolveError, PotentialError, ProfileError,
                    WeightedNormError)
from geometry import adm_mass, integrate, negative_part, scalar_curvature_samples
from profiles import EndFlag, ProfileMetric

logger = logging.getLogger(__name__)

NEUMANN_AT_INNER = "neumann_at_inner"
NONE = "none"
DECAY_SLACK = 0.1


def conformal_coefficient(n: int) -> float:
    return 4.0 * (n - 1) / (n - 2)


@dataclass(frozen=True, eq=False)
class Potential:
    values: np.ndarray
    name: str = "V"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or not np.all(np.isfinite(values)):
            raise PotentialError(f"potential '{self.name}' must be a finite 1D sample array")
        object.__setattr__(self, "values", values)

    @property
    def support(self) -> Optional[Tuple[int, int]]:
        nz = np.nonzero(self.values)[0]
        if len(nz) == 0:
            return None
        return int(nz[0]), int(nz[-1])

    @property
    def positive(self) -> np.ndarray:
        return np.maximum(self.values, 0.0)

    @property
    def negative(self) -> np.ndarray:
        return np.maximum(-self.values, 0.0)

    def scaled(self, factor: float) -> "Potential":
        return Potential(factor * self.values, f"{factor:g}*{self.name}")

    def aligned(self, metric: ProfileMetric) -> "Potential":
        if self.values.shape != metric.grid.shape:
            raise PotentialError(f"potential '{self.name}' has {self.values.size} samples, "
                                 f"metric grid has {metric.size}")
        return self

    @classmethod
    def constant(cls, metric: ProfileMetric, value: float) -> "Potential":
        return cls(np.full(metric.size, float(value)), f"const({value:g})")

    @classmethod
    def bump(cls, metric: ProfileMetric, center: float, width: float,
             amplitude: float) -> "Potential":
        """amplitude * exp(1 - 1/(1 - x^2)), x = (s - center)/width: peak value `amplitude`."""
        x = (metric.grid - center) / width
        inside = np.abs(x) < 1.0
        values = np.zeros(metric.size)
        values[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
        return cls(values, f"bump({center:g},{width:g},{amplitude:g})")

    @classmethod
    def negative_part_of_scalar(cls, metric: ProfileMetric) -> "Potential":
        return cls(-negative_part(scalar_curvature_samples(metric)), "-(R)^-")

    @classmethod
    def from_csv(cls, metric: ProfileMetric, path: Union[str, Path]) -> "Potential":
        """Two columns (s, V) with a header row, linearly interpolated onto the grid, zero outside."""
        path = Path(path)
        try:
            frame = pd.read_csv(path)
        except (OSError, pd.errors.ParserError) as e:
            raise PotentialError(f"cannot read potential {path}: {e}")
        if frame.shape[1] != 2:
            raise PotentialError(f"{path}: expected columns (s, V)")
        s, v = frame.iloc[:, 0].to_numpy(float), frame.iloc[:, 1].to_numpy(float)
        return cls(np.interp(metric.grid, s, v, left=0.0, right=0.0), path.stem)


def saturating_filter(values: np.ndarray, mollifier: Optional[Mollifier] = None) -> np.ndarray:
    """Smooth nondecreasing f with f(t) = t for t <= 1/2, f <= min(t, 1), constant 3/4 for t >= 1."""
    mollifier = mollifier or default_mollifier()
    t = np.asarray(values, dtype=float)
    middle = t - 0.25 * mollifier.ramp_at(4.0 * t - 3.0)
    return np.where(t <= 0.5, t, np.where(t >= 1.0, 0.75, middle))


def filtered_potential(metric: ProfileMetric, s0: float, delta: float,
                       mollifier: Optional[Mollifier] = None) -> Potential:
    """chi_delta * f(R): chi = 1 on |t| <= delta, 0 for |t| >= 2 delta."""
    t = np.abs(metric.grid - s0)
    chi = 1.0 - smooth_transition(t / delta - 1.0)
    values = chi * saturating_filter(scalar_curvature_samples(metric), mollifier)
    return Potential(values, f"chi*f(R) delta={delta:g}")


# -- weighted norms -----------------------------------------------------------

@dataclass(frozen=True)
class WeightedNormConfig:
    n: int
    p: float
    q: float

    def __post_init__(self):
        if not self.p > self.n:
            raise WeightedNormError(f"p={self.p} must exceed n={self.n}")
        if not self.q > (self.n - 2) / 2.0:
            raise WeightedNormError(f"q={self.q} must exceed (n-2)/2={(self.n - 2) / 2.0}")

    @classmethod
    def default(cls, n: int) -> "WeightedNormConfig":
        return cls(n, p=n + 1.0, q=float(n - 2))

    @property
    def weight_exponent(self) -> float:
        """Weight index s of L^p_{-q-2}: the integrand carries |x|^{q+2}."""
        return -(self.q + 2.0)


def weighted_norms(V: Potential, metric: ProfileMetric,
                   config: WeightedNormConfig) -> Tuple[float, float, float]:
    """(||V^-||_{n/2}, ||V||_{p,-q-2}, ||V||_{2n/(n+2)})."""
    V.aligned(metric)
    if config.n != metric.n:
        raise WeightedNormError(f"norm config is for n={config.n}, metric has n={metric.n}")
    support = V.support
    if support is None:
        return 0.0, 0.0, 0.0
    n, p = metric.n, config.p
    region = (metric.grid[support[0]], metric.grid[support[1]])
    # samples outside the support are zero, so integrating over it loses nothing
    l_half = integrate(metric, V.negative ** (n / 2.0), region) ** (2.0 / n)
    weighted = (np.abs(metric.h ** (-config.weight_exponent) * V.values) ** p) / metric.h ** n
    l_weighted = integrate(metric, weighted, region) ** (1.0 / p)
    r = 2.0 * n / (n + 2.0)
    l_sobolev = integrate(metric, np.abs(V.values) ** r, region) ** (1.0 / r)
    return float(l_half), float(l_weighted), float(l_sobolev)


# -- solver -------------------------------------------------------------------

@dataclass(eq=False)
class ConformalSolution:
    metric: ProfileMetric
    potential: Potential
    u: np.ndarray
    du: np.ndarray
    ddu: np.ndarray
    tilde: ProfileMetric
    a: float
    residual: float = 0.0
    outer_robin: float = 0.0
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_function(cls, metric: ProfileMetric, V: Potential, u: np.ndarray,
                      du: np.ndarray, ddu: np.ndarray) -> "ConformalSolution":
        """Wrap a known u (with exact derivatives), e.g. for cross-checks."""
        a = conformal_coefficient(metric.n)
        u, du, ddu = (np.asarray(x, dtype=float) for x in (u, du, ddu))
        return cls(metric, V.aligned(metric), u, du, ddu,
                   corrected_metric(metric, u, du, ddu), a)

    @property
    def n(self) -> int:
        return self.metric.n


def _half_point_areas(metric: ProfileMetric) -> np.ndarray:
    return 0.5 * (metric.h[:-1] ** (metric.n - 1) + metric.h[1:] ** (metric.n - 1))


def control_widths(grid: np.ndarray) -> np.ndarray:
    ds = np.diff(grid)
    widths = np.empty_like(grid)
    widths[0], widths[-1] = 0.5 * ds[0], 0.5 * ds[-1]
    widths[1:-1] = 0.5 * (ds[:-1] + ds[1:])
    return widths


def _default_outer_robin(metric: ProfileMetric, exponent: Optional[float]) -> float:
    if not metric.is_asymptotically_flat:
        logger.warning(f"⚠️ {metric.name}: outer end is not asymptotically flat, "
                       "using a zero-flux outer condition")
        return 0.0
    k = float(metric.n - 2) if exponent is None else float(exponent)
    if not k > 0.0:
        raise ConformalSolveError(f"Robin exponent {k} must be positive")
    return k * metric.dh[-1] / metric.h[-1]


def corrected_metric(metric: ProfileMetric, u: np.ndarray, du: np.ndarray,
                     ddu: np.ndarray) -> ProfileMetric:
    """u^{4/(n-2)} g in its own arclength gauge."""
    k = 2.0 / (metric.n - 2)
    stretch = u ** k
    s_tilde = metric.grid[0] + sp_integrate.cumulative_trapezoid(stretch, metric.grid, initial=0.0)
    h, dh, ddh = metric.h, metric.dh, metric.ddh
    h_t = stretch * h
    dh_t = dh + k * h * du / u
    ddh_t = (ddh + k * (dh * du / u + h * ddu / u - h * du ** 2 / u ** 2)) / stretch
    return ProfileMetric(metric.n, s_tilde, h_t, metric.end_flags, dh_t, ddh_t,
                         f"u*{metric.name}", True)


def solve_conformal(metric: ProfileMetric, V: Potential, boundary: str = NEUMANN_AT_INNER,
                    inner_slope: float = 0.0, outer_robin: Optional[float] = None,
                    robin_exponent: Optional[float] = None,
                    outer_richardson: bool = False) -> ConformalSolution:
    """Solve -a Lap u + V u = 0 with u -> 1 at the outer end.

    The inner end always carries a flux condition: `inner_slope` for
    neumann_at_inner (zero by default), zero flux for `none` (complete end or
    regular centre). The outer condition is u' + gamma (u - 1) = 0 with
    gamma = k h'/h or `outer_robin`. The exponent k is the decay rate of u - 1 in |x|,
    the q of its weighted space (WeightedNormConfig.q). It defaults to n - 2: outside a
    compactly supported potential u - 1 is a multiple of the Green function.
    """
    V.aligned(metric)
    if boundary not in (NEUMANN_AT_INNER, NONE):
        raise ConformalSolveError(f"unknown inner boundary mode '{boundary}'")
    if metric.is_asymptotically_flat:
        decade = metric.h >= metric.h[-1] / 10.0
        if np.any(V.values[decade] != 0.0):
            raise PotentialError(f"potential '{V.name}' is not compactly supported "
                                 "away from the asymptotic end")
    slope = inner_slope if boundary == NEUMANN_AT_INNER else 0.0
    n, a = metric.n, conformal_coefficient(metric.n)
    gamma = _default_outer_robin(metric, robin_exponent) if outer_robin is None else outer_robin

    grid, h = metric.grid, metric.h
    ds = np.diff(grid)
    areas = _half_point_areas(metric)
    widths = control_widths(grid)
    mass = widths * (V.values / a) * h ** (n - 1)
    cond = areas / ds

    size = metric.size
    lower, upper = np.zeros(size), np.zeros(size)
    upper[:-1] = cond
    lower[1:] = cond
    diag = -(np.concatenate(([0.0], cond)) + np.concatenate((cond, [0.0]))) - mass
    rhs = np.zeros(size)
    rhs[0] = h[0] ** (n - 1) * slope
    beta = h[-1] ** (n - 1) * gamma
    diag[-1] -= beta
    rhs[-1] = -beta

    banded = np.zeros((3, size))
    banded[0, 1:] = upper[:-1]
    banded[1] = diag
    banded[2, :-1] = lower[1:]
    try:
        u = solve_banded((1, 1), banded, rhs)
    except (LinAlgError, ValueError) as e:
        raise ConformalSolveError(f"singular conformal system ({e})")
    if not np.all(np.isfinite(u)):
        raise ConformalSolveError("non-finite conformal factor")
    if np.min(u) <= 0.0:
        i = int(np.argmin(u))
        raise ConformalSolveError(f"conformal factor reaches {u[i]:.3e} at s={grid[i]:.6g}",
                                  {"min_u": float(u[i]), "s": float(grid[i])})

    applied = diag * u
    applied[:-1] += upper[:-1] * u[1:]
    applied[1:] += lower[1:] * u[:-1]
    scale = np.abs(diag) * np.abs(u) + np.abs(rhs)
    scale[:-1] += upper[:-1] * np.abs(u[1:])
    scale[1:] += lower[1:] * np.abs(u[:-1])
    residual = float(np.max(np.abs(applied - rhs) / np.maximum(scale, 1e-300)))

    # nodal slopes from averaged half-point fluxes, u'' from the equation
    flux = cond * np.diff(u)
    node_flux = np.empty(size)
    node_flux[1:-1] = 0.5 * (flux[:-1] + flux[1:])
    node_flux[0] = h[0] ** (n - 1) * slope
    node_flux[-1] = -beta * (u[-1] - 1.0)
    du = node_flux / h ** (n - 1)
    ddu = (V.values / a) * u - (n - 1) * (metric.dh / h) * du

    try:
        tilde = corrected_metric(metric, u, du, ddu)
    except ProfileError as e:
        raise ConformalSolveError(f"corrected metric is not admissible ({e})")
    sol = ConformalSolution(metric, V, u, du, ddu, tilde, a, residual, gamma)
    sol.diagnostics["far_field"] = far_field_coefficient(sol)
    if outer_richardson and metric.is_asymptotically_flat:
        sol.diagnostics.update(_outer_radius_richardson(sol, boundary, slope, robin_exponent))
    logger.debug(f"conformal solve on {metric.name}: min u={u.min():.6g}, residual={residual:.2e}")
    return sol


def far_field_coefficient(sol: ConformalSolution) -> float:
    """A in u - 1 ~ A h^{-(n-2)} at the outer sample."""
    return float((sol.u[-1] - 1.0) * sol.metric.h[-1] ** (sol.n - 2))


def _outer_radius_richardson(sol: ConformalSolution, boundary: str, slope: float,
                             robin_exponent: Optional[float]) -> Dict[str, float]:
    metric = sol.metric
    half = metric.h[-1] / 2.0
    try:
        keep = np.nonzero(metric.h <= half)[0]
        truncated = metric.restricted(metric.grid[0], metric.grid[keep[-1]])
        truncated = truncated.with_flags(truncated.end_flags[0], EndFlag.ASYMPTOTICALLY_FLAT)
        V_half = Potential(sol.potential.values[:truncated.size], sol.potential.name)
        coarse = solve_conformal(truncated, V_half, boundary, slope, None, robin_exponent)
    except (ProfileError, PotentialError, ConformalSolveError) as e:
        logger.warning(f"⚠️ outer-radius extrapolation skipped: {e}")
        return {}
    full, halved = sol.diagnostics["far_field"], coarse.diagnostics["far_field"]
    return {"far_field_half_radius": halved, "far_field_extrapolated": 2.0 * full - halved}


# -- derived quantities -------------------------------------------------------

def conformal_scalar(sol: ConformalSolution, V: Potential, metric: ProfileMetric) -> np.ndarray:
    """R~ = (R_g - V) u^{-4/(n-2)}."""
    return (scalar_curvature_samples(metric) - V.values) * sol.u ** (-4.0 / (metric.n - 2))


def conformal_scalar_crosscheck(sol: ConformalSolution, V: Potential,
                                metric: ProfileMetric) -> float:
    """max |formula - warped-product scalar curvature of the corrected profile|."""
    return float(np.max(np.abs(conformal_scalar(sol, V, metric)
                               - scalar_curvature_samples(sol.tilde))))


def lumped_integral(metric: ProfileMetric, values: np.ndarray) -> float:
    """Integral with the control-volume weights of the solver."""
    return float(metric.sphere.omega
                 * np.sum(control_widths(metric.grid) * values * metric.h ** (metric.n - 1)))


@dataclass
class MassChange:
    original: float
    formula: float
    direct: Optional[float]

    @property
    def discrepancy(self) -> float:
        return float("nan") if self.direct is None else abs(self.formula - self.direct)


def mass_change(sol: ConformalSolution, V: Potential, metric: ProfileMetric,
                m: Optional[float] = None) -> MassChange:
    """Mass-change formula and the ADM mass of the corrected metric."""
    m = adm_mass(metric).primary if m is None else m
    omega = metric.sphere.omega
    formula = m - lumped_integral(metric, V.values * sol.u) / (2.0 * (metric.n - 1) * omega)
    direct = None
    if sol.tilde.is_asymptotically_flat:
        try:
            direct = adm_mass(sol.tilde).primary
        except AdmMassError as e:
            logger.warning(f"⚠️ direct ADM mass of the corrected metric unavailable: {e}")
    return MassChange(float(m), float(formula), direct)


def energy_lower_bound(sol: ConformalSolution, V: Potential, metric: ProfileMetric) -> float:
    """Integral of a |u'|^2 + V u^2 in the discretization of the solver."""
    areas = _half_point_areas(metric)
    gradient = sol.a * metric.sphere.omega * float(np.sum(areas * np.diff(sol.u) ** 2
                                                          / np.diff(metric.grid)))
    return gradient + lumped_integral(metric, V.values * sol.u ** 2)


def energy_inequality_holds(change: MassChange, energy: float, n: int, omega: float,
                            slack: float) -> bool:
    return change.formula <= change.original - energy / (2.0 * (n - 1) * omega) + slack


def decay_check(sol: ConformalSolution, q: float, slack: float = DECAY_SLACK) -> Tuple[bool, float]:
    """Fitted exponent of |u - 1| against h over the last decade; ok if <= -q + slack."""
    metric = sol.metric
    decade = metric.h >= metric.h[-1] / 10.0
    dev = np.abs(sol.u[decade] - 1.0)
    if np.all(dev < 1e-14):
        return True, float("-inf")
    keep = dev > 1e-14
    slope = float(np.polyfit(np.log(metric.h[decade][keep]), np.log(dev[keep]), 1)[0])
    return slope <= -q + slack, slope


def estimate_ratio(sol: ConformalSolution, V: Potential, metric: ProfileMetric,
                   config: WeightedNormConfig) -> float:
    """sup|u - 1| / (||V||_{p,-q-2} + ||V||_{2n/(n+2)}), the constant of the u-estimate."""
    _, weighted, sobolev = weighted_norms(V, metric, config)
    denom = weighted + sobolev
    if denom == 0.0:
        return 0.0
    return float(np.max(np.abs(sol.u - 1.0)) / denom)
