#!/usr/bin/env python3
"""
幾何量計算 - Curvature, mean curvature, distances, volumes and masses
of rotationally symmetric metrics g = ds^2 + h(s)^2 sigma.

Features:
1. Scalar and Ricci curvature from warped-product identities
2. Mean curvature of coordinate spheres with an explicit orientation
3. Misner-Sharp mass and the ADM mass (Richardson extrapolation + coordinate flux cross-check)
4. Arclength distances and volume integrals
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate as sp_integrate
from scipy.interpolate import CubicSpline

from config import RICHARDSON_DIVERGENCE, RICHARDSON_LEVELS
from errors import AdmMassError, GeometryError
from profiles import ProfileMetric, differentiate

logger = logging.getLogger(__name__)


def _check_index(metric: ProfileMetric, i: int, one_sided: bool) -> int:
    i = int(i)
    if i < 0:
        i += metric.size
    if not 0 <= i < metric.size:
        raise GeometryError(f"index {i} outside grid of {metric.size} samples")
    edge = i < 2 or i > metric.size - 3
    if edge and not metric.exact_derivatives and not one_sided:
        raise GeometryError(
            f"index {i} needs a one-sided stencil on table metric '{metric.name}' "
            "(pass one_sided=True to accept it)")
    return i


# -- vectorized samples ---------------------------------------------------

def scalar_curvature_samples(metric: ProfileMetric) -> np.ndarray:
    n, h, dh, ddh = metric.n, metric.h, metric.dh, metric.ddh
    return -2.0 * (n - 1) * ddh / h + (n - 1) * (n - 2) * (1.0 - dh ** 2) / h ** 2


def ricci_samples(metric: ProfileMetric) -> Tuple[np.ndarray, np.ndarray]:
    n, h, dh, ddh = metric.n, metric.h, metric.dh, metric.ddh
    radial = -(n - 1) * ddh / h
    tangential = -ddh / h + (n - 2) * (1.0 - dh ** 2) / h ** 2
    return radial, tangential


def mean_curvature_samples(metric: ProfileMetric, orientation: int = 1) -> np.ndarray:
    if orientation not in (1, -1):
        raise GeometryError(f"orientation must be +1 or -1, got {orientation}")
    return orientation * (metric.n - 1) * metric.dh / metric.h


def misner_sharp_samples(metric: ProfileMetric) -> np.ndarray:
    return 0.5 * metric.h ** (metric.n - 2) * (1.0 - metric.dh ** 2)


def negative_part(values: np.ndarray) -> np.ndarray:
    return np.maximum(-values, 0.0)


# -- pointwise operations -------------------------------------------------

def scalar_curvature(metric: ProfileMetric, i: int, one_sided: bool = False) -> float:
    i = _check_index(metric, i, one_sided)
    n, h, dh, ddh = metric.n, metric.h[i], metric.dh[i], metric.ddh[i]
    return float(-2.0 * (n - 1) * ddh / h + (n - 1) * (n - 2) * (1.0 - dh ** 2) / h ** 2)


def ricci_curvature(metric: ProfileMetric, i: int, one_sided: bool = False) -> Tuple[float, float]:
    """(radial, tangential) Ricci eigenvalues at sample i."""
    i = _check_index(metric, i, one_sided)
    n, h, dh, ddh = metric.n, metric.h[i], metric.dh[i], metric.ddh[i]
    radial = -(n - 1) * ddh / h
    tangential = -ddh / h + (n - 2) * (1.0 - dh ** 2) / h ** 2
    return float(radial), float(tangential)


def mean_curvature_sphere(metric: ProfileMetric, i: int, orientation: int = 1) -> float:
    """Mean curvature of the coordinate sphere at s_i; +1 means the normal points to increasing s."""
    i = _check_index(metric, i, one_sided=True)
    if orientation not in (1, -1):
        raise GeometryError(f"orientation must be +1 or -1, got {orientation}")
    return float(orientation * (metric.n - 1) * metric.dh[i] / metric.h[i])


def misner_sharp_mass(metric: ProfileMetric, i: int) -> float:
    i = _check_index(metric, i, one_sided=True)
    return float(0.5 * metric.h[i] ** (metric.n - 2) * (1.0 - metric.dh[i] ** 2))


def mass_curvature_residual(metric: ProfileMetric) -> np.ndarray:
    """dm/ds - R h^{n-1} h' / (2(n-1)), with dm/ds by finite differences."""
    dm = differentiate(metric.grid, misner_sharp_samples(metric), 1)
    rhs = scalar_curvature_samples(metric) * metric.h ** (metric.n - 1) * metric.dh / (2.0 * (metric.n - 1))
    return dm - rhs


def distance(metric: ProfileMetric, s_a: float, s_b: float) -> float:
    lo, hi = metric.grid[0], metric.grid[-1]
    for s in (s_a, s_b):
        if not lo - 1e-12 <= s <= hi + 1e-12:
            raise GeometryError(f"s={s} outside grid range [{lo}, {hi}]")
    return float(abs(s_b - s_a))


def integrate(metric: ProfileMetric, f: np.ndarray,
              s_range: Optional[Tuple[float, float]] = None) -> float:
    """Integral of f over {s in s_range} with dmu = omega h^{n-1} ds (composite Simpson)."""
    f = np.broadcast_to(np.asarray(f, dtype=float), metric.grid.shape)
    density = f * metric.sphere.omega * metric.h ** (metric.n - 1)
    x, y = metric.grid, density
    if s_range is not None:
        a, b = sorted(s_range)
        if a < x[0] - 1e-12 or b > x[-1] + 1e-12:
            raise GeometryError(f"integration range [{a}, {b}] outside grid")
        a, b = max(a, x[0]), min(b, x[-1])
        inside = (x > a) & (x < b)
        x = np.concatenate(([a], x[inside], [b]))
        y = np.concatenate(([np.interp(a, metric.grid, density)], y[inside],
                            [np.interp(b, metric.grid, density)]))
        if b - a <= 0:
            return 0.0
    if len(x) < 3:
        return float(sp_integrate.trapezoid(y, x=x))
    return float(sp_integrate.simpson(y, x=x))


# -- ADM mass --------------------------------------------------------------

@dataclass
class AdmMassResult:
    primary: float
    crosscheck: float
    radii: List[float]
    misner_sharp: List[float]
    flux: List[float]
    corrections: List[float] = field(default_factory=list)

    @property
    def relative_agreement(self) -> float:
        return abs(self.primary - self.crosscheck) / max(abs(self.primary), 1e-8)


def richardson_table(values: List[float], step_ratio: float = 2.0) -> List[List[float]]:
    """Richardson tableau; values ordered from the coarsest to the finest level."""
    table = [list(values)]
    for level in range(1, len(values)):
        mult = step_ratio ** level
        prev = table[-1]
        table.append([(mult * prev[i + 1] - prev[i]) / (mult - 1.0) for i in range(len(prev) - 1)])
    return table


def _extrapolate(values: List[float], what: str) -> Tuple[float, List[float]]:
    table = richardson_table(values)
    diagonal = [row[-1] for row in table]
    corrections = [abs(b - a) for a, b in zip(diagonal, diagonal[1:])]
    scale = max(1.0, max(abs(v) for v in values))
    for a, b in zip(corrections, corrections[1:]):
        if b > RICHARDSON_DIVERGENCE * a and b > 1e-10 * scale:
            raise AdmMassError(f"{what}: successive Richardson estimates diverge ({corrections})")
    return table[-1][0], corrections


def _flux_integrand(n: int, f_of_r, r: float) -> float:
    """(d_j g_ij - d_i g_jj) nu^i at x = r e_1 for g_ij = delta_ij + f(|x|) x_i x_j / |x|^2."""
    tau = 1e-3 * r

    def metric_at(x: np.ndarray) -> np.ndarray:
        rad = np.linalg.norm(x)
        return np.eye(n) + f_of_r(rad) * np.outer(x, x) / rad ** 2

    def partial(j: int) -> np.ndarray:
        e = np.zeros(n)
        e[j] = tau
        x0 = np.zeros(n)
        x0[0] = r
        return (-metric_at(x0 + 2 * e) + 8 * metric_at(x0 + e)
                - 8 * metric_at(x0 - e) + metric_at(x0 - 2 * e)) / (12 * tau)

    grads = [partial(j) for j in range(n)]
    divergence = sum(grads[j][0, j] for j in range(n))
    trace_grad = np.trace(grads[0])
    return float(divergence - trace_grad)


def adm_mass(metric: ProfileMetric, end: str = "outer",
             levels: int = RICHARDSON_LEVELS) -> AdmMassResult:
    """ADM mass of the asymptotically flat end.

    Primary: Richardson extrapolation (ratio 2 in the area radius) of the
    Misner-Sharp mass. Cross-check: the coordinate flux integral of
    g_ij = delta_ij + (h'^{-2} - 1) x_i x_j / |x|^2, extrapolated the same way.
    """
    if end != "outer" or not metric.is_asymptotically_flat:
        raise AdmMassError(f"end '{end}' of {metric.name} is not flagged asymptotically_flat")
    n, omega = metric.n, metric.sphere.omega

    # monotone tail of the end, where h is a valid chart radius
    increasing = np.diff(metric.h) > 0
    start = len(increasing)
    while start > 0 and increasing[start - 1]:
        start -= 1
    h_tail = metric.h[start:]
    ms_tail = misner_sharp_samples(metric)[start:]
    f_tail = metric.dh[start:] ** -2 - 1.0

    r_top = h_tail[-1] / 1.01
    usable = int(np.floor(np.log2(r_top / (h_tail[0] * 1.01)))) + 1
    levels = min(levels, usable)
    if levels < 2:
        raise AdmMassError(f"{metric.name}: asymptotic region too short for extrapolation")
    radii = [r_top / 2 ** k for k in reversed(range(levels))]

    ms_spline = CubicSpline(h_tail, ms_tail)
    f_spline = CubicSpline(h_tail, f_tail)
    ms_values = [float(ms_spline(r)) for r in radii]
    coeff = 1.0 / (2.0 * (n - 1) * omega)
    flux_values = [coeff * omega * r ** (n - 1) * _flux_integrand(n, lambda x: float(f_spline(x)), r)
                   for r in radii]

    primary, corrections = _extrapolate(ms_values, "Misner-Sharp extrapolation")
    crosscheck, _ = _extrapolate(flux_values, "flux extrapolation")
    result = AdmMassResult(primary, crosscheck, radii, ms_values, flux_values, corrections)
    logger.debug(f"ADM {metric.name}: primary={primary:.10g} flux={crosscheck:.10g}")
    return result
