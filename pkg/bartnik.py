#!/usr/bin/env python3
"""
Brown-York 質量 - Brown-York mass of round Bartnik data and the
rotationally symmetric Shi-Tam extension.

Features:
1. BartnikData with constant or sampled mean curvature (quadrature weights)
2. brown_york: (1/((n-1) omega)) * integral of (H0 - eta), H0 = (n-1)/rho
3. shi_tam_extend: scalar-flat AF exterior u^2 dr^2 + r^2 sigma, u^-2 = 1 - 2c r^{2-n}
4. verify_fill_in_bound: min eta <= lambda
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from config import OUTER_RADIUS_FACTOR
from errors import BartnikError
from geometry import mean_curvature_sphere
from profiles import ProfileMetric, SphereConstants

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BartnikData:
    n: int
    rho: float
    eta: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.rho <= 0:
            raise BartnikError(f"sphere radius must be positive, got {self.rho}")
        eta = np.atleast_1d(np.asarray(self.eta, dtype=float))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if eta.shape != weights.shape:
            raise BartnikError("eta samples and quadrature weights must align")
        if np.any(weights < 0):
            raise BartnikError("quadrature weights must be nonnegative")
        area = self.area
        if abs(weights.sum() - area) > 1e-8 * area:
            raise BartnikError(f"quadrature weights sum to {weights.sum():.12g}, "
                               f"sphere area is {area:.12g}")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "weights", weights)

    @property
    def area(self) -> float:
        return SphereConstants.for_dimension(self.n).area(self.rho, self.n)

    @property
    def h0(self) -> float:
        """Mean curvature of the round sphere of radius rho in Euclidean space."""
        return (self.n - 1) / self.rho

    @property
    def is_constant(self) -> bool:
        return bool(np.ptp(self.eta) == 0.0)

    @classmethod
    def constant(cls, n: int, rho: float, eta: float) -> "BartnikData":
        area = SphereConstants.for_dimension(n).area(rho, n)
        return cls(n, rho, np.array([eta]), np.array([area]))

    @classmethod
    def from_profile(cls, metric: ProfileMetric, i: int) -> "BartnikData":
        """Data of the coordinate sphere at s_i, normal toward increasing s."""
        return cls.constant(metric.n, float(metric.h[i]), mean_curvature_sphere(metric, i, +1))

    @classmethod
    def from_csv(cls, path: Union[str, Path], n: int, rho: float) -> "BartnikData":
        """Variable eta as CSV columns (polar angle, eta, weight) with a header row."""
        path = Path(path)
        try:
            frame = pd.read_csv(path)
        except (OSError, pd.errors.ParserError) as e:
            raise BartnikError(f"cannot read eta samples {path}: {e}")
        if frame.shape[1] != 3:
            raise BartnikError(f"{path}: expected columns (angle, eta, weight)")
        return cls(n, rho, frame.iloc[:, 1].to_numpy(float), frame.iloc[:, 2].to_numpy(float))


def brown_york(data: BartnikData) -> float:
    omega = SphereConstants.for_dimension(data.n).omega
    total = float(np.sum(data.weights * (data.h0 - data.eta)))
    return total / ((data.n - 1) * omega)


def verify_fill_in_bound(data: BartnikData, lam: float) -> Tuple[bool, float]:
    margin = float(lam - np.min(data.eta))
    return margin >= 0.0, margin


@dataclass(frozen=True, eq=False)
class ShiTamExtension:
    r0: float
    c: float
    eta: float
    profile: ProfileMetric

    @property
    def boundary_mean_curvature(self) -> float:
        return mean_curvature_sphere(self.profile, 0, +1)


def shi_tam_mass_parameter(n: int, r0: float, eta: float) -> float:
    return 0.5 * r0 ** (n - 2) * (1.0 - (eta * r0 / (n - 1)) ** 2)


def _extension_profile(n: int, r0: float, c: float, s_start: float, samples: int,
                       r_end: Optional[float], r_grid: Optional[np.ndarray]) -> ProfileMetric:
    r_end = OUTER_RADIUS_FACTOR * r0 if r_end is None else r_end
    return ProfileMetric.schwarzschild(n, c, r0, r_end, samples=samples, s_start=s_start,
                                       r_grid=r_grid)


def shi_tam_extend(n: int, r0: float, eta: float, samples: int = 2001,
                   s_start: float = 0.0, r_end: Optional[float] = None,
                   r_grid: Optional[np.ndarray] = None) -> ShiTamExtension:
    if r0 <= 0:
        raise BartnikError(f"r0 must be positive, got {r0}")
    if eta <= 0:
        raise BartnikError(f"Shi-Tam extension needs eta > 0, got {eta}")
    c = shi_tam_mass_parameter(n, r0, eta)
    profile = _extension_profile(n, r0, c, s_start, samples, r_end, r_grid)
    logger.info(f"🧩 Shi-Tam extension r0={r0:g} eta={eta:g} -> c={c:.10g}")
    return ShiTamExtension(r0, c, eta, profile)


def horizon_extension(n: int, r0: float, samples: int = 2001, s_start: float = 0.0,
                      r_end: Optional[float] = None,
                      r_grid: Optional[np.ndarray] = None) -> ShiTamExtension:
    """The eta -> 0+ limit: Schwarzschild exterior whose horizon is the boundary sphere."""
    if r0 <= 0:
        raise BartnikError(f"r0 must be positive, got {r0}")
    c = 0.5 * r0 ** (n - 2)
    profile = _extension_profile(n, r0, c, s_start, samples, r_end, r_grid)
    logger.info(f"🧩 horizon extension r0={r0:g} -> c={c:.10g}")
    return ShiTamExtension(r0, c, 0.0, profile)
