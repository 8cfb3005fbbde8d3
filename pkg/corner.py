#!/usr/bin/env python3
"""
角點平滑 - Metrics with a corner along a coordinate sphere and their
two-scale mollification.

Features:
1. Mollifier: C^inf bump (or user CSV) with reference tables for its
   CDF and first two antiderivatives
2. CornerMetric: two profiles glued at s0 with continuous h and a jump in h'
3. miao_smooth: h' is mollified across the jump at scale delta^2/100, the
   second-derivative jump at scale delta/2, and two bumps in
   delta/2 < |t| < delta restore h exactly outside U_delta
4. Diagnostics: C0 distance, spike integral, annulus sup, negative part
5. Graded grids and preset sides (flat ball, cylinder, Schwarzschild)
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate as sp_integrate

from config import MIN_SPIKE_SAMPLES, MOLLIFIER_RESOLUTION, OUTER_RADIUS_FACTOR, POLE_OFFSET
from errors import CornerError
from geometry import integrate, negative_part, scalar_curvature_samples
from profiles import EndFlag, ProfileMetric, SphereConstants, graded_offsets

logger = logging.getLogger(__name__)


def bump(x: np.ndarray) -> np.ndarray:
    """exp(-1/(1-x^2)) on (-1, 1), zero elsewhere (unnormalized)."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    out = np.zeros_like(x)
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def smooth_transition(x: np.ndarray) -> np.ndarray:
    """Non-analytic smooth step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        left = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        right = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return left / (left + right)


class Mollifier:
    """Nonnegative unit-mass kernel on (-1, 1) with zero first moment.

    Keeps tables of phi, its CDF Phi, Lam = int Phi and Lam2 = int Lam on a
    uniform reference grid; beyond x = 1 the antiderivatives continue as
    Lam(x) = x and Lam2(x) = Lam2(1) + (x - 1) + (x - 1)^2 / 2.
    """

    def __init__(self, x: np.ndarray, phi: np.ndarray, name: str = "bump",
                 analytic_norm: Optional[float] = None):
        self.name = name
        self.x = np.asarray(x, dtype=float)
        self.phi = np.asarray(phi, dtype=float)
        self._norm = analytic_norm
        if np.any(self.phi < 0):
            raise CornerError(f"mollifier '{name}' takes negative values")
        if self.x[0] < -1.0 - 1e-12 or self.x[-1] > 1.0 + 1e-12:
            raise CornerError(f"mollifier '{name}' samples extend beyond [-1, 1]")
        mass = sp_integrate.trapezoid(self.phi, self.x)
        if abs(mass - 1.0) > 1e-8:
            raise CornerError(f"mollifier '{name}' has integral {mass:.12g}, expected 1")
        moment = sp_integrate.trapezoid(self.x * self.phi, self.x)
        if abs(moment) > 1e-8:
            raise CornerError(f"mollifier '{name}' is not centred (first moment {moment:.3e})")
        self.cdf = sp_integrate.cumulative_trapezoid(self.phi, self.x, initial=0.0)
        self.cdf /= self.cdf[-1]
        self.ramp = sp_integrate.cumulative_trapezoid(self.cdf, self.x, initial=0.0)
        self.ramp2 = sp_integrate.cumulative_trapezoid(self.ramp, self.x, initial=0.0)
        self.dphi = np.gradient(self.phi, self.x)

    @classmethod
    def builtin(cls, resolution: int = MOLLIFIER_RESOLUTION) -> "Mollifier":
        x = np.linspace(-1.0, 1.0, resolution)
        raw = bump(x)
        norm = sp_integrate.trapezoid(raw, x)
        return cls(x, raw / norm, "bump", analytic_norm=norm)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "Mollifier":
        """Two columns (x, phi) with a header row, x inside [-1, 1]."""
        path = Path(path)
        try:
            frame = pd.read_csv(path)
        except (OSError, pd.errors.ParserError) as e:
            raise CornerError(f"cannot read mollifier {path}: {e}")
        if frame.shape[1] != 2:
            raise CornerError(f"{path}: expected columns (x, phi)")
        x, phi = frame.iloc[:, 0].to_numpy(float), frame.iloc[:, 1].to_numpy(float)
        if phi[0] != 0.0 or phi[-1] != 0.0:
            raise CornerError(f"{path}: mollifier must vanish at the ends of its support")
        return cls(x, phi, path.stem)

    # -- evaluation ------------------------------------------------------

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self._norm is not None:
            return bump(x) / self._norm
        return np.interp(x, self.x, self.phi, left=0.0, right=0.0)

    def density_derivative(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self._norm is not None:
            inside = np.abs(x) < 1.0
            out = np.zeros_like(x)
            xi = x[inside]
            out[inside] = bump(xi) / self._norm * (-2.0 * xi / (1.0 - xi ** 2) ** 2)
            return out
        return np.interp(x, self.x, self.dphi, left=0.0, right=0.0)

    def cumulative(self, x: np.ndarray) -> np.ndarray:
        return np.interp(x, self.x, self.cdf, left=0.0, right=1.0)

    def ramp_at(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inner = np.interp(x, self.x, self.ramp, left=0.0)
        return np.where(x > 1.0, self.ramp[-1] + (x - 1.0), inner)

    def ramp2_at(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inner = np.interp(x, self.x, self.ramp2, left=0.0)
        beyond = self.ramp2[-1] + self.ramp[-1] * (x - 1.0) + 0.5 * (x - 1.0) ** 2
        return np.where(x > 1.0, beyond, inner)


@dataclass(frozen=True, eq=False)
class CornerMetric:
    left: ProfileMetric
    right: ProfileMetric
    s0: float

    def __post_init__(self):
        if self.left.n != self.right.n:
            raise CornerError("both sides of a corner need the same dimension")
        if abs(self.left.grid[-1] - self.s0) > 1e-12 or abs(self.right.grid[0] - self.s0) > 1e-12:
            raise CornerError(f"sides must meet at s0={self.s0}")
        _check_interface(self.left, self.right)

    @property
    def n(self) -> int:
        return self.left.n

    @property
    def grid(self) -> np.ndarray:
        return np.concatenate((self.left.grid, self.right.grid[1:]))

    @property
    def t(self) -> np.ndarray:
        return self.grid - self.s0

    @property
    def interface_radius(self) -> float:
        return float(self.left.h[-1])

    @property
    def interface_area(self) -> float:
        return SphereConstants.for_dimension(self.n).area(self.interface_radius, self.n)

    @property
    def jumps(self) -> Tuple[float, float]:
        """(J, K): jumps of h' and h'' across the interface, right minus left."""
        return (float(self.right.dh[0] - self.left.dh[-1]),
                float(self.right.ddh[0] - self.left.ddh[-1]))

    def as_profile(self) -> ProfileMetric:
        """Glued profile; the interface sample carries the left-side derivatives."""
        l, r = self.left, self.right
        return ProfileMetric(
            self.n, self.grid, np.concatenate((l.h, r.h[1:])),
            (l.end_flags[0], r.end_flags[1]),
            np.concatenate((l.dh, r.dh[1:])), np.concatenate((l.ddh, r.ddh[1:])),
            f"{l.name}|{r.name}", l.exact_derivatives and r.exact_derivatives)

    def max_smoothing_scale(self) -> float:
        return float(min(self.s0 - self.left.grid[0], self.right.grid[-1] - self.s0))


def _check_interface(left: ProfileMetric, right: ProfileMetric):
    hl, hr = left.h[-1], right.h[0]
    if abs(hl - hr) > 1e-10 * max(hl, hr):
        raise CornerError(f"warping mismatch at the interface: h_left={hl!r}, h_right={hr!r}")


def glue(left: ProfileMetric, right: ProfileMetric) -> CornerMetric:
    """Shift `right` so it starts where `left` ends and form the corner."""
    s0 = float(left.grid[-1])
    return CornerMetric(left, right.shifted(s0 - right.grid[0]), s0)


def mean_curvature_gap(corner: CornerMetric) -> Tuple[float, float]:
    """(H_plus, H_minus), both with the normal toward increasing s."""
    _check_interface(corner.left, corner.right)
    n, h = corner.n, corner.interface_radius
    return ((n - 1) * float(corner.right.dh[0]) / h, (n - 1) * float(corner.left.dh[-1]) / h)


def miao_smooth(corner: CornerMetric, delta: float,
                mollifier: Optional[Mollifier] = None) -> ProfileMetric:
    mollifier = mollifier or default_mollifier()
    delta0 = corner.max_smoothing_scale()
    if not 0.0 < delta < delta0:
        raise CornerError(f"delta={delta} outside (0, {delta0:.6g})")
    eta, eps = 0.5 * delta, delta ** 2 / 100.0
    t = corner.t
    for side, sel in (("left", (t < 0) & (t > -eps)), ("right", (t > 0) & (t < eps))):
        if sel.sum() < MIN_SPIKE_SAMPLES:
            raise CornerError(f"grid does not resolve the scale delta^2/100={eps:.3e} on the {side} "
                              f"side ({int(sel.sum())} samples, need {MIN_SPIKE_SAMPLES})")

    base = corner.as_profile()
    h, dh, ddh = base.h.copy(), base.dh.copy(), base.ddh.copy()
    jump1, jump2 = corner.jumps
    lam0, lam1 = float(mollifier.ramp_at(0.0)), float(mollifier.ramp_at(1.0))
    lam2_0, lam2_1 = float(mollifier.ramp2_at(0.0)), float(mollifier.ramp2_at(1.0))
    width = 0.25 * delta
    c_minus = jump2 * eta ** 2 * lam2_0 + jump1 * eps * lam0
    c_plus = jump2 * eta ** 2 * (lam2_1 - lam2_0 - 0.5) + jump1 * eps * (lam1 - lam0 - 1.0)

    nl = corner.left.size
    left_idx = np.nonzero((t > -delta) & (t < 0))[0]
    right_idx = np.nonzero((t >= 0) & (t < delta))[0]

    # left: D = K*Ramp_eta + J*Phi_eps - c_minus * bump centred at -3 delta/4
    tl = t[left_idx]
    hl, dhl, ddhl = corner.left.h[left_idx], corner.left.dh[left_idx], corner.left.ddh[left_idx]
    xb = (tl + 0.75 * delta) / width
    h[left_idx] = hl - (jump2 * eta ** 2 * (lam2_0 - mollifier.ramp2_at(tl / eta))
                        + jump1 * eps * (lam0 - mollifier.ramp_at(tl / eps))
                        - c_minus * (1.0 - mollifier.cumulative(xb)))
    dh[left_idx] = (dhl + jump2 * eta * mollifier.ramp_at(tl / eta)
                    + jump1 * mollifier.cumulative(tl / eps)
                    - c_minus * mollifier.density(xb) / width)
    ddh[left_idx] = (ddhl + jump2 * mollifier.cumulative(tl / eta)
                     + jump1 * mollifier.density(tl / eps) / eps
                     - c_minus * mollifier.density_derivative(xb) / width ** 2)

    # right: D = K*(Ramp_eta - t) + J*(Phi_eps - 1) - c_plus * bump centred at 3 delta/4
    tr = t[right_idx]
    ridx = right_idx - (nl - 1)
    hr, dhr, ddhr = corner.right.h[ridx], corner.right.dh[ridx], corner.right.ddh[ridx]
    xb = (tr - 0.75 * delta) / width
    h[right_idx] = (hr + jump2 * eta ** 2 * (mollifier.ramp2_at(tr / eta) - lam2_0 - 0.5 * (tr / eta) ** 2)
                    + jump1 * eps * (mollifier.ramp_at(tr / eps) - lam0 - tr / eps)
                    - c_plus * mollifier.cumulative(xb))
    dh[right_idx] = (dhr + jump2 * (eta * mollifier.ramp_at(tr / eta) - tr)
                     + jump1 * (mollifier.cumulative(tr / eps) - 1.0)
                     - c_plus * mollifier.density(xb) / width)
    ddh[right_idx] = (ddhr + jump2 * (mollifier.cumulative(tr / eta) - 1.0)
                      + jump1 * mollifier.density(tr / eps) / eps
                      - c_plus * mollifier.density_derivative(xb) / width ** 2)

    smoothed = ProfileMetric(base.n, base.grid, h, base.end_flags, dh, ddh,
                             f"{base.name}~{delta:g}", base.exact_derivatives)
    logger.debug(f"smoothed {base.name} at delta={delta:g}: J={jump1:.6g}, K={jump2:.6g}")
    return smoothed


_DEFAULT_MOLLIFIER: Optional[Mollifier] = None


def default_mollifier() -> Mollifier:
    global _DEFAULT_MOLLIFIER
    if _DEFAULT_MOLLIFIER is None:
        _DEFAULT_MOLLIFIER = Mollifier.builtin()
    return _DEFAULT_MOLLIFIER


# -- diagnostics ------------------------------------------------------------

def negative_part_l1(smoothed: ProfileMetric,
                     region: Optional[Tuple[float, float]] = None) -> float:
    return integrate(smoothed, negative_part(scalar_curvature_samples(smoothed)), region)


def spike_integral(smoothed: ProfileMetric, s0: float, delta: float) -> float:
    """Integral of R over |t| < delta^2/100."""
    eps = delta ** 2 / 100.0
    return integrate(smoothed, scalar_curvature_samples(smoothed), (s0 - eps, s0 + eps))


def expected_spike_integral(corner: CornerMetric) -> float:
    """Limit of the spike integral: the distributional curvature 2 (H_- - H_+) |Sigma|."""
    h_plus, h_minus = mean_curvature_gap(corner)
    return 2.0 * (h_minus - h_plus) * corner.interface_area


def annulus_sup(smoothed: ProfileMetric, s0: float, delta: float) -> float:
    """max |R| over delta^2/100 < |t| < delta."""
    t = np.abs(smoothed.grid - s0)
    sel = (t > delta ** 2 / 100.0) & (t < delta)
    if not sel.any():
        return 0.0
    return float(np.max(np.abs(scalar_curvature_samples(smoothed)[sel])))


def c0_distance(corner: CornerMetric, smoothed: ProfileMetric) -> float:
    return float(np.max(np.abs(smoothed.h - corner.as_profile().h)))


def c1_norm(smoothed: ProfileMetric, s0: float, delta: float) -> float:
    sel = np.abs(smoothed.grid - s0) < delta
    return float(np.max(np.abs(smoothed.dh[sel])))


def measured_constants(deltas: Sequence[float], values: Sequence[float],
                       power: float = 1.0) -> List[float]:
    """C(delta) = value / delta^power for each sweep entry."""
    return [float(v) / d ** power for d, v in zip(deltas, values)]


def constant_is_stable(constants: Sequence[float], factor: float = 2.0) -> bool:
    """True when no later constant exceeds `factor` times the one measured at the largest delta."""
    finite = [c for c in constants if np.isfinite(c)]
    if not finite:
        return False
    reference = max(abs(finite[0]), 1e-300)
    return all(abs(c) <= factor * reference for c in finite)


# -- preset sides -----------------------------------------------------------

def resolving_spacing(delta_min: float) -> float:
    """Finest grid spacing that resolves the spike scale of the smallest delta."""
    return delta_min ** 2 / 100.0 / 32.0


def flat_ball_side(n: int, radius: float, finest: float, coarsest: float = 0.01) -> ProfileMetric:
    length = radius * (1.0 - POLE_OFFSET)
    grid = radius - graded_offsets(length, finest, coarsest, ratio=1.03)[::-1]
    return ProfileMetric.flat(n, grid=grid, end_flags=(EndFlag.COMPLETE_OTHER, EndFlag.BOUNDARY))


def cylinder_side(n: int, radius: float, length: float, finest: float, coarsest: float = 0.01,
                  inner_flag: EndFlag = EndFlag.COMPLETE_OTHER) -> ProfileMetric:
    grid = -graded_offsets(length, finest, coarsest, ratio=1.03)[::-1]
    return ProfileMetric.cylinder(n, radius, grid=grid, end_flags=(inner_flag, EndFlag.BOUNDARY))


def exterior_r_grid(radius: float, finest: float, outer_factor: float = OUTER_RADIUS_FACTOR,
                    horizon: bool = False) -> np.ndarray:
    """Area-radius samples from the interface out to outer_factor * radius.

    Next to a horizon, arclength grows like sqrt(r - r_h), so the radial
    spacing is squared to keep the arclength spacing near `finest`.
    """
    start = finest ** 2 / radius if horizon else finest
    offsets = graded_offsets(radius * (outer_factor - 1.0), start, np.inf, ratio=1.03)
    return radius + offsets


def exterior_side(n: int, m: float, radius: float, finest: float,
                  outer_factor: float = OUTER_RADIUS_FACTOR) -> ProfileMetric:
    """Scalar-flat AF exterior starting at area radius `radius`: flat (m = 0) or Schwarzschild."""
    af = (EndFlag.BOUNDARY, EndFlag.ASYMPTOTICALLY_FLAT)
    r_grid = exterior_r_grid(radius, finest, outer_factor)
    if m == 0.0:
        return ProfileMetric.flat(n, grid=r_grid, end_flags=af)
    return ProfileMetric.schwarzschild(n, m, radius, r_grid[-1], r_grid=r_grid, end_flags=af)


def preset_corner(n: int, radius: float, outer_mass: float, delta_min: float,
                  inner: str = "flat", outer_factor: float = OUTER_RADIUS_FACTOR,
                  cylinder_length: float = 10.0) -> CornerMetric:
    """Flat ball (or half-cylinder) inside, flat/Schwarzschild exterior outside."""
    finest = resolving_spacing(delta_min)
    if inner == "flat":
        left = flat_ball_side(n, radius, finest)
    elif inner == "cylinder":
        left = cylinder_side(n, radius, cylinder_length, finest)
    else:
        raise CornerError(f"unknown inner preset '{inner}'")
    right = exterior_side(n, outer_mass, radius, finest, outer_factor)
    corner = glue(left, right)
    logger.info(f"🔧 corner {corner.left.name}|{corner.right.name} at h={radius:g}: "
                f"{len(corner.grid)} samples")
    return corner


def sweep_summary(corner: CornerMetric, delta: float, smoothed: ProfileMetric) -> Dict[str, float]:
    """Diagnostics of one smoothing."""
    return {
        "delta": delta,
        "c0_distance": c0_distance(corner, smoothed),
        "c1_norm": c1_norm(smoothed, corner.s0, delta),
        "negative_part_l1": negative_part_l1(smoothed),
        "spike_integral": spike_integral(smoothed, corner.s0, delta),
        "annulus_sup": annulus_sup(smoothed, corner.s0, delta),
    }
