#!/usr/bin/env python3
"""
曲率屏障 - Scalar curvature shields and mu-bubble weights on 1D bands

Features:
1. ShieldSpec: nested intervals U0 > U1 > U2 with kappa and the mean-curvature bound
2. check_shield: the four shield items, one CheckResult each
3. build_mu_weight: tan profile on the band, Case 1 / Case 2 profiles on the shield
4. verify_weight and barrier_sign: the mu-condition R + h^2 - 2|grad h| > 0
   and the barrier at the outer boundary of U0

A shield endpoint shared by U0, U1 and U2 is an end of the region (or its
junction with the band), not part of the boundary of U0.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from checks import CheckResult, check
from config import SHIELD_ALPHA_MARGIN, WEIGHT_CAP
from corner import Mollifier, default_mollifier
from errors import ShieldError
from geometry import mean_curvature_samples, scalar_curvature_samples
from profiles import ProfileMetric

logger = logging.getLogger(__name__)

Interval = Tuple[float, float]


def shield_condition(kappa: float, d1: float, eta: float, d0: float) -> Tuple[bool, float]:
    """Item (4): D0 > 4/(kappa D1) - 2/eta. Returns (holds, threshold)."""
    threshold = 4.0 / (kappa * d1) - 2.0 / eta
    return d0 > threshold, threshold


@dataclass(frozen=True)
class ShieldSpec:
    u0: Interval
    u1: Interval
    u2: Interval
    kappa: float
    eta_bound: float

    def __post_init__(self):
        for name, (a, b) in (("u0", self.u0), ("u1", self.u1), ("u2", self.u2)):
            if not a < b:
                raise ShieldError(f"{name}=[{a}, {b}] is empty")
        if self.kappa <= 0 or self.eta_bound <= 0:
            raise ShieldError("kappa and eta must be positive")
        for side in (0, 1):
            ends = [self.u0[side], self.u1[side], self.u2[side]]
            if ends[0] == ends[1] == ends[2]:
                continue
            ordered = ends if side == 0 else [-e for e in ends]
            if not ordered[0] < ordered[1] < ordered[2]:
                raise ShieldError(f"malformed nesting on the {'left' if side == 0 else 'right'} "
                                  f"side: U0={self.u0}, U1={self.u1}, U2={self.u2}")
        if not self.open_sides:
            raise ShieldError("U0 has no boundary: every endpoint is shared with U2")

    @property
    def open_sides(self) -> List[int]:
        """Sides (0 = left, 1 = right) where U0 has a boundary point."""
        return [side for side in (0, 1)
                if not (self.u0[side] == self.u1[side] == self.u2[side])]

    @property
    def boundary_points(self) -> List[Tuple[float, int]]:
        """(s, orientation of the normal pointing into U0) for each boundary point of U0."""
        return [(self.u0[side], +1 if side == 0 else -1) for side in self.open_sides]

    @property
    def d0(self) -> float:
        return min(abs(self.u1[side] - self.u0[side]) for side in self.open_sides)

    @property
    def d1(self) -> float:
        return min(abs(self.u2[side] - self.u1[side]) for side in self.open_sides)

    def scaled(self, c: float) -> "ShieldSpec":
        """The same shield for the metric c^2 g."""
        def stretch(iv: Interval) -> Interval:
            return c * iv[0], c * iv[1]
        return ShieldSpec(stretch(self.u0), stretch(self.u1), stretch(self.u2),
                          self.kappa / c ** 2, self.eta_bound / c)


@dataclass
class ShieldReport:
    items: List[CheckResult]
    d0: float
    d1: float

    @property
    def verdict(self) -> bool:
        return all(item.passed for item in self.items)


def _in_grid(metric: ProfileMetric, iv: Interval):
    lo, hi = metric.grid[0] - 1e-12, metric.grid[-1] + 1e-12
    if iv[0] < lo or iv[1] > hi:
        raise ShieldError(f"interval {iv} outside grid [{metric.grid[0]}, {metric.grid[-1]}]")


def annulus_mask(metric: ProfileMetric, spec: ShieldSpec) -> np.ndarray:
    """Samples of closure(U1) minus U2, on the open sides only."""
    s = metric.grid
    mask = np.zeros(metric.size, dtype=bool)
    for side in spec.open_sides:
        lo, hi = sorted((spec.u1[side], spec.u2[side]))
        mask |= (s >= lo) & (s <= hi)
    return mask


def check_shield(metric: ProfileMetric, spec: ShieldSpec, tol: float = 1e-10) -> ShieldReport:
    for iv in (spec.u0, spec.u1, spec.u2):
        _in_grid(metric, iv)
    R = scalar_curvature_samples(metric)
    subject = f"shield on {metric.name}"

    on_u0 = metric.mask(*spec.u0)
    min_u0 = float(R[on_u0].min())
    item1 = check(subject, "item 1: R >= 0 on U0", min_u0 >= -tol,
                  f"min R on U0 = {min_u0:.6g}", min_R=min_u0, tolerance=tol)

    ring = annulus_mask(metric, spec)
    min_ring = float(R[ring].min()) if ring.any() else float("inf")
    item2 = check(subject, "item 2: R >= kappa on U1 minus U2", min_ring >= spec.kappa - tol,
                  f"min R = {min_ring:.6g}, kappa = {spec.kappa:g}", min_R=min_ring,
                  kappa=spec.kappa)

    H = mean_curvature_samples(metric, +1)
    values = [orientation * float(np.interp(s, metric.grid, H))
              for s, orientation in spec.boundary_points]
    max_h = max(values)
    item3 = check(subject, "item 3: H of the boundary of U0 <= eta", max_h <= spec.eta_bound + tol,
                  f"max H = {max_h:.6g}, eta = {spec.eta_bound:g}", max_H=max_h,
                  eta=spec.eta_bound)

    holds, threshold = shield_condition(spec.kappa, spec.d1, spec.eta_bound, spec.d0)
    item4 = check(subject, "item 4: D0 > 4/(kappa D1) - 2/eta", holds,
                  f"D0 = {spec.d0:.6g}, threshold = {threshold:.6g}", D0=spec.d0, D1=spec.d1,
                  threshold=threshold)
    return ShieldReport([item1, item2, item3, item4], spec.d0, spec.d1)


def check_fill_in_placement(fill: ProfileMetric, spec: ShieldSpec, tol: float = 1e-9) -> CheckResult:
    """填充區檢查 - the shield must wrap the boundary sphere and stop short of the truncated end.

    Sigma is the last grid sample. U0, U1, U2 share their closed right end there, and the
    incomplete inner end (first sample) lies outside the closure of U0.
    """
    sigma, inner = float(fill.grid[-1]), float(fill.grid[0])
    scale = tol * max(1.0, abs(sigma), abs(inner))
    closed_at_sigma = 1 not in spec.open_sides and abs(spec.u2[1] - sigma) <= scale
    inner_outside = inner < spec.u0[0] - scale
    problems = []
    if not closed_at_sigma:
        problems.append(f"U2={spec.u2} does not close at Sigma (s={sigma:g})")
    if not inner_outside:
        problems.append(f"truncated end s={inner:g} lies in the closure of U0={spec.u0}")
    message = "; ".join(problems) or f"Sigma at s={sigma:g} in U2, truncated end s={inner:g} beyond U0"
    return check(f"shield on {fill.name}", "shield placement: Sigma in U2, incomplete end outside U0",
                 not problems, message, sigma=sigma, inner_end=inner)


# -- mu-bubble weight ---------------------------------------------------------

@dataclass(frozen=True)
class BandCoordinate:
    """rho(s) = value_at_end + slope * (s - end) on [start, end].

    The shield region lies on the increasing-s side of the band.
    """
    start: float
    end: float
    slope: float
    value_at_end: float = 0.0

    def rho(self, s: np.ndarray) -> np.ndarray:
        return self.value_at_end + self.slope * (np.asarray(s, dtype=float) - self.end)


@dataclass(eq=False)
class MuWeight:
    h: np.ndarray
    grad: Optional[np.ndarray] = None
    L: float = float("nan")
    alpha: float = float("nan")
    case: int = 0
    h_k: float = float("nan")
    sign: int = 1
    regions: Dict[str, Interval] = field(default_factory=dict)

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.h)


def default_alpha(spec: ShieldSpec, margin: float = SHIELD_ALPHA_MARGIN) -> float:
    return (1.0 + margin) * 4.0 / (spec.kappa * spec.d1)


def tan_profile(rho: np.ndarray, slope: float, kappa: float, L: float) -> Tuple[np.ndarray, np.ndarray]:
    """h = -sqrt(kappa) tan(sqrt(kappa) rho / (2L)) and |grad h|, with +-inf past +-pi/2."""
    theta = math.sqrt(kappa) * np.asarray(rho, dtype=float) / (2.0 * L)
    h = np.full(theta.shape, np.nan)
    grad = np.full(theta.shape, np.nan)
    inside = np.abs(theta) < math.pi / 2
    h[inside] = -math.sqrt(kappa) * np.tan(theta[inside])
    grad[inside] = kappa * abs(slope) / (2.0 * L) / np.cos(theta[inside]) ** 2
    h[theta >= math.pi / 2] = -np.inf
    h[theta <= -math.pi / 2] = np.inf
    return h, grad


def _ramp(s: np.ndarray, start: float, length: float, h_from: float, h_to: float,
          mollifier: Mollifier) -> Tuple[np.ndarray, np.ndarray]:
    """Monotone ramp from h_from to h_to over [start, start + length].

    Its slope never exceeds (2/alpha)/D1 when |h_to| = 2/alpha and h_from has
    the same sign: a linear ramp whose corners are rounded inside the interval.
    """
    change = h_to - h_from
    limit = abs(h_to) / length
    if change == 0.0:
        return np.full(s.shape, h_from), np.zeros(s.shape)
    shoulder = min(0.25 * length, 0.5 * length * (1.0 - abs(change) / (limit * length)))
    x = s - start
    if shoulder <= 1e-12 * length:
        return h_from + change * x / length, np.full(s.shape, abs(change) / length)
    rate = change / (length - 2.0 * shoulder)
    w = shoulder

    def ramp_w(t):
        return w * mollifier.ramp_at(t / w)

    h = h_from + rate * (ramp_w(x - w) - ramp_w(x - (length - w)))
    grad = np.abs(rate) * (mollifier.cumulative((x - w) / w) - mollifier.cumulative((x - length + w) / w))
    return h, np.abs(grad)


def build_mu_weight(metric: ProfileMetric, spec: ShieldSpec, L: float, kappa_band: float,
                    band: BandCoordinate, alpha: Optional[float] = None,
                    mollifier: Optional[Mollifier] = None) -> MuWeight:
    mollifier = mollifier or default_mollifier()
    if L <= 0 or kappa_band <= 0:
        raise ShieldError("L and kappa_band must be positive")
    if abs(band.slope) > L:
        logger.warning(f"⚠️ band coordinate slope {abs(band.slope):g} exceeds the declared L={L:g}")
    if spec.open_sides != [1] or abs(spec.u0[0] - band.end) > 1e-12:
        raise ShieldError("the shield must start at the band end and open toward increasing s")
    s, R = metric.grid, scalar_curvature_samples(metric)
    on_band = metric.mask(band.start, band.end)
    if R[on_band].min() < kappa_band:
        raise ShieldError(f"band has min R = {R[on_band].min():.6g} < kappa_band = {kappa_band:g}")

    alpha = default_alpha(spec) if alpha is None else alpha
    d0, d1 = spec.d0, spec.d1
    b2, b1, b0 = spec.u2[1], spec.u1[1], spec.u0[1]

    h = np.full(metric.size, np.nan)
    grad = np.full(metric.size, np.nan)
    h[on_band], grad[on_band] = tan_profile(band.rho(s[on_band]), band.slope, kappa_band, L)
    h_k = float(tan_profile(np.array([band.rho(band.end)]), band.slope, kappa_band, L)[0][0])
    if not np.isfinite(h_k):
        raise ShieldError("band weight is already infinite at the shield junction")
    sign = 1 if h_k >= 0 else -1
    edge = 2.0 / alpha

    past_band = s > band.end
    core = past_band & (s <= b2)
    ring = (s > b2) & (s <= b1)
    outer = (s > b1) & (s <= b0)
    rho_k = s[outer] - b1
    with np.errstate(divide="ignore"):
        blow = sign * 2.0 / (alpha - rho_k)
    outer_grad = 2.0 / (alpha - rho_k) ** 2

    if abs(h_k) < edge:
        case = 1
        h[core], grad[core] = h_k, 0.0
        h[ring], grad[ring] = _ramp(s[ring], b2, d1, h_k, sign * edge, mollifier)
        h[outer] = blow
    else:
        case = 2
        h[core | ring], grad[core | ring] = h_k, 0.0
        h[outer] = blow + (h_k - sign * edge)
    grad[outer] = outer_grad
    beyond = rho_k >= alpha
    if beyond.any():
        outer_idx = np.nonzero(outer)[0][beyond]
        h[outer_idx] = sign * np.inf
        grad[outer_idx] = np.nan
    big = np.isfinite(h) & (np.abs(h) > WEIGHT_CAP)
    h[big] = np.sign(h[big]) * np.inf
    grad[big] = np.nan

    weight = MuWeight(h, grad, L, alpha, case, h_k, sign,
                      {"band": (band.start, band.end), "U2": (band.end, b2),
                       "U1-U2": (b2, b1), "U0-U1": (b1, b0)})
    if alpha > d0:
        report = barrier_sign(metric, spec, weight)
        if report.value >= 0.0:
            raise ShieldError(f"alpha={alpha:.6g} >= D0={d0:.6g} leaves h finite on the boundary "
                              f"of U0 and the barrier fails (H - h = {report.value:.6g})")
    logger.info(f"🧮 mu-weight case {case}: h_k={h_k:.6g}, alpha={alpha:.6g}, D0={d0:g}, D1={d1:g}")
    return weight


@dataclass
class WeightCertificate:
    minimum: float
    location: float
    certified: bool


def verify_weight(metric: ProfileMetric, weight: MuWeight) -> WeightCertificate:
    """Minimum of R + h^2 - 2|grad h| over the finite-h samples."""
    h = np.asarray(weight.h, dtype=float)
    finite = np.isfinite(h)
    grad = weight.grad
    if grad is None:
        grad = np.abs(np.gradient(np.where(finite, h, 0.0), metric.grid))
    grad = np.asarray(grad, dtype=float)
    usable = finite & np.isfinite(grad)
    if not usable.any():
        return WeightCertificate(float("nan"), float("nan"), False)
    values = scalar_curvature_samples(metric) + h ** 2 - 2.0 * np.abs(grad)
    idx = np.nonzero(usable)[0]
    j = idx[int(np.argmin(values[usable]))]
    minimum = float(values[j])
    return WeightCertificate(minimum, float(metric.grid[j]), minimum > 0.0)


def barrier_bound(eta: float, alpha: float, d0: float) -> Tuple[str, Optional[float]]:
    """Bound eta - 2/(alpha - D0) on H - h at the boundary of U0, or the interior barrier."""
    if alpha <= d0:
        return "interior_infinity", None
    return "finite", eta - 2.0 / (alpha - d0)


@dataclass
class BarrierReport:
    kind: str
    value: Optional[float]
    bound: Optional[float]

    @property
    def certified(self) -> bool:
        if self.kind == "interior_infinity":
            return True
        return self.value is not None and self.value < 0.0


def barrier_sign(metric: ProfileMetric, spec: ShieldSpec, weight: MuWeight) -> BarrierReport:
    """H (normal into U0) minus the sign-adjusted weight at the outer boundary of U0."""
    kind, bound = barrier_bound(spec.eta_bound, weight.alpha, spec.d0)
    s_b, orientation = spec.boundary_points[-1]
    j = metric.index_of(s_b)
    if kind == "interior_infinity" or not np.isfinite(weight.h[j]):
        return BarrierReport("interior_infinity", None, bound)
    H = orientation * float(np.interp(s_b, metric.grid, mean_curvature_samples(metric, +1)))
    value = H - weight.sign * float(weight.h[j])
    return BarrierReport("finite", value, bound)
