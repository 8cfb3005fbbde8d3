#!/usr/bin/env python3
"""
旋轉對稱度量 - Rotationally symmetric profile metrics

g = ds^2 + h(s)^2 * sigma, sigma the unit round metric on S^{n-1}.

Features:
1. ProfileMetric: grid, warping samples, end annotations, first/second derivatives
2. Presets: flat, cylinder, Schwarzschild (any sign of m), CSV tables
3. 4th-order finite differences on nonuniform grids for table metrics
4. Numerical asymptotic-flatness check on the last decade of the grid
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate, special

from config import AF_SECANT_THRESHOLD, AF_SLOPE_THRESHOLD, POLE_OFFSET
from errors import ProfileError

logger = logging.getLogger(__name__)

MIN_SAMPLES = 16
STENCIL = 5


class EndFlag(Enum):
    ASYMPTOTICALLY_FLAT = "asymptotically_flat"
    COMPLETE_OTHER = "complete_other"
    BOUNDARY = "boundary"
    TRUNCATED_INCOMPLETE = "truncated_incomplete"

    @classmethod
    def parse(cls, value: Union[str, "EndFlag"]) -> "EndFlag":
        if isinstance(value, EndFlag):
            return value
        try:
            return cls(value.strip().lower())
        except ValueError:
            allowed = ", ".join(f.value for f in cls)
            raise ProfileError(f"unknown end flag '{value}' (expected one of {allowed})")


@dataclass(frozen=True)
class SphereConstants:
    """Volume of the unit (n-1)-sphere."""
    omega: float

    @classmethod
    def for_dimension(cls, n: int) -> "SphereConstants":
        return cls(omega=2.0 * math.pi ** (n / 2.0) / special.gamma(n / 2.0))

    def area(self, radius: float, n: int) -> float:
        return self.omega * radius ** (n - 1)


@dataclass(frozen=True)
class AsymptoticFlatness:
    slope_defect: float
    secant_defect: float
    decade_start: float
    ok: bool


def finite_difference_weights(x: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """5-point weights for the `order`-th derivative at every node of a nonuniform grid.

    Returns (stencil indices, weights), both shaped (N, 5). Interior nodes use the
    centred stencil; the first and last two nodes use one-sided stencils.
    """
    n = len(x)
    start = np.clip(np.arange(n) - STENCIL // 2, 0, n - STENCIL)
    idx = start[:, None] + np.arange(STENCIL)[None, :]
    dx = x[idx] - x[:, None]
    # rows: powers 0..4, columns: stencil points
    vander = dx[:, None, :] ** np.arange(STENCIL)[None, :, None]
    rhs = np.zeros((n, STENCIL))
    rhs[:, order] = math.factorial(order)
    weights = np.linalg.solve(vander, rhs[:, :, None])[:, :, 0]
    return idx, weights


def differentiate(x: np.ndarray, y: np.ndarray, order: int = 1) -> np.ndarray:
    idx, weights = finite_difference_weights(x, order)
    return np.sum(weights * y[idx], axis=1)


def _frozen(values: Sequence[float]) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProfileMetric:
    n: int
    grid: np.ndarray
    h: np.ndarray
    end_flags: Tuple[EndFlag, EndFlag]
    dh: Optional[np.ndarray] = None
    ddh: Optional[np.ndarray] = None
    name: str = "table"
    exact_derivatives: bool = False
    af: Optional[AsymptoticFlatness] = field(default=None, repr=False)

    def __post_init__(self):
        if not 3 <= int(self.n) <= 7:
            raise ProfileError(f"dimension n={self.n} outside 3..7")
        grid = _frozen(self.grid)
        h = _frozen(self.h)
        if grid.ndim != 1 or grid.shape != h.shape:
            raise ProfileError("grid and h must be 1D arrays of equal length")
        if len(grid) < MIN_SAMPLES:
            raise ProfileError(f"profile needs at least {MIN_SAMPLES} samples, got {len(grid)}")
        if not np.all(np.diff(grid) > 0):
            raise ProfileError("grid must be strictly increasing")
        if not np.all(np.isfinite(h)) or np.any(h <= 0):
            raise ProfileError("warping function must be positive and finite")
        flags = tuple(EndFlag.parse(f) for f in self.end_flags)
        if len(flags) != 2:
            raise ProfileError("end_flags needs one flag per end (inner, outer)")
        if flags[0] is EndFlag.ASYMPTOTICALLY_FLAT:
            raise ProfileError("an asymptotically flat end must be the outer (increasing s) end")

        exact = self.exact_derivatives and self.dh is not None and self.ddh is not None
        dh = _frozen(self.dh) if self.dh is not None else _frozen(differentiate(grid, h, 1))
        ddh = _frozen(self.ddh) if self.ddh is not None else _frozen(differentiate(grid, h, 2))
        if dh.shape != grid.shape or ddh.shape != grid.shape:
            raise ProfileError("derivative samples must align with the grid")

        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "dh", dh)
        object.__setattr__(self, "ddh", ddh)
        object.__setattr__(self, "end_flags", flags)
        object.__setattr__(self, "exact_derivatives", exact)

        if flags[1] is EndFlag.ASYMPTOTICALLY_FLAT:
            diag = self._check_asymptotic_flatness()
            object.__setattr__(self, "af", diag)
            if not diag.ok:
                raise ProfileError(
                    f"{self.name}: end flagged asymptotically_flat fails the last-decade check "
                    f"(|1-h'|={diag.slope_defect:.3e}, secant defect={diag.secant_defect:.3e})")

    def _check_asymptotic_flatness(self) -> AsymptoticFlatness:
        h_end = self.h[-1]
        decade = np.nonzero(self.h >= h_end / 10.0)[0]
        first = int(decade[0]) if len(decade) else 0
        if first >= len(self.grid) - 1:
            first = len(self.grid) - 2
        slope_defect = abs(1.0 - self.dh[-1])
        secant = (self.h[-1] - self.h[first]) / (self.grid[-1] - self.grid[first])
        secant_defect = abs(secant - 1.0)
        decaying = abs(1.0 - self.dh[first]) >= slope_defect
        ok = slope_defect <= AF_SLOPE_THRESHOLD and secant_defect <= AF_SECANT_THRESHOLD and decaying
        return AsymptoticFlatness(slope_defect, secant_defect, float(self.grid[first]), bool(ok))

    # -- basic accessors -------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.grid)

    @property
    def sphere(self) -> SphereConstants:
        return SphereConstants.for_dimension(self.n)

    @property
    def is_asymptotically_flat(self) -> bool:
        return self.end_flags[1] is EndFlag.ASYMPTOTICALLY_FLAT

    def index_of(self, s: float) -> int:
        """Index of the grid sample closest to s."""
        return int(np.argmin(np.abs(self.grid - s)))

    def mask(self, a: float, b: float) -> np.ndarray:
        lo, hi = min(a, b), max(a, b)
        return (self.grid >= lo) & (self.grid <= hi)

    # -- derived profiles ------------------------------------------------

    def scaled(self, c: float) -> "ProfileMetric":
        """The profile of c^2 g."""
        if c <= 0:
            raise ProfileError("scale factor must be positive")
        return ProfileMetric(self.n, c * self.grid, c * self.h, self.end_flags,
                             self.dh, self.ddh / c, f"{self.name}*{c:g}^2",
                             self.exact_derivatives)

    def restricted(self, a: float, b: float) -> "ProfileMetric":
        keep = self.mask(a, b)
        if keep.sum() < MIN_SAMPLES:
            raise ProfileError(f"restriction to [{a}, {b}] keeps fewer than {MIN_SAMPLES} samples")
        idx = np.nonzero(keep)[0]
        inner = self.end_flags[0] if idx[0] == 0 else EndFlag.BOUNDARY
        outer = self.end_flags[1] if idx[-1] == self.size - 1 else EndFlag.BOUNDARY
        return ProfileMetric(self.n, self.grid[keep], self.h[keep], (inner, outer),
                             self.dh[keep], self.ddh[keep], self.name, self.exact_derivatives)

    def shifted(self, ds: float) -> "ProfileMetric":
        return ProfileMetric(self.n, self.grid + ds, self.h, self.end_flags, self.dh, self.ddh,
                             self.name, self.exact_derivatives)

    def with_flags(self, inner: EndFlag, outer: EndFlag) -> "ProfileMetric":
        return ProfileMetric(self.n, self.grid, self.h, (inner, outer), self.dh, self.ddh,
                             self.name, self.exact_derivatives)

    # -- presets ---------------------------------------------------------

    @classmethod
    def flat(cls, n: int, s_end: float = 1.0, s_start: Optional[float] = None,
             samples: int = 401, grid: Optional[np.ndarray] = None,
             end_flags: Tuple = (EndFlag.COMPLETE_OTHER, EndFlag.BOUNDARY)) -> "ProfileMetric":
        """Euclidean ball or annulus, h(s) = s.

        Without s_start the profile is a ball whose regular centre is
        represented by a tiny pole offset.
        """
        if grid is None:
            start = POLE_OFFSET * s_end if s_start is None else s_start
            grid = np.linspace(start, s_end, samples)
        grid = np.asarray(grid, dtype=float)
        return cls(n, grid, grid.copy(), end_flags, np.ones_like(grid), np.zeros_like(grid),
                   "flat", True)

    @classmethod
    def cylinder(cls, n: int, c: float, s_start: float = 0.0, s_end: float = 1.0,
                 samples: int = 401, grid: Optional[np.ndarray] = None,
                 end_flags: Tuple = (EndFlag.COMPLETE_OTHER, EndFlag.BOUNDARY)) -> "ProfileMetric":
        if c <= 0:
            raise ProfileError("cylinder radius must be positive")
        grid = np.linspace(s_start, s_end, samples) if grid is None else np.asarray(grid, dtype=float)
        return cls(n, grid, np.full_like(grid, c), end_flags, np.zeros_like(grid),
                   np.zeros_like(grid), f"cylinder({c:g})", True)

    @classmethod
    def schwarzschild(cls, n: int, m: float, r_start: float, r_end: float,
                      samples: int = 2001, s_start: float = 0.0,
                      r_grid: Optional[np.ndarray] = None,
                      end_flags: Tuple = (EndFlag.BOUNDARY, EndFlag.ASYMPTOTICALLY_FLAT)
                      ) -> "ProfileMetric":
        """Schwarzschild exterior in arclength gauge, h' = sqrt(1 - 2m h^{2-n}).

        r_start may equal the horizon radius (2m)^{1/(n-2)} for m > 0.
        """
        r = np.geomspace(r_start, r_end, samples) if r_grid is None else np.asarray(r_grid, dtype=float)
        if m > 0:
            r_h = (2.0 * m) ** (1.0 / (n - 2))
            if r[0] < r_h * (1 - 1e-12):
                raise ProfileError(f"r_start={r[0]} lies inside the horizon r_h={r_h}")
        s = s_start + schwarzschild_arclength(n, m, r)
        w = np.clip(1.0 - 2.0 * m * r ** (2.0 - n), 0.0, None)
        dh = np.sqrt(w)
        ddh = m * (n - 2) * r ** (1.0 - n)
        return cls(n, s, r, end_flags, dh, ddh, f"schwarzschild(m={m:g})", True)

    @classmethod
    def table(cls, n: int, s: Sequence[float], h: Sequence[float],
              end_flags: Tuple = (EndFlag.BOUNDARY, EndFlag.BOUNDARY),
              name: str = "table") -> "ProfileMetric":
        return cls(n, np.asarray(s, dtype=float), np.asarray(h, dtype=float), end_flags, name=name)

    @classmethod
    def from_csv(cls, path: Union[str, Path], n: int,
                 end_flags: Tuple = (EndFlag.BOUNDARY, EndFlag.BOUNDARY)) -> "ProfileMetric":
        """Two-column CSV (s, h) with a header row."""
        path = Path(path)
        try:
            frame = pd.read_csv(path)
        except (OSError, pd.errors.ParserError) as e:
            raise ProfileError(f"cannot read profile table {path}: {e}")
        if frame.shape[1] != 2:
            raise ProfileError(f"{path}: expected two columns (s, h), found {frame.shape[1]}")
        s, h = frame.iloc[:, 0].to_numpy(float), frame.iloc[:, 1].to_numpy(float)
        logger.info(f"📥 loaded profile table {path.name}: {len(s)} samples")
        return cls.table(n, s, h, end_flags, name=path.stem)


def schwarzschild_arclength(n: int, m: float, r: np.ndarray) -> np.ndarray:
    """Arclength offsets s(r_i) - s(r_0) along a Schwarzschild exterior."""
    r = np.asarray(r, dtype=float)
    offsets = np.zeros_like(r)
    if m > 0:
        r_h = (2.0 * m) ** (1.0 / (n - 2))

        # r = r_h + x^2 removes the inverse square root at the horizon
        def integrand(x):
            w = -np.expm1(-(n - 2) * np.log1p(x * x / r_h))
            return 2.0 * x / np.sqrt(w)

        x = np.sqrt(np.clip(r - r_h, 0.0, None))
        pieces = [integrate.quad(integrand, x[i], x[i + 1], epsabs=1e-14, epsrel=1e-12)[0]
                  for i in range(len(r) - 1)]
    else:
        def integrand(rr):
            return 1.0 / math.sqrt(1.0 - 2.0 * m * rr ** (2.0 - n))

        pieces = [integrate.quad(integrand, r[i], r[i + 1], epsabs=1e-14, epsrel=1e-12)[0]
                  for i in range(len(r) - 1)]
    offsets[1:] = np.cumsum(pieces)
    return offsets


def graded_offsets(length: float, finest: float, coarsest: float,
                   ratio: float = 1.04) -> np.ndarray:
    """Offsets 0 = t_0 < ... < t_K = length whose spacing grows geometrically
    from `finest` to at most `coarsest`."""
    if not 0 < finest <= coarsest:
        raise ProfileError("graded grid needs 0 < finest <= coarsest")
    offsets = [0.0]
    step = finest
    while offsets[-1] + step < length:
        offsets.append(offsets[-1] + step)
        step = min(step * ratio, coarsest)
    if length - offsets[-1] < 0.5 * step and len(offsets) > 1:
        offsets.pop()
    offsets.append(length)
    return np.asarray(offsets)


PRESET_CATALOGUE: Dict[str, str] = {
    "flat": "h(s) = s; Euclidean ball (regular centre) or annulus; R = 0",
    "cylinder": "h(s) = c; round cylinder; R = (n-1)(n-2)/c^2",
    "schwarzschild": "h'(s)^2 = 1 - 2m h^{2-n}; scalar-flat, AF, ADM mass m (any sign of m)",
    "table": "two-column CSV (s, h) with header; 4th-order finite-difference derivatives",
}
