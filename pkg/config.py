#!/usr/bin/env python3
"""
設定 - masscheck configuration

Features:
1. One tolerance table (DEFAULT_TOLERANCES) and a strict profile
2. Numerical knobs with named defaults
3. Environment settings loaded from .env (MASSCHECK_* variables)
"""

import logging
import os
from dataclasses import dataclass, fields, replace
from typing import Dict, Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# Tolerance table. Every verdict in a report names the entry it used.
#
#   curvature          |R| on scalar-flat presets, |R~| cross-check
#   trace_identity     lambda_rad + (n-1) lambda_tan - R
#   mass_primary       ADM extrapolation vs. known mass
#   mass_crosscheck    relative agreement of the two ADM evaluations
#   mass_change        mass-change formula vs. direct ADM of the corrected metric
#   mass_sign          slack allowed on "m~ >= 0"
#   scalar_nonneg      slack allowed on "R~ >= 0"
#   boundary_match     fill-in boundary vs. Bartnik data (h and eta)
#   residual           max-norm residual of the conformal system
#   rayleigh           Rayleigh identity residual of an eigenpair
#   eigen_equation     distance bound from mu to the discrete spectrum, relative to max(1, |mu|)
#   eigen_zero         |mu| treated as zero
#   shield_nonneg      slack on "R >= 0 on U0"
#   rigidity_ricci     max |Ric| for the rigidity signature
#   energy_slack       slack on the energy form of the mass change
#   spike_relative     relative error allowed on the spike integral
DEFAULT_TOLERANCES: Dict[str, float] = {
    "curvature": 1e-8,
    "trace_identity": 1e-10,
    "mass_primary": 1e-6,
    "mass_crosscheck": 1e-4,
    "mass_change": 1e-5,
    "mass_sign": 1e-6,
    "scalar_nonneg": 1e-8,
    "boundary_match": 1e-8,
    "residual": 1e-8,
    "rayleigh": 1e-8,
    "eigen_equation": 1e-4,
    "eigen_zero": 1e-8,
    "shield_nonneg": 1e-10,
    "rigidity_ricci": 1e-6,
    "energy_slack": 1e-6,
    "spike_relative": 0.05,
}

STRICT_TOLERANCES: Dict[str, float] = {
    **DEFAULT_TOLERANCES,
    "curvature": 1e-10,
    "mass_crosscheck": 1e-5,
    "mass_change": 1e-6,
    "mass_sign": 1e-8,
    "scalar_nonneg": 1e-10,
    "residual": 1e-10,
    "rayleigh": 1e-10,
    "eigen_equation": 1e-5,
    "eigen_zero": 1e-9,
    "spike_relative": 0.02,
}

TOLERANCE_PROFILES = {"default": DEFAULT_TOLERANCES, "strict": STRICT_TOLERANCES}

# Numerical knobs
AF_SLOPE_THRESHOLD = 1e-3        # |1 - h'| at the last sample of an AF end
AF_SECANT_THRESHOLD = 1e-2       # |dh/ds - 1| averaged over the last decade
RICHARDSON_LEVELS = 4            # radii h_N, h_N/2, ... used by the ADM extrapolation
RICHARDSON_DIVERGENCE = 10.0     # growth factor of successive corrections treated as divergence
SHIELD_ALPHA_MARGIN = 0.05       # alpha = (1 + margin) * 4 / (kappa * D1)
MOLLIFIER_RESOLUTION = 20001     # reference samples of the built-in bump on [-1, 1]
OUTER_RADIUS_FACTOR = 1000.0     # outer truncation radius relative to the corner radius
WEIGHT_CAP = 1e6                 # |h| above this is stored as the +-inf sentinel
MIN_SPIKE_SAMPLES = 8            # grid samples required inside |t| < delta^2/100 per side
POLE_OFFSET = 1e-4               # a regular centre starts at s = POLE_OFFSET * radius


@dataclass(frozen=True)
class Tolerances:
    curvature: float
    trace_identity: float
    mass_primary: float
    mass_crosscheck: float
    mass_change: float
    mass_sign: float
    scalar_nonneg: float
    boundary_match: float
    residual: float
    rayleigh: float
    eigen_equation: float
    eigen_zero: float
    shield_nonneg: float
    rigidity_ricci: float
    energy_slack: float
    spike_relative: float

    def overridden(self, overrides: Optional[Dict[str, float]]) -> "Tolerances":
        if not overrides:
            return self
        known = {f.name for f in fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise KeyError(f"unknown tolerance keys: {', '.join(unknown)}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})

    def as_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def get_tolerances(profile: str = "default",
                   overrides: Optional[Dict[str, float]] = None) -> Tolerances:
    if profile not in TOLERANCE_PROFILES:
        raise KeyError(f"unknown tolerance profile '{profile}' (expected strict or default)")
    return Tolerances(**TOLERANCE_PROFILES[profile]).overridden(overrides)


@dataclass(frozen=True)
class Settings:
    jobs: int = 1
    out_dir: str = "masscheck_out"
    tolerance_profile: str = "default"
    log_level: str = "INFO"

    @classmethod
    def from_env(cls) -> "Settings":
        """Read MASSCHECK_* variables, after loading a .env file if present."""
        load_dotenv()
        jobs_raw = os.getenv("MASSCHECK_JOBS", "1")
        try:
            jobs = max(1, int(jobs_raw))
        except ValueError:
            logger.warning(f"⚠️ ignoring MASSCHECK_JOBS={jobs_raw!r}, using 1")
            jobs = 1
        return cls(
            jobs=jobs,
            out_dir=os.getenv("MASSCHECK_OUT", cls.out_dir),
            tolerance_profile=os.getenv("MASSCHECK_TOLERANCE_PROFILE", cls.tolerance_profile),
            log_level=os.getenv("MASSCHECK_LOG_LEVEL", cls.log_level).upper(),
        )
