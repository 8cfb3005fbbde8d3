#!/usr/bin/env python3
"""
錯誤類型 - masscheck exception hierarchy

Every operation raises a subclass of MassCheckError so the pipelines can
tell a numerical finding (an unsolvable conformal problem) from a broken input.
"""

from pathlib import Path
from typing import Optional, Union


class MassCheckError(Exception):
    """Base class for all masscheck errors."""


class ProfileError(MassCheckError):
    """A profile metric violates its construction invariants."""


class GeometryError(MassCheckError):
    """Bad grid index, range or orientation."""


class AdmMassError(MassCheckError):
    """The ADM mass cannot be evaluated on the requested end."""


class BartnikError(MassCheckError):
    """Invalid Bartnik data or extension parameters."""


class CornerError(MassCheckError):
    """Corner mismatch, bad smoothing scale or bad mollifier."""


class ConformalSolveError(MassCheckError):
    """The conformal problem is unsolvable at this size.

    Raised when the discrete system is singular or the solution is not
    positive. Pipelines record it as a finding and move on.
    """

    def __init__(self, reason: str, details: Optional[dict] = None):
        super().__init__(f"unsolvable at this size: {reason}")
        self.reason = reason
        self.details = details or {}


class WeightedNormError(MassCheckError):
    """Weighted norm exponents out of range."""


class ShieldError(MassCheckError):
    """Malformed shield nesting or a weight with no valid barrier."""


class EigenError(MassCheckError):
    """Degenerate eigenvalue problem."""


class ScenarioError(MassCheckError):
    """Scenario file rejected, with a line-numbered diagnostic."""

    def __init__(self, message: str, path: Optional[Union[str, Path]] = None,
                 line: Optional[int] = None):
        self.message = message
        self.path = str(path) if path is not None else "<scenario>"
        self.line = line
        location = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{location}: {message}")


class PotentialError(MassCheckError):
    """Potential samples misaligned with the grid or not compactly supported."""


class ReportError(MassCheckError):
    """Report files could not be written."""

    def __init__(self, message: str, path: Union[str, Path]):
        self.path = str(path)
        super().__init__(f"{self.path}: {message}")
