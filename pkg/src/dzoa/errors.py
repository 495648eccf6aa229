"""Error types raised across the package.

Everything derives from :class:`DzoaError` so callers (and the CLI) can catch
one base class and still tell failures apart by type.
"""

from __future__ import annotations


class DzoaError(Exception):
    """Base class for all errors raised by this package."""


class InvalidEdge(DzoaError):
    """An edge endpoint is out of range, or the edge is a self-loop."""


class DisconnectedGraph(DzoaError):
    """The communication graph is not connected."""


class NumericalFailure(DzoaError):
    """A linear-algebra routine (eigensolve, factorization) did not converge."""


class DimensionMismatch(DzoaError):
    """Array shapes are inconsistent with the problem dimensions."""


class ZeroColumn(DzoaError):
    """A design-matrix column is identically zero and cannot be rescaled."""


class GradientBoundExceeded(DzoaError):
    """A per-sample loss gradient exceeded the certified bound c1."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class NonFiniteIterate(DzoaError):
    """An inner-loop iterate left the finite range (mis-scaled L or alpha0)."""


class IncompleteInbox(DzoaError):
    """An agent is missing a neighbor's message for the current round."""


class NoConvergence(DzoaError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class DomainError(DzoaError):
    """A parameter lies outside its validated range."""


class NegativeBound(DzoaError):
    """A variance/feasibility expression came out non-positive."""


class ZeroReference(DzoaError):
    """The reference solution is zero, so a normalized error is undefined."""


class CheckFailed(DzoaError):
    """An empirical check exceeded its tolerance; carries the measured report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class Infeasible(DzoaError):
    """Step-size calibration has no positive solution."""


class ConfigError(DzoaError):
    """An experiment configuration file is malformed or incomplete."""
