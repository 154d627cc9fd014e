"""Static nonlinearity of the cross-coupled transistor pair.

The differential current through the pair is an odd, bounded sigmoid of the
differential gate voltage, parameterized by the transistor gain k_n and the
tail current I.  Its slope lives in the sector [0, K] with K = sqrt(k_n*I),
which is all the dominance criterion ever consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter


@dataclass(frozen=True)
class SectorNonlinearity:
    """Cross-coupled-pair sigmoid parameters.

    k_n : transistor gain (A/V^2), strictly positive
    I   : tail current (A), nonnegative (I = 0 models the pair switched off)
    """

    k_n: float
    I: float

    def __post_init__(self):
        if not (self.k_n > 0):
            raise InvalidParameter(f"k_n must be positive, got {self.k_n}")
        if not (self.I >= 0):
            raise InvalidParameter(f"tail current must be nonnegative, got {self.I}")

    @property
    def K(self) -> float:
        """Maximum slope sqrt(k_n * I), attained at zero input."""
        return math.sqrt(self.k_n * self.I)

    @property
    def V_sat(self) -> float:
        """Input magnitude sqrt(2I/k_n) beyond which the output saturates at +-I."""
        return math.sqrt(2.0 * self.I / self.k_n)


def phi(nl: SectorNonlinearity, dv):
    """Differential current for differential input voltage dv.

    Accepts a scalar or ndarray.  Odd, bounded by I, continuous at +-V_sat.
    """
    kn, tail = nl.k_n, nl.I
    if isinstance(dv, np.ndarray):
        if tail == 0.0:
            return np.zeros_like(dv, dtype=float)
        inner = np.clip(1.0 - kn * dv * dv / (4.0 * tail), 0.0, 1.0)
        interior = math.sqrt(kn * tail) * dv * np.sqrt(inner)
        return np.where(np.abs(dv) <= nl.V_sat, interior, tail * np.sign(dv))
    dv = float(dv)
    if tail == 0.0:
        return 0.0
    if abs(dv) <= nl.V_sat:
        inner = 1.0 - kn * dv * dv / (4.0 * tail)
        return math.sqrt(kn * tail) * dv * math.sqrt(max(inner, 0.0))
    return tail if dv > 0 else -tail


def phi_derivative(nl: SectorNonlinearity, dv):
    """Slope of phi.  Zero on the saturated branch including the branch points;
    interior values are clamped into [0, K] to preserve the sector condition
    against roundoff at the branch boundary."""
    kn, tail = nl.k_n, nl.I
    K = nl.K
    if isinstance(dv, np.ndarray):
        if tail == 0.0:
            return np.zeros_like(dv, dtype=float)
        u = kn * dv * dv / (4.0 * tail)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = K * (1.0 - 2.0 * u) / np.sqrt(np.maximum(1.0 - u, 1e-300))
        d = np.clip(d, 0.0, K)
        return np.where(np.abs(dv) < nl.V_sat, d, 0.0)
    dv = float(dv)
    if tail == 0.0:
        return 0.0
    if abs(dv) >= nl.V_sat:
        return 0.0
    u = kn * dv * dv / (4.0 * tail)
    d = K * (1.0 - 2.0 * u) / math.sqrt(max(1.0 - u, 1e-300))
    return min(max(d, 0.0), K)


def sector_bounds(nl: SectorNonlinearity) -> tuple[float, float]:
    """Slope sector (0, K) used by the criterion checks; the inverse sector
    lower bound 1/K is derived by the caller."""
    return (0.0, nl.K)
