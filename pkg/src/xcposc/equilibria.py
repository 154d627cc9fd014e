"""Closed-loop equilibria, positive-feedback root locus, instability tuning.

Fixed points of the loop solve (1/G(0)) * dv = phi(dv); the origin is always
one of them and is the only one while the peak slope K stays at or below
1/G(0).  Local stability at each fixed point follows from the roots of
d_G - phi'(dv*) * n_G, the positive-feedback characteristic polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDcGain
from .netfun import LoopFunction
from .poly import Polynomial, find_roots
from .xcp import SectorNonlinearity, phi, phi_derivative

SLOW_ZERO_IMAG_TOL = 1e-7


@dataclass(frozen=True)
class EquilibriumPoint:
    dv: float
    slope_at: float
    local_poles: tuple[complex, ...]
    unstable: bool


@dataclass(frozen=True)
class EquilibriumSet:
    points: tuple[EquilibriumPoint, ...]
    unique: bool
    K_threshold: float  # 1/G(0), inf when G has a zero at the origin


@dataclass(frozen=True)
class RootLocusBranch:
    gains: tuple[float, ...]
    roots_per_gain: tuple[tuple[complex, ...], ...]


@dataclass(frozen=True)
class InstabilityWindow:
    K_min_unstable: float  # inf when no gain in the window destabilizes the origin
    K_max_allowed: float  # 1/G(0)
    feasible: bool
    has_slow_zero: bool
    slow_zeros: tuple[float, ...]


def _closed_loop_poly(loop: LoopFunction, gain: float) -> Polynomial:
    return loop.G.denominator + (-gain) * loop.G.numerator


def _local_poles(loop: LoopFunction, slope: float) -> tuple[complex, ...]:
    charpoly = _closed_loop_poly(loop, slope)
    if charpoly.degree < 1:
        return ()
    return find_roots(charpoly).all_roots()


def _dc_gain(loop: LoopFunction) -> float:
    den0 = loop.G.denominator(0.0).real
    scale = max(abs(c) for c in loop.G.denominator.coeffs)
    if abs(den0) <= 1e-12 * scale:
        raise DegenerateDcGain("G has a pole at s = 0; the fixed-point equation is ill-posed")
    return loop.G.numerator(0.0).real / den0


def find_equilibria(loop: LoopFunction, nl: SectorNonlinearity) -> EquilibriumSet:
    """All fixed points of the loop, each annotated with its local poles.

    Solves the scalar balance on [0, V_sat] by sign-change bracketing, adds
    the closed-form saturated solution dv = G(0)*I when it applies, and
    mirrors to negative dv (the nonlinearity is odd).
    """
    g0 = _dc_gain(loop)
    if g0 < 0:
        raise DegenerateDcGain(f"G(0) = {g0} is negative; passivity assumption violated")
    k_threshold = math.inf if g0 == 0.0 else 1.0 / g0

    def annotate(dv: float) -> EquilibriumPoint:
        slope = float(phi_derivative(nl, dv))
        lp = _local_poles(loop, slope)
        return EquilibriumPoint(
            dv=dv,
            slope_at=slope,
            local_poles=lp,
            unstable=any(p.real > 0 for p in lp),
        )

    positive: list[float] = []
    if g0 > 0.0 and nl.I > 0.0:
        inv_g0 = 1.0 / g0
        vsat = nl.V_sat

        def balance(v):
            return inv_g0 * v - phi(nl, v)

        grid = np.concatenate([[0.0], np.geomspace(vsat * 1e-6, vsat, 2000)])
        vals = balance(grid)
        signs = np.sign(vals)
        # grid points that happen to be exact roots (e.g. the branch point itself)
        positive.extend(grid[i] for i in range(1, len(grid)) if vals[i] == 0.0)
        for i in range(1, len(grid) - 1):
            if signs[i] != 0 and signs[i + 1] != 0 and signs[i] != signs[i + 1]:
                lo, hi = grid[i], grid[i + 1]
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    if np.sign(balance(mid)) == signs[i]:
                        lo = mid
                    else:
                        hi = mid
                positive.append(0.5 * (lo + hi))
        sat = g0 * nl.I
        if sat > vsat:
            positive.append(sat)
        # dedupe near-coincident solutions
        deduped: list[float] = []
        for v in sorted(positive):
            if not deduped or abs(v - deduped[-1]) > 1e-9 * max(1.0, v):
                deduped.append(v)
        positive = deduped

    points = [annotate(-v) for v in reversed(positive)]
    points.append(annotate(0.0))
    points.extend(annotate(v) for v in positive)
    return EquilibriumSet(
        points=tuple(points),
        unique=len(points) == 1,
        K_threshold=k_threshold,
    )


def root_locus(loop: LoopFunction, gains) -> RootLocusBranch:
    """Roots of d_G - K*n_G per gain, with nearest-neighbour branch matching."""
    gains = [float(k) for k in gains]
    if any(k < 0 for k in gains):
        raise ValueError("root-locus gains must be nonnegative")
    rows: list[tuple[complex, ...]] = []
    prev: tuple[complex, ...] | None = None
    for k in gains:
        roots = list(_local_poles(loop, k))
        if prev is not None and len(prev) == len(roots):
            matched: list[complex] = []
            pool = roots[:]
            for p in prev:
                j = min(range(len(pool)), key=lambda i: abs(pool[i] - p))
                matched.append(pool.pop(j))
            roots = matched
        rows.append(tuple(roots))
        prev = rows[-1]
    return RootLocusBranch(gains=tuple(gains), roots_per_gain=tuple(rows))


def _origin_unstable_at(loop: LoopFunction, gain: float) -> bool:
    return any(p.real > 0 for p in _local_poles(loop, gain))


def slow_zero_diagnostic(loop: LoopFunction, lam: float) -> tuple[float, ...]:
    """Real zeros of G in (-lambda, 0]: the structure that lets a locus branch
    re-cross the imaginary axis below the uniqueness gain."""
    num = loop.G.numerator
    if num.is_zero or num.degree == 0:
        return ()
    out = []
    for z in find_roots(num).roots:
        if abs(z.imag) <= SLOW_ZERO_IMAG_TOL and -lam < z.real <= 0.0:
            out.append(z.real)
    return tuple(sorted(out))


def instability_window(
    loop: LoopFunction,
    nl: SectorNonlinearity,
    lam: float | None = None,
    rel_tol: float = 1e-4,
    gain_cap: float = 1e9,
) -> InstabilityWindow:
    """Smallest gain in (0, 1/G(0)] that destabilizes the origin, by bisection.

    Reports infeasible when no probed gain in the window is destabilizing.
    The slow-zero diagnostic uses lam when given, else the magnitude of the
    slowest closed-loop pole as the scale separating slow from fast.
    """
    g0 = _dc_gain(loop)
    k_max = math.inf if g0 == 0.0 else 1.0 / g0

    if lam is None:
        pole_res = [abs(p.real) for p in loop.G.poles().roots]
        lam_scale = max(pole_res) if pole_res else 1.0
    else:
        lam_scale = lam
    slow = slow_zero_diagnostic(loop, lam_scale)

    # find a destabilizing probe gain inside the window
    probe = None
    k = min(max(nl.K, 1e-3), k_max if math.isfinite(k_max) else max(nl.K, 1e-3))
    for _ in range(64):
        if k > gain_cap:
            break
        if math.isfinite(k_max):
            k = min(k, k_max)
        if _origin_unstable_at(loop, k):
            probe = k
            break
        if math.isfinite(k_max) and k >= k_max:
            break
        k *= 2.0
    if probe is None:
        return InstabilityWindow(
            K_min_unstable=math.inf,
            K_max_allowed=k_max,
            feasible=False,
            has_slow_zero=len(slow) > 0,
            slow_zeros=slow,
        )

    lo, hi = 0.0, probe
    while hi - lo > rel_tol * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if mid <= 0.0:
            break
        if _origin_unstable_at(loop, mid):
            hi = mid
        else:
            lo = mid
    return InstabilityWindow(
        K_min_unstable=hi,
        K_max_allowed=k_max,
        feasible=hi <= k_max,
        has_slow_zero=len(slow) > 0,
        slow_zeros=slow,
    )


def write_locus_csv(branch: RootLocusBranch, path: str) -> None:
    """Export the locus as CSV with columns K, re, im, one row per root per gain."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["K", "re", "im"])
        for k, roots in zip(branch.gains, branch.roots_per_gain):
            for root in roots:
                writer.writerow([repr(float(k)), repr(root.real), repr(root.imag)])
