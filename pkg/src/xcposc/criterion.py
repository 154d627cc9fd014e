"""Inverse circle criterion: shifted Nyquist curves, winding numbers, disk test.

The 2-dominance certificate samples the additive inverse loop function on the
vertical contour Re s = -lambda, counts clockwise encirclements of the origin
two independent ways (accumulated phase and an argument-principle root count),
and measures the separation between the curve and the disk of diameter K on
the positive real axis.  Specialized feasibility checkers for the RLC and RC
controller topologies reduce the same conditions to closed-form tests.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousWinding,
    CenterOnCurve,
    ImproperFunction,
    PoleOnContour,
    RootOnContour,
    TailUnbounded,
    WindingMismatch,
    XcposcError,
)
from .netfun import LoopFunction, RcController, RlcController
from .poly import Polynomial, RationalFunction, find_roots
from .xcp import SectorNonlinearity

CONTOUR_TOL = 1e-6
PHASE_STEP_LIMIT = np.pi / 6.0  # 30 degrees
WINDING_ROUND_TOL = 0.05
DEFAULT_BASE_POINTS = 2048
MAX_CURVE_POINTS = 500_000


@dataclass(frozen=True)
class NyquistCurve:
    """Samples of F(-lambda + j*omega) on a symmetric, adaptively refined grid."""

    lam: float
    frequencies: np.ndarray
    values: np.ndarray
    relative_degree: int
    tail_value: complex | None  # finite high-frequency limit, None when unbounded
    num_coeffs: tuple[float, ...] | None = None
    den_coeffs: tuple[float, ...] | None = None

    def max_phase_step(self, center: complex) -> float:
        rel = self.values - center
        phase = np.angle(rel)
        steps = np.abs(_wrap_phase(np.diff(phase)))
        return float(np.max(steps)) if len(steps) else 0.0

    def arc_turns(self, center: complex) -> float:
        """Clockwise turns contributed by the D-contour's arc at infinity.

        The arc image of F - center behaves like its leading term, so the
        contribution is half the relative degree of (num - center*den)/den.
        For positive relative degree this is the d/2 rule; for a bounded
        tail away from the center the arc contributes nothing.
        """
        d = self.relative_degree
        if self.num_coeffs is None or self.den_coeffs is None:
            if d > 0:
                return d / 2.0
            # without coefficients, fall back on the tail geometry
            if self.tail_value is not None and abs(self.tail_value - center) < 1e-12:
                return d / 2.0
            return 0.0
        num = np.asarray(self.num_coeffs, dtype=complex)
        den = np.asarray(self.den_coeffs, dtype=complex)
        n = max(len(num), len(den))
        g = np.pad(num, (0, n - len(num))) - center * np.pad(den, (0, n - len(den)))
        scale = np.max(np.abs(g)) if np.any(g != 0) else 0.0
        deg = -1
        for k in range(n - 1, -1, -1):
            if abs(g[k]) > 1e-9 * scale:
                deg = k
                break
        if deg < 0:
            raise CenterOnCurve(f"curve is identically equal to center {center}")
        return (deg - (len(den) - 1)) / 2.0


def _wrap_phase(d: np.ndarray) -> np.ndarray:
    return (d + np.pi) % (2.0 * np.pi) - np.pi


def _shifted_root_scale(f: RationalFunction, lam: float) -> float:
    mags = []
    for p in (f.numerator, f.denominator):
        if p.degree >= 1 and not p.is_zero:
            mags.extend(abs(r + lam) for r in find_roots(p).roots)
    mags = [m for m in mags if m > 1e-9]
    return max(mags) if mags else max(1.0, abs(lam))


def _tail_value(f: RationalFunction) -> complex | None:
    d = f.relative_degree
    if d > 0:
        return None
    if d == 0:
        return complex(f.numerator.leading_coefficient / f.denominator.leading_coefficient)
    return 0.0 + 0.0j


def sample_shifted(
    f: RationalFunction,
    lam: float,
    omega_max: float | None = None,
    base_points: int = DEFAULT_BASE_POINTS,
    centers: tuple[complex, ...] = (0.0 + 0.0j,),
) -> NyquistCurve:
    """Adaptive symmetric sampling of f(-lambda + j*omega) over omega in [-W, W].

    W defaults to 100x the largest shifted root magnitude.  Intervals are
    bisected until every adjacent phase step about each tracked center is
    below 30 degrees.  Raises PoleOnContour when a pole of f sits within
    1e-6 of the contour.
    """
    if f.denominator.degree >= 1:
        for root in find_roots(f.denominator).roots:
            if abs(root.real + lam) <= CONTOUR_TOL:
                raise PoleOnContour(
                    f"pole at {root} lies on the shifted contour Re s = {-lam}"
                )

    if omega_max is None:
        omega_max = 100.0 * _shifted_root_scale(f, lam)
        # a bounded tail close to a tracked center needs a longer reach before
        # the accumulated phase settles; extend until the ends hug the tail
        tail = _tail_value(f)
        if tail is not None:
            gaps = [abs(tail - c) for c in centers if abs(tail - c) > 1e-9]
            if gaps:
                target = 0.01 * min(gaps)
                for _ in range(40):
                    if abs(f(-lam + 1j * omega_max) - tail) <= target:
                        break
                    omega_max *= 2.0
        else:
            # unbounded curve: the ends must dominate every tracked center
            floor = 10.0 * (1.0 + max((abs(c) for c in centers), default=0.0))
            for _ in range(40):
                if abs(f(-lam + 1j * omega_max)) >= floor:
                    break
                omega_max *= 2.0
    omega_max = float(omega_max)

    half = max(base_points // 2, 8)
    a = omega_max / 1e4
    u = np.linspace(0.0, np.arcsinh(omega_max / a), half + 1)
    pos = a * np.sinh(u)
    pos[-1] = omega_max
    omega = np.concatenate([-pos[:0:-1], pos])

    def evaluate(w: np.ndarray) -> np.ndarray:
        return f.eval_on(-lam + 1j * w)

    values = evaluate(omega)

    for _ in range(64):
        need = np.zeros(len(omega) - 1, dtype=bool)
        for c in centers:
            rel = values - c
            dist = np.abs(rel)
            if np.min(dist) < 1e-12 * max(1.0, abs(c)):
                continue  # curve touches this center; winding will reject it
            steps = np.abs(_wrap_phase(np.diff(np.angle(rel))))
            need |= steps >= PHASE_STEP_LIMIT
        if not np.any(need):
            break
        mids = 0.5 * (omega[:-1][need] + omega[1:][need])
        # keep the grid symmetric so conjugate symmetry survives refinement
        new_omega = np.unique(np.concatenate([omega, mids, -mids]))
        if len(new_omega) > MAX_CURVE_POINTS:
            raise AmbiguousWinding(
                "curve refinement exceeded the point budget; a root is likely "
                "too close to the contour"
            )
        new_values = np.empty(len(new_omega), dtype=complex)
        old_idx = np.searchsorted(new_omega, omega)
        mask = np.ones(len(new_omega), dtype=bool)
        mask[old_idx] = False
        new_values[old_idx] = values
        if np.any(mask):
            new_values[mask] = evaluate(new_omega[mask])
        omega, values = new_omega, new_values
    else:
        raise AmbiguousWinding("curve refinement did not converge in 64 passes")

    return NyquistCurve(
        lam=float(lam),
        frequencies=omega,
        values=values,
        relative_degree=f.relative_degree,
        tail_value=_tail_value(f),
        num_coeffs=f.numerator.coeffs,
        den_coeffs=f.denominator.coeffs,
    )


def winding_number(curve: NyquistCurve, center: complex) -> int:
    """Clockwise encirclements of center by the closed shifted Nyquist contour.

    Accumulated phase over the sampled axis plus, for relative degree d > 0,
    the d/2 clockwise turns contributed by the closure arc at infinity.
    """
    rel = curve.values - center
    dist = np.abs(rel)
    if np.min(dist) < 1e-9:
        raise CenterOnCurve(f"a curve sample lies within 1e-9 of center {center}")
    phase = np.angle(rel)
    raw_steps = _wrap_phase(np.diff(phase))
    if np.max(np.abs(raw_steps)) > 0.9 * np.pi:
        raise AmbiguousWinding("adjacent phase step near pi; curve is under-sampled")
    arc = curve.arc_turns(center)
    if arc > 0 and min(abs(curve.values[0]), abs(curve.values[-1])) < 4.0 * abs(center):
        raise AmbiguousWinding(
            "curve truncation does not dominate the winding center; increase omega_max"
        )
    total = float(np.sum(raw_steps))
    turns = -total / (2.0 * np.pi) + arc
    nearest = round(turns)
    if abs(turns - nearest) > WINDING_ROUND_TOL:
        raise AmbiguousWinding(
            f"winding {turns:.4f} is not within {WINDING_ROUND_TOL} of an integer"
        )
    return int(nearest)


def _roots_complex(coeffs: np.ndarray) -> np.ndarray:
    """Roots of a complex-coefficient polynomial (ascending), for the oracle."""
    cs = np.asarray(coeffs, dtype=complex)
    while len(cs) > 1 and cs[-1] == 0:
        cs = cs[:-1]
    if len(cs) <= 1:
        return np.array([], dtype=complex)
    return np.roots(cs[::-1])


def encirclement_oracle(f: RationalFunction, lam: float, center: complex = 0.0) -> int:
    """Argument-principle count: zeros minus poles of f - center right of Re = -lambda."""
    num = np.array(f.numerator.coeffs, dtype=complex)
    den = np.array(f.denominator.coeffs, dtype=complex)
    n = max(len(num), len(den))
    num = np.pad(num, (0, n - len(num)))
    den = np.pad(den, (0, n - len(den)))
    shifted_num = num - center * den

    z_roots = _roots_complex(shifted_num)
    p_roots = _roots_complex(den)
    for r in np.concatenate([z_roots, p_roots]):
        if abs(r.real + lam) <= CONTOUR_TOL:
            raise RootOnContour(f"root at {r} lies on the shifted contour Re s = {-lam}")
    z = int(np.sum(z_roots.real > -lam))
    p = int(np.sum(p_roots.real > -lam))
    return z - p


@dataclass(frozen=True)
class DiskMargin:
    K: float
    margin: float
    worst_omega: float
    passed: bool


def disk_margin(curve: NyquistCurve, K: float) -> DiskMargin:
    """Minimum distance from the curve to the disk |z - K/2| <= K/2.

    The sampled minimum is combined with a tail certificate: for relative
    degree >= 1 the curve ends must already exceed magnitude 2K (after which
    the curve only recedes); for bounded tails the high-frequency limit must
    itself clear the disk.
    """
    if K < 0:
        raise XcposcError("sector slope K must be nonnegative")
    center = K / 2.0
    dist = np.abs(curve.values - center) - center
    idx = int(np.argmin(dist))
    margin = float(dist[idx])
    worst = float(curve.frequencies[idx])

    if curve.relative_degree >= 1:
        end_mag = min(abs(curve.values[0]), abs(curve.values[-1]))
        if not end_mag > 2.0 * K:
            raise TailUnbounded(
                "curve ends have not left the disk neighbourhood; increase omega_max"
            )
    else:
        tail = curve.tail_value if curve.tail_value is not None else 0.0 + 0.0j
        tail_margin = abs(tail - center) - center
        if tail_margin <= 0.0:
            raise TailUnbounded(
                f"high-frequency limit {tail} does not clear the disk of slope {K}"
            )
        margin = min(margin, float(tail_margin))
    return DiskMargin(K=float(K), margin=margin, worst_omega=worst, passed=margin > 0.0)


@dataclass(frozen=True)
class DominanceReport:
    """Verdicts for the three conditions of the inverse circle criterion."""

    lam: float
    cond1_no_axis_zeros: bool
    offending_roots: tuple[complex, ...]
    required_encirclements: int
    winding_sampled: int
    winding_rootcount: int
    q: int
    r: int
    disk: DiskMargin
    overall: bool


def check_theorem2(
    loop: LoopFunction,
    nl: SectorNonlinearity,
    lam: float,
    omega_max: float | None = None,
    base_points: int = DEFAULT_BASE_POINTS,
) -> DominanceReport:
    """Certify strict 2-dominance of the closed loop at rate lambda.

    Condition 1: no zero of the inverse loop function on the contour.
    Condition 2: 2-(q+r) clockwise encirclements of the origin, established
    by sampled winding and root-count oracle in mandatory agreement.
    Condition 3: the curve clears the disk of diameter K.
    """
    ginv = loop.G_inverse

    plant_poles = loop.plant.poles()
    for p in plant_poles.roots:
        if abs(p.real + lam) <= CONTOUR_TOL:
            raise PoleOnContour(f"plant pole {p} lies on the shifted contour (condition 2)")
    q = plant_poles.count_re_greater(-lam)

    ctrl_zeros = loop.controller.zeros()
    for z in ctrl_zeros.roots:
        if abs(z.real + lam) <= CONTOUR_TOL:
            raise PoleOnContour(f"controller zero {z} lies on the shifted contour (condition 2)")
    r = ctrl_zeros.count_re_greater(-lam)

    gpoles = find_roots(ginv.numerator)
    offending = tuple(
        root for root in gpoles.roots if abs(root.real + lam) <= CONTOUR_TOL
    )
    cond1 = len(offending) == 0

    curve = sample_shifted(ginv, lam, omega_max=omega_max, base_points=base_points)
    required = 2 - (q + r)
    w_sampled = winding_number(curve, 0.0)
    w_rootcount = encirclement_oracle(ginv, lam, 0.0)
    if w_sampled != w_rootcount:
        raise WindingMismatch(
            f"sampled winding {w_sampled} disagrees with root-count oracle {w_rootcount} "
            "(condition 2 cross-validation)"
        )
    disk = disk_margin(curve, nl.K)

    return DominanceReport(
        lam=float(lam),
        cond1_no_axis_zeros=cond1,
        offending_roots=offending,
        required_encirclements=required,
        winding_sampled=w_sampled,
        winding_rootcount=w_rootcount,
        q=q,
        r=r,
        disk=disk,
        overall=cond1 and (w_rootcount == required) and disk.passed,
    )


def _max_re_shifted(f: RationalFunction, lam: float, points_per_decade: int = 513) -> float:
    """Max over omega of Re f(-lambda + j*omega), including the tail limit."""
    if f.relative_degree > 0:
        raise ImproperFunction("max real part on the axis requires a proper function")
    scale = _shifted_root_scale(f, lam)
    lo, hi = scale / 100.0, scale * 100.0
    n = max(64, int(round(points_per_decade * np.log10(hi / lo))))
    omega = np.concatenate([[0.0], np.logspace(np.log10(lo), np.log10(hi), n)])
    vals = f.eval_on(-lam + 1j * omega).real
    tail = _tail_value(f)
    return float(max(np.max(vals), tail.real))


@dataclass(frozen=True)
class RlcDesignVerdict:
    """Feasibility of an RLC controller for the given plant and rate."""

    cond1_no_axis_zeros: bool
    cond2_no_unstable_plant_poles: bool
    cond3_max_real: float
    passed: bool


@dataclass(frozen=True)
class RcDesignVerdict:
    """Feasibility of an RC controller for the given plant and rate."""

    cond1_no_axis_zeros: bool
    cond2_single_dominant_plant_pole: bool
    cond3_max_real: float
    near_tie: bool
    passed: bool


def _cond1_inverse_sum(ctrl_tf: RationalFunction, plant: RationalFunction, lam: float) -> bool:
    ginv = ctrl_tf.inverse() + plant * 2.0
    roots = find_roots(ginv.numerator)
    return all(abs(root.real + lam) > CONTOUR_TOL for root in roots.roots)


def check_theorem3_rlc(
    plant: RationalFunction,
    ctrl: RlcController,
    nl: SectorNonlinearity,
    lam: float,
) -> RlcDesignVerdict:
    """RLC feasibility: contour-free inverse sum, shifted-stable plant, and
    max Re 2P(jw - lambda) + 1/R - C*lambda < 0."""
    if not lam > 0:
        raise XcposcError("the RLC design rule requires lambda > 0")
    cond1 = _cond1_inverse_sum(ctrl.transfer_function(), plant, lam)

    poles = plant.poles()
    borderline = any(abs(p.real + lam) <= CONTOUR_TOL for p in poles.roots)
    cond2 = (not borderline) and all(p.real < -lam for p in poles.roots)

    max_re = _max_re_shifted(plant * 2.0, lam) + 1.0 / ctrl.R - ctrl.C * lam
    cond3 = max_re < 0.0
    return RlcDesignVerdict(
        cond1_no_axis_zeros=cond1,
        cond2_no_unstable_plant_poles=cond2,
        cond3_max_real=max_re,
        passed=cond1 and cond2 and cond3,
    )


def check_theorem4_rc(
    plant: RationalFunction,
    ctrl: RcController,
    nl: SectorNonlinearity,
    lam: float,
) -> RcDesignVerdict:
    """RC feasibility: contour-free inverse sum, exactly one shifted-unstable
    plant pole lying right of the shifted RC pole, and the same max-real bound."""
    if not lam > 0:
        raise XcposcError("the RC design rule requires lambda > 0")
    cond1 = _cond1_inverse_sum(ctrl.transfer_function(), plant, lam)

    poles = plant.poles()
    near_tie = any(abs(p.real + lam) <= CONTOUR_TOL for p in poles.roots)
    unstable = [p for p in poles.all_roots() if p.real > -lam]
    cond2 = (not near_tie) and len(unstable) == 1
    if cond2:
        rc_pole_shifted = lam - 1.0 / (ctrl.R * ctrl.C)
        gap = (unstable[0].real + lam) - rc_pole_shifted
        if abs(gap) <= CONTOUR_TOL:
            near_tie = True
            cond2 = False
        else:
            cond2 = gap > 0.0

    max_re = _max_re_shifted(plant * 2.0, lam) + 1.0 / ctrl.R - ctrl.C * lam
    cond3 = max_re < 0.0
    return RcDesignVerdict(
        cond1_no_axis_zeros=cond1,
        cond2_single_dominant_plant_pole=cond2,
        cond3_max_real=max_re,
        near_tie=near_tie,
        passed=cond1 and cond2 and cond3,
    )


def write_curve_csv(curve: NyquistCurve, path: str) -> None:
    """Export the curve as CSV with columns omega, re, im."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["omega", "re", "im"])
        for w, v in zip(curve.frequencies, curve.values):
            writer.writerow([repr(float(w)), repr(float(v.real)), repr(float(v.imag))])
