"""Controller and plant network constructors, loop closure, passivity test.

Builds the specific transfer functions the design workflow manipulates:
parallel RLC and RC controller impedances, the DC-motor admittance, and the
closed-loop function G together with its additive inverse form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ImproperFunction, InvalidParameter, XcposcError
from .poly import Polynomial, RationalFunction, feedback, find_roots


@dataclass(frozen=True)
class RlcController:
    """Parallel RLC impedance: R*L*s / (R*L*C*s^2 + L*s + R)."""

    R: float
    L: float
    C: float

    def __post_init__(self):
        for name in ("R", "L", "C"):
            if not (getattr(self, name) > 0):
                raise InvalidParameter(f"{name} must be positive, got {getattr(self, name)}")

    def transfer_function(self) -> RationalFunction:
        return make_rlc(self.R, self.L, self.C)


@dataclass(frozen=True)
class RcController:
    """Parallel RC impedance: 1 / (1/R + C*s)."""

    R: float
    C: float

    def __post_init__(self):
        for name in ("R", "C"):
            if not (getattr(self, name) > 0):
                raise InvalidParameter(f"{name} must be positive, got {getattr(self, name)}")

    def transfer_function(self) -> RationalFunction:
        return make_rc(self.R, self.C)


@dataclass(frozen=True)
class DcMotorPlant:
    """Voltage-to-current admittance of a DC motor.

    L_m: armature inductance (H), R_m: armature resistance (Ohm),
    J_m: rotor inertia (kg*m^2), b_m: viscous friction (N*m*s),
    k_m: torque / back-EMF constant (N*m/A).
    """

    L_m: float
    R_m: float
    J_m: float
    b_m: float
    k_m: float

    def __post_init__(self):
        for name in ("L_m", "R_m", "J_m", "b_m", "k_m"):
            if not (getattr(self, name) > 0):
                raise InvalidParameter(f"{name} must be positive, got {getattr(self, name)}")

    def admittance(self) -> RationalFunction:
        return make_dc_motor(self)


def make_rlc(R: float, L: float, C: float) -> RationalFunction:
    """Parallel RLC controller impedance; strictly proper with its single zero at s = 0."""
    if not (R > 0 and L > 0 and C > 0):
        raise InvalidParameter("R, L, C must all be positive")
    return RationalFunction([0.0, R * L], [R, L, R * L * C])


def make_rc(R: float, C: float) -> RationalFunction:
    """Parallel RC controller impedance; one pole at -1/(R*C), no zeros, DC gain R."""
    if not (R > 0 and C > 0):
        raise InvalidParameter("R and C must be positive")
    return RationalFunction([1.0], [1.0 / R, C])


def make_dc_motor(plant: DcMotorPlant) -> RationalFunction:
    """Admittance (J_m*s + b_m) / ((L_m*s + R_m)(J_m*s + b_m) + k_m^2)."""
    num = Polynomial([plant.b_m, plant.J_m])
    den = Polynomial([plant.R_m, plant.L_m]) * Polynomial([plant.b_m, plant.J_m]) + Polynomial(
        [plant.k_m**2]
    )
    return RationalFunction(num, den)


@dataclass(frozen=True)
class LoopFunction:
    """Closed loop seen by the nonlinearity, stored in both representations.

    G = controller / (1 + 2*plant*controller) and G_inverse = 1/controller + 2*plant
    are built independently and cross-checked pointwise at construction; the
    redundancy catches polynomial-arithmetic defects early.
    """

    G: RationalFunction
    G_inverse: RationalFunction
    controller: RationalFunction
    plant: RationalFunction


def make_loop(controller: RationalFunction, plant: RationalFunction) -> LoopFunction:
    """Close the loop and return both G and its additive inverse form."""
    g = feedback(controller, plant * 2.0)
    g_inv = controller.inverse() + plant * 2.0
    _check_loop_consistency(g, g_inv)
    return LoopFunction(G=g, G_inverse=g_inv, controller=controller, plant=plant)


def _check_loop_consistency(g: RationalFunction, g_inv: RationalFunction, n_points: int = 200):
    """Verify 1/G(jw) == G_inverse(jw) to 1e-8 relative on a log grid avoiding poles."""
    mags = [abs(r) for r in _all_root_magnitudes(g)] or [1.0]
    lo, hi = max(min(mags), 1e-3) / 100.0, max(mags) * 100.0
    omega = np.logspace(np.log10(lo), np.log10(hi), n_points)
    s = 1j * omega
    num_g = g.numerator(s)
    den_g = g.denominator(s)
    ok = (np.abs(num_g) > 1e-12) & (np.abs(den_g) > 1e-12)
    if not np.any(ok):
        return
    lhs = den_g[ok] / num_g[ok]
    rhs = g_inv.eval_on(s[ok])
    rel = np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300)
    if np.max(rel) > 1e-8:
        raise XcposcError(
            f"loop construction inconsistency: 1/G and G_inverse differ by {np.max(rel):.3e}"
        )


def _all_root_magnitudes(f: RationalFunction) -> list[float]:
    out = []
    for p in (f.numerator, f.denominator):
        if p.degree >= 1 and not p.is_zero:
            out.extend(abs(r) for r in find_roots(p).roots if abs(r) > 1e-12)
    return out


@dataclass(frozen=True)
class PassivityVerdict:
    is_stable: bool
    min_real_part_on_axis: float
    is_positive_real: bool


def passivity_check(
    f: RationalFunction, points_per_decade: int = 513, tol: float = 1e-9
) -> PassivityVerdict:
    """Sampled positive-realness test.

    Stability is exact (all poles in the open left half-plane); the real part
    of f(jw) is sampled on a log grid spanning two decades either side of the
    fastest root, plus the dc point and the high-frequency limit.
    """
    if f.relative_degree > 0:
        raise ImproperFunction("positive-realness requires a proper function")
    poles = f.poles()
    is_stable = all(r.real < 0 for r in poles.roots)

    mags = _all_root_magnitudes(f) or [1.0]
    fastest = max(mags)
    lo, hi = fastest / 100.0, fastest * 100.0
    decades = np.log10(hi / lo)
    n = max(2, int(round(points_per_decade * decades)))
    omega = np.logspace(np.log10(lo), np.log10(hi), n)

    values = [f(0.0).real]
    try:
        values.extend(f.eval_on(1j * omega).real.tolist())
    except Exception:
        # poles on the axis: not positive real regardless of sampling
        return PassivityVerdict(is_stable=False, min_real_part_on_axis=float("-inf"),
                                is_positive_real=False)
    if f.relative_degree == 0:
        values.append(f.numerator.leading_coefficient / f.denominator.leading_coefficient)
    else:
        values.append(0.0)  # strictly proper: Re f(jw) -> 0
    min_re = float(min(values))
    return PassivityVerdict(
        is_stable=is_stable,
        min_real_part_on_axis=min_re,
        is_positive_real=is_stable and min_re >= -tol,
    )
