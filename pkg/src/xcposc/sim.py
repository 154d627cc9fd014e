"""State-space realization and time-domain simulation of the closed loop.

G is realized in controllable canonical form and driven through the static
nonlinearity in positive feedback.  When the plant is a DC motor the state
is augmented with the motor's own two states (armature current and angular
velocity) so the physical output can be exported alongside the loop voltage.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import rk4_lure
from .errors import AlgebraicLoop, Divergence, ImproperFunction, XcposcError
from .netfun import DcMotorPlant
from .poly import RationalFunction
from .xcp import SectorNonlinearity, phi_derivative

REALIZATION_RTOL = 1e-9


@dataclass(frozen=True)
class StateSpaceRealization:
    """x' = A x + B u, y = C_out x (no feedthrough).  n_aux trailing states are
    observer-only augmentations that do not feed back into the loop output."""

    A: np.ndarray
    B: np.ndarray
    C_out: np.ndarray
    n: int
    n_aux: int = 0


def realize(g: RationalFunction) -> StateSpaceRealization:
    """Controllable canonical realization of a strictly proper G."""
    rd = g.relative_degree
    if rd > 0:
        raise ImproperFunction("numerator degree exceeds denominator degree")
    if rd == 0:
        raise AlgebraicLoop(
            "G is proper but not strictly proper; feedthrough would close an "
            "implicit nonlinear equation"
        )
    den = g.denominator.monic()
    lead = g.denominator.leading_coefficient
    num = [c / lead for c in g.numerator.coeffs]
    n = den.degree
    A = np.zeros((n, n))
    if n > 1:
        A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = [-c for c in den.coeffs[:-1]]
    B = np.zeros(n)
    B[-1] = 1.0
    C = np.zeros(n)
    C[: len(num)] = num
    ss = StateSpaceRealization(A=A, B=B, C_out=C, n=n)
    verify_realization(ss, g)
    return ss


def verify_realization(ss: StateSpaceRealization, g: RationalFunction, n_probes: int = 50):
    """Check C(sI - A)^-1 B against G(jw) at log-spaced probe frequencies."""
    eigs = np.linalg.eigvals(ss.A)
    scale = max(np.max(np.abs(eigs)), 1e-3)
    omega = np.logspace(np.log10(scale / 100.0), np.log10(scale * 100.0), n_probes)
    eye = np.eye(ss.n)
    for w in omega:
        resp = ss.C_out @ np.linalg.solve(1j * w * eye - ss.A, ss.B.astype(complex))
        ref = g(1j * w)
        if abs(resp - ref) > REALIZATION_RTOL * max(abs(ref), 1e-12):
            raise XcposcError(
                f"realization mismatch at omega={w:g}: {resp} vs {ref}"
            )


def augment_with_motor(ss: StateSpaceRealization, motor: DcMotorPlant) -> StateSpaceRealization:
    """Append the motor states (armature current, angular velocity), driven by
    the loop voltage V_m = -dv.  The loop dynamics are unchanged; the extra
    states only observe."""
    if ss.n_aux:
        raise XcposcError("realization is already augmented")
    A_m = np.array(
        [
            [-motor.R_m / motor.L_m, -motor.k_m / motor.L_m],
            [motor.k_m / motor.J_m, -motor.b_m / motor.J_m],
        ]
    )
    B_m = np.array([1.0 / motor.L_m, 0.0])
    n = ss.n
    A = np.zeros((n + 2, n + 2))
    A[:n, :n] = ss.A
    A[n:, n:] = A_m
    A[n:, :n] = -np.outer(B_m, ss.C_out)
    B = np.concatenate([ss.B, np.zeros(2)])
    C = np.concatenate([ss.C_out, np.zeros(2)])
    return StateSpaceRealization(A=A, B=B, C_out=C, n=n + 2, n_aux=2)


@dataclass(frozen=True)
class Trajectory:
    """Fixed-step integration record; motor states (when present) trail the
    loop states in each row of `states`."""

    dt: float
    states: np.ndarray
    output_dv: np.ndarray
    input_di: np.ndarray
    n_aux: int = 0

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.output_dv))

    @property
    def aux_states(self) -> np.ndarray | None:
        if self.n_aux == 0:
            return None
        return self.states[:, -self.n_aux:]


def divergence_threshold(ss: StateSpaceRealization, nl: SectorNonlinearity, x0) -> float:
    """State-magnitude guard: 1e6 x the forced-response scale of the loop."""
    sing = np.linalg.svd(ss.A, compute_uv=False)
    smin = max(float(np.min(sing)), 1e-12)
    drive = max(nl.I, 1e-6) * float(np.max(np.abs(ss.B)))
    return max(1e6 * drive / smin, 1e3 * float(np.max(np.abs(x0))), 1.0)


def integrate(
    ss: StateSpaceRealization,
    nl: SectorNonlinearity,
    x0,
    dt: float,
    t_end: float,
) -> Trajectory:
    """Classical fixed-step RK4 of x' = Ax + B*phi(C x); deterministic."""
    if dt <= 0:
        raise XcposcError("dt must be positive")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (ss.n,):
        raise XcposcError(f"x0 must have shape ({ss.n},), got {x0.shape}")
    max_re = float(np.max(np.abs(np.linalg.eigvals(ss.A).real)))
    if max_re > 0 and dt > 0.1 / max_re:
        warnings.warn(
            f"dt={dt:g} exceeds the stability guard 0.1/max|Re eig A|={0.1 / max_re:g}",
            stacklevel=2,
        )
    nsteps = int(round(t_end / dt))
    threshold = divergence_threshold(ss, nl, x0)
    states, dv, di, diverged = rk4_lure(
        ss.A, ss.B, ss.C_out, nl.k_n, nl.I, nl.K, nl.V_sat, x0, dt, nsteps, threshold
    )
    if diverged >= 0:
        raise Divergence(
            f"state magnitude exceeded {threshold:g} at step {diverged} "
            f"(t={diverged * dt:g}); the loop is not certified bounded",
            step=diverged,
        )
    return Trajectory(dt=dt, states=states, output_dv=dv, input_di=di, n_aux=ss.n_aux)


@dataclass(frozen=True)
class OscillationMetrics:
    frequency: float  # rad/s; nan when undetermined
    amplitude: float  # peak |dv| (V)
    period_jitter: float  # relative std of the last 10 periods
    converged: bool
    classification: str  # "fixed_point" | "limit_cycle" | "undetermined"
    half_wave_symmetric: bool | None = None


def measure(
    traj: Trajectory,
    transient_fraction: float = 0.5,
    initial_perturbation: float | None = None,
) -> OscillationMetrics:
    """Frequency and amplitude from post-transient zero upcrossings of dv.

    Needs at least 12 upcrossings after the transient for a frequency
    estimate; fewer yields classification "undetermined", which is a valid
    verdict rather than an error.
    """
    dv = traj.output_dv
    dt = traj.dt
    start = int(len(dv) * transient_fraction)
    post = dv[start:]
    if initial_perturbation is None:
        initial_perturbation = max(float(np.max(np.abs(traj.states[0]))), 1e-300)

    if len(post) < 3 or float(np.max(np.abs(post))) < 1e-6:
        return OscillationMetrics(
            frequency=0.0,
            amplitude=float(np.max(np.abs(post))) if len(post) else 0.0,
            period_jitter=0.0,
            converged=False,
            classification="fixed_point",
        )

    up = np.flatnonzero((post[:-1] < 0.0) & (post[1:] >= 0.0))
    if len(up) < 12:
        return OscillationMetrics(
            frequency=math.nan,
            amplitude=float(np.max(np.abs(post))),
            period_jitter=math.nan,
            converged=False,
            classification="undetermined",
        )
    # linear interpolation of each crossing instant
    frac = -post[up] / (post[up + 1] - post[up])
    t_cross = (start + up + frac) * dt
    t_cross = t_cross[-11:]
    periods = np.diff(t_cross)
    mean_period = float(np.mean(periods))
    jitter = float(np.std(periods) / mean_period)
    frequency = 2.0 * math.pi / mean_period

    idx = up[-11:]
    peaks = [float(np.max(np.abs(post[a:b + 1]))) for a, b in zip(idx[:-1], idx[1:])]
    amplitude = float(np.mean(peaks))

    converged = jitter < 0.01
    if converged and amplitude > 10.0 * initial_perturbation:
        classification = "limit_cycle"
    else:
        classification = "undetermined"

    half_wave = None
    if classification == "limit_cycle":
        shift = int(round(mean_period / 2.0 / dt))
        seg = post[idx[0]:]
        if shift > 0 and len(seg) > shift:
            mismatch = float(np.max(np.abs(seg[:-shift] + seg[shift:])))
            half_wave = mismatch < 0.05 * amplitude
            if not half_wave:
                warnings.warn(
                    f"steady-state waveform deviates from half-wave symmetry by "
                    f"{mismatch / amplitude:.1%} of amplitude",
                    stacklevel=2,
                )
    return OscillationMetrics(
        frequency=frequency,
        amplitude=amplitude,
        period_jitter=jitter,
        converged=converged,
        classification=classification,
        half_wave_symmetric=half_wave,
    )


def jacobian_at(ss: StateSpaceRealization, nl: SectorNonlinearity, x) -> np.ndarray:
    """Closed-loop Jacobian A + B * phi'(C x) * C at state x."""
    x = np.asarray(x, dtype=float)
    slope = float(phi_derivative(nl, float(ss.C_out @ x)))
    return ss.A + slope * np.outer(ss.B, ss.C_out)


def suggested_timestep(ss: StateSpaceRealization, omega_guess: float) -> float:
    """Default dt: a thousandth of the guessed period, capped by the fast-pole guard."""
    max_re = float(np.max(np.abs(np.linalg.eigvals(ss.A).real)))
    dt = 0.001 * 2.0 * math.pi / omega_guess
    if max_re > 0:
        dt = min(dt, 0.1 / max_re)
    return dt


def suggested_horizon(omega_guess: float) -> float:
    """Default integration horizon: 400 guessed radian-periods."""
    return 400.0 / omega_guess
