"""Real-coefficient polynomial and rational-function algebra.

Coefficients are stored ascending in degree (index k multiplies s**k),
the one wire order used everywhere in this package.  Root finding uses
Aberth-Ehrlich simultaneous iteration with a companion-matrix fallback,
which is robust for the low-degree polynomials this domain produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    Degenerate,
    DegenerateLoop,
    PoleProximity,
    XcposcError,
    ZeroFunction,
    ZeroPolynomial,
)

MAX_DEGREE = 64
ROOT_RESIDUAL_TOL = 1e-10
ROOT_MERGE_TOL = 1e-7


class Polynomial:
    """Immutable real polynomial in the Laplace variable s, ascending coefficients."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable[float]):
        cs = [float(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0.0:
            cs.pop()
        if not cs:
            cs = [0.0]
        self._coeffs = tuple(cs)

    @property
    def coeffs(self) -> tuple[float, ...]:
        return self._coeffs

    @property
    def degree(self) -> int:
        return len(self._coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self._coeffs == (0.0,)

    @property
    def leading_coefficient(self) -> float:
        return self._coeffs[-1]

    def __call__(self, s):
        """Evaluate at a scalar or ndarray of points (Horner)."""
        if isinstance(s, np.ndarray):
            acc = np.full_like(s, self._coeffs[-1], dtype=complex)
            for c in self._coeffs[-2::-1]:
                acc = acc * s + c
            return acc
        acc = complex(self._coeffs[-1])
        for c in self._coeffs[-2::-1]:
            acc = acc * s + c
        return acc

    def __add__(self, other) -> "Polynomial":
        other = _as_poly(other)
        n = max(len(self._coeffs), len(other._coeffs))
        a = list(self._coeffs) + [0.0] * (n - len(self._coeffs))
        b = list(other._coeffs) + [0.0] * (n - len(other._coeffs))
        return Polynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-c for c in self._coeffs)

    def __sub__(self, other) -> "Polynomial":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "Polynomial":
        return _as_poly(other) + (-self)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            return Polynomial(c * other for c in self._coeffs)
        other = _as_poly(other)
        out = [0.0] * (len(self._coeffs) + len(other._coeffs) - 1)
        for i, a in enumerate(self._coeffs):
            for j, b in enumerate(other._coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def shift(self, lam: float) -> "Polynomial":
        """Return q with q(s) = p(s - lam), expanded exactly."""
        lam = float(lam)
        if lam == 0.0:
            return self
        # Horner composition: q = (...(a_n * (s - lam) + a_{n-1}) * (s - lam) ...)
        acc = Polynomial([self._coeffs[-1]])
        linear = Polynomial([-lam, 1.0])
        for c in self._coeffs[-2::-1]:
            acc = acc * linear + Polynomial([c])
        return acc

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([0.0])
        return Polynomial(k * c for k, c in enumerate(self._coeffs) if k > 0)

    def monic(self) -> "Polynomial":
        if self.is_zero:
            raise ZeroPolynomial("cannot normalize the zero polynomial")
        lead = self._coeffs[-1]
        return Polynomial(c / lead for c in self._coeffs)

    def roots(self) -> "RootSet":
        return find_roots(self)

    def __repr__(self) -> str:
        terms = []
        for k, c in enumerate(self._coeffs):
            if c == 0.0 and self.degree > 0:
                continue
            if k == 0:
                terms.append(f"{c:g}")
            elif k == 1:
                terms.append(f"{c:g}*s")
            else:
                terms.append(f"{c:g}*s^{k}")
        return "Polynomial(" + " + ".join(terms) + ")"


def _as_poly(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (int, float)):
        return Polynomial([float(x)])
    raise TypeError(f"cannot interpret {x!r} as a Polynomial")


@dataclass(frozen=True)
class RootSet:
    """Roots of a polynomial with multiplicities and evaluation residuals."""

    roots: tuple[complex, ...]
    multiplicities: tuple[int, ...]
    residuals: tuple[float, ...]

    def all_roots(self) -> tuple[complex, ...]:
        """Roots expanded so each appears per its multiplicity."""
        out: list[complex] = []
        for r, m in zip(self.roots, self.multiplicities):
            out.extend([r] * m)
        return tuple(out)

    def count_re_greater(self, threshold: float) -> int:
        return sum(m for r, m in zip(self.roots, self.multiplicities) if r.real > threshold)

    def real_roots(self, imag_tol: float = ROOT_MERGE_TOL) -> tuple[float, ...]:
        return tuple(r.real for r in self.roots if abs(r.imag) <= imag_tol)


def _residual_scale(coeffs: Sequence[float], z: complex) -> float:
    return max(abs(c) for c in coeffs) * max(1.0, abs(z)) ** (len(coeffs) - 1)


def _aberth(coeffs: np.ndarray, max_iter: int = 120) -> np.ndarray | None:
    """Simultaneous root iteration; returns None on non-convergence."""
    n = len(coeffs) - 1
    monic = coeffs / coeffs[-1]
    # initial guesses on a scaled circle (geometric-mean radius, offset angles)
    a0 = abs(monic[0])
    radius = a0 ** (1.0 / n) if a0 > 0 else 1.0
    radius = max(radius, 1e-3)
    angles = 2.0 * np.pi * np.arange(n) / n + 0.4
    z = radius * np.exp(1j * angles)

    dcoeffs = monic[1:] * np.arange(1, n + 1)
    max_coeff = np.max(np.abs(coeffs))

    def poly_at(pts):
        acc = np.full(len(pts), monic[-1], dtype=complex)
        for c in monic[-2::-1]:
            acc = acc * pts + c
        return acc

    def scale_at(pts):
        return max_coeff / abs(coeffs[-1]) * np.maximum(1.0, np.abs(pts)) ** n

    for _ in range(max_iter):
        p = poly_at(z)
        # near-machine residuals: fully converged
        if np.all(np.abs(p) <= 1e-14 * scale_at(z)):
            return z
        dp = np.full(n, dcoeffs[-1], dtype=complex)
        for c in dcoeffs[-2::-1]:
            dp = dp * z + c
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(dp != 0, p / dp, 0.0)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            sums = np.sum(1.0 / diff, axis=1)
            denom = 1.0 - w * sums
            corr = np.where(np.abs(denom) > 1e-300, w / denom, w)
        if not np.all(np.isfinite(corr)):
            return None
        z = z - corr
        if np.all(np.abs(corr) <= 1e-15 * (1.0 + np.abs(z))):
            break
    # accept at the design residual tolerance (multiple roots stall above machine)
    if np.all(np.abs(poly_at(z)) <= ROOT_RESIDUAL_TOL * scale_at(z)):
        return z
    return None


def _quadratic_roots(c0: float, c1: float, c2: float) -> list[complex]:
    """Numerically stable closed form for c2*s^2 + c1*s + c0."""
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc >= 0.0:
        q = -0.5 * (c1 + math.copysign(math.sqrt(disc), c1))
        if q == 0.0:
            r = 0.0
            return [complex(r), complex(r)]
        return [complex(q / c2), complex(c0 / q)]
    im = math.sqrt(-disc) / (2.0 * c2)
    re = -c1 / (2.0 * c2)
    return [complex(re, -abs(im)), complex(re, abs(im))]


def _companion_roots(coeffs: np.ndarray) -> np.ndarray:
    monic = coeffs / coeffs[-1]
    n = len(monic) - 1
    comp = np.zeros((n, n))
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -monic[:-1]
    return np.linalg.eigvals(comp)


def _pair_conjugates(roots: list[complex]) -> list[complex]:
    """Snap near-real roots to the axis and symmetrize conjugate pairs."""
    out: list[complex] = []
    pool = sorted(roots, key=lambda z: (z.real, z.imag))
    used = [False] * len(pool)
    for i, z in enumerate(pool):
        if used[i]:
            continue
        tol = ROOT_MERGE_TOL * max(1.0, abs(z))
        if abs(z.imag) <= tol:
            out.append(complex(z.real, 0.0))
            used[i] = True
            continue
        mate = None
        for j in range(i + 1, len(pool)):
            if used[j]:
                continue
            if abs(pool[j] - z.conjugate()) <= 10 * tol:
                mate = j
                break
        if mate is not None:
            avg = (z + pool[mate].conjugate()) / 2.0
            out.append(avg)
            out.append(avg.conjugate())
            used[i] = used[mate] = True
        else:
            out.append(z)
            used[i] = True
    return out


def find_roots(p: Polynomial) -> RootSet:
    """All complex roots with residual diagnostics."""
    if p.is_zero:
        raise ZeroPolynomial("the zero polynomial has no well-defined roots")
    if p.degree == 0:
        raise Degenerate("degree-0 polynomial has no roots")
    if p.degree > MAX_DEGREE:
        raise XcposcError(f"degree {p.degree} exceeds the supported maximum {MAX_DEGREE}")

    coeffs = list(p.coeffs)
    # factor out exact roots at the origin so they stay exactly zero
    zeros_at_origin = 0
    while coeffs[0] == 0.0 and len(coeffs) > 1:
        coeffs.pop(0)
        zeros_at_origin += 1

    raw: list[complex] = [0.0 + 0.0j] * zeros_at_origin
    if len(coeffs) > 1:
        arr = np.asarray(coeffs, dtype=float)
        if len(coeffs) == 2:
            raw.append(complex(-coeffs[0] / coeffs[1]))
        elif len(coeffs) == 3:
            raw.extend(_quadratic_roots(coeffs[0], coeffs[1], coeffs[2]))
        else:
            z = _aberth(arr.astype(complex))
            if z is None:
                z = _companion_roots(arr)
                # two Newton polishing steps
                poly_c = arr.astype(complex)
                dpoly = poly_c[1:] * np.arange(1, len(poly_c))
                for _ in range(2):
                    pv = np.full(len(z), poly_c[-1], dtype=complex)
                    for c in poly_c[-2::-1]:
                        pv = pv * z + c
                    dv = np.full(len(z), dpoly[-1], dtype=complex)
                    for c in dpoly[-2::-1]:
                        dv = dv * z + c
                    step = np.where(np.abs(dv) > 1e-300, pv / dv, 0.0)
                    z = z - step
            raw.extend(complex(v) for v in z)

    paired = _pair_conjugates(raw)

    # merge clusters into multiple roots
    merged: list[tuple[complex, int]] = []
    for z in sorted(paired, key=lambda v: (v.real, v.imag)):
        for idx, (c, m) in enumerate(merged):
            if abs(z - c) <= ROOT_MERGE_TOL:
                merged[idx] = ((c * m + z) / (m + 1), m + 1)
                break
        else:
            merged.append((z, 1))

    roots = tuple(c for c, _ in merged)
    mults = tuple(m for _, m in merged)
    residuals = tuple(abs(p(r)) for r in roots)
    return RootSet(roots=roots, multiplicities=mults, residuals=residuals)


class RationalFunction:
    """Ratio of two real polynomials.  No automatic pole/zero cancellation:
    near-cancellations are physically meaningful here and are surfaced by
    :meth:`near_cancellations` instead of silently removed."""

    __slots__ = ("_num", "_den")

    def __init__(self, numerator, denominator):
        num = numerator if isinstance(numerator, Polynomial) else Polynomial(numerator)
        den = denominator if isinstance(denominator, Polynomial) else Polynomial(denominator)
        if den.is_zero:
            raise ZeroPolynomial("denominator is identically zero")
        self._num = num
        self._den = den

    @property
    def numerator(self) -> Polynomial:
        return self._num

    @property
    def denominator(self) -> Polynomial:
        return self._den

    @property
    def relative_degree(self) -> int:
        """Numerator degree minus denominator degree."""
        return self._num.degree - self._den.degree

    def __call__(self, s):
        den_val = self._den(s)
        max_den = max(abs(c) for c in self._den.coeffs)
        if isinstance(s, np.ndarray):
            scale = max_den * np.maximum(1.0, np.abs(s)) ** self._den.degree
            near = np.abs(den_val) <= 1e-12 * scale
            if np.any(near):
                raise PoleProximity(f"evaluation at {s[near][0]} is too close to a pole")
            return self._num(s) / den_val
        if abs(den_val) <= 1e-12 * _residual_scale(self._den.coeffs, s):
            raise PoleProximity(f"evaluation at {s} is too close to a pole")
        return self._num(s) / den_val

    def eval_on(self, s: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at an array of complex points."""
        return self(np.asarray(s, dtype=complex))

    def inverse(self) -> "RationalFunction":
        if self._num.is_zero:
            raise ZeroFunction("cannot invert a rational function with zero numerator")
        return RationalFunction(self._den, self._num)

    def shift(self, lam: float) -> "RationalFunction":
        """Return f(s - lam) as a rational function."""
        return RationalFunction(self._num.shift(lam), self._den.shift(lam))

    def __add__(self, other) -> "RationalFunction":
        other = _as_rational(other)
        num = self._num * other._den + other._num * self._den
        den = self._den * other._den
        return RationalFunction(num, den)

    __radd__ = __add__

    def __mul__(self, other) -> "RationalFunction":
        if isinstance(other, (int, float)):
            return RationalFunction(self._num * other, self._den)
        other = _as_rational(other)
        return RationalFunction(self._num * other._num, self._den * other._den)

    __rmul__ = __mul__

    def poles(self) -> RootSet:
        return find_roots(self._den)

    def zeros(self) -> RootSet:
        if self._num.is_zero or self._num.degree == 0:
            return RootSet(roots=(), multiplicities=(), residuals=())
        return find_roots(self._num)

    def dc_gain(self) -> float:
        """Value at s = 0; raises PoleProximity on a pole at the origin."""
        return float(self(0.0).real)

    def near_cancellations(self, tol: float = ROOT_MERGE_TOL) -> list[tuple[complex, complex]]:
        """Report (zero, pole) pairs closer than tol; they are kept, not cancelled."""
        if self._num.degree == 0:
            return []
        zs = find_roots(self._num).roots
        ps = find_roots(self._den).roots if self._den.degree > 0 else ()
        return [(z, p) for z in zs for p in ps if abs(z - p) <= tol]

    def __repr__(self) -> str:
        return f"RationalFunction({self._num!r}, {self._den!r})"


def _as_rational(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(x, Polynomial([1.0]))
    if isinstance(x, (int, float)):
        return RationalFunction(Polynomial([float(x)]), Polynomial([1.0]))
    raise TypeError(f"cannot interpret {x!r} as a RationalFunction")


def feedback(forward: RationalFunction, loop) -> RationalFunction:
    """Close forward/(1 + forward*loop) as one rational function, no cancellation.

    With forward = n_f/d_f and loop = n_l/d_l the result is
    n_f*d_l over d_f*d_l + n_f*n_l.
    """
    loop = _as_rational(loop)
    num = forward.numerator * loop.denominator
    den = forward.denominator * loop.denominator + forward.numerator * loop.numerator
    if den.is_zero:
        raise DegenerateLoop("feedback denominator collapsed to the zero polynomial")
    return RationalFunction(num, den)
