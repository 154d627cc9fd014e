import numpy as np
import pytest

from xcposc.netfun import (
    DcMotorPlant,
    RcController,
    RlcController,
    make_dc_motor,
    make_loop,
)
from xcposc.poly import Polynomial, RationalFunction
from xcposc.xcp import SectorNonlinearity

NOMINAL_MOTOR = DcMotorPlant(L_m=0.5, R_m=2.0, J_m=0.02, b_m=0.2, k_m=0.1)


@pytest.fixture(scope="session")
def motor_params():
    return NOMINAL_MOTOR


@pytest.fixture(scope="session")
def plant():
    return make_dc_motor(NOMINAL_MOTOR)


@pytest.fixture(scope="session")
def nl_strong():
    # tail current of the three RLC designs
    return SectorNonlinearity(k_n=5.0, I=2.0)


@pytest.fixture(scope="session")
def nl_weak():
    # tail current of the RC design
    return SectorNonlinearity(k_n=5.0, I=0.5)


@pytest.fixture(scope="session")
def rlc_designs():
    return (
        RlcController(R=100.0, L=1.0, C=1.0),
        RlcController(R=100.0, L=1.0, C=5.0),
        RlcController(R=100.0, L=5.0, C=1.0),
    )


@pytest.fixture(scope="session")
def rc_design():
    return RcController(R=1.5, C=0.1)


@pytest.fixture(scope="session")
def loop_design1(plant, rlc_designs):
    return make_loop(rlc_designs[0].transfer_function(), plant)


@pytest.fixture(scope="session")
def loop_rc(plant, rc_design):
    return make_loop(rc_design.transfer_function(), plant)


def poly_from_roots(rng, deg, box=(-3.0, 1.0)):
    """Random real polynomial of the given degree with roots in a box,
    complex roots conjugate-paired."""
    p = Polynomial([rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])])
    left = deg
    while left > 0:
        if left >= 2 and rng.random() < 0.5:
            re = rng.uniform(*box)
            im = rng.uniform(0.2, 3.0)
            p = p * Polynomial([re * re + im * im, -2.0 * re, 1.0])
            left -= 2
        else:
            p = p * Polynomial([-rng.uniform(*box), 1.0])
            left -= 1
    return p


def draw_winding_case(rng, contour_clearance=0.05):
    """Random (f, lambda, center) on which sampled winding and the root-count
    oracle must agree: all relevant roots at least `contour_clearance` off the
    contour and the tail limit away from the center."""
    while True:
        num = poly_from_roots(rng, int(rng.integers(0, 7)))
        den = poly_from_roots(rng, int(rng.integers(1, 7)))
        lam = float(rng.uniform(0.0, 2.0))
        f = RationalFunction(num, den)
        d = f.relative_degree
        if rng.random() < 0.5 and d >= -2:
            center = 0.0 + 0.0j
        else:
            center = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            while abs(center) < contour_clearance:
                center = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        nn = np.array(num.coeffs, dtype=complex)
        dd = np.array(den.coeffs, dtype=complex)
        m = max(len(nn), len(dd))
        g = np.trim_zeros(np.pad(nn, (0, m - len(nn))) - center * np.pad(dd, (0, m - len(dd))), "b")
        ok = True
        for coeffs in (g, dd):
            if len(coeffs) > 1:
                roots = np.roots(coeffs[::-1])
                if np.any(np.abs(roots.real + lam) < contour_clearance):
                    ok = False
        if d == 0 and abs(num.coeffs[-1] / den.coeffs[-1] - center) < contour_clearance:
            ok = False
        if ok:
            return f, lam, center
