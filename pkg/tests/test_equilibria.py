import math

import numpy as np
import pytest

from xcposc.equilibria import (
    find_equilibria,
    instability_window,
    root_locus,
    slow_zero_diagnostic,
)
from xcposc.errors import DegenerateDcGain
from xcposc.netfun import LoopFunction, make_loop, make_rc, make_rlc
from xcposc.poly import Polynomial, RationalFunction, feedback
from xcposc.sim import jacobian_at, realize
from xcposc.xcp import SectorNonlinearity, phi


def brute_force_balance_count(g0, nl, n=1_000_000):
    """Independent oracle: sign changes of (1/G(0))dv - phi(dv) on a dense grid."""
    span = 2.0 * g0 * nl.I + nl.V_sat
    dv = np.linspace(-span, span, n)
    vals = dv / g0 - phi(nl, dv)
    signs = np.sign(vals)
    nz = signs != 0
    changes = np.flatnonzero(np.diff(signs[nz]) != 0)
    locations = dv[nz][changes]
    return locations


class TestEquilibria:
    def test_unique_below_threshold(self, loop_rc, nl_weak):
        eq = find_equilibria(loop_rc, nl_weak)
        assert eq.unique
        assert len(eq.points) == 1
        assert eq.points[0].dv == 0.0
        assert nl_weak.K <= eq.K_threshold

    def test_threshold_value(self, loop_rc):
        eq = find_equilibria(loop_rc, SectorNonlinearity(5.0, 0.5))
        assert eq.K_threshold == pytest.approx(1.0 / 0.6089108910891089, rel=1e-9)

    def test_three_equilibria_above_threshold(self, loop_rc):
        # I just above the uniqueness current 1/(k_n G(0)^2) = 0.54
        eq = find_equilibria(loop_rc, SectorNonlinearity(5.0, 0.56))
        assert not eq.unique
        assert len(eq.points) == 3

    def test_rlc_always_unique(self, loop_design1):
        eq = find_equilibria(loop_design1, SectorNonlinearity(5.0, 50.0))
        assert eq.unique
        assert eq.K_threshold == math.inf

    def test_origin_unstable_at_design_current(self, loop_rc, nl_weak):
        eq = find_equilibria(loop_rc, nl_weak)
        assert eq.points[0].unstable

    def test_symmetry(self, loop_rc):
        eq = find_equilibria(loop_rc, SectorNonlinearity(5.0, 0.7))
        dvs = [p.dv for p in eq.points]
        assert dvs == sorted(dvs)
        outer_neg, origin, outer_pos = eq.points
        assert outer_neg.dv == pytest.approx(-outer_pos.dv, rel=1e-9)
        assert outer_neg.unstable == outer_pos.unstable
        assert sorted(r.real for r in outer_neg.local_poles) == pytest.approx(
            sorted(r.real for r in outer_pos.local_poles)
        )

    def test_brute_force_oracle(self, loop_rc):
        rng = np.random.default_rng(51)
        g0 = loop_rc.G(0.0).real
        for _ in range(8):
            k_n = float(rng.uniform(1.0, 10.0))
            threshold_current = 1.0 / (k_n * g0 * g0)
            tail = float(threshold_current * rng.uniform(0.3, 3.0))
            nl = SectorNonlinearity(k_n, tail)
            eq = find_equilibria(loop_rc, nl)
            locations = brute_force_balance_count(g0, nl, n=200_001)
            assert len(eq.points) == len(locations)
            for point, loc in zip(eq.points, locations):
                spacing = (4.0 * g0 * nl.I + 2.0 * nl.V_sat) / 200_000
                assert abs(point.dv - loc) <= 1.5 * spacing

    def test_saturated_branch_solution(self, loop_rc):
        # large current pushes the balance point beyond the saturation knee
        nl = SectorNonlinearity(5.0, 3.0)
        eq = find_equilibria(loop_rc, nl)
        g0 = loop_rc.G(0.0).real
        assert len(eq.points) == 3
        assert eq.points[-1].dv == pytest.approx(g0 * nl.I, rel=1e-9)
        assert eq.points[-1].dv > nl.V_sat

    def test_pole_at_origin_rejected(self):
        integ = RationalFunction([1.0], [0.0, 1.0])
        loop = LoopFunction(
            G=integ, G_inverse=integ.inverse(),
            controller=integ, plant=RationalFunction([0.0], [1.0]),
        )
        with pytest.raises(DegenerateDcGain):
            find_equilibria(loop, SectorNonlinearity(5.0, 1.0))


class TestRootLocus:
    def test_zero_gain_gives_open_loop_poles(self, loop_rc):
        branch = root_locus(loop_rc, [0.0])
        expected = sorted(loop_rc.G.poles().all_roots(), key=lambda z: (z.real, z.imag))
        got = sorted(branch.roots_per_gain[0], key=lambda z: (z.real, z.imag))
        assert got == pytest.approx(expected)

    def test_crossing_at_uniqueness_gain(self, loop_rc):
        g0 = loop_rc.G(0.0).real
        branch = root_locus(loop_rc, [1.0 / g0])
        assert min(abs(r) for r in branch.roots_per_gain[0]) < 1e-6

    def test_design1_unstable_at_design_gain(self, loop_design1, nl_strong):
        branch = root_locus(loop_design1, [nl_strong.K])
        assert any(r.real > 0 for r in branch.roots_per_gain[0])

    def test_root_count_constant(self, loop_design1):
        gains = np.linspace(0.0, 5.0, 40)
        branch = root_locus(loop_design1, gains)
        n = loop_design1.G.denominator.degree
        assert all(len(row) == n for row in branch.roots_per_gain)

    def test_branch_continuity_refines(self, loop_rc):
        # Hausdorff distance between consecutive root sets shrinks as the grid halves
        def max_jump(n_pts):
            gains = np.linspace(0.0, 3.0, n_pts)
            rows = root_locus(loop_rc, gains).roots_per_gain
            return max(
                max(abs(a - b) for a, b in zip(r1, r2))
                for r1, r2 in zip(rows, rows[1:])
            )

        coarse, fine = max_jump(20), max_jump(40)
        assert fine <= coarse * 0.75

    def test_prop2_crossing_random_loops(self, plant):
        rng = np.random.default_rng(52)
        for _ in range(10):
            ctrl = make_rc(float(rng.uniform(0.5, 5.0)), float(rng.uniform(0.02, 0.5)))
            loop = make_loop(ctrl, plant)
            g0 = loop.G(0.0).real
            charpoly = loop.G.denominator + (-1.0 / g0) * loop.G.numerator
            assert min(abs(r) for r in charpoly.roots().all_roots()) < 1e-6

    def test_local_poles_match_jacobian_eigenvalues(self, loop_rc, nl_weak):
        eq = find_equilibria(loop_rc, nl_weak)
        ss = realize(loop_rc.G)
        jac = jacobian_at(ss, nl_weak, np.zeros(ss.n))
        eigs = sorted(np.linalg.eigvals(jac), key=lambda z: (z.real, z.imag))
        local = sorted(eq.points[0].local_poles, key=lambda z: (z.real, z.imag))
        for a, b in zip(eigs, local):
            assert abs(a - b) < 1e-6


class TestInstabilityWindow:
    def test_rc_design_feasible(self, loop_rc, nl_weak):
        window = instability_window(loop_rc, nl_weak, lam=8.0)
        assert window.feasible
        assert window.K_min_unstable < nl_weak.K < window.K_max_allowed
        assert window.has_slow_zero

    def test_rlc_unbounded_window(self, loop_design1, nl_strong):
        window = instability_window(loop_design1, nl_strong, lam=2.0)
        assert window.K_max_allowed == math.inf
        assert window.feasible
        assert window.K_min_unstable < nl_strong.K
        assert 0.0 in window.slow_zeros

    def test_no_slow_zero_infeasible(self):
        # two dominant poles, no zeros: the locus only reaches the axis at 1/G(0)
        G = RationalFunction(
            Polynomial([1.0]),
            Polynomial([1.25, 1.0, 1.0]) * Polynomial([5.0, 1.0]),
        )
        loop = LoopFunction(
            G=G, G_inverse=G.inverse(), controller=G, plant=RationalFunction([0.0], [1.0])
        )
        window = instability_window(loop, SectorNonlinearity(5.0, 0.5), lam=2.0)
        assert not window.feasible
        assert not window.has_slow_zero
        assert window.K_min_unstable == math.inf

    def test_bisection_resolution(self, loop_rc, nl_weak):
        window = instability_window(loop_rc, nl_weak, lam=8.0, rel_tol=1e-4)
        k = window.K_min_unstable
        charpoly_lo = loop_rc.G.denominator + (-k * (1 - 3e-4)) * loop_rc.G.numerator
        charpoly_hi = loop_rc.G.denominator + (-k * (1 + 3e-4)) * loop_rc.G.numerator
        assert all(r.real <= 0 for r in charpoly_lo.roots().all_roots())
        assert any(r.real > 0 for r in charpoly_hi.roots().all_roots())


class TestSlowZero:
    def test_rc_loop_slow_zero_is_plant_pole(self, loop_rc):
        zeros = slow_zero_diagnostic(loop_rc, 8.0)
        assert len(zeros) == 1
        assert zeros[0] == pytest.approx(-4.1716, abs=1e-3)

    def test_rlc_loop_slow_zero_at_origin(self, loop_design1):
        assert 0.0 in slow_zero_diagnostic(loop_design1, 2.0)

    def test_fast_zero_not_slow(self, loop_rc):
        # with a tiny rate both plant poles sit left of -lambda
        assert slow_zero_diagnostic(loop_rc, 0.5) == ()
