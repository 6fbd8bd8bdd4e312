import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate

from stableou.levy_core import CompoundPoissonPath, StableParams, path_rng
from stableou.ou_dynamics import (
    DriverPath,
    GridSpec,
    LangevinSpec,
    brownian_driver,
    integrate_langevin,
    integrated_ou_cp_exact,
    jump_driver,
    local_extremum_time,
    simulate_large_friction,
    simulate_vx,
    stable_driver,
    time_change_map,
)


def zero_driver(T=1.0, n=10):
    return DriverPath(np.linspace(0, T, n + 1), np.zeros(n + 1))


def one_jump(tau=0.5, J=1.0, T=1.0, drift=0.0):
    return CompoundPoissonPath(np.array([tau]), np.array([J]), drift, T)


class TestSpecs:
    def test_exactly_one_form(self):
        with pytest.raises(ValueError):
            LangevinSpec(1.0, 1.0)
        with pytest.raises(ValueError):
            LangevinSpec(1.0, 1.0, eps=0.1, gamma=10.0)

    @pytest.mark.parametrize("kw", [dict(A=0.0), dict(T=-1.0), dict(eps=-0.1)])
    def test_ranges(self, kw):
        base = dict(A=1.0, T=1.0, eps=0.1)
        base.update(kw)
        with pytest.raises(ValueError):
            LangevinSpec(**base)

    def test_grid(self):
        g = GridSpec(4, 2.0)
        assert g.h == 0.5
        np.testing.assert_array_equal(g.nodes(), [0, 0.5, 1, 1.5, 2])
        np.testing.assert_array_equal(g.nodes([0.7]), [0, 0.5, 0.7, 1, 1.5, 2])
        with pytest.raises(ValueError):
            GridSpec(0, 1.0)
        with pytest.raises(ValueError):
            g.nodes([3.0])

    def test_driver_validation(self):
        with pytest.raises(ValueError):
            DriverPath(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            DriverPath(np.array([0.1, 1.0]), np.zeros(2))
        with pytest.raises(ValueError):
            DriverPath(np.array([0.0]), np.zeros(1))


class TestSmallNoise:
    def test_deterministic(self):
        spec = LangevinSpec(A=2.0, T=1.0, eps=0.0, v0=1.0)
        v, x = simulate_vx(spec, zero_driver(1.0, 7))
        assert v(1.0) == pytest.approx(math.exp(-2), rel=1e-14)
        assert x(1.0) == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-14)

    def test_rest(self):
        v, x = simulate_vx(LangevinSpec(1.0, 1.0, eps=0.0), stable_driver(StableParams(1.5), GridSpec(20, 1.0), path_rng(0)))
        assert np.all(v.right == 0) and np.all(x.right == 0)

    def test_one_jump_exact_on_node(self):
        d = jump_driver(one_jump(), GridSpec(10, 1.0))
        v, x = simulate_vx(LangevinSpec(1.0, 1.0, eps=1.0), d)
        t = x.times[x.times >= 0.5]
        np.testing.assert_allclose(x(t), 1 - np.exp(-(t - 0.5)), atol=1e-15)
        assert np.all(x(x.times[x.times < 0.5]) == 0)

    def test_grid_convergence(self):
        # jump strictly inside a step: the grid delays it to the next node
        tau = 0.5 + 2e-3
        errs = []
        for n in (16, 32, 64, 128):
            grid = GridSpec(n, 1.0)
            t = grid.nodes()
            inc = np.zeros(t.size)
            inc[np.searchsorted(t, tau)] = 1.0
            _, x = simulate_vx(LangevinSpec(1.0, 1.0, eps=1.0), DriverPath(t, inc))
            exact = np.where(t >= tau, 1 - np.exp(-(t - tau)), 0.0)
            errs.append(np.max(np.abs(x.right - exact)))
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        assert np.all(ratios >= 2.0)

    def test_jumps_follow_driver(self):
        cp = CompoundPoissonPath(np.array([0.13, 0.4, 0.77]), np.array([1.0, -2.5, 0.3]), 0.4, 1.0)
        eps = 0.3
        v, _ = simulate_vx(LangevinSpec(1.5, 1.0, eps=eps), jump_driver(cp, GridSpec(50, 1.0)))
        np.testing.assert_array_equal(v.jump_times, cp.times)
        sizes = v.right[v.jump_mask] - v.left[v.jump_mask]
        np.testing.assert_allclose(sizes, eps * cp.sizes, rtol=1e-14)

    def test_integration_by_parts(self):
        # v_t = v0 e^{-At} + eps l_t - eps A int_0^t e^{-A(t-s)} l_s ds
        A, eps, v0 = 1.7, 0.4, 0.6
        grid = GridSpec(40, 1.0)
        d = stable_driver(StableParams(1.5, 0.3), grid, path_rng(11))
        v, _ = simulate_vx(LangevinSpec(A, 1.0, eps=eps, v0=v0), d)
        lpath = d.to_path()
        for t in (0.25, 0.6, 1.0):
            conv, _ = integrate.quad(lambda s: math.exp(-A * (t - s)) * float(lpath(s)), 0, t,
                                     points=d.times[d.times < t], limit=200, epsabs=1e-13)
            ref = v0 * math.exp(-A * t) + eps * float(lpath(t)) - eps * A * conv
            assert float(v(t)) == pytest.approx(ref, abs=1e-10)

    def test_horizon_mismatch(self):
        with pytest.raises(ValueError):
            simulate_vx(LangevinSpec(1.0, 2.0, eps=0.1), zero_driver(1.0))
        with pytest.raises(ValueError):
            simulate_vx(LangevinSpec(1.0, 1.0, gamma=2.0), zero_driver(1.0))


class TestLargeFriction:
    def test_deterministic_velocity(self):
        spec = LangevinSpec(A=1.0, T=0.1, gamma=100.0, v0=1.0, x0=0.3)
        _, X = simulate_large_friction(spec, zero_driver(0.1, 5))
        assert X(0.1) == pytest.approx(0.3 + (1 - math.exp(-10)), rel=1e-14)
        assert X(0.1) - 0.3 == pytest.approx(0.9999546, abs=1e-7)

    def test_initial_position_is_a_shift(self):
        d = stable_driver(StableParams(1.5), GridSpec(100, 1.0), path_rng(4))
        _, X0 = simulate_large_friction(LangevinSpec(2.0, 1.0, gamma=50.0), d)
        _, X1 = simulate_large_friction(LangevinSpec(2.0, 1.0, gamma=50.0, x0=1.5), d)
        np.testing.assert_allclose(2.0 * X1.right - 2.0 * 1.5, 2.0 * X0.right, atol=1e-12)

    def test_initial_velocity_limit(self):
        vals = []
        for g in (10.0, 100.0, 1000.0):
            _, X = simulate_large_friction(LangevinSpec(1.0, 1.0, gamma=g, v0=2.0), zero_driver(1.0, 20))
            vals.append(float(X(0.2)))
        assert abs(vals[-1] - 2.0) < abs(vals[0] - 2.0)
        assert vals[-1] == pytest.approx(2.0, abs=1e-12)

    def test_zero_gamma(self):
        d = stable_driver(StableParams(1.2), GridSpec(30, 1.0), path_rng(1))
        V, X = simulate_large_friction(LangevinSpec(1.0, 1.0, gamma=0.0, v0=0.5, x0=0.2), d)
        assert np.all(X.right == 0.2)
        np.testing.assert_allclose(V.right, 0.5 + d.values(), atol=1e-14)

    @pytest.mark.parametrize("gamma", [1.0, 30.0, 400.0])
    def test_matches_exact_compound_poisson(self, gamma):
        cp = CompoundPoissonPath(np.array([0.2, 0.45, 0.8]), np.array([1.0, -0.7, 2.0]), -0.6, 1.0)
        _, X = simulate_large_friction(LangevinSpec(1.0, 1.0, gamma=gamma), jump_driver(cp, GridSpec(64, 1.0)))
        np.testing.assert_allclose(X.right, integrated_ou_cp_exact(cp, gamma, X.times), atol=1e-13)

    def test_AX_tracks_driver(self):
        d = brownian_driver(GridSpec(2000, 1.0), path_rng(2))
        errs = []
        for g in (10.0, 100.0, 1000.0):
            _, X = simulate_large_friction(LangevinSpec(2.0, 1.0, gamma=g), d)
            errs.append(np.max(np.abs(2.0 * X.right - d.values())))
        assert errs[0] > errs[1] > errs[2]


class TestCoupling:
    @pytest.mark.parametrize("eps,alpha", [(0.5, 1.5), (0.2, 2.0), (0.3, 0.8)])
    def test_one_jump(self, eps, alpha):
        gamma = time_change_map(eps, alpha)
        T = 1.0
        s = T * gamma  # small-noise horizon
        l = jump_driver(CompoundPoissonPath(np.array([0.4 * s]), np.array([1.0]), 0.25, s), GridSpec(40, s))
        _, x = simulate_vx(LangevinSpec(1.3, s, eps=eps, v0=0.2, x0=0.1), l)
        L = l.time_changed(eps, alpha)
        _, X = simulate_large_friction(LangevinSpec(1.3, L.horizon, gamma=gamma, v0=0.2, x0=0.1), L)
        np.testing.assert_allclose(X.times, x.times / gamma, rtol=1e-14)
        np.testing.assert_allclose(X.right, x.right, rtol=1e-10, atol=1e-12)

    def test_stable_grid(self):
        eps, alpha = 0.25, 1.5
        gamma = time_change_map(eps, alpha)
        s = 2.0 * gamma
        l = stable_driver(StableParams(alpha), GridSpec(200, s), path_rng(8))
        _, x = simulate_vx(LangevinSpec(1.0, s, eps=eps), l)
        L = l.time_changed(eps, alpha)
        _, X = simulate_large_friction(LangevinSpec(1.0, L.horizon, gamma=gamma), L)
        np.testing.assert_allclose(X.right, x.right, rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("eps,alpha,expected", [(1.0, 1.3, 1.0), (0.1, 2.0, 100.0), (0.5, 1.5, 2 ** 1.5)])
    def test_time_change_map(self, eps, alpha, expected):
        assert time_change_map(eps, alpha) == pytest.approx(expected, rel=1e-14)

    def test_time_change_map_range(self):
        with pytest.raises(ValueError):
            time_change_map(0.0, 1.5)
        with pytest.raises(ValueError):
            time_change_map(0.1, 2.5)


class TestExactCompoundPoisson:
    def test_empty(self):
        cp = CompoundPoissonPath(np.zeros(0), np.zeros(0), 0.0, 1.0)
        np.testing.assert_array_equal(integrated_ou_cp_exact(cp, 10.0, np.linspace(0, 1, 5)), 0.0)

    def test_drift(self):
        cp = CompoundPoissonPath(np.zeros(0), np.zeros(0), 1.0, 1.0)
        val = integrated_ou_cp_exact(cp, 10.0, 1.0)
        assert val == pytest.approx(1 - (1 - math.exp(-10)) / 10, rel=1e-15)
        assert val == pytest.approx(0.9000045399929762, abs=1e-15)

    def test_early_jump_limit(self):
        # a jump right after 0: X_t = 1 - exp(-gamma t) -> 1 for t > 0
        cp = one_jump(tau=1e-12)
        for g in (10.0, 100.0, 1000.0):
            assert integrated_ou_cp_exact(cp, g, 0.5) == pytest.approx(1 - math.exp(-g * 0.5), abs=1e-9)
        assert integrated_ou_cp_exact(cp, 1000.0, 0.5) == pytest.approx(1.0, abs=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            integrated_ou_cp_exact(one_jump(), 1.0, 1.5)
        with pytest.raises(ValueError):
            integrated_ou_cp_exact(one_jump(), -1.0, 0.5)

    def test_gamma_zero(self):
        assert integrated_ou_cp_exact(one_jump(), 0.0, 0.9) == 0.0


def brute_interior_extremum(cp, gamma, k, h):
    lo = cp.times[k]
    hi = cp.times[k + 1] if k + 1 < cp.n_jumps else cp.horizon
    t = np.arange(lo, hi + h / 2, h)
    x = integrated_ou_cp_exact(cp, gamma, np.clip(t, 0, cp.horizon))
    for idx in (int(np.argmax(x)), int(np.argmin(x))):
        if 0 < idx < t.size - 1:
            return t[idx]
    return None


class TestLocalExtremum:
    def test_single_jump_against_drift(self):
        cp = one_jump(0.5, 1.0, 1.0, drift=-1.0)
        ts = local_extremum_time(cp, 100.0, 0)
        assert ts == pytest.approx(math.log(1 + 100 * math.exp(50)) / 100, rel=1e-14)
        assert ts == pytest.approx(0.5461, abs=1e-4)
        assert abs(brute_interior_extremum(cp, 100.0, 0, 1e-5) - ts) < 2e-5

    def test_jump_with_drift_is_monotone(self):
        # jump and drift of the same sign: X keeps increasing, no critical point
        cp = one_jump(0.5, 1.0, 1.0, drift=1.0)
        assert local_extremum_time(cp, 100.0, 0) is None
        assert brute_interior_extremum(cp, 100.0, 0, 1e-5) is None

    def test_no_drift(self):
        cp = CompoundPoissonPath(np.array([0.2, 0.6]), np.array([1.0, -1.0]), 0.0, 1.0)
        assert local_extremum_time(cp, 100.0, 0) is None
        assert local_extremum_time(cp, 100.0, 1) is None

    def test_index_range(self):
        with pytest.raises(IndexError):
            local_extremum_time(one_jump(), 10.0, 1)

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.floats(0.02, 0.98), min_size=1, max_size=4, unique=True),
        st.lists(st.floats(0.3, 3.0), min_size=4, max_size=4),
        st.lists(st.booleans(), min_size=4, max_size=4),
        st.floats(0.2, 3.0),
        st.booleans(),
    )
    def test_against_brute_force(self, taus, mags, signs, drift, drift_up):
        taus = sorted(taus)
        assume(np.all(np.diff(taus) > 0.01))
        sizes = np.array([m if s else -m for m, s in zip(mags, signs)])[: len(taus)]
        cp = CompoundPoissonPath(np.array(taus), sizes, drift if drift_up else -drift, 1.0)
        h = 1e-4
        for k in range(cp.n_jumps):
            ts = local_extremum_time(cp, 100.0, k)
            tb = brute_interior_extremum(cp, 100.0, k, h)
            if ts is not None and tb is not None:
                assert abs(ts - tb) <= 2 * h
            else:
                # a miss is only allowed when the critical point hugs an endpoint
                other = ts if ts is not None else tb
                if other is not None:
                    hi = cp.times[k + 1] if k + 1 < cp.n_jumps else 1.0
                    assert min(other - cp.times[k], hi - other) <= 2 * h


class TestIntegrator:
    def test_kappa_zero(self):
        t = np.linspace(0, 1, 5)
        inc = np.array([0.0, 1.0, 0.0, 0.0, 0.0])
        vl, vr, x = integrate_langevin(DriverPath(t, inc, drift=0.5), 0.0, 1.0, 1.0)
        # v = L, x = int L: jump 1 at 0.25 plus drift 0.5 t
        assert vr[-1] == pytest.approx(1.5)
        assert x[-1] == pytest.approx(0.75 + 0.25)

    def test_small_step_series(self):
        # phi2 series branch agrees with the direct formula around the switch
        for h in (1e-6, 9.9e-5, 1.01e-4):
            d = DriverPath(np.array([0.0, h]), np.zeros(2), drift=1.0)
            _, _, x = integrate_langevin(d, 1.0, 1.0, 1.0)
            exact = h - (1 - math.exp(-h))
            assert x[-1] == pytest.approx(exact, rel=1e-8)
