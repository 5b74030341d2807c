import math

import numpy as np
import pytest

from shearmhd.grid import gamma_symbol, p_symbol
from shearmhd.linear_modes import (
    IntegrationControls,
    ModeSystem,
    MonotonicityReport,
    Variant,
    amplification_envelope,
    attach_energies,
    coercivity_bounds,
    default_params_sample,
    heat_kernel_defect,
    integrate_batch,
    integrate_mode,
    mode_functionals,
    monotonicity_suite,
    observation_grid,
    rhs_omega_j,
    rhs_z_q,
    verify_monotonicity,
    weighted_death_time,
)
from shearmhd.params import PhysicalParams, Regime


class TestRightHandSides:
    def test_omega_j_example(self):
        p = PhysicalParams(nu=0.3, mu=0.7, beta=1.0)
        d = rhs_omega_j(1, 0.0, 0.0, (1.0, 0.0), p)
        assert d[0] == pytest.approx(-p.nu)
        assert d[1] == pytest.approx(1j)

    def test_heat_branch(self):
        p = PhysicalParams(nu=0.3, mu=0.7, beta=1.0)
        d = rhs_omega_j(0, 2.0, 5.0, (1.0, 1.0), p)
        assert d[0] == pytest.approx(-p.nu * 4.0)
        assert d[1] == pytest.approx(-p.mu * 4.0)

    def test_decoupled_structure(self):
        # beta = 0 and nu = mu: two damped scalar equations plus stretching
        p = PhysicalParams(nu=0.2, mu=0.2, beta=1e-12)
        k, eta, t = 2, 3.0, 1.0
        d = rhs_omega_j(k, eta, t, (1.0, 1.0), p)
        pp = p_symbol(k, eta, t)
        dtp = -2.0 * k * (eta - k * t)
        assert d[0] == pytest.approx(-p.nu * pp, rel=1e-9)
        assert d[1] == pytest.approx(-p.mu * pp + dtp / pp, rel=1e-9)

    def test_zq_stretching_vanishes_at_critical_time(self):
        p = PhysicalParams(nu=0.1, mu=0.2, beta=1.0)
        k, eta = 2, 6.0
        t = eta / k
        d = rhs_z_q(k, eta, t, (1.0, 0.0), p)
        # at t = eta/k the only surviving term on z is -nu p z
        assert d[0] == pytest.approx(-p.nu * p_symbol(k, eta, t))

    def test_zq_requires_nonzero_k(self):
        p = PhysicalParams(nu=0.1, mu=0.2, beta=1.0)
        with pytest.raises(ValueError):
            rhs_z_q(0, 1.0, 0.0, (1.0, 0.0), p)
        with pytest.raises(ValueError):
            ModeSystem(k=0, eta=1.0, params=p, variant=Variant.Z_Q)


class TestExactSolutions:
    def test_pure_stretching_closed_form(self):
        # nu = mu ~ 0, beta ~ 0: j follows p(t)/p(0) exactly
        p = PhysicalParams(nu=1e-300, mu=1e-300, beta=1e-300)
        traj = integrate_mode(ModeSystem(k=1, eta=3.0, params=p), (0.0, 12.0),
                              IntegrationControls(rtol=1e-12), w0=(1.0, 1.0),
                              with_energies=False)
        w = traj.physical_states()
        exact = p_symbol(1, 3.0, traj.times) / p_symbol(1, 3.0, 0.0)
        assert np.max(np.abs(w[:, 1] - exact) / exact) < 1e-12
        assert np.max(np.abs(w[:, 0] - 1.0)) < 1e-12

    def test_heat_kernel_exactness(self, params_r2):
        assert heat_kernel_defect(2.0, params_r2, 30.0) < 1e-10

    def test_oscillation_frequency_large_beta(self):
        # coupling block eigenvalues +-i beta k show up as the state's beat
        p = PhysicalParams(nu=1e-12, mu=1e-12, beta=8.0)
        k = 3
        out = np.linspace(0.0, 6.0, 4001)
        traj = integrate_batch([k], [0.0], [[1.0, 0.0]], (0.0, 6.0), p,
                               Variant.Z_Q,
                               IntegrationControls(rtol=1e-10, zero_stretching=True),
                               output_times=out)[0]
        re = traj.states[:, 0].real
        # count zero crossings: frequency beta*k -> crossings ~ 2 beta k T / (2 pi)
        crossings = np.sum(np.abs(np.diff(np.sign(re))) > 0)
        expected = 2.0 * p.beta * k * 6.0 / (2.0 * math.pi)
        assert crossings == pytest.approx(expected, rel=0.05)

    def test_conservation_with_stretching_zeroed(self):
        p = PhysicalParams(nu=1e-300, mu=1e-300, beta=1.3)
        out = np.linspace(0.0, 20.0, 101)
        traj = integrate_batch([3], [5.0], [[0.3 + 0.1j, 0.7 - 0.2j]], (0.0, 20.0),
                               p, Variant.Z_Q,
                               IntegrationControls(rtol=1e-12, zero_stretching=True),
                               output_times=out)[0]
        n2 = np.sum(np.abs(traj.physical_states()) ** 2, axis=1)
        assert np.max(np.abs(n2 - n2[0])) < 1e-11


class TestPairedConsistency:
    def test_symmetric_variables_track_gamma(self, params_r2):
        k, eta = 2, 9.0
        out = np.linspace(0.0, 40.0, 401)
        w0 = (0.6 + 0.2j, -0.3 + 0.5j)
        g0 = gamma_symbol(k, eta, 0.0)
        toj = integrate_batch([k], [eta], [list(w0)], (0.0, 40.0), params_r2,
                              Variant.OMEGA_J, IntegrationControls(rtol=1e-11),
                              output_times=out)[0]
        tzq = integrate_batch([k], [eta], [[w0[0] * g0, w0[1] * g0]], (0.0, 40.0),
                              params_r2, Variant.Z_Q,
                              IntegrationControls(rtol=1e-11), output_times=out)[0]
        gam = gamma_symbol(k, eta, out)
        mapped = toj.states * gam[:, None]
        scale = np.max(np.abs(tzq.states))
        rel = np.max(np.abs(mapped - tzq.states)) / scale
        assert rel < 1e-8


class TestModeEnergies:
    def test_energy_with_zero_second_component(self, params_r2):
        e, d, ck = mode_functionals(2, 3.0, 1.0, params_r2, 0.7 + 0.1j, 0.0,
                                    Variant.Z_Q)
        assert e == pytest.approx(0.5 * abs(0.7 + 0.1j) ** 2)

    def test_mixed_term_bound(self, params_r2, rng):
        for _ in range(50):
            wa = complex(rng.standard_normal(), rng.standard_normal())
            wb = complex(rng.standard_normal(), rng.standard_normal())
            k = int(rng.integers(1, 10))
            eta, t = rng.uniform(-20, 20), rng.uniform(0, 20)
            e, _, _ = mode_functionals(k, eta, t, params_r2, wa, wb, Variant.Z_Q)
            quad = 0.5 * (abs(wa) ** 2 + abs(wb) ** 2)
            mixed = abs(e - quad)
            assert mixed <= (abs(wa) * abs(wb)) / abs(params_r2.beta) / 2 + 1e-14

    def test_coercivity_sandwich(self, params_r2, rng):
        for _ in range(50):
            wa = complex(rng.standard_normal(), rng.standard_normal())
            wb = complex(rng.standard_normal(), rng.standard_normal())
            k = int(rng.integers(1, 10))
            eta, t = rng.uniform(-20, 20), rng.uniform(0, 20)
            for variant in (Variant.Z_Q, Variant.OMEGA_J):
                e, _, _ = mode_functionals(k, eta, t, params_r2, wa, wb, variant)
                lo, hi = coercivity_bounds(params_r2, wa, wb)
                assert lo - 1e-14 <= e <= hi + 1e-14


class TestMonotonicity:
    def test_single_mode_passes(self, params_r2):
        obs = observation_grid([4], [20.0], params_r2, (0.0, 30.0), fine=True)
        traj = integrate_batch([4], [20.0], [[1.0, 0.5j]], (0.0, 30.0), params_r2,
                               Variant.Z_Q, IntegrationControls(rtol=1e-10),
                               output_times=obs)[0]
        rep = verify_monotonicity(traj, params_r2)
        assert isinstance(rep, MonotonicityReport)
        assert rep.passed
        assert rep.max_excursion <= 1.0

    def test_checker_has_teeth(self, params_r2):
        # with the mandated constants the weight collapses at a ~1e7 rate, so
        # only growth beyond that can violate the inequality; a synthetic
        # trajectory growing at 1e8 must be flagged
        from shearmhd.linear_modes import ModeTrajectory
        from shearmhd.multipliers import dt_log_weight

        k, eta = 2, 4.0
        times = np.linspace(0.0, 1e-6, 60)
        rate_w = float(np.max(np.abs(dt_log_weight(float(k), eta, times, params_r2))))
        growth = 6.0 * rate_w
        states = np.stack([np.exp(0.5 * growth * times),
                           0.1 * np.exp(0.5 * growth * times)], axis=1).astype(complex)
        bad = ModeTrajectory(k=k, eta=eta, variant=Variant.Z_Q, times=times,
                             states=states, log_scale=np.zeros_like(times))
        rep = verify_monotonicity(bad, params_r2)
        assert rep.max_excursion > 1.0
        assert not rep.integral_inequality_holds

    @pytest.mark.parametrize("regime", list(Regime))
    def test_suite_one_point_per_regime(self, regime):
        p = default_params_sample(regime)[1]
        res = monotonicity_suite(p, modes=[(1, 0.0), (2, -10.0), (4, 20.0)])
        assert res.all_passed
        assert res.worst_tail_bound <= 1e-8


class TestEnvelopes:
    def test_amplification_regime2_quick(self, params_r2):
        modes = [(1, 0.0), (1, 5.0), (2, -10.0)]
        rep = amplification_envelope(modes, params_r2, (0.0, 40.0),
                                     IntegrationControls(rtol=1e-6))
        assert rep.fitted_constant <= 10.0
        assert all(d["peak_ratio"] <= 10.0 for d in rep.per_mode)

    def test_k0_heat_envelope(self, params_r2):
        # zero x-mode: pure heat decay, never exceeds its start
        out = np.linspace(0.0, 20.0, 101)
        traj = integrate_batch([0], [2.0], [[1.0, 1.0]], (0.0, 20.0), params_r2,
                               Variant.OMEGA_J, IntegrationControls(rtol=1e-12),
                               output_times=out)[0]
        mags = np.exp(traj.log_magnitude())
        assert np.all(np.diff(mags) <= 1e-12)


class TestTrajectories:
    def test_step_underflow_reports_offending_mode(self, params_r2):
        # an unreachable tolerance drives the step below the floor; the
        # error names the mode
        from shearmhd.linear_modes import IntegrationError

        with pytest.raises(IntegrationError) as exc:
            integrate_batch([3], [7.0], [[1.0, 0.0]], (0.0, 1.0), params_r2,
                            Variant.Z_Q,
                            IntegrationControls(rtol=1e-30, h_min_factor=1e-6))
        assert exc.value.mode == (3, 7.0)

    def test_attach_energies_underflow_safe(self, params_r2):
        system = ModeSystem(k=1, eta=0.0, params=params_r2, variant=Variant.Z_Q)
        traj = integrate_mode(system, (0.0, 20.0), IntegrationControls(rtol=1e-9))
        assert traj.energy is not None
        assert np.all(np.isfinite(traj.energy))         # underflows to 0, not nan
        assert traj.energy[0] > 0
        assert np.all(np.isfinite(traj.envelope_ratio))

    def test_weighted_death_time_orders(self, params_r2):
        t1 = weighted_death_time([1], [0.0], params_r2, (0.0, 50.0))
        t2 = weighted_death_time([1], [100.0], params_r2, (0.0, 50.0))
        assert 0 < t1 <= t2 <= 50.0
