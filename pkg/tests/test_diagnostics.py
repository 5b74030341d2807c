import math

import numpy as np
import pytest

from shearmhd.diagnostics import (
    EnergyRecord,
    bootstrap_monitor,
    damping_envelope_log,
    damping_norms,
    field_energy,
    make_record,
    plain_energy,
    quadratic_zero_profiles,
    r_terms,
    sobolev_neq_norm,
    symmetric_energy,
    zero_mode_energy,
)
from shearmhd.grid import (
    Grid,
    MhdState,
    SpectralField,
    inverse_transform,
    physical_norm2,
    sobolev_log_weight,
)
from shearmhd.multipliers import MultiplierStack
from shearmhd.nonlinear import SolverConfig, initial_state, run
from shearmhd.params import PhysicalParams


@pytest.fixture
def grid():
    return Grid(k_max=8, m_y=64, l_y=4 * math.pi, t_final=10.0)


def random_state(grid, rng, t=0.0, zero_mean=True):
    def draw():
        c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        f = SpectralField(grid, c, t)
        f.enforce_conjugate_symmetry()
        f.coeffs *= grid.dealias_mask()
        f.coeffs[0, 0] = 0.0
        return f

    return MhdState(draw(), draw())


class TestFieldEnergies:
    def test_j_zero_kills_mixed_term(self, grid, rng, params_r2):
        state = random_state(grid, rng)
        state.j.coeffs[:] = 0.0
        fe = field_energy(state, 0.0, params_r2)
        assert fe.mixed == 0.0
        assert fe.energy == pytest.approx(0.5 * fe.quad)

    def test_single_mode_hand_computed(self, grid, params_r2):
        # one conjugate pair at (k, m) with both fields: compare with direct
        # scalar arithmetic including the window and weight factors
        k, m = 1, 4
        t = grid.eta[m] / k + 1.0      # inside the chi window for mu <= 1
        wc = np.zeros(grid.shape, complex)
        jc = np.zeros(grid.shape, complex)
        wa, wb = 0.8 + 0.1j, -0.2 + 0.5j
        wc[k, m] = wa
        wc[-k % grid.nx, -m % grid.ny] = np.conj(wa)
        jc[k, m] = wb
        jc[-k % grid.nx, -m % grid.ny] = np.conj(wb)
        state = MhdState(SpectralField(grid, wc, t), SpectralField(grid, jc, t))
        fe = field_energy(state, t, params_r2)

        eta = grid.eta[m]
        from shearmhd.multipliers import log_weight_total

        w2 = math.exp(2.0 * float(log_weight_total(k, eta, t, params_r2)))
        p = k**2 + (eta - k * t) ** 2
        measure = grid.spectral_measure
        quad = 2.0 * w2 * (abs(wa) ** 2 + abs(wb) ** 2) * measure
        mixed = (2.0 / params_r2.beta) * ((eta - k * t) / p) * np.imag(
            wa * np.conj(wb)) * w2 * measure * 2.0
        assert fe.quad == pytest.approx(quad, rel=1e-12)
        assert fe.mixed == pytest.approx(mixed, rel=1e-12)
        assert fe.energy == pytest.approx(0.5 * (quad + mixed), rel=1e-12)

    def test_coercivity_sandwich(self, grid, rng, params_r2):
        for t in (0.0, 0.5):
            state = random_state(grid, rng, t)
            for fn in (field_energy, symmetric_energy):
                fe = fn(state, t, params_r2)
                lo = 0.5 * (1 - 0.5 / abs(params_r2.beta)) * fe.quad
                hi = 0.5 * (1 + 0.5 / abs(params_r2.beta)) * fe.quad
                assert lo - 1e-12 <= fe.energy <= hi + 1e-12

    def test_parseval_cross_check(self, grid, rng, params_r2):
        # weighted spectral sum against physical-space quadrature of the
        # weighted field (t = 0 keeps the weight representable)
        state = random_state(grid, rng)
        stack = MultiplierStack.on_grid(params_r2, 0.0, grid)
        fe = plain_energy(state, 0.0, params_r2, stack)
        w = np.exp(stack.log_total)
        total = 0.0
        for f in (state.omega, state.j):
            weighted = SpectralField(grid, w * f.coeffs, 0.0)
            phys = inverse_transform(weighted)
            total += physical_norm2(phys, grid)
        assert fe.quad == pytest.approx(total, rel=1e-10)


class TestZeroModeEnergy:
    def test_zero_state(self, grid, params_r2):
        state = MhdState(SpectralField.zeros(grid), SpectralField.zeros(grid))
        e0, d0 = zero_mode_energy(state, 0.0, params_r2)
        assert e0 == 0.0 and d0 == 0.0

    def test_heat_decay_of_zero_mode(self, grid, params_r2):
        # pure k = 0 data decays by the heat kernel; E0 follows it exactly
        cfg = SolverConfig(grid=grid, params=params_r2, epsilon=1e-4,
                           t_final=2.0, initial_profile="zero_mode_only",
                           dt_initial=0.02)
        s0 = initial_state(cfg)
        res = run(cfg)
        t = res.records[-1].t
        eta = grid.eta
        dec_w = np.exp(-params_r2.nu * eta**2 * t)
        dec_j = np.exp(-params_r2.mu * eta**2 * t)
        exact = MhdState(
            SpectralField(grid, np.vstack([s0.omega.coeffs[0, :] * dec_w,
                                           np.zeros((grid.nx - 1, grid.ny))]), t),
            SpectralField(grid, np.vstack([s0.j.coeffs[0, :] * dec_j,
                                           np.zeros((grid.nx - 1, grid.ny))]), t))
        e0_exact, _ = zero_mode_energy(exact, t, params_r2)
        assert res.records[-1].E0 == pytest.approx(e0_exact, rel=1e-8)

    def test_u0_from_omega0_consistency(self, grid, params_r2):
        # the zero-mode velocity is the eta-division of the vorticity row
        c = np.zeros(grid.shape, complex)
        c[0, 3] = 1.0
        c[0, -3 % grid.ny] = 1.0
        state = MhdState(SpectralField(grid, c, 0.0), SpectralField.zeros(grid))
        u1, u2 = state.u
        eta3 = grid.eta[3]
        assert u1.coeffs[0, 3] == pytest.approx(1j / eta3)
        assert np.all(u2.coeffs[0, :] == 0)
        e0, _ = zero_mode_energy(state, 0.0, params_r2)
        w3 = (1.0 + eta3**2) ** params_r2.n
        expected = 0.5 * (2.0 * w3 / eta3**2 + 2.0 * w3) * grid.spectral_measure
        assert e0 == pytest.approx(expected, rel=1e-12)


class TestDampingNorms:
    def test_weights_at_t0(self, grid, rng):
        state = random_state(grid, rng)
        dn = damping_norms(state, 0.0)
        assert dn["weighted_first"] == pytest.approx(
            math.hypot(dn["u1_neq"], dn["b1_neq"]))
        assert dn["weighted_second"] == pytest.approx(
            math.hypot(dn["u2_neq"], dn["b2_neq"]))

    def test_u2_decays_like_t_minus_2_linear_single_mode(self, params_r2):
        # |u2|/|omega| = |k|/p drops like <t>^-2 along a linear trajectory
        grid = Grid(k_max=4, m_y=96, l_y=4 * math.pi, t_final=20.0)
        c = np.zeros(grid.shape, complex)
        c[1, 0] = 1.0
        c[-1 % grid.nx, 0] = 1.0
        for t in (5.0, 10.0):
            state = MhdState(SpectralField(grid, c, t), SpectralField.zeros(grid, t))
            dn = damping_norms(state, t)
            ratio = dn["u2_neq"] / sobolev_neq_norm(state.omega, 0, moving=False)
            assert ratio == pytest.approx(1.0 / (1.0 + t**2), rel=1e-12)

    def test_envelope_log_regimes(self):
        p1 = PhysicalParams(nu=1e-5, mu=0.1, beta=1.0)
        assert damping_envelope_log(p1, 0.0) == pytest.approx(0.0)
        p3 = PhysicalParams(nu=0.5, mu=0.05, beta=1.0)
        assert damping_envelope_log(p3, 0.0) == pytest.approx(math.log(p3.alpha))


class TestRTerms:
    def test_vanish_without_u2(self, grid, params_r2):
        # pure zero-mode state: every quadratic profile of nonzero modes is 0
        c = np.zeros(grid.shape, complex)
        c[0, 2] = 1.0
        c[0, -2 % grid.ny] = 1.0
        state = MhdState(SpectralField(grid, c, 0.0),
                         SpectralField(grid, 0.5 * c, 0.0))
        terms = r_terms(state, 0.0, params_r2)
        assert all(v == 0.0 for v in terms.values())

    def test_two_mode_analytic(self, grid, params_r2):
        # hand-computable convolution: profiles from a single conjugate pair
        k, m = 2, 5
        t = 0.7
        wc = np.zeros(grid.shape, complex)
        a = 0.3 + 0.4j
        wc[k, m] = a
        wc[-k % grid.nx, -m % grid.ny] = np.conj(a)
        state = MhdState(SpectralField(grid, wc, t), SpectralField.zeros(grid, t))
        prof = quadratic_zero_profiles(state, t)
        eta = grid.eta[m]
        p = k**2 + (eta - k * t) ** 2
        u1 = 1j * (eta - k * t) / p * a
        u2 = -1j * k / p * a
        # x-average of u2 * u1 picks the (k) x (-k) pairings; the pointwise
        # product of two inverse transforms carries 1/(nx*ny), and the row is
        # stored in the x-average spectral convention (another 1/nx)
        expected = 2.0 * np.real(u2 * np.conj(u1)) / (grid.nx**2 * grid.ny)
        got = prof["u2u1"][0]
        assert got == pytest.approx(expected, abs=1e-16)
        assert np.max(np.abs(prof["b2b1"])) == 0.0

    def test_swap_symmetry_of_profiles(self, grid, rng, params_r2):
        state = random_state(grid, rng, t=0.9)
        swapped = MhdState(state.j.copy(), state.omega.copy())
        p1 = quadratic_zero_profiles(state, 0.9)
        p2 = quadratic_zero_profiles(swapped, 0.9)
        pairs = [("u2u1", "b2b1"), ("u2b1", "b2u1"), ("u2omega", "b2j"),
                 ("u2j", "b2omega"), ("bx_core", "ux_core")]
        for a, b in pairs:
            assert np.allclose(p1[a], p2[b], atol=1e-12)
            assert np.allclose(p1[b], p2[a], atol=1e-12)

    def test_against_brute_force_inner_product(self, grid, rng, params_r2):
        state = random_state(grid, rng, t=0.4)
        terms = r_terms(state, 0.4, params_r2)
        # recompute the first entry directly in physical space
        mask = grid.dealias_mask()
        u1, u2 = state.u

        def neq_phys(f):
            c = f.coeffs * mask
            c[0, :] = 0.0
            return inverse_transform(SpectralField(grid, c, 0.4))

        prod = neq_phys(u2) * neq_phys(u1)
        row = np.fft.fft2(prod)[0, :] / grid.nx
        eta = grid.eta
        om0 = state.omega.coeffs[0, :] / grid.nx
        dy_u10 = 1j * eta * np.where(eta != 0, 1j / np.where(eta == 0, 1, eta), 0.0) * om0
        w2 = np.exp(2.0 * sobolev_log_weight(0.0, eta, params_r2.n))
        expected = abs(float(np.real(np.sum(row * np.conj(dy_u10) * w2)))
                       * grid.spectral_measure)
        assert terms["uu_vs_u0"] == pytest.approx(expected, rel=1e-10)


class TestBootstrapMonitor:
    def _fake_records(self, ts, e, e0, regime_fields=False):
        recs = []
        for i, t in enumerate(ts):
            recs.append(EnergyRecord(
                t=t, E=e[i], E0=e0[i], D=0.0, D0=0.0, CK=0.0,
                Ebar=e[i], Etilde=e[i], Dbar=0.0, Dtilde=0.0, CKbar=0.0,
                CKtilde=0.0, u1_neq=0, u2_neq=0, b1_neq=0, b2_neq=0,
                omega_neq_HN=0, j_neq_HN=0, omega_neq_HN_moving=0,
                j_neq_HN_moving=0, ratio_E=0, ratio_Etilde=0, ratio_E0=0))
        return recs

    def test_zero_data_trivially_satisfied(self, params_r2):
        ts = np.linspace(0, 10, 11)
        recs = self._fake_records(ts, np.zeros(11), np.zeros(11))
        rep = bootstrap_monitor(recs, 1e-3, params_r2)
        assert not rep.violated

    def test_violation_detected_and_timed(self, params_r2):
        ts = np.linspace(0, 10, 101)
        eps = 1e-3
        e = np.where(ts < 4.0, 1e-8, 20.0 * eps**2 * np.ones_like(ts))
        recs = self._fake_records(ts, e, np.zeros_like(ts))
        rep = bootstrap_monitor(recs, eps, params_r2)
        assert rep.violated
        assert rep.first_violation_kind in ("symmetric", "plain_growth")
        assert rep.first_violation_time == pytest.approx(4.0, abs=0.2)

    def test_regime1_uses_chi_energy(self, params_r1):
        ts = np.linspace(0, 5, 6)
        eps = 1e-3
        recs = self._fake_records(ts, np.full(6, 20.0 * eps**2),
                                  np.zeros(6))
        rep = bootstrap_monitor(recs, eps, params_r1)
        assert rep.violated and rep.first_violation_kind == "nonzero_mode"

    def test_growth_allowance_for_plain_energy(self, params_r2):
        # Etilde may grow like 1000 eps^2 <t>^2 without violating
        ts = np.linspace(0, 10, 101)
        eps = 1e-3
        e = 500.0 * eps**2 * (1.0 + ts**2)
        recs = self._fake_records(ts, np.minimum(e, 9.9 * eps**2), np.zeros_like(ts))
        recs = self._fake_records(ts, np.zeros_like(ts), np.zeros_like(ts))
        for r, ee in zip(recs, e):
            r.Etilde = ee
        rep = bootstrap_monitor(recs, eps, params_r2)
        assert not rep.violated


class TestRecords:
    def test_make_record_and_csv_round_trip(self, grid, rng, params_r2, tmp_path):
        state = random_state(grid, rng)
        rec = make_record(state, 0.0, params_r2, 1e-3)
        assert rec.E > 0 and rec.E0 >= 0
        assert rec.ratio_E == pytest.approx(rec.E / (10.0 * 1e-6))
        path = tmp_path / "records.csv"
        from shearmhd.harness import write_records_csv

        write_records_csv(path, [rec])
        back = EnergyRecord.from_csv(path)
        assert len(back) == 1
        for name in ("t", "E", "E0", "Etilde", "u2_neq", "ratio_E0"):
            assert getattr(back[0], name) == pytest.approx(getattr(rec, name))

    def test_all_entries_nonnegative_where_required(self, grid, rng, params_r2):
        state = random_state(grid, rng)
        for t in (0.0, 1.0):
            state2 = MhdState(SpectralField(grid, state.omega.coeffs, t),
                              SpectralField(grid, state.j.coeffs, t))
            rec = make_record(state2, t, params_r2, 1e-3)
            for name in ("E", "E0", "D", "D0", "CK", "Ebar", "Etilde",
                         "u1_neq", "u2_neq", "b1_neq", "b2_neq",
                         "omega_neq_HN", "j_neq_HN"):
                assert getattr(rec, name) >= 0.0, name
