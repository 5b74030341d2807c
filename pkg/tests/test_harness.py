import json
import math
import os

import numpy as np
import pytest

import shearmhd.harness as harness
from shearmhd.cli import main as cli_main
from shearmhd.harness import (
    PointResult,
    StabilityOutcome,
    SweepSpec,
    WindowError,
    bisect_threshold,
    canonical_json,
    config_hash,
    fit_decay_rate,
    linear_run_csv,
    make_run_dir,
    regress_scaling,
    run_sweep,
    solver_config_from_dict,
    sweep_spec_from_dict,
)
from shearmhd.linear_modes import ModeSystem, Variant
from shearmhd.params import ConfigError, Regime


class TestScalingRegression:
    def _synthetic_points(self, gamma1, gamma2, regime, n=4, noise=0.0, seed=0):
        rng = np.random.default_rng(seed)
        pts = []
        grids = {
            Regime.NU_LE_MU3: ([1e-6, 5e-6, 2e-5, 8e-5], [0.1, 0.15, 0.22, 0.3]),
            Regime.MU3_LE_NU_LE_MU13: ([0.02, 0.04, 0.08, 0.15], [0.1, 0.15, 0.2, 0.3]),
        }[regime]
        for nu, mu in zip(*grids):
            eps = nu**gamma1 * mu**gamma2 * math.exp(noise * rng.standard_normal())
            pts.append(PointResult(nu=nu, mu=mu, regime=regime.name,
                                   eps_star=eps, saturated=None, history=[]))
        return pts

    def test_exact_synthetic_recovery(self):
        pts = self._synthetic_points(0.5, 1.0 / 3.0, Regime.NU_LE_MU3)
        fit = regress_scaling(pts, Regime.NU_LE_MU3)
        assert fit.gamma1 == pytest.approx(0.5, abs=1e-6)
        assert fit.gamma2 == pytest.approx(1.0 / 3.0, abs=1e-6)
        assert fit.flagged is None
        assert fit.predicted["gamma1"] == 0.5

    def test_noisy_fit_has_cis(self):
        pts = self._synthetic_points(0.5, 0.0, Regime.MU3_LE_NU_LE_MU13,
                                     noise=0.05, seed=3)
        fit = regress_scaling(pts, Regime.MU3_LE_NU_LE_MU13)
        lo, hi = fit.ci95_gamma1
        assert lo < fit.gamma1 < hi

    def test_underdetermined_flagged(self):
        pts = self._synthetic_points(0.5, 0.3, Regime.NU_LE_MU3)[:2]
        fit = regress_scaling(pts, Regime.NU_LE_MU3)
        assert fit.flagged is not None

    def test_saturated_points_excluded(self):
        pts = self._synthetic_points(0.5, 1.0 / 3.0, Regime.NU_LE_MU3)
        for p in pts:
            p.saturated = "hi"
        fit = regress_scaling(pts, Regime.NU_LE_MU3)
        assert fit.flagged is not None


class TestRateFit:
    def test_exact_exponential(self, params_r2):
        t = np.linspace(0.0, 80.0, 400)
        rate = 0.07
        energy = 3.0 * np.exp(-2.0 * rate * t)
        fit = fit_decay_rate(t, energy, params_r2)
        assert fit.slope == pytest.approx(-2.0 * rate, rel=1e-9)
        assert fit.ratio == pytest.approx(rate / params_r2.decay_rate, rel=1e-9)
        assert not fit.flagged
        assert fit.n_samples >= 20

    def test_window_too_short(self, params_r2):
        t = np.linspace(0.0, 1.0, 30)
        with pytest.raises(WindowError):
            fit_decay_rate(t, np.exp(-t), params_r2)

    def test_noisy_tail_trips_gate(self, params_r2, rng):
        t = np.linspace(0.0, 80.0, 400)
        energy = np.exp(-0.1 * t) * np.exp(3.0 * rng.standard_normal(t.size))
        fit = fit_decay_rate(t, energy, params_r2)
        assert fit.flagged

    def test_linear_run_decays_at_least_at_predicted_rate(self):
        # observed decay over the enhanced-dissipation window is at least the
        # envelope rate (the claim is an upper bound, so faster decay passes)
        from shearmhd.linear_modes import (IntegrationControls, ModeSystem,
                                           Variant, integrate_mode)
        from shearmhd.params import PhysicalParams

        params = PhysicalParams(nu=0.05, mu=0.3, beta=1.0)
        traj = integrate_mode(
            ModeSystem(k=1, eta=0.0, params=params, variant=Variant.OMEGA_J),
            (0.0, 30.0), IntegrationControls(rtol=1e-9),
            output_times=np.linspace(0.0, 30.0, 1201), with_energies=False)
        energy = np.exp(2.0 * traj.log_magnitude())
        fit = fit_decay_rate(traj.times, energy, params)
        assert fit.ratio >= 0.95
        # the true decay here is super-exponential (the drifting frequency
        # makes the local rate grow), so the goodness gate may flag the
        # straight-line fit; the rate comparison is the contract


class TestBisection:
    def _spec(self):
        return SweepSpec(nu_grid=[0.01], mu_grid=[0.1], eps_lo=1e-3, eps_hi=1.0,
                         eps_tol=0.10)

    def test_bisection_without_characterization(self, monkeypatch):
        spec = self._spec()
        true_star = 0.137

        def fake_stability(s, nu, mu, eps, t_final=None):
            return StabilityOutcome(eps, eps <= true_star, "stable", 0.0, 0.0, 1)

        monkeypatch.setattr(harness, "_stability_at", fake_stability)
        monkeypatch.setattr(harness, "_characterize_point", lambda *a, **k: None)
        res = bisect_threshold(spec, 0.01, 0.1)
        assert res.saturated is None
        assert res.eps_star == pytest.approx(true_star, rel=spec.eps_tol)
        assert res.monotonic_consistent

    def test_saturation_flags(self, monkeypatch):
        spec = self._spec()
        monkeypatch.setattr(harness, "_characterize_point", lambda *a, **k: None)
        monkeypatch.setattr(
            harness, "_stability_at",
            lambda s, nu, mu, eps, t_final=None: StabilityOutcome(
                eps, True, "stable", 0.0, 0.0, 1))
        assert bisect_threshold(spec, 0.01, 0.1).saturated == "hi"
        monkeypatch.setattr(
            harness, "_stability_at",
            lambda s, nu, mu, eps, t_final=None: StabilityOutcome(
                eps, False, "bootstrap_violation", 1.0, 2.0, 1, violation_time=0.5))
        res = bisect_threshold(spec, 0.01, 0.1)
        assert res.saturated == "lo"
        assert res.violation_time == 0.5

    def test_sweep_resume_skips_finished_points(self, tmp_path, monkeypatch):
        spec = SweepSpec(nu_grid=[0.01, 0.02], mu_grid=[0.1], eps_lo=1e-3,
                         eps_hi=1.0)
        monkeypatch.setattr(harness, "_characterize_point", lambda *a, **k: None)
        calls = []

        def fake_stability(s, nu, mu, eps, t_final=None):
            calls.append((nu, eps))
            return StabilityOutcome(eps, eps <= 0.1, "stable", 0.0, 0.0, 1)

        monkeypatch.setattr(harness, "_stability_at", fake_stability)
        out = tmp_path / "points"
        first = run_sweep(spec, str(out))
        n_calls = len(calls)
        assert len(first) == 2
        second = run_sweep(spec, str(out))
        assert len(second) == 2
        assert len(calls) == n_calls       # nothing re-run
        assert [p.eps_star for p in first] == [p.eps_star for p in second]


class TestManifests:
    def test_hash_deterministic_and_sensitive(self):
        a = {"x": 1, "y": [1, 2, 3]}
        assert config_hash(a) == config_hash(json.loads(canonical_json(a)))
        assert config_hash(a) != config_hash({"x": 2, "y": [1, 2, 3]})

    def test_run_dir_manifest(self, tmp_path):
        d = make_run_dir(str(tmp_path), {"kind": "test"}, "unit test")
        with open(os.path.join(d, "manifest.json")) as fh:
            m = json.load(fh)
        assert m["config"] == {"kind": "test"}
        assert m["config_hash"] == config_hash({"kind": "test"})
        assert m["command"] == "unit test"
        assert "code_version" in m


class TestConfigFiles:
    def test_solver_config_from_dict(self):
        doc = {
            "grid": {"k_max": 6, "m_y": 64, "l_y": 4 * math.pi, "t_final": 5.0},
            "params": {"nu": 0.02, "mu": 0.1, "beta": 1.0},
            "solver": {"epsilon": 1e-4, "dt_initial": 0.1},
        }
        cfg = solver_config_from_dict(doc)
        assert cfg.grid.k_max == 6
        assert cfg.epsilon == 1e-4

    def test_missing_field_path_cited(self):
        with pytest.raises(ConfigError, match="config.grid"):
            solver_config_from_dict({"params": {"nu": 0.1, "mu": 0.1}})
        with pytest.raises(ConfigError, match="config.sweep.nu_grid"):
            sweep_spec_from_dict({"sweep": {"nu_grid": {"lo": 1e-3},
                                            "mu_grid": [0.1]}})

    def test_invalid_constant_path_cited(self):
        doc = {
            "grid": {"k_max": 6, "m_y": 64},
            "params": {"nu": 0.02, "mu": 0.1, "c2": 100.0},
        }
        with pytest.raises(ConfigError, match="config.params"):
            solver_config_from_dict(doc)

    def test_sweep_geomspace_expansion(self):
        spec = sweep_spec_from_dict({"sweep": {
            "nu_grid": {"lo": 1e-3, "hi": 1e-1, "n": 3},
            "mu_grid": [0.1, 0.2],
        }})
        assert len(spec.nu_grid) == 3
        assert spec.nu_grid[0] == pytest.approx(1e-3)
        assert spec.nu_grid[-1] == pytest.approx(1e-1)


class TestLinearRunCsv:
    def test_columns_and_determinism(self, tmp_path, params_r2):
        sys_ = ModeSystem(k=1, eta=0.0, params=params_r2, variant=Variant.OMEGA_J)
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        linear_run_csv(p1, sys_, 10.0, rtol=1e-8, n_out=51)
        linear_run_csv(p2, sys_, 10.0, rtol=1e-8, n_out=51)
        t1 = p1.read_text()
        assert t1 == p2.read_text()             # bit-identical
        header = t1.splitlines()[0]
        assert header == ("t,component1_re,component1_im,component2_re,"
                          "component2_im,E_k,D_k,CK_k,envelope_ratio")
        assert len(t1.splitlines()) == 52


class TestCli:
    def test_multipliers_check_exit_codes(self, tmp_path, capsys):
        code = cli_main(["multipliers", "check", "--nu", "1e-5", "--mu", "0.1",
                         "--n-k", "4", "--n-r", "10", "--n-t", "10",
                         "--out", str(tmp_path / "rep.json")])
        assert code == 0
        rep = json.loads((tmp_path / "rep.json").read_text())
        assert rep["dissipation_gap_holds"]

    def test_invalid_c2_exit_2(self, capsys):
        assert cli_main(["multipliers", "check", "--c2", "2999"]) == 2
        assert "c2" in capsys.readouterr().err

    def test_linear_run_smoke(self, tmp_path):
        out = tmp_path / "mode.csv"
        code = cli_main(["linear", "run", "--k", "1", "--eta", "0",
                         "--nu", "0.05", "--mu", "0.1", "--t-final", "5",
                         "--rtol", "1e-8", "--out", str(out)])
        assert code == 0
        assert out.exists() and out.stat().st_size > 0

    def test_multipliers_table(self, tmp_path):
        out = tmp_path / "table.csv"
        code = cli_main(["multipliers", "table", "--k", "1", "2",
                         "--n-t", "5", "--n-r", "5", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("t,k,eta,log_m1")
        assert len(lines) == 1 + 5 * 2 * 5

    def test_nonlinear_run_report_and_restart(self, tmp_path):
        cfg = tmp_path / "run.yaml"
        cfg.write_text(
            "grid: {k_max: 4, m_y: 32, l_y: 6.283185307179586, t_final: 2.0}\n"
            "params: {nu: 0.05, mu: 0.1, beta: 1.0}\n"
            "solver: {epsilon: 1.0e-4, dt_initial: 0.1, t_final: 1.0,\n"
            "  band_k: 2, band_eta: 1.0}\n")
        code = cli_main(["nonlinear", "run", "--config", str(cfg),
                         "--out-dir", str(tmp_path / "runs")])
        assert code == 0
        run_dirs = list((tmp_path / "runs").iterdir())
        assert len(run_dirs) == 1
        files = {p.name for p in run_dirs[0].iterdir()}
        assert {"manifest.json", "records.csv", "final_state.npz",
                "summary.json"} <= files
        code = cli_main(["report", "--run-dir", str(run_dirs[0])])
        assert code == 0
        # restart from the written snapshot
        code = cli_main(["nonlinear", "run", "--config", str(cfg),
                         "--restart", str(run_dirs[0] / "final_state.npz"),
                         "--out-dir", str(tmp_path / "runs2")])
        assert code == 0

    def test_fit_rates_cli(self, tmp_path):
        # synthetic records CSV with a clean exponential tail
        from shearmhd.diagnostics import EnergyRecord
        from shearmhd.harness import write_records_csv

        ts = np.linspace(0.0, 80.0, 200)
        recs = []
        for t in ts:
            e = math.exp(-0.05 * t)
            recs.append(EnergyRecord(
                t=t, E=0, E0=0, D=0, D0=0, CK=0, Ebar=0, Etilde=0, Dbar=0,
                Dtilde=0, CKbar=0, CKtilde=0, u1_neq=0, u2_neq=0, b1_neq=0,
                b2_neq=0, omega_neq_HN=e, j_neq_HN=e,
                omega_neq_HN_moving=0, j_neq_HN_moving=0,
                ratio_E=0, ratio_Etilde=0, ratio_E0=0))
        path = tmp_path / "records.csv"
        write_records_csv(path, recs)
        out = tmp_path / "fit.json"
        code = cli_main(["fit", "rates", "--records", str(path),
                         "--nu", "0.02", "--mu", "0.1", "--out", str(out)])
        assert code == 0
        fit = json.loads(out.read_text())
        assert fit["slope"] == pytest.approx(-0.1, rel=1e-6)

    def test_linear_sweep_smoke(self, tmp_path):
        code = cli_main(["linear", "sweep", "--nu", "0.05", "--mu", "0.3",
                         "--t-final", "20", "--out-dir", str(tmp_path)])
        assert code == 0
        run_dirs = list(tmp_path.iterdir())
        assert len(run_dirs) == 1
        rep = json.loads((run_dirs[0] / "envelope.json").read_text())
        assert rep["fitted_constant"] <= 10.0
        assert (run_dirs[0] / "manifest.json").exists()

    def test_report_missing_dir_exit_2(self, tmp_path, capsys):
        assert cli_main(["report", "--run-dir", str(tmp_path / "nope")]) == 2

    def test_threshold_sweep_cli_end_to_end(self, tmp_path):
        cfg = tmp_path / "sweep.yaml"
        cfg.write_text(
            "sweep:\n"
            "  nu_grid: [3.0e-3]\n"
            "  mu_grid: [3.0e-3]\n"
            "  beta: 1.0\n"
            "  eps_tol: 0.30\n"
            "  k_max: 5\n"
            "  l_y: 12.566370614359172\n"
            "  t_final_cap: 10.0\n"
            "  output_stride: 10\n")
        code = cli_main(["threshold", "sweep", "--config", str(cfg),
                         "--out-dir", str(tmp_path / "runs")])
        assert code == 0
        run_dirs = list((tmp_path / "runs").iterdir())
        payload = json.loads((run_dirs[0] / "sweep.json").read_text())
        assert len(payload["points"]) == 1
        assert payload["points"][0]["eps_star"] > 0
        assert "scaling_fits" in payload
        assert (run_dirs[0] / "points").is_dir()
        # resumable: re-invoking reuses the finished point files
        code = cli_main(["threshold", "sweep", "--config", str(cfg),
                         "--out-dir", str(tmp_path / "runs")])
        assert code == 0
