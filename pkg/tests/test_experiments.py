import json
import math

import numpy as np
import pytest

from swiptopt import (
    ConfigError,
    CurveSpec,
    RicianModel,
    SolverOptions,
    SweepConfig,
    default_paper_params,
    export_curves,
    load_sweep_config,
    rate,
    run_sweep,
    solve_joint,
)
from swiptopt.experiments import DEFAULT_Q_FRACTIONS, ParamRules


def small_config(**overrides) -> SweepConfig:
    base = dict(
        curves=(
            CurveSpec("joint", 2.0, None),
            CurveSpec("joint", 2.0, 1),
            CurveSpec("ts", 2.0, None),
        ),
        seed=99,
        n_realizations=40,
        q_fractions=(0.0, 0.3, 0.6, 0.9),
        solver=SolverOptions(alpha_grid_points=2001, refine_iterations=30),
    )
    base.update(overrides)
    return SweepConfig(**base)


class TestDefaultPaperParams:
    def test_reference_derivation(self):
        tpl = default_paper_params(2.0, 1e-3)
        assert tpl.p_sat == pytest.approx(8e-4)
        assert tpl.p_circuit == pytest.approx(2.4e-4)
        assert tpl.sigma2 == pytest.approx(2e-5)

    def test_snr_rule_is_twenty_decibels(self):
        tpl = default_paper_params(2.0, 1e-3)
        assert 1e-3 * 2.0 / tpl.sigma2 == pytest.approx(100.0)

    def test_circuit_cap_uses_the_realized_gain(self):
        tpl = default_paper_params(2.0, 1e-3)
        params = tpl.instantiate(3e-3, 0.0)
        assert params.m_max == math.ceil(3e-3 * 2.0 / 8e-4) == 8

    def test_circuit_cap_mean_gain_switch(self):
        tpl = default_paper_params(2.0, 1e-3, ParamRules(m_max_from_mean_gain=True))
        assert tpl.instantiate(3e-3, 0.0).m_max == math.ceil(1e-3 * 2.0 / 8e-4) == 3

    def test_rejects_nonpositive_inputs(self):
        with pytest.raises(ValueError):
            default_paper_params(0.0, 1e-3)


class TestSweepConfig:
    def test_exactly_one_threshold_grid(self):
        with pytest.raises(ConfigError):
            small_config(q_fractions=(0.0,), q_joules=(0.0,))
        with pytest.raises(ConfigError):
            small_config(q_fractions=None, q_joules=None)

    def test_needs_curves(self):
        with pytest.raises(ConfigError):
            small_config(curves=())

    def test_threshold_grid_must_ascend(self):
        with pytest.raises(ConfigError):
            small_config(q_fractions=(0.5, 0.1))

    def test_round_trip_through_dict(self):
        cfg = small_config()
        assert SweepConfig.from_dict(cfg.to_dict()) == cfg

    def test_default_fraction_grid(self):
        assert DEFAULT_Q_FRACTIONS[0] == 0.0
        assert DEFAULT_Q_FRACTIONS[-1] == 0.95
        cfg = small_config(q_fractions=DEFAULT_Q_FRACTIONS)
        qs = cfg.q_values(cfg.curves[0])
        cap = 1e-3 * 2.0  # zeta * mean gain * budget * block time
        assert qs[-1] == pytest.approx(0.95 * cap)


class TestRunSweep:
    def test_no_demand_fixed_single_circuit(self):
        # with the circuit power removed, every draw achieves the plain
        # full-budget rate at threshold zero
        cfg = small_config(
            curves=(CurveSpec("joint", 2.0, 1),),
            q_fractions=(0.0,),
            rules=ParamRules(p_circuit_over_p_sat=0.0),
            n_realizations=25,
        )
        curves = run_sweep(cfg)
        tpl = default_paper_params(2.0, 1e-3, cfg.rules)
        rng = np.random.default_rng(cfg.seed)
        from swiptopt.channel import sample_gains

        draws = sample_gains(cfg.channel, rng, cfg.n_realizations)
        expected = np.mean(
            [rate(tpl.instantiate(float(h), 0.0), 2.0, 0.0) for h in draws]
        )
        assert curves[0].points[0].mean_rate == pytest.approx(expected, rel=1e-12)
        assert curves[0].points[0].feasible_fraction == 1.0

    def test_joint_dominates_time_switching_per_draw(self):
        curves = {c.scheme: c for c in run_sweep(small_config())}
        joint = curves["joint_adaptive_P2W"].rate_samples
        ts = curves["ts_adaptive_P2W"].rate_samples
        assert np.all(joint >= ts)

    def test_adaptive_dominates_single_circuit_per_draw(self):
        curves = {c.scheme: c for c in run_sweep(small_config())}
        adaptive = curves["joint_adaptive_P2W"].rate_samples
        single = curves["joint_m1_P2W"].rate_samples
        assert np.all(adaptive >= single)

    def test_rate_samples_nonincreasing_in_threshold(self):
        for curve in run_sweep(small_config()):
            samples = curve.rate_samples
            assert np.all(samples[1:] <= samples[:-1])

    def test_means_nonincreasing_in_threshold(self):
        for curve in run_sweep(small_config()):
            means = [p.mean_rate for p in curve.points]
            assert all(b <= a for a, b in zip(means, means[1:]))

    def test_split_never_chosen_to_hurt(self):
        # at threshold zero the solver keeps a positive split only if it
        # pays for the circuit power more cheaply than the forced corner
        cfg = small_config(curves=(CurveSpec("joint", 2.0, 1),), q_fractions=(0.0,))
        tpl = default_paper_params(2.0, 1e-3)
        rng = np.random.default_rng(cfg.seed)
        from swiptopt.channel import sample_gains

        for h in sample_gains(cfg.channel, rng, 20):
            params = tpl.instantiate(float(h), 0.0)
            sol = solve_joint(params, 1, cfg.solver)
            forced_rho = params.p_circuit * params.t_sym / params.linear_capacity()
            forced = rate(params, params.p_avg, forced_rho)
            assert sol.rate >= forced - 1e-12 * (1.0 + forced)

    def test_infeasible_draws_count_in_fraction(self):
        cfg = small_config(q_fractions=(0.95,), n_realizations=60)
        point = run_sweep(cfg)[0].points[0]
        assert 0.0 < point.feasible_fraction < 1.0

    def test_exclude_mode_changes_only_the_mean(self):
        kwargs = dict(curves=(CurveSpec("joint", 2.0, None),), q_fractions=(0.9,),
                      n_realizations=60)
        with_zeros = run_sweep(small_config(**kwargs))[0].points[0]
        excl = run_sweep(small_config(**kwargs, infeasible_rate_zero=False))[0].points[0]
        assert excl.feasible_fraction == with_zeros.feasible_fraction
        assert excl.mean_rate > with_zeros.mean_rate

    def test_deterministic_given_seed(self):
        a = run_sweep(small_config())
        b = run_sweep(small_config())
        for ca, cb in zip(a, b):
            assert ca.points == cb.points


class TestExport:
    def test_empty_export_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            export_curves([], tmp_path, config=small_config())

    def test_csv_schema(self, tmp_path):
        cfg = small_config(n_realizations=10, q_fractions=(0.0, 0.5))
        curves = run_sweep(cfg)
        csv_path, json_path = export_curves(curves, tmp_path, config=cfg)
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "scheme,q_joules,mean_rate_bpcu,feasible_fraction,mean_m"
        assert len(lines) == 1 + len(cfg.curves) * 2
        assert "\r" not in csv_path.read_bytes().decode()
        sidecar = json.loads(json_path.read_text())
        assert sidecar["generator"] == "numpy.random.Generator(PCG64)"
        assert sidecar["config"]["seed"] == cfg.seed
        assert sidecar["software_version"]

    def test_rerun_from_sidecar_is_byte_identical(self, tmp_path):
        cfg = small_config(n_realizations=15, q_fractions=(0.0, 0.4, 0.8))
        curves = run_sweep(cfg)
        csv_path, json_path = export_curves(curves, tmp_path / "a", config=cfg)
        cfg2 = load_sweep_config(json_path)
        assert cfg2 == cfg
        csv2, _ = export_curves(run_sweep(cfg2), tmp_path / "b", config=cfg2)
        assert csv_path.read_bytes() == csv2.read_bytes()

    def test_full_float_precision_round_trips(self, tmp_path):
        cfg = small_config(n_realizations=10, q_fractions=(0.3,))
        curves = run_sweep(cfg)
        csv_path, _ = export_curves(curves, tmp_path, config=cfg)
        row = csv_path.read_text().splitlines()[1].split(",")
        assert float(row[2]) == curves[0].points[0].mean_rate
