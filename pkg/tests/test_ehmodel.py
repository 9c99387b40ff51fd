import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swiptopt import (
    EHModelKind,
    SystemParams,
    harvest,
    harvest_linear,
    harvest_per_circuit,
    net_harvest,
    rate,
)

finite = st.floats(allow_nan=False, allow_infinity=False)


class TestSystemParams:
    def test_valid_instance(self, make_params):
        p = make_params()
        assert p.p_circuit < p.p_sat
        assert p.linear_capacity() == pytest.approx(2e-3)
        assert p.harvest_ceiling(1) == pytest.approx(8e-4)
        assert p.harvest_ceiling(5) == pytest.approx(2e-3)

    @pytest.mark.parametrize(
        "bad",
        [
            {"h": 0.0},
            {"h": -1.0},
            {"p_avg": 0.0},
            {"q_req": -1e-9},
            {"t_sym": 0.0},
            {"zeta": 0.0},
            {"zeta": 1.1},
            {"p_circuit": -1e-9},
            {"p_circuit": 8e-4},  # must stay below p_sat
            {"var_antenna": -1e-12},
            {"var_conv": 0.0},
            {"m_max": 0},
        ],
    )
    def test_invariants_rejected(self, make_params, bad):
        with pytest.raises(ValueError):
            make_params(**bad)

    def test_zero_circuit_power_is_allowed_as_degenerate_limit(self, make_params):
        assert make_params(p_circuit=0.0).p_circuit == 0.0

    def test_diode_limit_constructor(self):
        p = SystemParams.with_diode_limit(
            v_breakdown=2.0,
            r_load=500.0,
            h=1e-3,
            p_avg=2.0,
            q_req=0.0,
            p_circuit=1e-4,
            var_antenna=1e-5,
            var_conv=1e-5,
        )
        assert p.p_sat == pytest.approx(2.0**2 / (4 * 500.0))


class TestRate:
    def test_zero_power_gives_zero_rate(self, make_params):
        p = make_params()
        for rho in (0.0, 0.3, 0.99):
            assert rate(p, 0.0, rho) == 0.0

    def test_zero_split_collapses(self, make_params):
        p = make_params(var_antenna=5e-6, var_conv=5e-6)
        expected = math.log2(1.0 + p.h * 2.0 / (5e-6 + 5e-6))
        assert rate(p, 2.0, 0.0) == pytest.approx(expected, rel=1e-14)

    def test_frozen_high_precision_value(self, make_params):
        # independent arbitrary-precision evaluation of the closed form at
        # h=1e-3, noise variances 5e-6, p=2, split 0.5
        p = make_params(h=1e-3, var_antenna=5e-6, var_conv=5e-6)
        assert rate(p, 2.0, 0.5) == pytest.approx(7.0696735278068111877, rel=1e-13)

    def test_domain_errors(self, make_params):
        p = make_params()
        with pytest.raises(ValueError):
            rate(p, -1.0, 0.0)
        with pytest.raises(ValueError):
            rate(p, 1.0, 1.0)
        with pytest.raises(ValueError):
            rate(p, 1.0, -0.1)

    def test_vectorized_matches_scalar(self, make_params):
        p = make_params()
        p_tx = np.array([0.0, 0.5, 2.0])
        out = rate(p, p_tx, 0.25)
        for x, r in zip(p_tx, out):
            assert r == rate(p, float(x), 0.25)

    def test_monotonicity_finite_differences(self, make_params, rng):
        p = make_params()
        p_tx = rng.uniform(1e-6, 10.0, 2000)
        rho = rng.uniform(0.0, 0.999, 2000)
        up = rate(p, p_tx * (1.0 + 1e-6) + 1e-12, rho)
        assert np.all(up > rate(p, p_tx, rho))
        more_split = np.minimum(rho + 1e-6, 0.9999)
        assert np.all(rate(p, p_tx, more_split) < rate(p, p_tx, rho))


class TestHarvestPerCircuit:
    def test_breakpoint_continuity(self, make_params):
        p = make_params()
        y = 0.5
        p_break = p.p_sat / (p.zeta * y * p.h)
        below = harvest_per_circuit(p, p_break * (1 - 1e-12), y)
        at = harvest_per_circuit(p, p_break, y)
        above = harvest_per_circuit(p, p_break * (1 + 1e-12), y)
        assert at == pytest.approx(p.p_sat * p.t_sym, rel=1e-12)
        assert above == p.p_sat * p.t_sym
        assert abs(at - below) <= 1e-11 * p.p_sat

    def test_zero_power(self, make_params):
        assert harvest_per_circuit(make_params(), 0.0, 1.0) == 0.0

    def test_saturation_clamp(self, make_params):
        p = make_params()
        p_tx = 2.0 * p.p_sat / (p.zeta * p.h)  # twice the saturation input
        assert harvest_per_circuit(p, p_tx, 1.0) == p.p_sat * p.t_sym

    @given(
        p_tx=st.floats(0.0, 1e3),
        y=st.floats(1e-6, 1.0),
        c=st.floats(1.0, 1e3),
    )
    @settings(max_examples=200)
    def test_only_the_product_matters(self, p_tx, y, c):
        p = SystemParams(
            h=1e-3, p_avg=2.0, q_req=0.0, p_sat=8e-4, p_circuit=2.4e-4,
            var_antenna=2e-5, var_conv=2e-5,
        )
        a = harvest_per_circuit(p, p_tx, y)
        b = harvest_per_circuit(p, p_tx * c, y / c)
        assert b == pytest.approx(a, rel=1e-12, abs=1e-300)

    def test_domain_errors(self, make_params):
        p = make_params()
        with pytest.raises(ValueError):
            harvest_per_circuit(p, -1.0, 0.5)
        with pytest.raises(ValueError):
            harvest_per_circuit(p, 1.0, 1.5)


class TestHarvestLinear:
    def test_examples(self, make_params):
        p = make_params(zeta=1.0, t_sym=1.0)
        assert harvest_linear(p, 0.0) == 0.0
        assert harvest_linear(p, 3.0) == 3.0
        assert harvest_linear(p, 2.0) == 2.0 * harvest_linear(p, 1.0)

    def test_unbounded_vs_saturating(self, make_params):
        p = make_params()
        big = 100.0 * p.p_sat / p.zeta
        assert harvest_linear(p, big) > harvest(p, big, EHModelKind.NONLINEAR_SATURATING)
        assert harvest(p, big, EHModelKind.LINEAR) == harvest_linear(p, big)

    def test_domain_error(self, make_params):
        with pytest.raises(ValueError):
            harvest_linear(make_params(), -1e-9)


class TestNetHarvest:
    def test_all_harvest_phase(self, make_params):
        p = make_params()
        m = 2
        expected = m * harvest_per_circuit(p, 0.5, 1.0 / m)
        assert net_harvest(p, m, 1.0, 0.5, 123.0, 0.9) == pytest.approx(expected)

    def test_idle_decoder_still_pays(self, make_params):
        p = make_params()
        assert net_harvest(p, 1, 0.0, 0.0, 5.0, 0.0) == pytest.approx(
            -p.p_circuit * p.t_sym
        )

    def test_unsaturated_collapses_to_linear(self, make_params, rng):
        p = make_params()
        for _ in range(200):
            alpha = rng.uniform(0.0, 1.0)
            rho = rng.uniform(0.0, 0.999)
            p_eh = rng.uniform(0.0, 5.0)
            p_id = rng.uniform(0.0, 5.0)
            m = math.ceil(p.zeta * p.h * max(p_eh, rho * p_id) / p.p_sat) or 1
            got = net_harvest(p, m, alpha, p_eh, p_id, rho)
            lin = (
                alpha * p.zeta * p.h * p_eh * p.t_sym
                + (1 - alpha) * p.zeta * rho * p.h * p_id * p.t_sym
                - (1 - alpha) * p.p_circuit * p.t_sym
            )
            assert got == pytest.approx(lin, rel=1e-12, abs=1e-18)

    def test_nondecreasing_in_circuit_count(self, make_params, rng):
        p = make_params()
        for _ in range(200):
            alpha = rng.uniform(0.0, 1.0)
            rho = rng.uniform(0.0, 0.999)
            p_eh = rng.uniform(0.0, 2000.0)
            p_id = rng.uniform(0.0, 2000.0)
            values = [net_harvest(p, m, alpha, p_eh, p_id, rho) for m in range(1, 8)]
            assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))

    def test_single_circuit_matches_linear_model_below_saturation(self, make_params):
        p = make_params()
        x = 0.5 * p.p_sat / (p.zeta * p.h)  # comfortably on the linear branch
        assert 1 * harvest_per_circuit(p, x, 1.0) == pytest.approx(
            harvest_linear(p, p.h * x), rel=1e-14
        )

    def test_domain_errors(self, make_params):
        p = make_params()
        with pytest.raises(ValueError):
            net_harvest(p, 0, 0.5, 1.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            net_harvest(p, 1, 1.5, 1.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            net_harvest(p, 1, 0.5, 1.0, 1.0, 1.0)
