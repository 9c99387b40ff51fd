import numpy as np
import pytest

from swiptopt import SystemParams


@pytest.fixture
def make_params():
    """Factory for valid instances with overridable fields."""

    def factory(**overrides) -> SystemParams:
        values = dict(
            h=1e-3,
            p_avg=2.0,
            q_req=1e-3,
            p_sat=8e-4,
            p_circuit=2.4e-4,
            var_antenna=2e-5,
            var_conv=2e-5,
            t_sym=1.0,
            zeta=1.0,
            m_max=3,
        )
        values.update(overrides)
        return SystemParams(**values)

    return factory


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
