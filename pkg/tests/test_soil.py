import math

import pytest
from hypothesis import given, strategies as st

from hydrad.errors import DomainError
from hydrad.soil import PotState, SoilDynamics, step


def pot(theta=0.5, capacity=1.0):
    return PotState(theta=theta, capacity_liters=capacity)


class TestStep:
    def test_no_dynamics_is_identity(self):
        out = step(pot(0.5), SoilDynamics(decay_rate=0.0), dt=3600.0)
        assert out.theta == 0.5
        assert out.last_update == 3600.0

    def test_exponential_decay(self):
        # oracle: theta * exp(-decay * dt) = 0.5 * exp(-0.036)
        out = step(pot(0.5), SoilDynamics(decay_rate=1e-5), dt=3600.0)
        assert out.theta == pytest.approx(0.4823201467415615, rel=1e-12)
        assert out.theta == pytest.approx(0.5 * math.exp(-0.036), rel=1e-15)

    def test_clamps_at_saturation(self):
        dyn = SoilDynamics(decay_rate=0.0, absorb_efficiency=1.0)
        out = step(pot(0.9, capacity=1.0), dyn, dt=1.0, water_in=0.5)
        assert out.theta == 1.0

    def test_water_absorption(self):
        dyn = SoilDynamics(decay_rate=0.0, absorb_efficiency=0.8)
        out = step(pot(0.2, capacity=2.0), dyn, dt=1.0, water_in=0.5)
        assert out.theta == pytest.approx(0.2 + 0.8 * 0.5 / 2.0, rel=1e-12)

    @pytest.mark.parametrize("dt,water", [(-1.0, 0.0), (1.0, -0.1)])
    def test_negative_inputs_rejected(self, dt, water):
        with pytest.raises(DomainError):
            step(pot(), SoilDynamics(), dt=dt, water_in=water)

    def test_state_invariants(self):
        with pytest.raises(DomainError):
            PotState(theta=1.5, capacity_liters=1.0)
        with pytest.raises(DomainError):
            PotState(theta=0.5, capacity_liters=0.0)
        with pytest.raises(DomainError):
            SoilDynamics(absorb_efficiency=0.0)


class TestProperties:
    @given(st.floats(min_value=0.0, max_value=1.0),
           st.lists(st.tuples(st.floats(min_value=0.0, max_value=7200.0),
                              st.floats(min_value=0.0, max_value=2.0)), max_size=50))
    def test_theta_stays_in_unit_interval(self, theta0, actions):
        state = pot(theta0)
        dyn = SoilDynamics(decay_rate=1e-4, absorb_efficiency=0.9)
        for dt, water in actions:
            state = step(state, dyn, dt=dt, water_in=water)
            assert 0.0 <= state.theta <= 1.0

    @given(st.floats(min_value=0.0, max_value=1.0),
           st.floats(min_value=0.0, max_value=86400.0))
    def test_no_water_means_non_increasing(self, theta0, dt):
        out = step(pot(theta0), SoilDynamics(decay_rate=1e-5), dt=dt)
        assert out.theta <= theta0

    @given(st.floats(min_value=0.0, max_value=1.0),
           st.floats(min_value=0.0, max_value=1.0))
    def test_no_decay_means_non_decreasing(self, theta0, water):
        out = step(pot(theta0), SoilDynamics(decay_rate=0.0), dt=60.0, water_in=water)
        assert out.theta >= theta0

    @given(st.floats(min_value=0.01, max_value=1.0),
           st.floats(min_value=1.0, max_value=86400.0),
           st.floats(min_value=0.0, max_value=1e-4))
    def test_decay_semigroup(self, theta0, dt, rate):
        dyn = SoilDynamics(decay_rate=rate)
        whole = step(pot(theta0), dyn, dt=dt)
        halves = step(step(pot(theta0), dyn, dt=dt / 2), dyn, dt=dt / 2)
        assert halves.theta == pytest.approx(whole.theta, rel=1e-9)
        assert halves.last_update == pytest.approx(whole.last_update, rel=1e-12)
