"""Adam update contracts."""

import numpy as np
import pytest

from fairdtd.errors import DimensionError
from fairdtd.optim import AdamState, adam_step


class TestAdam:
    def test_zero_gradient_is_fixed_point(self):
        params = {"w": np.array([[1.5, -2.0]])}
        state = AdamState.for_params(params)
        adam_step(params, {"w": np.zeros((1, 2))}, state, lr=0.1)
        np.testing.assert_array_equal(params["w"], [[1.5, -2.0]])

    def test_first_step_moves_by_lr_times_sign(self):
        # with bias correction, step one reduces to lr * g / (|g| + eps)
        for g0 in (0.3, -4.0, 12.5):
            params = {"w": np.array([[1.0]])}
            state = AdamState.for_params(params)
            adam_step(params, {"w": np.array([[g0]])}, state, lr=0.01)
            expected = 1.0 - 0.01 * g0 / (abs(g0) + 1e-8)
            assert params["w"][0, 0] == pytest.approx(expected, rel=1e-9)
            assert params["w"][0, 0] == pytest.approx(1.0 - 0.01 * np.sign(g0), rel=1e-6)

    def test_identical_problems_give_bit_identical_trajectories(self):
        def run():
            params = {"w": np.array([[2.0]])}
            state = AdamState.for_params(params)
            traj = []
            for t in range(50):
                grad = {"w": np.array([[np.sin(t + 1.0) * params["w"][0, 0]]])}
                adam_step(params, grad, state, lr=0.05)
                traj.append(params["w"][0, 0])
            return traj

        assert run() == run()

    def test_shape_mismatch(self):
        params = {"w": np.zeros((2, 2))}
        state = AdamState.for_params(params)
        with pytest.raises(DimensionError):
            adam_step(params, {"w": np.zeros((2, 3))}, state, lr=0.1)

    def test_key_mismatch(self):
        params = {"w": np.zeros((2, 2))}
        state = AdamState.for_params(params)
        with pytest.raises(DimensionError):
            adam_step(params, {"v": np.zeros((2, 2))}, state, lr=0.1)

    def test_matches_reference_adam_on_quadratic(self):
        # independent scalar re-implementation of the textbook update
        lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
        w_ref, m, v = 3.0, 0.0, 0.0
        params = {"w": np.array([[3.0]])}
        state = AdamState.for_params(params)
        for t in range(1, 30):
            g = 2.0 * w_ref
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            w_ref -= lr * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)
            adam_step(params, {"w": np.array([[2.0 * params["w"][0, 0]]])}, state, lr=lr)
            assert params["w"][0, 0] == pytest.approx(w_ref, rel=1e-12)
