"""
Tests for SGD with momentum, EVE and the L2 penalty.
"""
import math

import numpy as np
import pytest

from irrcnn.exceptions import NonFiniteError, ShapeError
from irrcnn.optim import (
    Eve,
    EveState,
    Sgd,
    SgdState,
    apply_l2,
    covered_weights,
    eve_step,
    l2_penalty,
    make_optimizer,
    sgd_momentum_step,
)
from irrcnn.schemas.training import EveConfig, L2Scope, OptimizerName, SgdConfig


def one_param(value=1.0):
    return {"w": np.array([value], dtype=np.float64)}


class TestSgd:
    def test_first_step_is_plain_gradient_step(self):
        params = {"w": np.array([1.0, -2.0])}
        grads = {"w": np.array([0.5, 0.25])}
        sgd_momentum_step(params, grads, SgdState(eta=0.1, mu=0.9, decay=0.0))
        np.testing.assert_allclose(params["w"], [0.95, -2.025])

    def test_two_step_trace(self):
        params = one_param()
        state = SgdState(eta=0.1, mu=0.9, decay=0.0)
        grads = {"w": np.array([0.5])}
        sgd_momentum_step(params, grads, state)
        np.testing.assert_allclose(state.velocity["w"], [-0.05])
        sgd_momentum_step(params, grads, state)
        np.testing.assert_allclose(state.velocity["w"], [-0.095])
        np.testing.assert_allclose(params["w"], [0.855])
        assert state.step == 2

    def test_zero_gradient_keeps_parameters(self):
        params = one_param(3.0)
        sgd_momentum_step(params, {"w": np.zeros(1)}, SgdState())
        assert params["w"][0] == 3.0

    def test_learning_rate_decay(self):
        assert SgdState(eta=0.1, decay=0.5, step=2).learning_rate == pytest.approx(0.05)

    def test_non_finite_loss(self):
        optimizer = Sgd(SgdConfig())
        with pytest.raises(NonFiniteError):
            optimizer.step(one_param(), {"w": np.ones(1)}, float("nan"))

    def test_non_finite_gradient(self):
        params = one_param()
        with pytest.raises(NonFiniteError):
            sgd_momentum_step(params, {"w": np.array([np.inf])}, SgdState())
        assert params["w"][0] == 1.0

    def test_missing_gradient(self):
        with pytest.raises(ShapeError):
            sgd_momentum_step(one_param(), {}, SgdState())
        with pytest.raises(ShapeError):
            sgd_momentum_step(one_param(), {"w": np.ones(2)}, SgdState())


class TestEve:
    def test_first_step_closed_form(self):
        cfg = EveConfig(learning_rate=0.01)
        params = {"w": np.array([1.0, 1.0])}
        g = np.array([0.3, -2.0])
        eve_step(params, {"w": g}, 0.7, EveState(config=cfg))
        expected = 1.0 - 0.01 * g / (np.abs(g) + cfg.epsilon)
        np.testing.assert_allclose(params["w"], expected, rtol=1e-6)

    def test_zero_gradient_keeps_parameters(self):
        params = one_param(2.0)
        eve_step(params, {"w": np.zeros(1)}, 1.0, EveState())
        assert params["w"][0] == 2.0

    def test_feedback_clips_small_increase(self):
        state = EveState()
        eve_step(one_param(), {"w": np.ones(1)}, 1.0, state)
        assert state.d == 1.0
        assert state.f_hat == 1.0
        eve_step(one_param(), {"w": np.ones(1)}, 1.05, state)
        assert state.f_hat == pytest.approx(1.1)
        assert state.d == pytest.approx(0.9999 + 0.0001 * 0.1)

    def test_feedback_on_decrease(self):
        state = EveState()
        eve_step(one_param(), {"w": np.ones(1)}, 1.0, state)
        eve_step(one_param(), {"w": np.ones(1)}, 0.5, state)
        # ratio 0.5 lies inside [1/11, 1/1.1]
        assert state.f_hat == pytest.approx(0.5)
        assert state.d == pytest.approx(0.9999 + 0.0001 * 1.0)

    def test_zero_loss_is_floored(self):
        state = EveState()
        eve_step(one_param(), {"w": np.ones(1)}, 0.0, state)
        eve_step(one_param(), {"w": np.ones(1)}, 0.0, state)
        assert math.isfinite(state.d)
        assert state.f_hat > 0

    def test_learning_rate_decay(self):
        state = EveState(config=EveConfig(learning_rate=1e-3, decay=1.0), step=3)
        assert state.learning_rate == pytest.approx(2.5e-4)

    def test_negative_loss(self):
        with pytest.raises(ValueError):
            eve_step(one_param(), {"w": np.ones(1)}, -0.1, EveState())

    def test_nan_loss_leaves_state_alone(self):
        state = EveState()
        params = one_param()
        with pytest.raises(NonFiniteError):
            Eve(EveConfig()).step(params, {"w": np.ones(1)}, float("nan"))
        with pytest.raises(NonFiniteError):
            eve_step(params, {"w": np.ones(1)}, float("inf"), state)
        assert state.step == 0
        assert state.f_hat is None
        assert params["w"][0] == 1.0


class TestL2:
    def test_penalty(self):
        weights = {"a": np.array([1.0, 2.0])}
        assert l2_penalty(weights, 0.002) == pytest.approx(0.01)
        assert l2_penalty(weights, 0.0) == 0.0
        assert l2_penalty({"a": np.zeros(3)}) == 0.0

    def test_gradient_increment(self):
        grads = {"a": np.array([0.0, 0.0]), "b": np.array([1.0])}
        updated = apply_l2(grads, {"a": np.array([1.0, -1.0])}, 0.002)
        np.testing.assert_allclose(updated["a"], [0.004, -0.004])
        np.testing.assert_array_equal(updated["b"], grads["b"])
        np.testing.assert_array_equal(grads["a"], [0.0, 0.0])

    def test_zero_lambda_is_identity(self):
        grads = {"a": np.array([0.5])}
        assert apply_l2(grads, {"a": np.array([3.0])}, 0.0)["a"][0] == 0.5

    def test_scopes(self, miniature):
        blocks = covered_weights(miniature.parameters(), L2Scope.BLOCKS)
        every = covered_weights(miniature.parameters(), L2Scope.ALL)
        assert blocks
        assert set(blocks) < set(every)
        assert all(".unit." in name and name.endswith("weight") for name in blocks)
        assert "classifier.weight" in every
        assert "stem0.conv.weight" in every
        assert not any(name.endswith("bias") or name.endswith("gamma") for name in every)


def test_make_optimizer():
    assert isinstance(make_optimizer(OptimizerName.SGD, SgdConfig(), EveConfig()), Sgd)
    eve = make_optimizer("eve", SgdConfig(), EveConfig(learning_rate=0.5))
    assert isinstance(eve, Eve)
    assert eve.learning_rate == 0.5
