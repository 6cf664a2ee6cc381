"""테이프 역전파 및 Adam 테스트"""
import threading

import numpy as np
import pytest

from autodiff.ops import mul, total
from autodiff.optim import AdamState, adam_step
from autodiff.tensor import Tape, Tensor5, active_tape, default_dtype, high_precision, no_grad
from core.responses import ArgumentException, ShapeException


def test_sum_gradient_is_ones():
    x = Tensor5.from_array(np.arange(6.0).reshape(1, 1, 1, 2, 3), requires_grad=True)
    with Tape() as tape:
        loss = total(x)
    tape.backward(loss)
    np.testing.assert_array_equal(x.grad, np.ones_like(x.data))


def test_square_gradient():
    x = Tensor5.from_array(np.full((1, 1, 1, 1, 1), 3.0), requires_grad=True)
    with Tape() as tape:
        loss = total(mul(x, x))
    tape.backward(loss)
    assert float(x.grad.ravel()[0]) == pytest.approx(6.0)


def test_backward_on_non_scalar_raises():
    x = Tensor5.from_array(np.ones((1, 1, 1, 1, 2)), requires_grad=True)
    with Tape() as tape:
        out = mul(x, x)
    with pytest.raises(ArgumentException):
        tape.backward(out)


def test_no_grad_records_nothing():
    x = Tensor5.from_array(np.ones((1, 1, 1, 1, 2)), requires_grad=True)
    with Tape() as tape:
        with no_grad():
            out = mul(x, x)
        assert active_tape() is tape
    assert not out.requires_grad
    assert tape.nodes == []


def test_tensor_requires_five_axes():
    with pytest.raises(ShapeException):
        Tensor5(np.zeros((2, 2)))


def test_high_precision_scope():
    assert default_dtype() == np.float32
    with high_precision():
        assert Tensor5.from_array([[[[[1.0]]]]]).data.dtype == np.float64
    assert default_dtype() == np.float32


def test_tape_is_thread_local():
    seen = {}

    def worker():
        seen["tape"] = active_tape()

    with Tape():
        thread = threading.Thread(target=worker)
        thread.start()
        thread.join()
    assert seen["tape"] is None


def test_adam_first_step_moves_by_lr_against_gradient():
    params = {"w": np.array([1.0, -2.0, 0.5])}
    grads = {"w": np.array([0.3, -4.0, 1e-3])}
    state = AdamState(lr=0.01)

    adam_step(params, grads, state)

    np.testing.assert_allclose(params["w"], [0.99, -1.99, 0.49], atol=1e-4)


def test_adam_skips_missing_gradients():
    params = {"a": np.ones(3), "b": np.ones(3)}
    state = AdamState(lr=0.1, weight_decay=0.5)

    updated = adam_step(params, {"a": np.ones(3), "b": None}, state)

    assert updated == 1
    np.testing.assert_array_equal(params["b"], np.ones(3))
    assert "b" not in state.m


def test_adam_rejects_bad_rate():
    with pytest.raises(ArgumentException):
        AdamState(lr=0.0)
