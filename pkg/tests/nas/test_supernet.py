"""슈퍼넷 구조/공유 가중치 테스트"""
import itertools

import numpy as np
import pytest

from autodiff.optim import AdamState
from autodiff.tensor import Tensor5, no_grad
from conftest import realization_16
from core.responses import ShapeException
from nas.searchspace import SKIP_EDGES, max_architecture
from nas.supernet import (
    SupernetConfig, active_param_ids, build, forward, forward_features, matching_op, realize,
)
from services.trainer_service import ChildTrainer


def test_widths_doubling():
    config = SupernetConfig(base_channels=8, in_channels=1, out_channels=1)
    assert config.widths == [8, 16, 32, 64]
    assert config.bottleneck_width == 128


def test_build_is_seeded():
    config = SupernetConfig(base_channels=2)
    assert build(config, seed=1).digest() == build(config, seed=1).digest()
    assert build(config, seed=1).digest() != build(config, seed=2).digest()


def test_forward_keeps_input_shape(tiny_weights):
    x = Tensor5.from_array(np.random.default_rng(0).standard_normal((1, 1, 16, 16, 16)))
    with no_grad():
        out = forward(tiny_weights, realization_16(), x)
    assert out.shape == (1, 1, 16, 16, 16)


def test_forward_rejects_indivisible_input(tiny_weights):
    x = Tensor5.from_array(np.zeros((1, 1, 12, 16, 16)))
    with pytest.raises(ShapeException):
        forward(tiny_weights, realization_16(), x)


def test_skip_edge_adds_matched_feature(tiny_weights):
    x = Tensor5.from_array(np.random.default_rng(1).standard_normal((1, 1, 16, 16, 16)))
    with no_grad():
        without = forward_features(tiny_weights, realization_16(edges=()), x)
        with_edge = forward_features(tiny_weights, realization_16(edges=[(1, 4)]), x)

    assert not np.allclose(without["logits"].data, with_edge["logits"].data)
    np.testing.assert_allclose(
        with_edge["dec4.input"].data - without["dec4.input"].data, with_edge["skip_1_4"].data, atol=1e-5
    )


def test_matching_op_shape_and_zero_weights():
    weights = build(SupernetConfig(base_channels=8), seed=0)
    feature = Tensor5.from_array(np.random.default_rng(2).standard_normal((1, 8, 8, 16, 16)))
    with no_grad():
        out = matching_op(weights, (1, 2), feature, 32, (4, 8, 8))
    assert out.shape == (1, 32, 4, 8, 8)

    weights["skip_1_2.weight"].data[...] = 0.0
    with no_grad():
        zero = matching_op(weights, (1, 2), feature, 32, (4, 8, 8))
    assert not zero.data.any()


def test_matching_op_channel_mismatch(tiny_weights):
    feature = Tensor5.from_array(np.zeros((1, 2, 4, 4, 4)))
    with pytest.raises(ShapeException):
        matching_op(tiny_weights, (1, 2), feature, 3, (4, 4, 4))


def test_active_param_ids_follow_edges():
    config = SupernetConfig(base_channels=2)
    everything = active_param_ids(realization_16(), config)
    nothing = active_param_ids(realization_16(edges=()), config)

    skip_names = {f"skip_{i}_{j}.{p}" for i, j in SKIP_EDGES for p in ("weight", "bias")}
    assert skip_names <= everything
    assert not skip_names & nothing


def test_realize_toy_max_architecture(toy_schema):
    realization = realize(toy_schema, max_architecture(toy_schema))
    assert realization.patch == (16, 16, 16)
    assert realization.divisor == (8, 8, 8)
    assert realization.active_edges == frozenset(SKIP_EDGES)


def test_active_parameter_count_below_total(tiny_weights):
    total = tiny_weights.parameter_count()
    assert tiny_weights.parameter_count(active_param_ids(realization_16(edges=()), tiny_weights.config)) < total


def _train_once(weights, realization):
    rng = np.random.default_rng(0)
    image = rng.standard_normal((1, 1, 16, 16, 16)).astype(np.float32)
    label = (rng.random((1, 1, 16, 16, 16)) > 0.7).astype(np.float32)
    return ChildTrainer().train_step(weights, AdamState(lr=1e-2), realization, image, label)


def test_training_leaves_inactive_skip_bytes_unchanged(tiny_weights):
    inactive = ["skip_2_3.weight", "skip_2_3.bias"]
    before_inactive = tiny_weights.digest(inactive)
    before_active = tiny_weights.digest(["skip_1_3.weight"])

    edges = [e for e in SKIP_EDGES if e != (2, 3)]
    loss = _train_once(tiny_weights, realization_16(edges=edges))

    assert np.isfinite(loss)
    assert tiny_weights.digest(inactive) == before_inactive
    assert tiny_weights.digest(["skip_1_3.weight"]) != before_active


def _sweep(strides_options, dilation_options, edge_options):
    for strides, dilations, edges in itertools.product(strides_options, dilation_options, edge_options):
        yield realization_16(strides=((2, 2, 2), (2, 2, 2)) + strides, dilations=(1,) + dilations, edges=edges)


STAGE_STRIDES = [(sd, shw, shw) for sd in (2, 1) for shw in (2, 1)]


def test_sampled_choices_keep_shape_and_sharing(tiny_weights):
    x = Tensor5.from_array(np.random.default_rng(5).standard_normal((1, 1, 16, 16, 16)))
    total = tiny_weights.parameter_count()
    options = _sweep(
        [(STAGE_STRIDES[0], STAGE_STRIDES[3]), (STAGE_STRIDES[1], STAGE_STRIDES[2])],
        [(1, 2, 3), (3, 1, 2)],
        [(), SKIP_EDGES, [(1, 2), (3, 4)]],
    )
    for realization in options:
        with no_grad():
            out = forward(tiny_weights, realization, x)
        assert out.shape == (1, 1, 16, 16, 16)
        assert tiny_weights.parameter_count() == total


@pytest.mark.slow
def test_exhaustive_toy_sweep():
    weights = build(SupernetConfig(base_channels=1), seed=0)
    x = Tensor5.from_array(np.random.default_rng(6).standard_normal((1, 1, 16, 16, 16)))
    edge_sets = [
        [e for e, keep in zip(SKIP_EDGES, mask) if keep] for mask in itertools.product((0, 1), repeat=6)
    ]
    # 구조 조합 전체는 skip 전부/없음으로, skip 조합 전체는 최대 stride로 확인
    options = itertools.chain(
        _sweep(
            list(itertools.product(STAGE_STRIDES, STAGE_STRIDES)),
            list(itertools.product((1, 2, 3), repeat=3)),
            [(), SKIP_EDGES],
        ),
        (realization_16(edges=edges) for edges in edge_sets),
    )
    for realization in options:
        with no_grad():
            assert forward(weights, realization, x).shape == (1, 1, 16, 16, 16)
    for edges in edge_sets:
        inactive = [f"skip_{i}_{j}.{p}" for i, j in SKIP_EDGES if (i, j) not in edges for p in ("weight", "bias")]
        before = weights.digest(inactive)
        _train_once(weights, realization_16(edges=edges))
        assert weights.digest(inactive) == before
