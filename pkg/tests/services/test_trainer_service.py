"""공유 가중치 학습 테스트"""
import numpy as np
import pytest

from autodiff.optim import AdamState
from core.factory import ServiceFactory
from core.responses import NumericAbortException
from dataio.preprocessing import Case
from nas.supernet import ArchRealization, SupernetConfig, build
from services.trainer_service import ChildTrainer


def realization():
    return ArchRealization(
        patch=(8, 8, 8),
        strides=((2, 2, 2), (2, 2, 2), (1, 1, 1), (1, 1, 1)),
        dilations=(1, 1, 1, 1),
        pool_kind="avg",
        activation="leaky_relu",
        active_edges=frozenset({(1, 2)}),
    )


def make_cases(n=3):
    rng = np.random.default_rng(0)
    cases = []
    for i in range(n):
        label = np.zeros((1, 1, 8, 10, 10), dtype=np.float32)
        label[0, 0, 2:6, 3:7, 3:7] = 1.0
        image = (label + 0.1 * rng.standard_normal(label.shape)).astype(np.float32)
        cases.append(Case(id=f"c{i}", image=image, label=label))
    return cases


def test_make_batch_shapes():
    trainer = ServiceFactory.get_trainer()
    assert isinstance(trainer, ChildTrainer)
    image, label = trainer.make_batch(make_cases(2), (8, 8, 8), np.random.default_rng(0), 0.5)
    assert image.shape == (2, 1, 8, 8, 8)
    assert label.shape == (2, 1, 8, 8, 8)


def test_train_returns_finite_mean_loss(tiny_weights):
    adam = AdamState(lr=1e-3)
    loss = ChildTrainer().train(tiny_weights, adam, realization(), make_cases(3), epochs=2, batch_size=2,
                                rng=np.random.default_rng(0))
    assert 0.0 <= loss <= 1.0
    # epoch마다 ceil(3 / 2) = 2 스텝
    assert adam.t == 4


def test_train_is_seeded():
    results = []
    for _ in range(2):
        weights = build(SupernetConfig(base_channels=2), seed=0)
        ChildTrainer().train(weights, AdamState(), realization(), make_cases(2), 1, 2, np.random.default_rng(4))
        results.append(weights.digest())
    assert results[0] == results[1]


def test_non_finite_loss_aborts(tiny_weights):
    image = np.full((1, 1, 8, 8, 8), np.nan, dtype=np.float32)
    label = np.zeros_like(image)
    with pytest.raises(NumericAbortException) as exc:
        ChildTrainer().train_step(tiny_weights, AdamState(), realization(), image, label)
    assert exc.value.exit_code == 3
    assert "loss" in exc.value.diagnostics
