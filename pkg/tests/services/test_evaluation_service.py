"""hard dice / one-shot 추론 / surrogate 보상 테스트"""
import numpy as np
import pytest

from core.responses import ValidationException
from core.task_catalog import get_task_stats
from dataio.preprocessing import Case
from nas.searchspace import ArchChoice, build_schema
from nas.supernet import ArchRealization, SupernetConfig, build
from services.evaluation_service import (
    EvaluationService, SurrogateRewardEvaluator, binarize, hard_dice,
)


def brute_force_dice(pred, label):
    scores = []
    for p, g in zip(pred.reshape(-1, *pred.shape[-3:]), label.reshape(-1, *label.shape[-3:])):
        P = {tuple(v) for v in np.argwhere(p > 0)}
        G = {tuple(v) for v in np.argwhere(g > 0)}
        scores.append(1.0 if not P and not G else 2 * len(P & G) / (len(P) + len(G)))
    return float(np.mean(scores))


def test_hard_dice_matches_voxel_sets():
    rng = np.random.default_rng(0)
    for _ in range(50):
        shape = (1, int(rng.integers(1, 3))) + tuple(int(v) for v in rng.integers(1, 5, size=3))
        pred = (rng.random(shape) > rng.uniform(0.2, 1.0)).astype(np.float32)
        label = (rng.random(shape) > rng.uniform(0.2, 1.0)).astype(np.float32)
        assert hard_dice(pred, label) == brute_force_dice(pred, label)


def test_hard_dice_cases():
    label = np.zeros((1, 1, 1, 1, 4), dtype=np.float32)
    label[..., :2] = 1
    pred = np.zeros_like(label)
    pred[..., 1:3] = 1

    assert hard_dice(label, label) == 1.0
    assert hard_dice(np.zeros_like(label), label) == 0.0
    assert hard_dice(pred, label) == 0.5
    assert hard_dice(np.zeros_like(label), np.zeros_like(label)) == 1.0


def test_binarize_threshold():
    logits = np.array([-1.0, 0.0, 2.0]).reshape(1, 1, 1, 1, 3)
    assert binarize(logits).ravel().tolist() == [0.0, 1.0, 1.0]


def anisotropic_realization(edges=()):
    return ArchRealization(
        patch=(8, 16, 16),
        strides=((2, 2, 2), (2, 2, 2), (1, 2, 2), (1, 2, 2)),
        dilations=(1, 1, 1, 1),
        pool_kind="max",
        activation="relu",
        active_edges=frozenset(edges),
    )


def test_one_shot_pads_and_crops_back(tiny_weights):
    image = np.random.default_rng(1).standard_normal((1, 1, 11, 16, 16)).astype(np.float32)
    realization = anisotropic_realization()
    assert realization.divisor == (4, 16, 16)

    logits = EvaluationService().one_shot_infer(tiny_weights, realization, image)

    assert logits.shape == (1, 1, 11, 16, 16)


def test_one_shot_divisible_input_unchanged_shape(tiny_weights):
    image = np.zeros((1, 1, 8, 16, 16), dtype=np.float32)
    logits = EvaluationService().one_shot_infer(tiny_weights, anisotropic_realization(), image)
    assert logits.shape == image.shape


def test_evaluate_dice_is_patient_mean(tiny_weights, monkeypatch):
    service = EvaluationService()
    cases = [
        Case(id=str(i), image=np.zeros((1, 1, 4, 16, 16), np.float32), label=np.zeros((1, 1, 4, 16, 16), np.float32))
        for i in range(3)
    ]
    scores = iter([1.0, 0.5, 0.0])
    monkeypatch.setattr(service, "per_case_dice", lambda w, r, c: [next(scores) for _ in c])

    assert service.evaluate_dice(tiny_weights, anisotropic_realization(), cases) == pytest.approx(0.5)
    assert service.evaluate_dice(tiny_weights, anisotropic_realization(), []) == 0.0


def test_evaluation_does_not_touch_weights(tiny_weights):
    before = tiny_weights.digest()
    case = Case(
        id="x",
        image=np.random.default_rng(2).standard_normal((1, 1, 8, 16, 16)).astype(np.float32),
        label=np.ones((1, 1, 8, 16, 16), np.float32),
    )
    EvaluationService().per_case_dice(tiny_weights, anisotropic_realization(), [case])
    assert tiny_weights.digest() == before


@pytest.fixture
def heart_schema():
    return build_schema(get_task_stats("heart"))


def test_surrogate_graded_and_sparse(heart_schema):
    planted = ArchChoice((1,) * 17)
    graded = SurrogateRewardEvaluator(heart_schema, planted, "graded")
    sparse = SurrogateRewardEvaluator(heart_schema, planted, "sparse")
    partial = ArchChoice((1,) * 16 + (0,))

    assert graded(planted) == 1.0
    assert graded(ArchChoice((0,) * 17)) == pytest.approx(0.1)
    assert 0.1 < graded(partial) < 1.0
    assert sparse(planted) == 1.0
    assert sparse(partial) == pytest.approx(0.1)


def test_surrogate_rejects_unknown_shaping(heart_schema):
    with pytest.raises(ValidationException):
        SurrogateRewardEvaluator(heart_schema, ArchChoice((0,) * 17), "smooth")


def test_planted_vector_is_seeded(heart_schema):
    a = SurrogateRewardEvaluator.planted_from_seed(heart_schema, 4)
    assert a == SurrogateRewardEvaluator.planted_from_seed(heart_schema, 4)
    assert all(0 <= i < k for i, k in zip(a.indices, heart_schema.sizes))
