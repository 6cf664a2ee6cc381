"""
one-shot 추론과 보상 계산

- one_shot_infer: 누적 stride 배수로 대칭 zero-padding → 한 번의 순전파 → 원래 크기로 crop
- hard dice: sigmoid 0.5 이진화, 채널별 2|P∩G| / (|P| + |G|), 둘 다 비면 1
- 보상: 환자별 dice 평균 또는 테스트용 surrogate 함수
"""
import logging
from typing import List, Optional, Sequence

import numpy as np

from autodiff.tensor import Tensor5, no_grad
from core.interfaces import IEvaluationService
from core.responses import ValidationException
from dataio.preprocessing import Case
from nas.searchspace import ArchChoice, DecisionSchema, validate_choice
from nas.supernet import ArchRealization, SupernetWeights, forward

logger = logging.getLogger(__name__)

THRESHOLD = 0.5


def hard_dice(prediction: np.ndarray, label: np.ndarray) -> float:
    """이진 배열 (…, c, d, h, w)의 채널 평균 hard dice"""
    pred = prediction.reshape(-1, *prediction.shape[-3:]) > 0
    gt = label.reshape(-1, *label.shape[-3:]) > 0
    scores = []
    for p, g in zip(pred, gt):
        size = int(p.sum()) + int(g.sum())
        scores.append(1.0 if size == 0 else 2.0 * int(np.logical_and(p, g).sum()) / size)
    return float(np.mean(scores))


def binarize(logits: np.ndarray) -> np.ndarray:
    """sigmoid(x) >= 0.5 와 같은 x >= 0"""
    return (logits >= 0.0).astype(np.float32)


class EvaluationService(IEvaluationService):
    """공유 가중치로 검증 케이스를 평가 (가중치는 읽기만 함)"""

    def one_shot_infer(self, weights: SupernetWeights, realization: ArchRealization, image: np.ndarray) -> np.ndarray:
        spatial = image.shape[2:]
        pads = [(0, 0), (0, 0)]
        for extent, div in zip(spatial, realization.divisor):
            total = -(-extent // div) * div - extent
            pads.append((total // 2, total - total // 2))
        padded = np.pad(image, pads) if any(p != (0, 0) for p in pads) else image
        with no_grad():
            logits = forward(weights, realization, Tensor5.from_array(padded)).data
        index = (slice(None), slice(None)) + tuple(
            slice(before, before + extent) for (before, _), extent in zip(pads[2:], spatial)
        )
        return logits[index]

    def per_case_dice(
        self, weights: SupernetWeights, realization: ArchRealization, cases: Sequence[Case]
    ) -> List[float]:
        return [hard_dice(binarize(self.one_shot_infer(weights, realization, c.image)), c.label) for c in cases]

    def evaluate_dice(
        self, weights: SupernetWeights, realization: ArchRealization, cases: Sequence[Case]
    ) -> float:
        if not cases:
            return 0.0
        return float(np.mean(self.per_case_dice(weights, realization, cases)))


class DiceRewardEvaluator:
    """검증 fold 환자별 dice 보상"""

    def __init__(self, evaluation: IEvaluationService, weights: SupernetWeights, cases: Sequence[Case]):
        self.evaluation = evaluation
        self.weights = weights
        self.cases = list(cases)

    def __call__(self, choice: ArchChoice, realization: ArchRealization) -> float:
        return float(np.clip(self.evaluation.evaluate_dice(self.weights, realization, self.cases), 0.0, 1.0))


class SurrogateRewardEvaluator:
    """ArchChoice만으로 결정되는 보상 (컨트롤러 테스트용 bandit)

    - sparse: 정답 벡터면 1, 아니면 0.1
    - graded: 0.1 + 0.9 * 일치한 결정 비율 (정답 벡터에서만 1)
    """

    FLOOR = 0.1

    def __init__(self, schema: DecisionSchema, planted: ArchChoice, shaping: str = "graded"):
        validate_choice(schema, planted)
        if shaping not in ("graded", "sparse"):
            raise ValidationException(f"지원하지 않는 surrogate 보상 형태입니다: {shaping}")
        self.planted = planted
        self.shaping = shaping

    @classmethod
    def planted_from_seed(cls, schema: DecisionSchema, seed: int) -> ArchChoice:
        rng = np.random.default_rng([seed, 97])
        return ArchChoice(tuple(int(rng.integers(k)) for k in schema.sizes))

    def score(self, choice: ArchChoice) -> float:
        matches = sum(a == b for a, b in zip(choice.indices, self.planted.indices))
        if self.shaping == "sparse":
            return 1.0 if matches == len(self.planted.indices) else self.FLOOR
        return min(1.0, self.FLOOR + (1.0 - self.FLOOR) * (matches / len(self.planted.indices)))

    def __call__(self, choice: ArchChoice, realization: Optional[ArchRealization] = None) -> float:
        return self.score(choice)
