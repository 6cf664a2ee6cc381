"""
공유 가중치 학습 서비스

greedy 아키텍처 하나를 epoch 단위로 학습합니다. epoch 하나는 학습 케이스 전체를
무작위 순서로 한 번씩 사용하는 ceil(케이스 수 / batch_size) 스텝입니다.
"""
import logging
import math
from typing import List, Sequence

import numpy as np

from autodiff.ops import dice_loss, sigmoid
from autodiff.optim import AdamState, adam_step
from autodiff.tensor import Tape, Tensor5
from core.interfaces import IChildTrainer
from core.responses import NumericAbortException
from dataio.preprocessing import Case, axial_hflip, sample_patch
from nas.supernet import ArchRealization, SupernetWeights, forward

logger = logging.getLogger(__name__)


class ChildTrainer(IChildTrainer):
    """dice 손실 + axial 좌우 반전으로 공유 가중치 학습"""

    def make_batch(
        self,
        cases: Sequence[Case],
        patch: Sequence[int],
        rng: np.random.Generator,
        foreground_prob: float,
    ):
        images, labels = [], []
        for case in cases:
            image, label = sample_patch(case, patch, rng, foreground_prob)
            image, label = axial_hflip(image, label, rng)
            images.append(image)
            labels.append(label)
        return np.concatenate(images, axis=0), np.concatenate(labels, axis=0)

    def train_step(
        self,
        weights: SupernetWeights,
        adam: AdamState,
        realization: ArchRealization,
        image: np.ndarray,
        label: np.ndarray,
    ) -> float:
        """한 스텝 학습 후 손실 반환 (유한하지 않으면 NumericAbortException)"""
        weights.zero_grad()
        x = Tensor5.from_array(image)
        target = Tensor5.from_array(label)
        with Tape() as tape:
            loss = dice_loss(sigmoid(forward(weights, realization, x)), target)
        value = loss.item()
        if not math.isfinite(value):
            raise NumericAbortException(
                f"학습 손실이 유한하지 않습니다: loss={value}",
                diagnostics={"loss": value, "patch": list(realization.patch), "adam_t": adam.t},
            )
        tape.backward(loss)
        grads = weights.grads()
        bad = [name for name, g in grads.items() if g is not None and not np.all(np.isfinite(g))]
        if bad:
            raise NumericAbortException(
                f"그래디언트가 유한하지 않습니다: {bad[:5]}",
                diagnostics={"loss": value, "params": bad, "adam_t": adam.t},
            )
        adam_step(weights.arrays(), grads, adam)
        weights.zero_grad()
        return value

    def train(
        self,
        weights: SupernetWeights,
        adam: AdamState,
        realization: ArchRealization,
        cases: Sequence[Case],
        epochs: int,
        batch_size: int,
        rng: np.random.Generator,
        foreground_prob: float = 0.5,
    ) -> float:
        """epochs 동안 학습하고 평균 손실 반환"""
        if not cases:
            return 0.0
        steps_per_epoch = math.ceil(len(cases) / batch_size)
        losses: List[float] = []
        for _ in range(epochs):
            order = rng.permutation(len(cases))
            for step in range(steps_per_epoch):
                picked = [cases[int(i)] for i in order[step * batch_size:(step + 1) * batch_size]]
                image, label = self.make_batch(picked, realization.patch, rng, foreground_prob)
                losses.append(self.train_step(weights, adam, realization, image, label))
        mean_loss = float(np.mean(losses))
        logger.debug(
            "child trained epochs=%d steps=%d mean_loss=%.5f patch=%s",
            epochs, len(losses), mean_loss, realization.patch,
        )
        return mean_loss
