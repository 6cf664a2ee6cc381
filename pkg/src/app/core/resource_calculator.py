"""
아키텍처별 자원 사용량 계산기
 - 파라미터 수 (전체 / 활성)
 - 순전파에서 보관하는 활성값 복셀 수
 - float32 기준 활성값 메모리 추정치 (MB)
"""
from dataclasses import asdict, dataclass
from typing import Any, Dict, Tuple
import logging

import numpy as np

from nas.searchspace import SKIP_EDGES, STAGES
from nas.supernet import ArchRealization, SupernetWeights, active_param_ids

logger = logging.getLogger(__name__)


@dataclass
class ResourceEstimate:
    patch: Tuple[int, int, int]
    total_params: int
    active_params: int
    activation_voxels: int
    activation_mb: float
    param_mb: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class ResourceCalculator:
    """슈퍼넷 아키텍처 자원 추정기"""

    BYTES_PER_VALUE = 4
    # 단계 블록 하나가 보관하는 텐서 수 (conv, norm, act) x 2
    TENSORS_PER_BLOCK = 6
    # 역전파 그래디언트 버퍼 포함 배수
    BACKWARD_FACTOR = 2

    @classmethod
    def stage_shapes(cls, realization: ArchRealization) -> Dict[int, Tuple[int, int, int]]:
        """단계별 공간 크기 (5는 병목)"""
        shapes = {}
        shape = realization.patch
        for stage in STAGES:
            shapes[stage] = shape
            stride = realization.strides[stage - 1]
            shape = tuple(e // s for e, s in zip(shape, stride))
        shapes[5] = shape
        return shapes

    @classmethod
    def estimate(cls, weights: SupernetWeights, realization: ArchRealization) -> ResourceEstimate:
        config = weights.config
        shapes = cls.stage_shapes(realization)
        volume = {s: int(np.prod(shape)) for s, shape in shapes.items()}

        voxels = 0
        for stage in STAGES:
            voxels += cls.TENSORS_PER_BLOCK * config.width(stage) * volume[stage]  # 인코더
            voxels += config.width(stage) * volume[stage + 1]  # 풀링
            voxels += cls.TENSORS_PER_BLOCK * config.width(stage) * volume[stage]  # 디코더
            voxels += (config.width(stage + 1) + config.link_width(stage)) * volume[stage]  # resize + concat
        voxels += cls.TENSORS_PER_BLOCK * config.bottleneck_width * volume[5]
        for i, j in SKIP_EDGES:
            if (i, j) in realization.active_edges:
                voxels += config.width(j + 1) * (volume[i] + volume[j])
        voxels += 3 * config.base_channels * volume[1] + config.out_channels * volume[1]

        active = weights.parameter_count(active_param_ids(realization, config))
        total = weights.parameter_count()
        activation_mb = voxels * cls.BYTES_PER_VALUE * cls.BACKWARD_FACTOR / 2 ** 20
        estimate = ResourceEstimate(
            patch=tuple(realization.patch),
            total_params=total,
            active_params=active,
            activation_voxels=int(voxels),
            activation_mb=round(activation_mb, 3),
            param_mb=round(total * cls.BYTES_PER_VALUE / 2 ** 20, 3),
        )
        logger.debug(
            "resource estimate patch=%s active_params=%d activation_mb=%.3f",
            estimate.patch, active, estimate.activation_mb,
        )
        return estimate
