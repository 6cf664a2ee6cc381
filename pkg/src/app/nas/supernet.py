"""
공유 가중치 슈퍼넷

인코더 4단계 + 병목 + 디코더 4단계로 구성된 U-Net 변형입니다.
- 단계 블록: (3x3x3 conv → instance norm → 활성화) x 2
- 고정 링크: 같은 단계 인코더 출력에 채널을 절반으로 줄이는 1x1x1 conv, 디코더 입력과 concat
- 탐색 skip: 인코더 i → 디코더 j 입력에 matching 연산(1x1x1 conv + resize) 후 원소합
- deep supervision: 디코더 1~3단계 head 출력을 1단계 해상도로 resize 후 합산, 최종 1x1x1 conv

파라미터 형상은 어떤 ArchChoice에도 의존하지 않습니다.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from autodiff.ops import (
    activation, add, concat_channels, conv3d, instance_norm, pool3d, resize_trilinear,
)
from autodiff.tensor import Tensor5, default_dtype
from core.responses import ShapeException, ValidationException
from nas.searchspace import (
    ArchChoice, DecisionSchema, FIXED_STAGES, SKIP_EDGES, STAGES, skip_decision_name, validate_choice,
)

logger = logging.getLogger(__name__)

HEAD_STAGES = (1, 2, 3)


@dataclass(frozen=True)
class SupernetConfig:
    """채널 구성 (단계마다 두 배)"""
    base_channels: int = 8
    in_channels: int = 1
    out_channels: int = 1

    def __post_init__(self) -> None:
        if min(self.base_channels, self.in_channels, self.out_channels) < 1:
            raise ValidationException(f"채널 수는 양수여야 합니다: {self}")

    def width(self, stage: int) -> int:
        """stage 1~4는 인코더/디코더, 5는 병목"""
        return self.base_channels * 2 ** (stage - 1)

    @property
    def widths(self) -> List[int]:
        return [self.width(s) for s in STAGES]

    @property
    def bottleneck_width(self) -> int:
        return self.width(5)

    def link_width(self, stage: int) -> int:
        return max(1, self.width(stage) // 2)


@dataclass(frozen=True)
class ArchRealization:
    """(스키마, 선택)으로부터 결정되는 구체 계산 그래프"""
    patch: Tuple[int, int, int]
    strides: Tuple[Tuple[int, int, int], ...]
    dilations: Tuple[int, int, int, int]
    pool_kind: str
    activation: str
    active_edges: FrozenSet[Tuple[int, int]]

    @property
    def divisor(self) -> Tuple[int, int, int]:
        """축별 누적 stride 곱"""
        prod = [1, 1, 1]
        for stride in self.strides:
            for axis in range(3):
                prod[axis] *= stride[axis]
        return tuple(prod)  # type: ignore[return-value]


def realize(schema: DecisionSchema, choice: ArchChoice) -> ArchRealization:
    """선택 벡터를 구체 구조로 변환"""
    validate_choice(schema, choice)
    rule = schema.stride_rule
    strides: List[Tuple[int, int, int]] = []
    for stage in STAGES:
        if stage in FIXED_STAGES:
            sd = rule.stride_set(stage, "depth")[0]
            shw = rule.stride_set(stage, "hw")[0]
        else:
            sd = schema.value(choice, f"stride{stage}_d")
            shw = schema.value(choice, f"stride{stage}_hw")
        strides.append((sd, shw, shw))
    phw = schema.value(choice, "patch_hw")
    return ArchRealization(
        patch=(schema.value(choice, "patch_d"), phw, phw),
        strides=tuple(strides),
        dilations=(1, schema.value(choice, "dilation2"), schema.value(choice, "dilation3"),
                   schema.value(choice, "dilation4")),
        pool_kind=schema.value(choice, "pool_type"),
        activation=schema.value(choice, "activation"),
        active_edges=frozenset(
            edge for edge in SKIP_EDGES if schema.value(choice, skip_decision_name(edge)) == "connect"
        ),
    )


def _param_specs(config: SupernetConfig) -> List[Tuple[str, Tuple[int, ...]]]:
    """이름과 형상 목록 (고정 순서, 초기화 순서도 이 순서)"""
    specs: List[Tuple[str, Tuple[int, ...]]] = []

    def block(prefix: str, c_in: int, c_out: int) -> None:
        for i, (ci, co) in enumerate(((c_in, c_out), (c_out, c_out)), start=1):
            specs.append((f"{prefix}.conv{i}.weight", (co, ci, 3, 3, 3)))
            specs.append((f"{prefix}.conv{i}.bias", (1, co, 1, 1, 1)))
            specs.append((f"{prefix}.norm{i}.gamma", (1, co, 1, 1, 1)))
            specs.append((f"{prefix}.norm{i}.beta", (1, co, 1, 1, 1)))

    def pointwise(prefix: str, c_in: int, c_out: int) -> None:
        specs.append((f"{prefix}.weight", (c_out, c_in, 1, 1, 1)))
        specs.append((f"{prefix}.bias", (1, c_out, 1, 1, 1)))

    c_prev = config.in_channels
    for stage in STAGES:
        block(f"enc{stage}", c_prev, config.width(stage))
        c_prev = config.width(stage)
    block("bottleneck", c_prev, config.bottleneck_width)
    for stage in reversed(STAGES):
        pointwise(f"link{stage}", config.width(stage), config.link_width(stage))
        block(f"dec{stage}", config.width(stage + 1) + config.link_width(stage), config.width(stage))
    for i, j in SKIP_EDGES:
        pointwise(f"skip_{i}_{j}", config.width(i), config.width(j + 1))
    for stage in HEAD_STAGES:
        pointwise(f"head{stage}", config.width(stage), config.base_channels)
    pointwise("out", config.base_channels, config.out_channels)
    return specs


class SupernetWeights:
    """공유 파라미터 저장소"""

    def __init__(self, config: SupernetConfig, params: Dict[str, Tensor5]):
        self.config = config
        self.params = params

    def __getitem__(self, name: str) -> Tensor5:
        return self.params[name]

    def names(self) -> List[str]:
        return list(self.params)

    def identity(self) -> Tuple[int, ...]:
        """저장소를 이루는 텐서 객체 id (재초기화 감지용)"""
        return tuple(t.id for t in self.params.values())

    def parameter_count(self, names: Optional[Iterable[str]] = None) -> int:
        keys = self.params if names is None else names
        return int(sum(self.params[k].size for k in keys))

    def arrays(self) -> Dict[str, np.ndarray]:
        return {k: t.data for k, t in self.params.items()}

    def zero_grad(self) -> None:
        for tensor in self.params.values():
            tensor.grad = None

    def grads(self) -> Dict[str, Optional[np.ndarray]]:
        return {k: t.grad for k, t in self.params.items()}

    def digest(self, names: Optional[Iterable[str]] = None) -> str:
        """파라미터 바이트 해시"""
        h = hashlib.sha256()
        for name in (sorted(self.params) if names is None else sorted(names)):
            h.update(name.encode())
            h.update(np.ascontiguousarray(self.params[name].data).tobytes())
        return h.hexdigest()

    def astype(self, dtype) -> "SupernetWeights":
        return SupernetWeights(
            self.config,
            {k: Tensor5(t.data.astype(dtype), requires_grad=True, name=k) for k, t in self.params.items()},
        )

    def load_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        for name, tensor in self.params.items():
            value = arrays[name]
            if value.shape != tensor.shape:
                raise ShapeException(f"파라미터 형상 불일치: {name} {value.shape} != {tensor.shape}")
            tensor.data = np.array(value, dtype=tensor.data.dtype, copy=True)


def build(config: SupernetConfig, schema: Optional[DecisionSchema] = None, seed: int = 0) -> SupernetWeights:
    """He-uniform(fan-in) 초기화로 모든 파라미터를 한 번씩 할당"""
    if schema is not None and schema.stats.in_channels != config.in_channels:
        logger.warning(
            "스키마 입력 채널(%d)과 설정(%d)이 다릅니다", schema.stats.in_channels, config.in_channels
        )
    rng = np.random.default_rng(seed)
    dtype = default_dtype()
    params: Dict[str, Tensor5] = {}
    for name, shape in _param_specs(config):
        if name.endswith(".weight"):
            fan_in = int(np.prod(shape[1:]))
            bound = np.sqrt(6.0 / fan_in)
            data = rng.uniform(-bound, bound, size=shape)
        elif name.endswith(".gamma"):
            data = np.ones(shape)
        else:
            data = np.zeros(shape)
        params[name] = Tensor5(data.astype(dtype), requires_grad=True, name=name)
    return SupernetWeights(config, params)


def _block(weights: SupernetWeights, prefix: str, x: Tensor5, dilation: int, act: str) -> Tensor5:
    for i in (1, 2):
        x = conv3d(x, weights[f"{prefix}.conv{i}.weight"], weights[f"{prefix}.conv{i}.bias"], (dilation,) * 3)
        x = instance_norm(x, weights[f"{prefix}.norm{i}.gamma"], weights[f"{prefix}.norm{i}.beta"])
        x = activation(x, act)
    return x


def _pointwise(weights: SupernetWeights, prefix: str, x: Tensor5) -> Tensor5:
    return conv3d(x, weights[f"{prefix}.weight"], weights[f"{prefix}.bias"])


def matching_op(
    weights: SupernetWeights,
    edge: Tuple[int, int],
    feature: Tensor5,
    target_channels: int,
    target_spatial: Sequence[int],
) -> Tensor5:
    """skip 특징을 1x1x1 conv로 채널을 맞춘 뒤 목표 크기로 resize (호출 측에서 원소합)"""
    prefix = skip_decision_name(edge)
    kernel = weights[f"{prefix}.weight"]
    if kernel.shape[0] != target_channels:
        raise ShapeException(
            f"{prefix} 출력 채널({kernel.shape[0]})이 목표 채널({target_channels})과 다릅니다"
        )
    return resize_trilinear(_pointwise(weights, prefix, feature), target_spatial)


def check_input_shape(realization: ArchRealization, spatial: Sequence[int]) -> None:
    for axis, (extent, div) in enumerate(zip(spatial, realization.divisor)):
        if extent % div != 0 or extent < div:
            raise ShapeException(
                f"입력 크기 {tuple(spatial)}가 누적 stride {realization.divisor}로 나누어떨어지지 않습니다"
            )


def forward_features(
    weights: SupernetWeights, realization: ArchRealization, x: Tensor5
) -> Dict[str, Tensor5]:
    """중간 특징까지 포함한 순전파 (테스트/검증용)"""
    config = weights.config
    if x.shape[1] != config.in_channels:
        raise ShapeException(f"입력 채널 {x.shape[1]} != 설정 {config.in_channels}")
    check_input_shape(realization, x.spatial)
    act = realization.activation
    features: Dict[str, Tensor5] = {}

    encoded: Dict[int, Tensor5] = {}
    h = x
    for stage in STAGES:
        h = _block(weights, f"enc{stage}", h, realization.dilations[stage - 1], act)
        encoded[stage] = h
        features[f"enc{stage}"] = h
        h = pool3d(h, realization.pool_kind, realization.strides[stage - 1])
    h = _block(weights, "bottleneck", h, 1, act)
    features["bottleneck"] = h

    decoded: Dict[int, Tensor5] = {}
    for stage in reversed(STAGES):
        target = encoded[stage].spatial
        up = resize_trilinear(h, target)
        for i, j in SKIP_EDGES:
            if j == stage and (i, j) in realization.active_edges:
                matched = matching_op(weights, (i, j), encoded[i], config.width(j + 1), target)
                features[f"skip_{i}_{j}"] = matched
                up = add(up, matched)
        features[f"dec{stage}.input"] = up
        link = _pointwise(weights, f"link{stage}", encoded[stage])
        h = _block(weights, f"dec{stage}", concat_channels(up, link), 1, act)
        decoded[stage] = h
        features[f"dec{stage}"] = h

    full = decoded[1].spatial
    summed = _pointwise(weights, "head1", decoded[1])
    features["head1"] = summed
    for stage in HEAD_STAGES[1:]:
        head = _pointwise(weights, f"head{stage}", decoded[stage])
        features[f"head{stage}"] = head
        summed = add(summed, resize_trilinear(head, full))
    features["deep_supervision"] = summed
    features["logits"] = _pointwise(weights, "out", summed)
    return features


def forward(weights: SupernetWeights, realization: ArchRealization, x: Tensor5) -> Tensor5:
    """sigmoid 이전 logits (입력과 같은 공간 크기, out_channels 채널)"""
    return forward_features(weights, realization, x)["logits"]


def active_param_ids(realization: ArchRealization, config: Optional[SupernetConfig] = None) -> Set[str]:
    """이 구조의 순전파가 사용하는 파라미터 이름 (비활성 skip conv 제외)"""
    names = {name for name, _ in _param_specs(config or SupernetConfig())}
    for edge in SKIP_EDGES:
        if edge not in realization.active_edges:
            prefix = skip_decision_name(edge)
            names.discard(f"{prefix}.weight")
            names.discard(f"{prefix}.bias")
    return names
