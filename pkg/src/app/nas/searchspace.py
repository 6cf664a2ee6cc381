"""
탐색 공간 구성

데이터셋 통계(중앙값/최솟값 크기)로부터 결정 스키마를 만듭니다.
결정 순서는 고정이며 컨트롤러의 스텝 순서와 1:1로 대응합니다.

    0  patch_hw        5  stride4_hw     10 activation
    1  patch_d         6  pool_type      11~16 skip_{i}_{j}
    2  stride3_d       7  dilation2
    3  stride3_hw      8  dilation3
    4  stride4_d       9  dilation4

모든 선택 목록에서 인덱스 0은 "최대" 아키텍처 쪽 값입니다
(가장 큰 패치, stride 2, max 풀링, dilation 1, 첫 활성화, skip 연결).
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from autodiff.ops import ACTIVATIONS, POOL_KINDS
from core.responses import DatasetTooSmallException, ValidationException

logger = logging.getLogger(__name__)

STAGES = (1, 2, 3, 4)
AXES = ("depth", "hw")
FIXED_STAGES = (1, 2)
SEARCHED_STAGES = (3, 4)
MAX_CANDIDATES = 5
# 다음 단계까지 여유를 두는 stride 2 허용 임계값
STRIDE2_MIN_EXTENT = 4
DILATIONS = (1, 2, 3)
SKIP_EDGES: Tuple[Tuple[int, int], ...] = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))
SKIP_CHOICES = ("connect", "zero")
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TaskStats:
    """패치 후보 계산에 쓰이는 데이터셋 통계 (복셀 단위)"""
    median_d: int
    median_h: int
    median_w: int
    min_d: int
    min_h: int
    min_w: int
    in_channels: int = 1
    out_channels: int = 1

    def __post_init__(self) -> None:
        values = (self.median_d, self.median_h, self.median_w, self.min_d, self.min_h, self.min_w,
                  self.in_channels, self.out_channels)
        if any(int(v) < 1 for v in values):
            raise ValidationException(f"TaskStats 값은 모두 양수여야 합니다: {values}")
        for axis, lo, mid in (("d", self.min_d, self.median_d), ("h", self.min_h, self.median_h),
                              ("w", self.min_w, self.median_w)):
            if lo > mid:
                raise ValidationException(f"min_{axis}({lo})가 median_{axis}({mid})보다 큽니다")

    def to_dict(self) -> Dict[str, int]:
        return {
            "median_d": self.median_d, "median_h": self.median_h, "median_w": self.median_w,
            "min_d": self.min_d, "min_h": self.min_h, "min_w": self.min_w,
            "in_channels": self.in_channels, "out_channels": self.out_channels,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TaskStats":
        return cls(**{k: int(data[k]) for k in (
            "median_d", "median_h", "median_w", "min_d", "min_h", "min_w", "in_channels", "out_channels")})


@dataclass(frozen=True)
class StrideRule:
    """단계/축별 허용 stride 집합과 축별 유효 약수"""
    allowed: Dict[Tuple[int, str], Tuple[int, ...]]
    divisor_d: int
    divisor_hw: int

    def stride_set(self, stage: int, axis: str) -> Tuple[int, ...]:
        return self.allowed[(stage, axis)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stages": {
                str(stage): {axis: list(self.allowed[(stage, axis)]) for axis in AXES} for stage in STAGES
            },
            "divisor_d": self.divisor_d,
            "divisor_hw": self.divisor_hw,
        }


def _candidates(median: int, divisor: int, label: str) -> List[int]:
    if divisor < 1:
        raise DatasetTooSmallException(f"{label} 약수는 양수여야 합니다: {divisor}")
    top = (median // divisor) * divisor
    values = [top - divisor * k for k in range(MAX_CANDIDATES)]
    values = [v for v in values if v >= divisor]
    if not values:
        raise DatasetTooSmallException(
            f"{label} 패치 후보가 없습니다: median={median} divisor={divisor}"
        )
    return values


def patch_hw_candidates(stats: TaskStats, divisor: int) -> List[int]:
    """H/W 패치 후보 (내림차순, 최대 5개)"""
    return _candidates(max(stats.median_h, stats.median_w), divisor, "patch_hw")


def patch_d_candidates(stats: TaskStats, divisor: int) -> List[int]:
    """깊이 패치 후보 (내림차순, 최대 5개)"""
    return _candidates(stats.median_d, divisor, "patch_d")


def restrict_strides(stats: TaskStats) -> StrideRule:
    """최소 크기 기준으로 단계별 허용 stride를 제한"""
    allowed: Dict[Tuple[int, str], Tuple[int, ...]] = {}
    divisors: Dict[str, int] = {}
    for axis, extent in (("depth", stats.min_d), ("hw", min(stats.min_h, stats.min_w))):
        divisor = 1
        for stage in STAGES:
            if extent >= STRIDE2_MIN_EXTENT:
                allowed[(stage, axis)] = (2,) if stage in FIXED_STAGES else (2, 1)
                extent //= 2
                divisor *= 2
            else:
                allowed[(stage, axis)] = (1,)
        divisors[axis] = divisor
    return StrideRule(allowed=allowed, divisor_d=divisors["depth"], divisor_hw=divisors["hw"])


@dataclass(frozen=True)
class Decision:
    """스키마의 결정 한 개"""
    name: str
    choices: Tuple[Any, ...]
    stage: Optional[int] = None
    edge: Optional[Tuple[int, int]] = None

    @property
    def size(self) -> int:
        return len(self.choices)


@dataclass(frozen=True)
class ArchChoice:
    """결정마다 선택된 인덱스"""
    indices: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    def to_dict(self) -> Dict[str, List[int]]:
        return {"indices": list(self.indices)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ArchChoice":
        return cls(tuple(data["indices"]))

    def key(self) -> str:
        return "-".join(str(i) for i in self.indices)


@dataclass(frozen=True)
class DecisionSchema:
    """순서가 고정된 결정 목록"""
    decisions: Tuple[Decision, ...]
    stride_rule: StrideRule
    stats: TaskStats
    version: int = SCHEMA_VERSION
    _index: Dict[str, int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        self._index.update({d.name: i for i, d in enumerate(self.decisions)})

    def __len__(self) -> int:
        return len(self.decisions)

    def decision(self, name: str) -> Decision:
        return self.decisions[self._index[name]]

    @property
    def sizes(self) -> List[int]:
        return [d.size for d in self.decisions]

    def architecture_count(self) -> int:
        return math.prod(self.sizes)

    def value(self, choice: ArchChoice, name: str) -> Any:
        return self.decision(name).choices[choice.indices[self._index[name]]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": self.version,
            "decisions": [
                {
                    "name": d.name,
                    "choices": list(d.choices),
                    **({"stage": d.stage} if d.stage is not None else {}),
                    **({"edge": list(d.edge)} if d.edge is not None else {}),
                }
                for d in self.decisions
            ],
            "stats": self.stats.to_dict(),
            "stride_rule": self.stride_rule.to_dict(),
            "architecture_count": self.architecture_count(),
        }

    def to_json(self) -> str:
        """결정적 직렬화 (같은 통계 → 같은 바이트)"""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DecisionSchema":
        # 통계로부터 다시 만들고 저장된 내용과 일치하는지 확인
        schema = build_schema(TaskStats.from_dict(data["stats"]))
        if json.loads(schema.to_json())["decisions"] != data["decisions"]:
            raise ValidationException("저장된 스키마가 통계로부터 재구성한 스키마와 다릅니다")
        return schema


def skip_decision_name(edge: Tuple[int, int]) -> str:
    return f"skip_{edge[0]}_{edge[1]}"


def build_schema(stats: TaskStats) -> DecisionSchema:
    """17개 결정으로 이루어진 스키마 생성"""
    rule = restrict_strides(stats)
    decisions: List[Decision] = [
        Decision("patch_hw", tuple(patch_hw_candidates(stats, rule.divisor_hw))),
        Decision("patch_d", tuple(patch_d_candidates(stats, rule.divisor_d))),
    ]
    for stage in SEARCHED_STAGES:
        decisions.append(Decision(f"stride{stage}_d", rule.stride_set(stage, "depth"), stage=stage))
        decisions.append(Decision(f"stride{stage}_hw", rule.stride_set(stage, "hw"), stage=stage))
    decisions.append(Decision("pool_type", POOL_KINDS))
    for stage in (2, 3, 4):
        decisions.append(Decision(f"dilation{stage}", DILATIONS, stage=stage))
    decisions.append(Decision("activation", ACTIVATIONS))
    for edge in SKIP_EDGES:
        decisions.append(Decision(skip_decision_name(edge), SKIP_CHOICES, edge=edge))

    schema = DecisionSchema(decisions=tuple(decisions), stride_rule=rule, stats=stats)
    logger.debug(
        "schema built decisions=%d architectures=%d divisor_d=%d divisor_hw=%d",
        len(schema), schema.architecture_count(), rule.divisor_d, rule.divisor_hw,
    )
    return schema


def validate_choice(schema: DecisionSchema, choice: ArchChoice) -> None:
    """인덱스 범위 검사, 실패 시 결정 이름을 담은 ValidationException"""
    if len(choice.indices) != len(schema):
        raise ValidationException(
            f"선택 길이가 스키마와 다릅니다: {len(choice.indices)} != {len(schema)}"
        )
    for index, decision in zip(choice.indices, schema.decisions):
        if not 0 <= index < decision.size:
            raise ValidationException(
                f"{decision.name} 선택 인덱스 {index}가 범위를 벗어났습니다 (선택지 {decision.size}개)",
                decision=decision.name,
            )


def max_architecture(schema: DecisionSchema) -> ArchChoice:
    """최대 패치, 허용되는 곳 stride 2, max 풀링, dilation 1, 첫 활성화, 모든 skip 연결"""
    return ArchChoice(tuple(0 for _ in schema.decisions))


def describe_choice(schema: DecisionSchema, choice: ArchChoice) -> Dict[str, Any]:
    """이름 → 선택 값 매핑 (로그/출력용)"""
    return {d.name: d.choices[i] for d, i in zip(schema.decisions, choice.indices)}


def choice_from_values(schema: DecisionSchema, values: Sequence[Any]) -> ArchChoice:
    """선택 값 목록을 인덱스로 변환"""
    indices = []
    for decision, value in zip(schema.decisions, values):
        try:
            indices.append(decision.choices.index(value))
        except ValueError:
            raise ValidationException(f"{decision.name}에 없는 값입니다: {value}", decision=decision.name)
    return ArchChoice(tuple(indices))
