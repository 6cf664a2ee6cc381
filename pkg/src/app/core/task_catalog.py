"""
작업 프리셋 단일 소스 (Single Source of Truth)
TASK_CATALOG: 각 작업 키에 대해 데이터셋 통계와 작업별 하이퍼파라미터를 함께 보유합니다.
헬퍼 함수로 목록/통계/설정 기본값에 접근합니다.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Dict, List, Optional

from core.responses import ConfigException
from nas.searchspace import TaskStats


class TaskKind(IntEnum):
    """작업 종류"""
    BRAIN = 0
    HEART = 1
    PROSTATE = 2
    SYNTHETIC = 3


@dataclass(frozen=True)
class TaskPreset:
    """작업별 설정"""
    kind: TaskKind
    stats: TaskStats
    episodes: int  # 컨트롤러 학습 에피소드 수
    batch_size: int
    description: str


TASK_CATALOG: Dict[str, TaskPreset] = {
    # 4 모달리티, 155 x 240 x 240 고정 크기
    'brain': TaskPreset(
        kind=TaskKind.BRAIN,
        stats=TaskStats(median_d=155, median_h=240, median_w=240, min_d=155, min_h=240, min_w=240,
                        in_channels=4, out_channels=3),
        episodes=150, batch_size=2,
        description="뇌종양 (MR 4채널, 3클래스)",
    ),
    # 1 x [90~130] x 320 x 320
    'heart': TaskPreset(
        kind=TaskKind.HEART,
        stats=TaskStats(median_d=110, median_h=320, median_w=320, min_d=90, min_h=320, min_w=320,
                        in_channels=1, out_channels=1),
        episodes=500, batch_size=1,
        description="좌심방 (MR 1채널, 1클래스)",
    ),
    # 깊이 최소 11, 평면 256~384
    'prostate': TaskPreset(
        kind=TaskKind.PROSTATE,
        stats=TaskStats(median_d=20, median_h=320, median_w=320, min_d=11, min_h=256, min_w=256,
                        in_channels=2, out_channels=2),
        episodes=500, batch_size=4,
        description="전립선 (MR 2채널, 2클래스)",
    ),
    # 합성 데이터 기본값 (깊이 12~16, 40 x 40)
    'synthetic': TaskPreset(
        kind=TaskKind.SYNTHETIC,
        stats=TaskStats(median_d=14, median_h=40, median_w=40, min_d=12, min_h=40, min_w=40,
                        in_channels=1, out_channels=1),
        episodes=40, batch_size=2,
        description="합성 비등방성 타원체 데이터",
    ),
}


def get_supported_tasks() -> List[str]:
    return sorted(TASK_CATALOG.keys())


def get_preset(name: str) -> TaskPreset:
    preset = TASK_CATALOG.get(name)
    if preset is None:
        raise ConfigException(
            f"알 수 없는 작업 프리셋입니다: {name} (지원: {', '.join(get_supported_tasks())})"
        )
    return preset


def get_task_stats(name: str) -> TaskStats:
    return get_preset(name).stats


def get_config_defaults(name: str) -> Dict[str, Any]:
    """ExperimentConfig에 합칠 작업별 기본값"""
    preset = get_preset(name)
    return {"episodes": preset.episodes, "batch_size": preset.batch_size, "task_preset": name}


def find_preset_for(stats: TaskStats) -> Optional[str]:
    for name, preset in TASK_CATALOG.items():
        if preset.stats == stats:
            return name
    return None
