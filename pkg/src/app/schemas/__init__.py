"""
JSON 문서 스키마 정의
실험 설정, 에피소드 로그, 케이스 메타데이터, 매니페스트 등 파일로 주고받는 모든 문서를 pydantic으로 검증합니다.
"""
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Optional, Dict, List, Literal, Any, Tuple

CASE_DTYPE = "f32le"
MANIFEST_VERSION = 1


class CaseMeta(BaseModel):
    """케이스 디렉터리의 meta.json"""
    id: str = Field(..., min_length=1, description="케이스 ID")
    shape: List[int] = Field(..., description="이미지 형상 [c, d, h, w]")
    label_channels: int = Field(..., ge=1, description="라벨 채널(클래스) 수")
    dtype: str = Field(CASE_DTYPE, description="raw 파일 dtype 태그")

    @field_validator("shape")
    @classmethod
    def _check_shape(cls, value: List[int]) -> List[int]:
        if len(value) != 4 or any(v < 1 for v in value):
            raise ValueError(f"shape는 양수 4개 [c, d, h, w]여야 합니다: {value}")
        return value

    @property
    def spatial(self) -> Tuple[int, int, int]:
        return tuple(self.shape[1:])  # type: ignore[return-value]


class ManifestEntry(BaseModel):
    """매니페스트의 케이스 항목"""
    id: str
    path: str = Field(..., description="매니페스트 기준 상대 경로")
    shape: List[int]
    label_channels: int = Field(..., ge=1)


class ManifestDocument(BaseModel):
    """데이터셋 루트의 manifest.json"""
    version: int = MANIFEST_VERSION
    cases: List[ManifestEntry] = Field(default_factory=list)
    stats: Optional[Dict[str, int]] = Field(None, description="헤더로부터 계산한 TaskStats")


class SynthSpec(BaseModel):
    """합성 데이터셋 생성 파라미터"""
    cases: int = Field(16, ge=1)
    channels: int = Field(1, ge=1)
    classes: int = Field(1, ge=1)
    depth_range: Tuple[int, int] = (12, 16)
    hw_range: Tuple[int, int] = (40, 40)
    seed: int = Field(0, ge=0)
    noise_std: float = Field(0.3, ge=0.0)
    ellipsoids_per_class: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_ranges(self) -> "SynthSpec":
        for label, (lo, hi) in (("depth_range", self.depth_range), ("hw_range", self.hw_range)):
            if lo < 1 or lo > hi:
                raise ValueError(f"{label} 범위가 올바르지 않습니다: {(lo, hi)}")
        return self


class ExperimentConfig(BaseModel):
    """탐색 실험 설정 (JSON 파일 + CLI 플래그 덮어쓰기)"""
    data_path: Optional[str] = Field(None, description="데이터셋 디렉터리 (manifest.json 위치)")
    fold_index: int = Field(0, ge=0)
    fold_count: int = Field(5, ge=2)
    episodes: int = Field(40, ge=0)
    rollouts_per_episode: int = Field(20, ge=1)
    child_epochs_per_episode: int = Field(3, ge=1)
    child_lr: float = 1e-3
    child_weight_decay: float = 1e-5
    controller_lr: float = 1e-3
    controller_weight_decay: float = 1e-6
    entropy_coef: float = 1e-4
    baseline_decay: float = Field(0.95, ge=0.0, lt=1.0)
    batch_size: int = Field(2, ge=1)
    base_channels: int = Field(8, ge=1)
    seed: int = Field(0, ge=0)

    reward_mode: Literal["dice", "surrogate"] = "dice"
    surrogate_shaping: Literal["graded", "sparse"] = "graded"
    planted_indices: Optional[List[int]] = Field(None, description="surrogate 모드의 정답 선택 벡터")
    task_preset: Optional[str] = Field(None, description="데이터셋 없이 통계를 가져올 작업 프리셋")
    eval_workers: int = Field(1, ge=1)
    crop_nonzero: bool = True
    checkpoint_every: int = Field(0, ge=0)
    checkpoint_name: str = Field("search.ckpt.npz", description="--out 디렉터리 안의 최종 체크포인트 파일 이름")
    foreground_prob: float = Field(0.5, ge=0.0, le=1.0)

    @field_validator("child_lr", "controller_lr")
    @classmethod
    def _positive_rate(cls, value: float) -> float:
        if value <= 0:
            raise ValueError(f"학습률은 양수여야 합니다: {value}")
        return value

    @field_validator("child_weight_decay", "controller_weight_decay", "entropy_coef")
    @classmethod
    def _non_negative(cls, value: float) -> float:
        if value < 0:
            raise ValueError(f"0 이상이어야 합니다: {value}")
        return value

    @field_validator("checkpoint_name")
    @classmethod
    def _plain_npz_name(cls, value: str) -> str:
        if value == ".npz" or not value.endswith(".npz") or "/" in value or "\\" in value:
            raise ValueError(f"체크포인트 이름은 경로 없는 .npz 파일 이름이어야 합니다: {value}")
        return value

    @model_validator(mode="after")
    def _check_fold(self) -> "ExperimentConfig":
        if self.fold_index >= self.fold_count:
            raise ValueError(f"fold_index({self.fold_index})는 fold_count({self.fold_count})보다 작아야 합니다")
        if self.reward_mode == "dice" and not self.data_path:
            raise ValueError("dice 보상 모드에는 data_path가 필요합니다")
        if self.reward_mode == "surrogate" and not (self.data_path or self.task_preset):
            raise ValueError("surrogate 모드에는 data_path 또는 task_preset이 필요합니다")
        return self


class EpisodeLog(BaseModel):
    """에피소드 한 번의 결과"""
    episode: int = Field(..., ge=0)
    phase: Literal["warmup", "search"] = "search"
    rewards: List[float] = Field(default_factory=list)
    mean_reward: float = Field(..., ge=0.0, le=1.0)
    max_reward: float = Field(..., ge=0.0, le=1.0)
    entropy: float = Field(..., ge=0.0, description="평균 컨트롤러 엔트로피")
    greedy: List[int] = Field(..., description="greedy ArchChoice 인덱스")
    train_loss: Optional[float] = None
    estimated_memory_mb: float = 0.0
    duration_sec: float = 0.0

    @field_validator("rewards")
    @classmethod
    def _rewards_in_range(cls, value: List[float]) -> List[float]:
        if any(not 0.0 <= r <= 1.0 for r in value):
            raise ValueError(f"보상은 [0, 1] 범위여야 합니다: {value}")
        return value

    def comparable(self) -> Dict[str, Any]:
        """결정성 비교용 (벽시계 시간 제외)"""
        return self.model_dump(exclude={"duration_sec"})


class CaseDice(BaseModel):
    id: str
    dice: float


class EvaluationReport(BaseModel):
    """checkpoint greedy 아키텍처의 fold 평가 결과"""
    fold_index: int
    greedy: List[int]
    mean_dice: float
    cases: List[CaseDice] = Field(default_factory=list)


class SearchSummary(BaseModel):
    """search 명령 결과"""
    greedy: List[int]
    architecture: Dict[str, Any]
    episodes: int
    convergence: Optional[float] = None
    checkpoint: str
    log_path: str
    csv_path: str
