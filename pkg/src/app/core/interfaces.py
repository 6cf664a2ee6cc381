"""
서비스 인터페이스 정의
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np


class IDatasetHelper(ABC):
    """데이터셋 디렉터리 접근 인터페이스"""

    @abstractmethod
    def load_case(self, case_dir: Path) -> Any:
        """케이스 디렉터리 로드"""
        pass

    @abstractmethod
    def save_case(self, case: Any, case_dir: Path) -> Any:
        """케이스 디렉터리 기록"""
        pass

    @abstractmethod
    def at(self, root: Path) -> "IDatasetHelper":
        """root(manifest.json 위치)를 기준으로 하는 헬퍼"""
        pass


class IChildTrainer(ABC):
    """공유 가중치 학습 인터페이스"""

    @abstractmethod
    def train(self, weights, adam, realization, cases: Sequence[Any], epochs: int, batch_size: int,
              rng: np.random.Generator, foreground_prob: float = 0.5) -> float:
        """주어진 아키텍처로 epochs 만큼 학습하고 평균 손실 반환"""
        pass


class IEvaluationService(ABC):
    """one-shot 추론 및 dice 평가 인터페이스"""

    @abstractmethod
    def one_shot_infer(self, weights, realization, image: np.ndarray) -> np.ndarray:
        """전체 볼륨 한 번의 순전파 (원래 크기 logits)"""
        pass

    @abstractmethod
    def evaluate_dice(self, weights, realization, cases: Sequence[Any]) -> float:
        """환자별 평균 hard dice"""
        pass

    @abstractmethod
    def per_case_dice(self, weights, realization, cases: Sequence[Any]) -> List[float]:
        """케이스별 hard dice"""
        pass


class ICheckpointService(ABC):
    """탐색 상태 저장/복원 인터페이스"""

    @abstractmethod
    def save(self, state: Any, path: Path) -> Path:
        """상태를 단일 파일로 저장"""
        pass

    @abstractmethod
    def load(self, path: Path) -> Any:
        """저장된 상태 복원 (실패 시 기존 상태는 변경하지 않음)"""
        pass


class ISearchService(ABC):
    """탐색 실행 인터페이스"""

    @abstractmethod
    def run_search(self, config: Any, out_dir: Path, resume: Optional[Path] = None) -> Any:
        """에피소드 루프 실행"""
        pass

    @abstractmethod
    def prepare(self, config: Any) -> Dict[str, Any]:
        """데이터 분할/스키마 준비"""
        pass
