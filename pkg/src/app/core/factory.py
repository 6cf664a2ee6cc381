"""
서비스 팩토리 - 의존성 주입 설정
"""
import logging

from core.container import container
from core.interfaces import (
    IDatasetHelper, IChildTrainer, IEvaluationService, ICheckpointService, ISearchService,
)
from dataset_helper import DatasetHelper
from services.checkpoint_service import CheckpointService
from services.evaluation_service import EvaluationService
from services.search_service import SearchService
from services.trainer_service import ChildTrainer

logger = logging.getLogger(__name__)


class ServiceFactory:
    """서비스 의존성 등록 및 초기화"""

    _configured = False

    @classmethod
    def configure_dependencies(cls, force: bool = False) -> None:
        """의존성 주입 컨테이너 설정"""
        if cls._configured and not force:
            return
        container.reset()

        # 경로가 없는 헬퍼는 케이스 단위 읽기/쓰기에만 사용
        container.register_singleton(IDatasetHelper, DatasetHelper())
        container.register_service(IChildTrainer, ChildTrainer)
        container.register_service(IEvaluationService, EvaluationService)
        container.register_service(ICheckpointService, CheckpointService)
        container.register_service(ISearchService, SearchService)
        cls._configured = True
        logger.debug("dependencies configured")

    @staticmethod
    def get_dataset_helper() -> IDatasetHelper:
        """데이터셋 헬퍼 조회"""
        return container.get(IDatasetHelper)

    @staticmethod
    def get_trainer() -> IChildTrainer:
        return container.get(IChildTrainer)

    @staticmethod
    def get_evaluation_service() -> IEvaluationService:
        """평가 서비스 조회"""
        return container.get(IEvaluationService)

    @staticmethod
    def get_checkpoint_service() -> ICheckpointService:
        """체크포인트 서비스 조회"""
        return container.get(ICheckpointService)

    @staticmethod
    def get_search_service() -> ISearchService:
        """탐색 서비스 조회"""
        return container.get(ISearchService)
