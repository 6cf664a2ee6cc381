"""
공통 응답 모델 및 예외 클래스
"""
from typing import Any, Dict, Optional
import logging

from pydantic import BaseModel

logger = logging.getLogger(__name__)

# 종료 코드
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class CommandResponse(BaseModel):
    """표준 명령 응답 모델 (CLI 출력용)"""
    status: str  # "success" or "error"
    command: Optional[str] = None
    data: Optional[Any] = None
    message: Optional[str] = None
    error_code: Optional[str] = None


# 커스텀 예외 클래스들
class NASException(Exception):
    """탐색 파이프라인 공통 예외"""
    def __init__(self, message: str, error_code: str = None, exit_code: int = EXIT_DATA):
        self.message = message
        self.error_code = error_code
        self.exit_code = exit_code
        super().__init__(message)


class UsageException(NASException):
    """명령행 사용법 오류"""
    def __init__(self, message: str = "명령행 인자가 올바르지 않습니다"):
        super().__init__(message, "USAGE_ERROR", EXIT_USAGE)


class ConfigException(NASException):
    """실험 설정 오류"""
    def __init__(self, message: str = "실험 설정이 유효하지 않습니다"):
        super().__init__(message, "CONFIG_ERROR", EXIT_DATA)


class DataFormatException(NASException):
    """케이스/매니페스트 형식 오류"""
    def __init__(self, message: str = "데이터 형식이 올바르지 않습니다"):
        super().__init__(message, "FORMAT_ERROR", EXIT_DATA)


class DatasetTooSmallException(NASException):
    """패치 후보를 만들 수 없을 만큼 작은 데이터셋"""
    def __init__(self, message: str = "데이터셋 크기가 너무 작습니다"):
        super().__init__(message, "DATASET_TOO_SMALL", EXIT_DATA)


class ValidationException(NASException):
    """아키텍처 선택 검증 오류"""
    def __init__(self, message: str = "아키텍처 선택이 유효하지 않습니다", decision: str = None):
        super().__init__(message, "VALIDATION_ERROR", EXIT_DATA)
        self.decision = decision


class ShapeException(NASException, ValueError):
    """텐서 형상 불일치"""
    def __init__(self, message: str = "텐서 형상이 맞지 않습니다"):
        super().__init__(message, "SHAPE_ERROR", EXIT_DATA)


class ArgumentException(NASException, ValueError):
    """연산 인자 오류"""
    def __init__(self, message: str = "연산 인자가 유효하지 않습니다"):
        super().__init__(message, "ARGUMENT_ERROR", EXIT_DATA)


class CheckpointException(NASException):
    """체크포인트 읽기/쓰기 오류"""
    def __init__(self, message: str = "체크포인트를 처리하지 못했습니다", error_code: str = "CHECKPOINT_ERROR"):
        super().__init__(message, error_code, EXIT_DATA)


class CheckpointIncompatibleException(CheckpointException):
    """체크포인트 버전 불일치"""
    def __init__(self, found: Any, expected: Any):
        super().__init__(
            f"체크포인트 버전이 호환되지 않습니다: found={found} expected={expected}",
            "CHECKPOINT_INCOMPATIBLE",
        )
        self.found = found
        self.expected = expected


class NumericAbortException(NASException):
    """손실 값이 유한하지 않아 탐색을 중단"""
    def __init__(self, message: str = "수치 오류로 탐색을 중단합니다", diagnostics: Dict[str, Any] = None):
        super().__init__(message, "NUMERIC_ABORT", EXIT_NUMERIC)
        self.diagnostics = diagnostics or {}


# 응답 헬퍼 함수들
def success_response(data: Any = None, command: str = None, message: str = "성공") -> CommandResponse:
    """성공 응답 생성"""
    return CommandResponse(status="success", command=command, data=data, message=message)


def error_response(
    message: str = "오류가 발생했습니다",
    error_code: str = None,
    command: str = None,
    data: Any = None,
) -> CommandResponse:
    """오류 응답 생성"""
    return CommandResponse(
        status="error",
        command=command,
        message=message,
        error_code=error_code,
        data=data,
    )
