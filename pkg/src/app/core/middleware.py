"""
전역 예외 처리 (예외 → 종료 코드)
"""
import json
import logging
import sys
from typing import Callable, Optional, TextIO

from pydantic import ValidationError

from core.responses import (
    EXIT_DATA, EXIT_OK, NASException, NumericAbortException, error_response,
)

logger = logging.getLogger(__name__)


def nas_exception_handler(exc: NASException, command: Optional[str], stream: TextIO) -> int:
    """도메인 예외 처리기"""
    if isinstance(exc, NumericAbortException):
        logger.error(f"Numeric abort: {exc.message} diagnostics={exc.diagnostics}")
    else:
        logger.warning(f"{exc.__class__.__name__}: {exc.message}")
    payload = error_response(message=exc.message, error_code=exc.error_code, command=command)
    if isinstance(exc, NumericAbortException):
        payload.data = exc.diagnostics
    stream.write(json.dumps(payload.model_dump(), ensure_ascii=False, default=str) + "\n")
    return exc.exit_code


def validation_exception_handler(exc: ValidationError, command: Optional[str], stream: TextIO) -> int:
    """pydantic 검증 오류 (설정/문서 형식)"""
    logger.warning(f"Validation error: {exc.errors()[0]['msg'] if exc.errors() else exc}")
    payload = error_response(message=str(exc), error_code="CONFIG_ERROR", command=command)
    stream.write(json.dumps(payload.model_dump(), ensure_ascii=False, default=str) + "\n")
    return EXIT_DATA


def general_exception_handler(exc: Exception, command: Optional[str], stream: TextIO) -> int:
    """일반 예외 처리기 (파일 누락 등 I/O 오류 포함)"""
    if isinstance(exc, OSError):
        logger.warning(f"I/O error: {exc}")
        code = "IO_ERROR"
    else:
        logger.error(f"Unhandled exception: {exc}", exc_info=True)
        code = "INTERNAL_ERROR"
    payload = error_response(message=str(exc), error_code=code, command=command)
    stream.write(json.dumps(payload.model_dump(), ensure_ascii=False, default=str) + "\n")
    return EXIT_DATA


def run_with_exception_handlers(fn: Callable[[], int], command: Optional[str] = None,
                                stream: Optional[TextIO] = None) -> int:
    """명령 실행 후 종료 코드 반환"""
    stream = stream or sys.stderr
    try:
        result = fn()
        return EXIT_OK if result is None else int(result)
    except NASException as exc:
        return nas_exception_handler(exc, command, stream)
    except ValidationError as exc:
        return validation_exception_handler(exc, command, stream)
    except Exception as exc:
        return general_exception_handler(exc, command, stream)
