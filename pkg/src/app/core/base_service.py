"""
서비스 기본 클래스
"""
import logging
from typing import Any


class BaseService:
    """모든 서비스의 기본 클래스"""

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    def log_event(self, event: str, **fields: Any) -> None:
        """key=value 형식 이벤트 로그"""
        body = " ".join(f"{k}={v}" for k, v in fields.items())
        self.logger.info(f"{event} {body}".rstrip())
