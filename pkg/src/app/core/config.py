"""
애플리케이션 설정 관리

환경 변수는 로그 출력만 조정합니다. 탐색 결과에 영향을 주는 값은
모두 ExperimentConfig(JSON + 명령행 플래그)로 전달됩니다.
"""
from dotenv import load_dotenv
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


load_dotenv()

_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


class Settings(BaseSettings):
    """프로세스 설정"""

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )

    # 로깅 설정
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = (v or "").upper()
        if level not in _LOG_LEVELS:
            raise ValueError(f"LOG_LEVEL은 {sorted(_LOG_LEVELS)} 중 하나여야 합니다")
        return level


# 전역 설정 인스턴스
settings = Settings()
