"""
명령 공통 도우미: 공통 플래그, 설정 로드(파일 + 플래그 덮어쓰기), 결과 출력
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, ValidationError

from core.responses import ConfigException, UsageException, success_response
from core.task_catalog import get_config_defaults
from schemas import ExperimentConfig

logger = logging.getLogger(__name__)


def common_parser() -> argparse.ArgumentParser:
    """모든 하위 명령이 공유하는 플래그"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", type=Path, help="ExperimentConfig JSON 파일")
    parser.add_argument("--data", type=Path, help="데이터셋 디렉터리 (manifest.json 위치)")
    parser.add_argument("--seed", type=int, help="난수 seed")
    parser.add_argument("--out", type=Path, help="출력 디렉터리")
    return parser


def read_config_file(path: Optional[Path]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigException(f"설정 파일이 없습니다: {path}")
    except json.JSONDecodeError as e:
        raise ConfigException(f"설정 파일 JSON 파싱 실패: {path} ({e})")
    if not isinstance(raw, dict):
        raise ConfigException(f"설정 파일 최상위는 객체여야 합니다: {path}")
    return raw


def build_config(
    args: argparse.Namespace, overrides: Dict[str, Any], base: Optional[Dict[str, Any]] = None
) -> ExperimentConfig:
    """(base →) 설정 파일 → 프리셋 기본값 → 플래그 순으로 병합 (플래그 우선)"""
    data = {**(base or {}), **read_config_file(getattr(args, "config", None))}
    preset = overrides.get("task_preset") or data.get("task_preset")
    if preset:
        data = {**get_config_defaults(preset), **data}
    if getattr(args, "data", None) is not None:
        data["data_path"] = str(args.data)
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(p) for p in first.get("loc", ())) or "config"
        raise ConfigException(f"실험 설정이 유효하지 않습니다: {location}: {first['msg']}")


def require(args: argparse.Namespace, condition: bool, message: str) -> None:
    """사용법 오류 (종료 코드 1, 사용법 포함)"""
    if not condition:
        parser: argparse.ArgumentParser = args.parser
        raise UsageException(f"{message}\n{parser.format_usage().rstrip()}")


def emit(command: str, data: Any, message: str = "성공") -> int:
    """성공 응답을 표준 출력에 JSON으로 기록"""
    if isinstance(data, BaseModel):
        data = data.model_dump()
    payload = success_response(data=data, command=command, message=message)
    sys.stdout.write(json.dumps(payload.model_dump(), ensure_ascii=False, indent=2, default=str) + "\n")
    return 0
