"""
macro-nas 명령행 진입점

종료 코드: 0 성공, 1 사용법 오류, 2 데이터/설정/체크포인트 오류, 3 수치 오류로 중단
"""
import argparse
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

from commands import COMMANDS
from commands.common import common_parser
from core.config import settings
from core.factory import ServiceFactory
from core.middleware import run_with_exception_handlers
from core.responses import UsageException

load_dotenv()

logger = logging.getLogger(__name__)


class CommandParser(argparse.ArgumentParser):
    """파싱 오류를 종료 대신 UsageException으로 변환"""

    def error(self, message: str):
        raise UsageException(f"{message}\n{self.format_usage().rstrip()}")


def build_parser() -> CommandParser:
    parser = CommandParser(prog="macro-nas", description="3차원 분할 네트워크 매크로 구조 탐색")
    subparsers = parser.add_subparsers(dest="command", metavar="<command>")
    parents = [common_parser()]
    for command in COMMANDS:
        command.register(subparsers, parents)
    return parser


def configure_logging() -> None:
    # 표준 출력은 결과 JSON 전용
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL, logging.INFO),
        format=settings.LOG_FORMAT,
        stream=sys.stderr,
    )


def _command_name(argv: Optional[List[str]]) -> Optional[str]:
    args = sys.argv[1:] if argv is None else argv
    return next((a for a in args if not a.startswith("-")), None)


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    parser = build_parser()

    def run() -> int:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageException(f"명령이 필요합니다\n{parser.format_usage().rstrip()}")
        ServiceFactory.configure_dependencies()
        logger.debug("command start name=%s", args.command)
        return args.handler(args)

    return run_with_exception_handlers(run, command=_command_name(argv), stream=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
