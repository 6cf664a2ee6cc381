"""
gradcheck 명령: 미분 연산 전체에 대한 중앙 차분 검사
"""
import argparse
import logging

from commands.common import emit
from core.responses import NumericAbortException
from services.gradcheck_service import DEFAULT_TOLERANCE, run_standard_suite

logger = logging.getLogger(__name__)

NAME = "gradcheck"


def register(subparsers, parents) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, parents=parents, help="그래디언트 검사")
    parser.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE, help="최대 상대 오차")
    parser.set_defaults(handler=handle, parser=parser)
    return parser


def handle(args: argparse.Namespace) -> int:
    reports = run_standard_suite(tolerance=args.tolerance, seed=args.seed or 0)
    failed = [r.to_dict() for r in reports if not r.passed]
    if failed:
        raise NumericAbortException(
            f"그래디언트 검사 실패: {', '.join(r['name'] for r in failed)}",
            diagnostics={"failed": failed},
        )
    return emit(NAME, {"tolerance": args.tolerance, "cases": [r.to_dict() for r in reports]})
