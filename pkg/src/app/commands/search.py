"""
search 명령: 에피소드 루프 실행 후 greedy 아키텍처와 체크포인트 경로 출력
"""
import argparse
import logging

from commands.common import build_config, emit, read_config_file, require
from core.factory import ServiceFactory
from core.task_catalog import get_supported_tasks
from nas.searchspace import describe_choice
from schemas import SearchSummary
from services.report_service import convergence_report

logger = logging.getLogger(__name__)

NAME = "search"
# 수렴도 계산에 사용하는 최근 에피소드 수
CONVERGENCE_WINDOW = 10


def register(subparsers, parents) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, parents=parents, help="아키텍처 탐색 실행")
    parser.add_argument("--resume", type=str, help="이어서 실행할 체크포인트")
    parser.add_argument("--episodes", type=int, help="컨트롤러 에피소드 수")
    parser.add_argument("--rollouts", type=int, dest="rollouts_per_episode", help="에피소드당 rollout 수")
    parser.add_argument("--fold", type=int, dest="fold_index", help="검증 fold 번호")
    parser.add_argument("--reward-mode", choices=("dice", "surrogate"), help="보상 방식")
    parser.add_argument("--preset", choices=get_supported_tasks(), dest="task_preset", help="작업 프리셋")
    parser.add_argument("--workers", type=int, dest="eval_workers", help="rollout 평가 스레드 수")
    parser.add_argument("--checkpoint-every", type=int, help="중간 체크포인트 간격 (0이면 끔)")
    parser.add_argument("--checkpoint-name", help="--out 안에 쓰는 최종 체크포인트 파일 이름")
    parser.set_defaults(handler=handle, parser=parser)
    return parser


def handle(args: argparse.Namespace) -> int:
    require(args, args.out is not None, "--out 디렉터리가 필요합니다")
    file_config = read_config_file(args.config)
    reward_mode = args.reward_mode or file_config.get("reward_mode", "dice")
    has_data = args.data is not None or bool(file_config.get("data_path"))
    has_preset = bool(args.task_preset or file_config.get("task_preset"))
    require(
        args,
        has_data or args.resume is not None or (reward_mode == "surrogate" and has_preset),
        "--data가 필요합니다 (surrogate 모드는 --preset도 가능)",
    )

    overrides = {
        "episodes": args.episodes,
        "rollouts_per_episode": args.rollouts_per_episode,
        "fold_index": args.fold_index,
        "reward_mode": args.reward_mode,
        "task_preset": args.task_preset,
        "eval_workers": args.eval_workers,
        "checkpoint_every": args.checkpoint_every,
        "checkpoint_name": args.checkpoint_name,
    }
    base = None
    if args.resume is not None:
        # 재개 시 체크포인트 설정을 기본값으로 사용
        base = ServiceFactory.get_checkpoint_service().load(args.resume).config.model_dump()
    config = build_config(args, overrides, base=base)

    service = ServiceFactory.get_search_service()
    result = service.run_search(config, args.out, resume=args.resume)

    window = min(CONVERGENCE_WINDOW, len(result.logs))
    summary = SearchSummary(
        greedy=list(result.greedy.indices),
        architecture=describe_choice(result.state.schema, result.greedy),
        episodes=len(result.logs),
        convergence=convergence_report(result.logs, window) if window else None,
        checkpoint=str(result.checkpoint),
        log_path=str(result.reporter.log_path),
        csv_path=str(result.reporter.csv_path),
    )
    return emit(NAME, summary)
