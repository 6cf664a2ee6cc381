"""
eval 명령: 체크포인트의 greedy 아키텍처를 검증 fold에서 평가
"""
import argparse
import logging

from commands.common import emit, require
from core.factory import ServiceFactory
from nas.controller import greedy
from nas.supernet import realize
from schemas import CaseDice, EvaluationReport, ExperimentConfig

logger = logging.getLogger(__name__)

NAME = "eval"


def register(subparsers, parents) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, parents=parents, help="greedy 아키텍처 dice 평가")
    parser.add_argument("--checkpoint", type=str, help="search 결과 체크포인트")
    parser.add_argument("--fold", type=int, dest="fold_index", help="평가할 fold (기본: 체크포인트 설정)")
    parser.set_defaults(handler=handle, parser=parser)
    return parser


def handle(args: argparse.Namespace) -> int:
    require(args, args.checkpoint is not None, "--checkpoint가 필요합니다")
    state = ServiceFactory.get_checkpoint_service().load(args.checkpoint)

    updates = {"reward_mode": "dice"}
    if args.data is not None:
        updates["data_path"] = str(args.data)
    if args.fold_index is not None:
        updates["fold_index"] = args.fold_index
    has_data = bool(updates.get("data_path") or state.config.data_path)
    require(args, has_data, "--data가 필요합니다 (체크포인트에 데이터 경로 없음)")
    config = ExperimentConfig.model_validate({**state.config.model_dump(), **updates})

    search = ServiceFactory.get_search_service()
    data = search.load_data(config)
    choice = greedy(state.controller, state.schema)
    realization = realize(state.schema, choice)
    scores = ServiceFactory.get_evaluation_service().per_case_dice(state.weights, realization, data.val_cases)

    cases = [CaseDice(id=case_id, dice=score) for case_id, score in zip(data.val_ids, scores)]
    report = EvaluationReport(
        fold_index=config.fold_index,
        greedy=list(choice.indices),
        mean_dice=float(sum(scores) / len(scores)) if scores else 0.0,
        cases=cases,
    )
    logger.info("evaluation fold=%d cases=%d mean_dice=%.4f", config.fold_index, len(cases), report.mean_dice)
    return emit(NAME, report)
