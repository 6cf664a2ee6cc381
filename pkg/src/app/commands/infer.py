"""
infer 명령: 케이스 하나를 greedy 아키텍처로 분할해 예측 마스크 케이스로 기록
"""
import argparse
import logging

from commands.common import emit, require
from core.factory import ServiceFactory
from dataio.preprocessing import Case, nonzero_box, paste_into, zscore_normalize
from nas.controller import greedy
from nas.searchspace import describe_choice
from nas.supernet import realize
from services.evaluation_service import binarize, hard_dice

logger = logging.getLogger(__name__)

NAME = "infer"


def register(subparsers, parents) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, parents=parents, help="단일 케이스 추론")
    parser.add_argument("--checkpoint", type=str, help="search 결과 체크포인트")
    parser.add_argument("--case", type=str, help="입력 케이스 디렉터리")
    parser.set_defaults(handler=handle, parser=parser)
    return parser


def handle(args: argparse.Namespace) -> int:
    require(args, args.checkpoint is not None, "--checkpoint가 필요합니다")
    require(args, args.case is not None, "--case가 필요합니다")
    require(args, args.out is not None, "--out 디렉터리가 필요합니다")

    helper = ServiceFactory.get_dataset_helper()
    state = ServiceFactory.get_checkpoint_service().load(args.checkpoint)
    case = helper.load_case(args.case)

    choice = greedy(state.controller, state.schema)
    realization = realize(state.schema, choice)
    # 학습과 같은 crop → 정규화, 예측은 원래 격자로 되돌림
    box = nonzero_box(case.image) if state.config.crop_nonzero else None
    image = case.image if box is None else case.image[(slice(None), slice(None), *box)]
    logits = ServiceFactory.get_evaluation_service().one_shot_infer(
        state.weights, realization, zscore_normalize(image)
    )
    mask = binarize(logits)
    if box is not None:
        mask = paste_into(mask, box, case.spatial)
    helper.save_case(Case(id=case.id, image=case.image, label=mask), args.out)

    logger.info("inference case=%s out=%s", case.id, args.out)
    return emit(NAME, {
        "case": case.id,
        "out": str(args.out),
        "greedy": list(choice.indices),
        "architecture": describe_choice(state.schema, choice),
        "foreground_voxels": int(mask.sum()),
        "dice_vs_label": hard_dice(mask, case.label),
    })
