"""
inspect-space 명령: 데이터셋(또는 프리셋) 통계로 만든 탐색 공간 출력
"""
import argparse
import logging
from pathlib import Path

from commands.common import emit, read_config_file, require
from core.factory import ServiceFactory
from core.resource_calculator import ResourceCalculator
from core.task_catalog import find_preset_for, get_supported_tasks, get_task_stats
from nas.searchspace import build_schema, describe_choice, max_architecture
from nas.supernet import SupernetConfig, build, realize

logger = logging.getLogger(__name__)

NAME = "inspect-space"


def register(subparsers, parents) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, parents=parents, help="탐색 공간 스키마 출력")
    parser.add_argument("--preset", choices=get_supported_tasks(), help="데이터셋 대신 사용할 작업 프리셋")
    parser.add_argument("--base-channels", type=int, default=None, help="슈퍼넷 기본 채널 수 (자원 추정용)")
    parser.set_defaults(handler=handle, parser=parser)
    return parser


def handle(args: argparse.Namespace) -> int:
    config = read_config_file(args.config)
    data_path = args.data or config.get("data_path")
    preset = args.preset or config.get("task_preset")
    require(args, bool(data_path or preset), "--data 또는 --preset이 필요합니다")

    if data_path:
        helper = ServiceFactory.get_dataset_helper().at(Path(data_path))
        stats = helper.task_stats()
    else:
        stats = get_task_stats(preset)
    schema = build_schema(stats)

    base_channels = args.base_channels or int(config.get("base_channels", 8))
    weights = build(SupernetConfig(base_channels, stats.in_channels, stats.out_channels), schema, seed=0)
    largest = max_architecture(schema)
    estimate = ResourceCalculator.estimate(weights, realize(schema, largest))
    logger.info(
        "search space decisions=%d architectures=%d patch=%s",
        len(schema), schema.architecture_count(), estimate.patch,
    )
    return emit(NAME, {
        "schema": schema.to_dict(),
        "architecture_count": schema.architecture_count(),
        "matching_preset": find_preset_for(stats),
        "max_architecture": describe_choice(schema, largest),
        "max_resources": estimate.to_dict(),
    })
