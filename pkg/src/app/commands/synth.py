"""
synth 명령: 합성 타원체 데이터셋 생성
"""
import argparse
import logging

from pydantic import ValidationError

from commands.common import emit, read_config_file, require
from core.responses import ConfigException
from dataio.synth import synth_generate
from schemas import SynthSpec

logger = logging.getLogger(__name__)

NAME = "synth"


def register(subparsers, parents) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, parents=parents, help="합성 데이터셋 생성")
    parser.add_argument("--cases", type=int, help="케이스 수")
    parser.add_argument("--channels", type=int, help="이미지 채널 수")
    parser.add_argument("--classes", type=int, help="전경 클래스 수")
    parser.add_argument("--depth-range", type=int, nargs=2, metavar=("LO", "HI"), help="깊이 범위")
    parser.add_argument("--hw-range", type=int, nargs=2, metavar=("LO", "HI"), help="높이/너비 범위")
    parser.set_defaults(handler=handle, parser=parser)
    return parser


def handle(args: argparse.Namespace) -> int:
    require(args, args.out is not None, "--out 디렉터리가 필요합니다")
    data = read_config_file(args.config)
    flags = {
        "cases": args.cases,
        "channels": args.channels,
        "classes": args.classes,
        "depth_range": tuple(args.depth_range) if args.depth_range else None,
        "hw_range": tuple(args.hw_range) if args.hw_range else None,
        "seed": args.seed,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    try:
        spec = SynthSpec.model_validate(data)
    except ValidationError as e:
        raise ConfigException(f"합성 데이터 설정이 유효하지 않습니다: {e.errors()[0]['msg']}")

    manifest = synth_generate(spec, args.out)
    return emit(NAME, {"root": str(args.out), "cases": len(manifest.cases), "stats": manifest.stats})
