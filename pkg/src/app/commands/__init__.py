# Commands package
from . import (
    evaluate,
    gradcheck,
    infer,
    inspect_space,
    search,
    synth,
)

# 도움말에 표시되는 순서
COMMANDS = (synth, inspect_space, search, evaluate, infer, gradcheck)

__all__ = [
    "COMMANDS",
    "evaluate",
    "gradcheck",
    "infer",
    "inspect_space",
    "search",
    "synth",
]
