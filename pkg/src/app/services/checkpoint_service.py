"""
탐색 상태 체크포인트

단일 .npz 파일에 모든 배열(슈퍼넷 가중치, Adam 모멘트, 컨트롤러 파라미터)을 저장하고
나머지 상태(설정, 스키마, 난수 상태, baseline, 에피소드 로그)는 "__meta__" 항목에 JSON으로 넣습니다.
"""
import io
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from autodiff.optim import AdamState
from core.interfaces import ICheckpointService
from core.responses import CheckpointException, CheckpointIncompatibleException
from nas.controller import ControllerState
from nas.searchspace import DecisionSchema
from nas.supernet import SupernetConfig, SupernetWeights, build
from schemas import EpisodeLog, ExperimentConfig

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = "macro-nas-checkpoint/1"
META_KEY = "__meta__"
WEIGHT_PREFIX = "supernet."


@dataclass
class SearchState:
    """에피소드 사이에 보존되는 탐색 전체 상태"""
    config: ExperimentConfig
    schema: DecisionSchema
    weights: SupernetWeights
    child_adam: AdamState
    controller: ControllerState
    rngs: Dict[str, np.random.Generator]
    episode: int = 0  # 다음에 실행할 에피소드 번호
    logs: List[EpisodeLog] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)


def _rng_state(rng: np.random.Generator) -> Dict[str, Any]:
    return rng.bit_generator.state


def _restore_rng(state: Dict[str, Any]) -> np.random.Generator:
    if state.get("bit_generator") != "PCG64":
        raise CheckpointException(f"지원하지 않는 난수 생성기입니다: {state.get('bit_generator')}")
    rng = np.random.default_rng()
    rng.bit_generator.state = state
    return rng


class CheckpointService(ICheckpointService):
    """SearchState ↔ 단일 파일"""

    def serialize(self, state: SearchState) -> Dict[str, np.ndarray]:
        arrays: Dict[str, np.ndarray] = {
            f"{WEIGHT_PREFIX}{name}": tensor.data for name, tensor in state.weights.params.items()
        }
        arrays.update(state.child_adam.to_arrays("child_adam"))
        arrays.update(state.controller.to_arrays("controller"))
        meta = {
            "version": CHECKPOINT_VERSION,
            "episode": state.episode,
            "config": state.config.model_dump(),
            "schema": state.schema.to_dict(),
            "supernet": {
                "base_channels": state.weights.config.base_channels,
                "in_channels": state.weights.config.in_channels,
                "out_channels": state.weights.config.out_channels,
            },
            "child_adam": state.child_adam.meta(),
            "controller": state.controller.meta(),
            "rngs": {name: _rng_state(rng) for name, rng in sorted(state.rngs.items())},
            "logs": [log.model_dump() for log in state.logs],
            "extra": state.extra,
        }
        arrays[META_KEY] = np.array(json.dumps(meta, sort_keys=True))
        return arrays

    def save(self, state: SearchState, path: Path) -> Path:
        """임시 파일에 쓴 뒤 교체"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        buffer = io.BytesIO()
        np.savez(buffer, **self.serialize(state))
        tmp_path = path.with_name(path.name + f".tmp.{os.getpid()}")
        try:
            tmp_path.write_bytes(buffer.getvalue())
            os.replace(tmp_path, path)
        finally:
            if tmp_path.exists():
                tmp_path.unlink()
        logger.info("checkpoint saved path=%s episode=%d", path, state.episode)
        return path

    def read_arrays(self, path: Path) -> Dict[str, np.ndarray]:
        try:
            with np.load(Path(path), allow_pickle=False) as data:
                return {key: np.array(data[key], copy=True) for key in data.files}
        except FileNotFoundError:
            raise CheckpointException(f"체크포인트 파일이 없습니다: {path}", "CHECKPOINT_NOT_FOUND")
        except Exception as e:
            raise CheckpointException(f"체크포인트를 읽을 수 없습니다: {path} ({type(e).__name__}: {e})")

    def load(self, path: Path) -> SearchState:
        """새 SearchState를 만들어 반환 (호출 측 상태는 건드리지 않음)"""
        arrays = self.read_arrays(path)
        if META_KEY not in arrays:
            raise CheckpointException(f"체크포인트 메타데이터가 없습니다: {path}")
        try:
            meta = json.loads(str(arrays.pop(META_KEY)))
        except json.JSONDecodeError as e:
            raise CheckpointException(f"체크포인트 메타데이터가 손상되었습니다: {e}")
        if meta.get("version") != CHECKPOINT_VERSION:
            raise CheckpointIncompatibleException(meta.get("version"), CHECKPOINT_VERSION)

        try:
            config = ExperimentConfig.model_validate(meta["config"])
            schema = DecisionSchema.from_dict(meta["schema"])
            weights = build(SupernetConfig(**meta["supernet"]), schema, seed=0)
            weights.load_arrays({
                key[len(WEIGHT_PREFIX):]: value for key, value in arrays.items() if key.startswith(WEIGHT_PREFIX)
            })
            child_adam = AdamState.restore(meta["child_adam"], arrays, "child_adam")
            controller = ControllerState.restore(meta["controller"], arrays, "controller")
            controller.check_schema(schema)
            rngs = {name: _restore_rng(s) for name, s in meta["rngs"].items()}
            logs = [EpisodeLog.model_validate(entry) for entry in meta["logs"]]
        except CheckpointException:
            raise
        except (KeyError, ValueError, TypeError) as e:
            raise CheckpointException(f"체크포인트 내용이 올바르지 않습니다: {type(e).__name__}: {e}")

        logger.info("checkpoint loaded path=%s episode=%d", path, meta["episode"])
        return SearchState(
            config=config,
            schema=schema,
            weights=weights,
            child_adam=child_adam,
            controller=controller,
            rngs=rngs,
            episode=int(meta["episode"]),
            logs=logs,
            extra=dict(meta.get("extra", {})),
        )
