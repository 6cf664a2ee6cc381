"""
데이터셋 디렉터리 읽기/쓰기를 위한 헬퍼 모듈

케이스 디렉터리 구성:
    meta.json   {"id", "shape": [c, d, h, w], "label_channels", "dtype": "f32le"}
    image.raw   little-endian float32, (c, d, h, w) row-major
    label.raw   little-endian float32, (label_channels, d, h, w) row-major
"""

from typing import Dict, List, Optional, Sequence
from pathlib import Path
import json
import logging

import numpy as np
from pydantic import ValidationError

from core.interfaces import IDatasetHelper
from core.responses import DataFormatException, DatasetTooSmallException
from dataio.preprocessing import Case
from nas.searchspace import TaskStats
from schemas import CASE_DTYPE, CaseMeta, ManifestDocument, ManifestEntry

logger = logging.getLogger(__name__)

META_FILE = "meta.json"
IMAGE_FILE = "image.raw"
LABEL_FILE = "label.raw"
MANIFEST_FILE = "manifest.json"
_RAW_DTYPE = np.dtype("<f4")


def lower_median(values: Sequence[int]) -> int:
    """짝수 개일 때 아래쪽 중앙값"""
    if not values:
        raise DatasetTooSmallException("중앙값을 계산할 크기 목록이 비어 있습니다")
    ordered = sorted(int(v) for v in values)
    return ordered[(len(ordered) - 1) // 2]


def stats_from_shapes(shapes: Sequence[Sequence[int]], label_channels: int) -> TaskStats:
    """[c, d, h, w] 헤더 목록으로부터 TaskStats 계산 (raw 파일은 읽지 않음)"""
    if not shapes:
        raise DatasetTooSmallException("케이스가 없어 통계를 계산할 수 없습니다")
    channels = {int(s[0]) for s in shapes}
    if len(channels) != 1:
        raise DataFormatException(f"케이스마다 이미지 채널 수가 다릅니다: {sorted(channels)}")
    d, h, w = ([int(s[axis]) for s in shapes] for axis in (1, 2, 3))
    return TaskStats(
        median_d=lower_median(d), median_h=lower_median(h), median_w=lower_median(w),
        min_d=min(d), min_h=min(h), min_w=min(w),
        in_channels=channels.pop(), out_channels=int(label_channels),
    )


def _label_channels(entries: Sequence[ManifestEntry]) -> int:
    channels = {e.label_channels for e in entries}
    if len(channels) != 1:
        raise DataFormatException(f"케이스마다 라벨 채널 수가 다릅니다: {sorted(channels)}")
    return channels.pop()


class DatasetHelper(IDatasetHelper):
    def __init__(self, root: Optional[Path] = None):
        self.root = Path(root) if root is not None else None

    def at(self, root: Path) -> "DatasetHelper":
        """다른 데이터셋 루트를 가리키는 헬퍼"""
        return type(self)(root)

    @staticmethod
    def _read_json(path: Path) -> dict:
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise
        except json.JSONDecodeError as e:
            raise DataFormatException(f"JSON 파싱 실패: {path} ({e})")

    @staticmethod
    def _read_raw(path: Path, shape: Sequence[int]) -> np.ndarray:
        expected = int(np.prod(shape))
        data = np.fromfile(path, dtype=_RAW_DTYPE)
        if data.size != expected or path.stat().st_size != expected * _RAW_DTYPE.itemsize:
            raise DataFormatException(
                f"{path.name} 크기가 헤더와 다릅니다: 헤더 {list(shape)} → {expected}개 필요, 실제 {data.size}개"
            )
        return data.reshape(shape).astype(np.float32)

    def read_meta(self, case_dir: Path) -> CaseMeta:
        raw = self._read_json(Path(case_dir) / META_FILE)
        try:
            meta = CaseMeta.model_validate(raw)
        except ValidationError as e:
            raise DataFormatException(f"meta.json 형식 오류: {case_dir} ({e.errors()[0]['msg']})")
        if meta.dtype != CASE_DTYPE:
            raise DataFormatException(f"지원하지 않는 dtype 태그입니다: {meta.dtype}")
        return meta

    def load_case(self, case_dir: Path) -> Case:
        """케이스 디렉터리 → Case (파일 누락 시 FileNotFoundError)"""
        case_dir = Path(case_dir)
        meta = self.read_meta(case_dir)
        c, d, h, w = meta.shape
        image = self._read_raw(case_dir / IMAGE_FILE, (c, d, h, w))
        label = self._read_raw(case_dir / LABEL_FILE, (meta.label_channels, d, h, w))
        return Case(id=meta.id, image=image[None], label=label[None])

    def save_case(self, case: Case, case_dir: Path) -> CaseMeta:
        case_dir = Path(case_dir)
        case_dir.mkdir(parents=True, exist_ok=True)
        image = case.image[0]
        label = case.label[0]
        meta = CaseMeta(id=case.id, shape=list(image.shape), label_channels=label.shape[0], dtype=CASE_DTYPE)
        (case_dir / META_FILE).write_text(
            json.dumps(meta.model_dump(), sort_keys=True, indent=2), encoding="utf-8"
        )
        np.ascontiguousarray(image, dtype=_RAW_DTYPE).tofile(case_dir / IMAGE_FILE)
        np.ascontiguousarray(label, dtype=_RAW_DTYPE).tofile(case_dir / LABEL_FILE)
        return meta

    # 매니페스트 관련 함수들
    def _require_root(self) -> Path:
        if self.root is None:
            raise DataFormatException("데이터셋 경로가 지정되지 않았습니다")
        return self.root

    def write_manifest(self, entries: List[ManifestEntry]) -> ManifestDocument:
        root = self._require_root()
        stats = stats_from_shapes([e.shape for e in entries], _label_channels(entries)) if entries else None
        document = ManifestDocument(cases=entries, stats=stats.to_dict() if stats else None)
        root.mkdir(parents=True, exist_ok=True)
        (root / MANIFEST_FILE).write_text(
            json.dumps(document.model_dump(), sort_keys=True, indent=2), encoding="utf-8"
        )
        return document

    def read_manifest(self) -> ManifestDocument:
        root = self._require_root()
        path = root / MANIFEST_FILE
        if not path.exists():
            raise DataFormatException(f"manifest.json이 없습니다: {root}")
        try:
            return ManifestDocument.model_validate(self._read_json(path))
        except ValidationError as e:
            raise DataFormatException(f"manifest.json 형식 오류: {e.errors()[0]['msg']}")

    def case_ids(self) -> List[str]:
        return [entry.id for entry in self.read_manifest().cases]

    def task_stats(self, ids: Optional[Sequence[str]] = None) -> TaskStats:
        """매니페스트 헤더로부터 통계 계산 (ids가 주어지면 해당 케이스만)"""
        manifest = self.read_manifest()
        entries = manifest.cases if ids is None else [e for e in manifest.cases if e.id in set(ids)]
        if not entries:
            raise DatasetTooSmallException("통계를 계산할 케이스가 없습니다")
        return stats_from_shapes([e.shape for e in entries], _label_channels(entries))

    def load_cases(self, ids: Optional[Sequence[str]] = None) -> List[Case]:
        """매니페스트 순서(또는 ids 순서)대로 케이스 로드"""
        root = self._require_root()
        manifest = self.read_manifest()
        by_id: Dict[str, ManifestEntry] = {e.id: e for e in manifest.cases}
        order = [e.id for e in manifest.cases] if ids is None else list(ids)
        cases = []
        for case_id in order:
            if case_id not in by_id:
                raise DataFormatException(f"매니페스트에 없는 케이스입니다: {case_id}")
            cases.append(self.load_case(root / by_id[case_id].path))
        logger.debug("cases loaded count=%d root=%s", len(cases), root)
        return cases
