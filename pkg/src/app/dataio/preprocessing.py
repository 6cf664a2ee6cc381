"""
케이스 전처리: Z-score 정규화, non-zero crop, 패치 샘플링, axial 좌우 반전

이미지와 라벨은 (1, c, d, h, w) 배열이며 모든 연산은 두 배열에 같은 좌표 변환을 적용합니다.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.responses import DatasetTooSmallException, ShapeException

logger = logging.getLogger(__name__)

ZSCORE_EPS = 1e-8


@dataclass(frozen=True)
class Case:
    """케이스 한 개 (이미지: 모달리티 채널, 라벨: 클래스 채널, 공간 크기 동일)"""
    id: str
    image: np.ndarray
    label: np.ndarray

    def __post_init__(self) -> None:
        if self.image.ndim != 5 or self.label.ndim != 5:
            raise ShapeException(f"{self.id}: 이미지/라벨은 5축이어야 합니다")
        if self.image.shape[0] != 1 or self.label.shape[0] != 1:
            raise ShapeException(f"{self.id}: 배치 축은 1이어야 합니다")
        if self.image.shape[2:] != self.label.shape[2:]:
            raise ShapeException(
                f"{self.id}: 이미지 {self.image.shape[2:]}와 라벨 {self.label.shape[2:]} 공간 크기가 다릅니다"
            )

    @property
    def spatial(self) -> Tuple[int, int, int]:
        return tuple(self.image.shape[2:])  # type: ignore[return-value]


def zscore_normalize(image: np.ndarray) -> np.ndarray:
    """채널별 평균 0, 모표준편차 1 (상수 채널은 0)"""
    data = image.astype(np.float64)
    axes = tuple(i for i in range(data.ndim) if i != 1)
    mean = data.mean(axis=axes, keepdims=True)
    std = data.std(axis=axes, keepdims=True)
    std = np.where(std > ZSCORE_EPS, std, 1.0)
    return ((data - mean) / std).astype(image.dtype, copy=False)


Box = Tuple[slice, slice, slice]


def nonzero_box(image: np.ndarray) -> Optional[Box]:
    """이미지 채널 중 하나라도 0이 아닌 복셀의 최소 bounding box (모두 0이면 None)"""
    mask = np.any(image[0] != 0, axis=0)
    if not mask.any():
        return None
    box = []
    for axis in range(3):
        other = tuple(a for a in range(3) if a != axis)
        hits = np.flatnonzero(mask.any(axis=other))
        box.append(slice(int(hits[0]), int(hits[-1]) + 1))
    return tuple(box)  # type: ignore[return-value]


def paste_into(values: np.ndarray, box: Box, spatial: Sequence[int]) -> np.ndarray:
    """crop된 (1, c, ...) 배열을 원래 공간 크기의 0 배열 안 box 위치에 복원"""
    full = np.zeros(values.shape[:2] + tuple(int(s) for s in spatial), dtype=values.dtype)
    full[(slice(None), slice(None), *box)] = values
    return full


def nonzero_crop(case: Case) -> Tuple[Case, bool]:
    """nonzero_box로 이미지와 라벨을 자름

    모든 복셀이 0이면 원본과 경고 플래그(True)를 반환합니다.
    """
    box = nonzero_box(case.image)
    if box is None:
        logger.warning("nonzero_crop: 이미지가 모두 0입니다 case=%s", case.id)
        return case, True
    index = (slice(None), slice(None), *box)
    return replace(case, image=case.image[index].copy(), label=case.label[index].copy()), False


def pad_to(case: Case, patch: Sequence[int]) -> Case:
    """패치보다 작은 축을 대칭 zero-padding (홀수 차이는 뒤쪽에 하나 더)"""
    pads = [(0, 0), (0, 0)]
    for extent, size in zip(case.spatial, patch):
        total = max(0, int(size) - extent)
        pads.append((total // 2, total - total // 2))
    if all(p == (0, 0) for p in pads):
        return case
    return replace(case, image=np.pad(case.image, pads), label=np.pad(case.label, pads))


def sample_patch(
    case: Case,
    patch: Sequence[int],
    rng: np.random.Generator,
    foreground_prob: float = 0.5,
) -> Tuple[np.ndarray, np.ndarray]:
    """패치 한 개 샘플링

    foreground_prob 확률로 전경 복셀 하나를 골라 그 복셀을 포함하는 원점 중에서 균등 선택하고,
    그 외에는 전체 범위에서 균등 선택합니다.
    """
    patch = tuple(int(p) for p in patch)
    case = pad_to(case, patch)
    extents = case.spatial
    forced = rng.random() < foreground_prob
    origin: List[int] = []
    foreground = np.argwhere(np.any(case.label[0] > 0, axis=0)) if forced else None
    if forced and foreground is not None and len(foreground):
        voxel = foreground[rng.integers(len(foreground))]
        for v, e, p in zip(voxel, extents, patch):
            lo, hi = max(0, int(v) - p + 1), min(int(v), e - p)
            origin.append(int(rng.integers(lo, hi + 1)))
    else:
        for e, p in zip(extents, patch):
            origin.append(int(rng.integers(0, e - p + 1)))
    index = (slice(None), slice(None)) + tuple(slice(o, o + p) for o, p in zip(origin, patch))
    return case.image[index], case.label[index]


def axial_hflip(
    image: np.ndarray, label: np.ndarray, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """0.5 확률로 w 축을 뒤집음 (두 배열 동일하게)"""
    if rng.random() < 0.5:
        return image[..., ::-1].copy(), label[..., ::-1].copy()
    return image, label


def preprocess_case(case: Case, crop_nonzero: bool = True) -> Case:
    """로드 직후 공통 전처리 (crop → 채널별 Z-score)"""
    if crop_nonzero:
        case, _ = nonzero_crop(case)
    return replace(case, image=zscore_normalize(case.image))


def _id_digest(case_id: str) -> str:
    return hashlib.sha256(case_id.encode("utf-8")).hexdigest()


def fold_split(case_ids: Sequence[str], fold_index: int, fold_count: int = 5) -> Tuple[List[str], List[str]]:
    """ID 해시 순서로 정렬 후 round-robin 배정, (학습, 검증) 반환"""
    if not 0 <= fold_index < fold_count:
        raise DatasetTooSmallException(f"fold_index {fold_index}가 fold_count {fold_count} 범위를 벗어났습니다")
    ordered = sorted(case_ids, key=lambda cid: (_id_digest(cid), cid))
    validation = [cid for i, cid in enumerate(ordered) if i % fold_count == fold_index]
    training = [cid for i, cid in enumerate(ordered) if i % fold_count != fold_index]
    if not validation or not training:
        raise DatasetTooSmallException(
            f"케이스 {len(ordered)}개로는 {fold_count}-fold 분할(fold {fold_index})을 만들 수 없습니다"
        )
    return training, validation
