"""
합성 비등방성 분할 데이터셋 생성기

깊이가 얕고 평면이 넓은 볼륨에 클래스별 타원체 전경을 심고,
클래스/채널별 밝기 + 가우시안 잡음으로 이미지를 만듭니다. seed로 완전히 결정됩니다.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional

import numpy as np

from dataio.preprocessing import Case
from dataset_helper import DatasetHelper
from schemas import ManifestDocument, ManifestEntry, SynthSpec

logger = logging.getLogger(__name__)


def _ellipsoid(shape, rng: np.random.Generator) -> np.ndarray:
    d, h, w = shape
    radii = np.array([
        rng.uniform(0.2, 0.35) * d,
        rng.uniform(0.15, 0.3) * h,
        rng.uniform(0.15, 0.3) * w,
    ])
    radii = np.maximum(radii, 1.0)
    center = np.array([rng.uniform(r, e - r) if e > 2 * r else e / 2.0 for r, e in zip(radii, shape)])
    grid = np.stack(np.meshgrid(*(np.arange(e) + 0.5 for e in shape), indexing="ij"), axis=-1)
    return (((grid - center) / radii) ** 2).sum(axis=-1) <= 1.0


def generate_case(spec: SynthSpec, index: int, rng: np.random.Generator) -> Case:
    """케이스 한 개 생성 (rng 소비 순서 고정)"""
    d = int(rng.integers(spec.depth_range[0], spec.depth_range[1] + 1))
    hw = int(rng.integers(spec.hw_range[0], spec.hw_range[1] + 1))
    shape = (d, hw, hw)
    label = np.zeros((spec.classes,) + shape, dtype=np.float32)
    for k in range(spec.classes):
        for _ in range(spec.ellipsoids_per_class):
            label[k] = np.maximum(label[k], _ellipsoid(shape, rng))
    image = np.empty((spec.channels,) + shape, dtype=np.float32)
    for m in range(spec.channels):
        intensity = np.zeros(shape)
        for k in range(spec.classes):
            intensity += (1.0 + k + 0.5 * m) * label[k]
        image[m] = intensity + rng.normal(0.0, spec.noise_std, size=shape)
    return Case(id=f"case_{index:03d}", image=image[None], label=label[None])


def generate_cases(spec: SynthSpec) -> List[Case]:
    rng = np.random.default_rng(spec.seed)
    return [generate_case(spec, i, rng) for i in range(spec.cases)]


def synth_generate(spec: SynthSpec, out_dir: Path, helper: Optional[DatasetHelper] = None) -> ManifestDocument:
    """케이스 디렉터리와 manifest.json을 기록"""
    out_dir = Path(out_dir)
    helper = helper or DatasetHelper(out_dir)
    entries = []
    for case in generate_cases(spec):
        meta = helper.save_case(case, out_dir / case.id)
        entries.append(ManifestEntry(id=case.id, path=case.id, shape=meta.shape, label_channels=meta.label_channels))
    manifest = helper.write_manifest(entries)
    logger.info(
        "synthetic dataset written cases=%d seed=%d root=%s stats=%s",
        spec.cases, spec.seed, out_dir, manifest.stats,
    )
    return manifest
