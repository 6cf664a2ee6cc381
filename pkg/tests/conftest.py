"""공통 테스트 픽스처"""
from pathlib import Path

import pytest

from core.factory import ServiceFactory
from dataio.synth import synth_generate
from nas.searchspace import SKIP_EDGES, TaskStats, build_schema
from nas.supernet import ArchRealization, SupernetConfig, build
from schemas import SynthSpec


class StubSchema:
    """컨트롤러 테스트용 최소 스키마 (결정별 선택지 수만 가짐)"""

    def __init__(self, sizes):
        self.sizes = list(sizes)

    def __len__(self):
        return len(self.sizes)


@pytest.fixture
def toy_stats() -> TaskStats:
    return TaskStats(median_d=16, median_h=16, median_w=16, min_d=16, min_h=16, min_w=16)


@pytest.fixture
def toy_schema(toy_stats):
    return build_schema(toy_stats)


@pytest.fixture
def tiny_weights():
    return build(SupernetConfig(base_channels=2, in_channels=1, out_channels=1), seed=0)


def realization_16(strides=None, dilations=(1, 1, 1, 1), edges=SKIP_EDGES, pool="max", act="relu") -> ArchRealization:
    return ArchRealization(
        patch=(16, 16, 16),
        strides=strides or ((2, 2, 2),) * 4,
        dilations=dilations,
        pool_kind=pool,
        activation=act,
        active_edges=frozenset(edges),
    )


@pytest.fixture
def small_dataset(tmp_path) -> Path:
    """5케이스 8 x 16 x 16 합성 데이터셋"""
    root = tmp_path / "data"
    synth_generate(SynthSpec(cases=5, depth_range=(8, 8), hw_range=(16, 16), seed=3), root)
    return root


@pytest.fixture(autouse=True)
def _fresh_container():
    ServiceFactory.configure_dependencies(force=True)
    yield
