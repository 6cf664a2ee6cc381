"""탐색 공간 후보/stride 제한 테스트"""
import json

import pytest

from core.responses import DatasetTooSmallException, ValidationException
from core.task_catalog import get_task_stats
from nas.searchspace import (
    ArchChoice, TaskStats, build_schema, choice_from_values, describe_choice, max_architecture,
    patch_d_candidates, patch_hw_candidates, restrict_strides, validate_choice, DecisionSchema,
)


def stats(d, hw, min_d=None, min_hw=None) -> TaskStats:
    return TaskStats(
        median_d=d, median_h=hw, median_w=hw,
        min_d=min_d if min_d is not None else d, min_h=min_hw or hw, min_w=min_hw or hw,
    )


def test_patch_hw_heart_and_brain():
    assert patch_hw_candidates(get_task_stats("heart"), 16) == [320, 304, 288, 272, 256]
    assert patch_hw_candidates(get_task_stats("brain"), 16) == [240, 224, 208, 192, 176]
    assert patch_hw_candidates(stats(16, 16), 16) == [16]


def test_patch_d_candidates():
    assert patch_d_candidates(stats(112, 64), 16) == [112, 96, 80, 64, 48]
    assert patch_d_candidates(stats(11, 64), 4) == [8, 4]
    assert patch_d_candidates(stats(4, 64), 4) == [4]


def test_patch_candidates_too_small():
    with pytest.raises(DatasetTooSmallException):
        patch_d_candidates(stats(3, 64), 4)


def test_restrict_strides_brain():
    rule = restrict_strides(get_task_stats("brain"))
    assert (rule.divisor_d, rule.divisor_hw) == (16, 16)
    for stage in (1, 2):
        assert rule.stride_set(stage, "depth") == (2,)
    for stage in (3, 4):
        assert rule.stride_set(stage, "depth") == (2, 1)
        assert rule.stride_set(stage, "hw") == (2, 1)


def test_restrict_strides_prostate_depth():
    rule = restrict_strides(get_task_stats("prostate"))
    assert [rule.stride_set(s, "depth") for s in (1, 2, 3, 4)] == [(2,), (2,), (1,), (1,)]
    assert rule.divisor_d == 4
    assert rule.divisor_hw == 16


def test_restrict_strides_floor():
    rule = restrict_strides(stats(3, 64, min_d=3))
    assert all(rule.stride_set(s, "depth") == (1,) for s in (1, 2, 3, 4))
    assert rule.divisor_d == 1


def test_heart_schema_size_and_order():
    schema = build_schema(get_task_stats("heart"))
    names = [d.name for d in schema.decisions]

    assert len(schema) == 17
    assert names[:6] == ["patch_hw", "patch_d", "stride3_d", "stride3_hw", "stride4_d", "stride4_hw"]
    assert names[-6:] == ["skip_1_2", "skip_1_3", "skip_1_4", "skip_2_3", "skip_2_4", "skip_3_4"]
    assert schema.architecture_count() == 5 * 5 * 2 ** 5 * 3 ** 4 * 2 ** 6


def test_prostate_schema_has_singleton_depth_strides():
    schema = build_schema(get_task_stats("prostate"))
    assert schema.decision("stride3_d").choices == (1,)
    assert schema.decision("stride4_d").choices == (1,)
    assert schema.decision("patch_d").choices == (20, 16, 12, 8, 4)


def test_toy_schema_still_has_17_decisions(toy_schema):
    assert len(toy_schema) == 17
    assert toy_schema.decision("patch_hw").choices == (16, 8)
    assert toy_schema.decision("stride4_d").choices == (1,)


def test_schema_serialization_is_deterministic():
    a = build_schema(get_task_stats("heart")).to_json()
    b = build_schema(get_task_stats("heart")).to_json()
    assert a == b
    assert DecisionSchema.from_dict(json.loads(a)).to_json() == a


def test_max_architecture_heart():
    schema = build_schema(get_task_stats("heart"))
    described = describe_choice(schema, max_architecture(schema))

    assert described["patch_hw"] == 320
    assert described["patch_d"] == 96
    assert all(described[f"stride{s}_{axis}"] == 2 for s in (3, 4) for axis in ("d", "hw"))
    assert all(described[name] == "connect" for name in described if name.startswith("skip_"))


def test_validate_choice_names_decision():
    schema = build_schema(get_task_stats("heart"))
    bad = ArchChoice((7,) + (0,) * 16)
    with pytest.raises(ValidationException) as exc:
        validate_choice(schema, bad)
    assert exc.value.decision == "patch_hw"
    assert "patch_hw" in exc.value.message


def test_validate_choice_length(toy_schema):
    with pytest.raises(ValidationException):
        validate_choice(toy_schema, ArchChoice((0, 0)))


def test_choice_from_values_roundtrip():
    schema = build_schema(get_task_stats("heart"))
    values = list(describe_choice(schema, ArchChoice((1, 2, 1, 0, 0, 1, 1, 2, 0, 1, 2, 0, 1, 0, 1, 1, 0))).values())
    assert choice_from_values(schema, values).indices == (1, 2, 1, 0, 0, 1, 1, 2, 0, 1, 2, 0, 1, 0, 1, 1, 0)


def test_restrict_strides_is_monotone_in_extent():
    """최소 크기가 커지면 stride 2 허용 단계와 divisor가 줄지 않음"""
    previous = None
    for extent in range(1, 200):
        rule = restrict_strides(stats(extent, extent))
        if previous is not None:
            assert rule.divisor_d >= previous.divisor_d
            assert rule.divisor_hw >= previous.divisor_hw
            for stage in (1, 2, 3, 4):
                for axis in ("depth", "hw"):
                    if 2 in previous.stride_set(stage, axis):
                        assert 2 in rule.stride_set(stage, axis)
        previous = rule
