"""전처리 (정규화 / crop / 패치 샘플링 / fold 분할) 테스트"""
import numpy as np
import pytest

from core.responses import DatasetTooSmallException, ShapeException
from dataio.preprocessing import (
    Case, axial_hflip, fold_split, nonzero_box, nonzero_crop, pad_to, paste_into, preprocess_case, sample_patch,
    zscore_normalize,
)


def make_case(image, label=None, case_id="c0") -> Case:
    image = np.asarray(image, dtype=np.float32)
    if label is None:
        label = np.zeros((1, 1) + image.shape[2:], dtype=np.float32)
    return Case(id=case_id, image=image, label=np.asarray(label, dtype=np.float32))


def test_zscore_hand_values():
    image = np.array([0.0, 2.0, 4.0, 6.0], dtype=np.float32).reshape(1, 1, 1, 1, 4)
    np.testing.assert_allclose(zscore_normalize(image).ravel(), [-1.3416, -0.4472, 0.4472, 1.3416], atol=1e-4)


def test_zscore_per_channel_and_constant():
    image = np.stack([np.full((2, 2, 2), 5.0), np.arange(8.0).reshape(2, 2, 2)])[None].astype(np.float32)
    out = zscore_normalize(image)

    assert not out[0, 0].any()
    assert out[0, 1].mean() == pytest.approx(0.0, abs=1e-6)
    assert out[0, 1].std() == pytest.approx(1.0, abs=1e-5)
    np.testing.assert_allclose(zscore_normalize(out), out, atol=1e-5)


def test_nonzero_crop_bounding_box():
    image = np.zeros((1, 1, 8, 8, 8), dtype=np.float32)
    image[0, 0, 2:6, 1:4, 0:8] = 1.0
    cropped, warned = nonzero_crop(make_case(image))

    assert not warned
    assert cropped.spatial == (4, 3, 8)
    assert cropped.label.shape[2:] == (4, 3, 8)


def test_nonzero_crop_identity_and_all_zero():
    full = make_case(np.ones((1, 1, 3, 4, 5)))
    assert nonzero_crop(full)[0].spatial == (3, 4, 5)

    empty = make_case(np.zeros((1, 1, 3, 4, 5)))
    same, warned = nonzero_crop(empty)
    assert warned and same is empty


def test_nonzero_crop_is_idempotent():
    rng = np.random.default_rng(5)
    image = np.zeros((1, 2, 6, 7, 8), dtype=np.float32)
    image[0, 0, 1:4, 2:6, 3:5] = rng.standard_normal((3, 4, 2))
    image[0, 1, 2:5, 1:3, 0:2] = 1.0
    once, _ = nonzero_crop(make_case(image))
    twice, warned = nonzero_crop(once)

    assert not warned
    np.testing.assert_array_equal(twice.image, once.image)
    np.testing.assert_array_equal(twice.label, once.label)


def test_paste_into_restores_cropped_volume():
    image = np.zeros((1, 1, 5, 6, 7), dtype=np.float32)
    image[0, 0, 1:3, 2:5, 4:6] = 2.0
    box = nonzero_box(image)

    assert box == (slice(1, 3), slice(2, 5), slice(4, 6))
    cropped = image[(slice(None), slice(None), *box)]
    np.testing.assert_array_equal(paste_into(cropped, box, (5, 6, 7)), image)
    assert nonzero_box(np.zeros((1, 1, 2, 2, 2))) is None


def test_case_shape_validation():
    with pytest.raises(ShapeException):
        Case(id="bad", image=np.zeros((1, 1, 2, 2, 2)), label=np.zeros((1, 1, 2, 2, 3)))


def test_pad_to_symmetric():
    padded = pad_to(make_case(np.ones((1, 1, 3, 4, 4))), (6, 4, 4))
    assert padded.spatial == (6, 4, 4)
    # 차이 3 → 앞 1, 뒤 2
    assert padded.image[0, 0, :, 0, 0].tolist() == [0, 1, 1, 1, 0, 0]


def test_sample_patch_full_extent_returns_case():
    case = make_case(np.random.default_rng(0).standard_normal((1, 1, 4, 6, 6)))
    image, label = sample_patch(case, (4, 6, 6), np.random.default_rng(1))
    np.testing.assert_array_equal(image, case.image)
    assert label.shape == case.label.shape


def test_sample_patch_forced_foreground_contains_voxel():
    label = np.zeros((1, 1, 8, 16, 16), dtype=np.float32)
    label[0, 0, 6, 13, 2] = 1.0
    case = make_case(np.zeros((1, 1, 8, 16, 16)), label)
    rng = np.random.default_rng(3)
    for _ in range(20):
        _, patch_label = sample_patch(case, (4, 8, 8), rng, foreground_prob=1.0)
        assert patch_label.sum() == 1.0


def test_sample_patch_is_seeded():
    case = make_case(np.random.default_rng(0).standard_normal((1, 1, 8, 16, 16)))
    first = [sample_patch(case, (4, 8, 8), np.random.default_rng(9))[0] for _ in range(2)]
    np.testing.assert_array_equal(first[0], first[1])


def test_axial_flip_properties():
    rng = np.random.default_rng(0)
    image = rng.standard_normal((1, 1, 2, 3, 4))
    label = rng.standard_normal((1, 1, 2, 3, 4))

    flipped = image[..., ::-1], label[..., ::-1]
    np.testing.assert_array_equal(flipped[0][..., ::-1], image)

    symmetric = np.concatenate([image, image[..., ::-1]], axis=-1)
    for seed in range(4):
        out, _ = axial_hflip(symmetric, symmetric, np.random.default_rng(seed))
        np.testing.assert_array_equal(out, symmetric)


def test_axial_flip_flips_both_arrays_together():
    image = np.arange(4.0).reshape(1, 1, 1, 1, 4)
    seen = set()
    for seed in range(10):
        out_image, out_label = axial_hflip(image, image.copy(), np.random.default_rng(seed))
        np.testing.assert_array_equal(out_image, out_label)
        seen.add(tuple(out_image.ravel()))
    assert seen == {(0.0, 1.0, 2.0, 3.0), (3.0, 2.0, 1.0, 0.0)}


def test_preprocess_case_crops_then_normalizes():
    image = np.zeros((1, 1, 6, 6, 6), dtype=np.float32)
    image[0, 0, 1:5, 1:5, 1:5] = np.arange(64).reshape(4, 4, 4)
    out = preprocess_case(make_case(image))
    assert out.spatial == (4, 4, 4)
    assert out.image.mean() == pytest.approx(0.0, abs=1e-5)


def test_fold_split_partitions():
    ids = [f"case_{i:03d}" for i in range(12)]
    seen = []
    for fold in range(5):
        train, val = fold_split(ids, fold, 5)
        assert set(train) | set(val) == set(ids)
        assert not set(train) & set(val)
        seen.extend(val)
    assert sorted(seen) == ids
    assert fold_split(list(reversed(ids)), 2, 5) == fold_split(ids, 2, 5)


def test_fold_split_too_small():
    with pytest.raises(DatasetTooSmallException):
        fold_split(["a", "b"], 3, 5)
