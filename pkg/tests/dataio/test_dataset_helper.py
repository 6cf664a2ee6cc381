"""케이스 디렉터리 / 매니페스트 입출력 테스트"""
import json

import numpy as np
import pytest

from core.responses import DataFormatException
from dataio.preprocessing import Case
from dataset_helper import DatasetHelper, lower_median, stats_from_shapes
from schemas import ManifestEntry


def make_case(shape=(2, 4, 4, 4), classes=1, seed=0) -> Case:
    rng = np.random.default_rng(seed)
    image = rng.standard_normal((1,) + shape).astype(np.float32)
    label = (rng.random((1, classes) + shape[1:]) > 0.5).astype(np.float32)
    return Case(id="case_a", image=image, label=label)


def test_case_roundtrip_is_bit_identical(tmp_path):
    helper = DatasetHelper()
    case = make_case(classes=2)
    helper.save_case(case, tmp_path / "case_a")

    loaded = helper.load_case(tmp_path / "case_a")

    assert loaded.id == "case_a"
    assert loaded.image.tobytes() == case.image.tobytes()
    assert loaded.label.tobytes() == case.label.tobytes()


def test_raw_files_are_little_endian_float32(tmp_path):
    case = make_case()
    meta = DatasetHelper().save_case(case, tmp_path / "case_a")

    assert meta.dtype == "f32le"
    raw = (tmp_path / "case_a" / "image.raw").read_bytes()
    assert raw == case.image[0].astype("<f4").tobytes()


def test_raw_size_mismatch_reports_expected_count(tmp_path):
    helper = DatasetHelper()
    helper.save_case(make_case(), tmp_path / "c")
    np.zeros(100, dtype="<f4").tofile(tmp_path / "c" / "image.raw")

    with pytest.raises(DataFormatException) as exc:
        helper.load_case(tmp_path / "c")
    assert "128" in exc.value.message


def test_unknown_dtype_tag(tmp_path):
    helper = DatasetHelper()
    helper.save_case(make_case(), tmp_path / "c")
    meta_path = tmp_path / "c" / "meta.json"
    meta = json.loads(meta_path.read_text())
    meta["dtype"] = "f16be"
    meta_path.write_text(json.dumps(meta))

    with pytest.raises(DataFormatException) as exc:
        helper.load_case(tmp_path / "c")
    assert "f16be" in exc.value.message


def test_missing_file_is_io_error(tmp_path):
    helper = DatasetHelper()
    helper.save_case(make_case(), tmp_path / "c")
    (tmp_path / "c" / "label.raw").unlink()

    with pytest.raises(FileNotFoundError):
        helper.load_case(tmp_path / "c")


def test_lower_median_and_stats():
    assert lower_median([5, 1, 3, 9]) == 3
    stats = stats_from_shapes([[1, 12, 40, 38], [1, 16, 40, 40], [1, 14, 40, 40]], 2)
    assert (stats.median_d, stats.min_d, stats.min_w, stats.out_channels) == (14, 12, 38, 2)


def test_stats_reject_mixed_channels():
    with pytest.raises(DataFormatException):
        stats_from_shapes([[1, 4, 4, 4], [2, 4, 4, 4]], 1)


def test_manifest_and_task_stats(small_dataset):
    helper = DatasetHelper(small_dataset)
    ids = helper.case_ids()

    assert ids == [f"case_{i:03d}" for i in range(5)]
    stats = helper.task_stats()
    assert (stats.median_d, stats.median_h, stats.min_w) == (8, 16, 16)
    assert [c.id for c in helper.load_cases(ids[:2])] == ids[:2]


def test_missing_manifest(tmp_path):
    with pytest.raises(DataFormatException):
        DatasetHelper(tmp_path).read_manifest()


def test_write_manifest_rejects_mixed_label_channels(tmp_path):
    helper = DatasetHelper(tmp_path)
    entries = [
        ManifestEntry(id="a", path="a", shape=[1, 4, 4, 4], label_channels=1),
        ManifestEntry(id="b", path="b", shape=[1, 4, 4, 4], label_channels=2),
    ]
    with pytest.raises(DataFormatException):
        helper.write_manifest(entries)
    assert not (tmp_path / "manifest.json").exists()
