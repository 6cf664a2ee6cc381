"""명령행 진입점 테스트 (종료 코드 / 출력 JSON)"""
import json
from dataclasses import replace

import pytest

from dataset_helper import DatasetHelper
from main import main


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    payload = json.loads(captured.out) if code == 0 else json.loads(captured.err.strip().splitlines()[-1])
    return code, payload


def write_config(path, **values):
    path.write_text(json.dumps(values), encoding="utf-8")
    return path


def tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture
def dice_run(capsys, small_dataset, tmp_path):
    """작은 합성 데이터셋에서 dice 모드 search를 한 번 실행"""
    config = write_config(
        tmp_path / "dice.json",
        episodes=1, rollouts_per_episode=2, child_epochs_per_episode=1, batch_size=2, base_channels=2,
    )
    out = tmp_path / "dice_run"
    code, payload = run_cli(capsys, "search", "--config", config, "--data", small_dataset, "--out", out, "--seed", 4)
    assert code == 0
    return payload["data"]


def test_no_command_is_usage_error(capsys):
    assert main([]) == 1


def test_unknown_flag_is_usage_error(capsys):
    assert main(["synth", "--bogus"]) == 1


def test_search_without_data_is_usage_error(capsys, tmp_path):
    code, payload = run_cli(capsys, "search", "--out", tmp_path)
    assert code == 1
    assert payload["error_code"] == "USAGE_ERROR"
    assert "usage" in payload["message"]


def test_synth_is_deterministic(capsys, tmp_path):
    args = ("--cases", 3, "--depth-range", 6, 8, "--hw-range", 12, 16, "--seed", 11)
    code_a, payload = run_cli(capsys, "synth", "--out", tmp_path / "a", *args)
    code_b, _ = run_cli(capsys, "synth", "--out", tmp_path / "b", *args)

    assert code_a == code_b == 0
    assert payload["data"]["cases"] == 3
    assert tree(tmp_path / "a") == tree(tmp_path / "b")


def test_synth_rejects_invalid_range(capsys, tmp_path):
    code, payload = run_cli(capsys, "synth", "--out", tmp_path, "--depth-range", 9, 3)
    assert code == 2
    assert payload["error_code"] == "CONFIG_ERROR"


def test_inspect_space_heart_preset(capsys):
    code, payload = run_cli(capsys, "inspect-space", "--preset", "heart")
    assert code == 0
    data = payload["data"]
    decisions = {d["name"]: d["choices"] for d in data["schema"]["decisions"]}
    assert decisions["patch_hw"] == [320, 304, 288, 272, 256]
    assert decisions["patch_d"] == [96, 80, 64, 48, 32]
    assert data["architecture_count"] == 4147200
    assert data["matching_preset"] == "heart"


def test_inspect_space_needs_source(capsys):
    assert main(["inspect-space"]) == 1


def test_invalid_config_file_exits_2(capsys, tmp_path):
    config = write_config(tmp_path / "bad.json", reward_mode="surrogate", task_preset="synthetic", episodes=-1)
    code, payload = run_cli(capsys, "search", "--config", config, "--out", tmp_path / "out")
    assert code == 2
    assert payload["error_code"] == "CONFIG_ERROR"


def test_unparseable_config_file_exits_2(capsys, tmp_path):
    config = tmp_path / "broken.json"
    config.write_text("{not json", encoding="utf-8")
    code, _ = run_cli(capsys, "search", "--config", config, "--reward-mode", "surrogate",
                      "--preset", "synthetic", "--out", tmp_path / "out")
    assert code == 2


def test_surrogate_search_and_resume(capsys, tmp_path):
    config = write_config(tmp_path / "s.json", base_channels=2, rollouts_per_episode=4)
    common = ("--config", config, "--reward-mode", "surrogate", "--preset", "synthetic", "--seed", 3)

    code, full = run_cli(capsys, "search", *common, "--episodes", 4, "--out", tmp_path / "full")
    assert code == 0
    assert full["data"]["episodes"] == 5
    assert (tmp_path / "full" / "episodes.jsonl").exists()
    assert (tmp_path / "full" / "episodes.csv").exists()

    run_cli(capsys, "search", *common, "--episodes", 2, "--out", tmp_path / "part")
    code, resumed = run_cli(
        capsys, "search", "--resume", tmp_path / "part" / "search.ckpt.npz", "--episodes", 4,
        "--out", tmp_path / "resumed",
    )
    assert code == 0
    assert resumed["data"]["greedy"] == full["data"]["greedy"]

    def episodes(root):
        lines = (root / "episodes.jsonl").read_text(encoding="utf-8").splitlines()
        return [{k: v for k, v in json.loads(line).items() if k != "duration_sec"} for line in lines]

    assert episodes(tmp_path / "resumed") == episodes(tmp_path / "full")


def test_missing_checkpoint_exits_2(capsys, tmp_path):
    code, payload = run_cli(capsys, "eval", "--checkpoint", tmp_path / "missing.ckpt.npz")
    assert code == 2
    assert payload["error_code"] == "CHECKPOINT_NOT_FOUND"


def test_eval_reports_validation_fold(capsys, dice_run):
    code, payload = run_cli(capsys, "eval", "--checkpoint", dice_run["checkpoint"])
    assert code == 0
    report = payload["data"]
    assert report["greedy"] == dice_run["greedy"]
    assert report["cases"]
    assert all(0.0 <= c["dice"] <= 1.0 for c in report["cases"])
    assert report["mean_dice"] == pytest.approx(sum(c["dice"] for c in report["cases"]) / len(report["cases"]))


def test_infer_writes_mask_case(capsys, small_dataset, dice_run, tmp_path):
    out = tmp_path / "pred"
    code, payload = run_cli(
        capsys, "infer", "--checkpoint", dice_run["checkpoint"], "--case", small_dataset / "case_000", "--out", out,
    )
    assert code == 0
    assert payload["data"]["case"] == "case_000"
    assert 0.0 <= payload["data"]["dice_vs_label"] <= 1.0
    assert (out / "meta.json").exists()


def test_infer_crops_then_restores_full_grid(capsys, small_dataset, dice_run, tmp_path):
    """0 테두리는 잘라낸 뒤 추론하고 예측 마스크는 원래 크기로 복원되어 테두리가 0"""
    helper = DatasetHelper()
    case = helper.load_case(small_dataset / "case_000")
    image = case.image.copy()
    image[..., -1, :, :] = 0.0
    image[..., :3] = 0.0
    helper.save_case(replace(case, image=image), tmp_path / "bordered")

    out = tmp_path / "pred"
    code, _ = run_cli(
        capsys, "infer", "--checkpoint", dice_run["checkpoint"], "--case", tmp_path / "bordered", "--out", out,
    )
    assert code == 0
    mask = helper.load_case(out).label
    assert mask.shape[2:] == case.spatial
    assert not mask[..., -1, :, :].any()
    assert not mask[..., :3].any()


@pytest.mark.slow
def test_gradcheck_passes(capsys):
    code, payload = run_cli(capsys, "gradcheck", "--seed", 1)
    assert code == 0
    assert all(case["passed"] for case in payload["data"]["cases"])
