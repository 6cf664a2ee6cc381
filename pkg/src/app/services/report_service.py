"""
에피소드 로그 기록 (JSON-lines + CSV) 및 수렴도 계산
"""
import csv
import json
import logging
from collections import Counter
from pathlib import Path
from typing import Iterable, List, Sequence

from core.responses import ArgumentException
from schemas import EpisodeLog

logger = logging.getLogger(__name__)

LOG_FILE = "episodes.jsonl"
CSV_FILE = "episodes.csv"
CSV_COLUMNS = ("episode", "mean_reward", "max_reward", "entropy")


def convergence_report(logs: Sequence[EpisodeLog], window: int) -> float:
    """마지막 window 에피소드에서 가장 많이 나온 greedy 아키텍처의 비율"""
    if window < 1 or window > len(logs):
        raise ArgumentException(f"window({window})는 1 이상, 로그 수({len(logs)}) 이하여야 합니다")
    counts = Counter(tuple(log.greedy) for log in logs[-window:])
    return counts.most_common(1)[0][1] / window


class EpisodeReporter:
    """out 디렉터리에 에피소드 로그를 한 줄씩 추가"""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.log_path = self.out_dir / LOG_FILE
        self.csv_path = self.out_dir / CSV_FILE

    def reset(self, logs: Iterable[EpisodeLog] = ()) -> None:
        """파일을 새로 만들고 기존 로그(재개 시)를 다시 기록"""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.log_path.write_text("", encoding="utf-8")
        with self.csv_path.open("w", newline="", encoding="utf-8") as f:
            csv.writer(f).writerow(CSV_COLUMNS)
        for log in logs:
            self.write(log)

    def write(self, log: EpisodeLog) -> None:
        with self.log_path.open("a", encoding="utf-8") as f:
            f.write(json.dumps(log.model_dump(), sort_keys=True) + "\n")
        with self.csv_path.open("a", newline="", encoding="utf-8") as f:
            csv.writer(f).writerow([log.episode, f"{log.mean_reward:.6f}", f"{log.max_reward:.6f}", f"{log.entropy:.6f}"])

    def read(self) -> List[EpisodeLog]:
        if not self.log_path.exists():
            return []
        lines = self.log_path.read_text(encoding="utf-8").splitlines()
        return [EpisodeLog.model_validate_json(line) for line in lines if line.strip()]
