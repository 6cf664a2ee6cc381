"""
중앙 차분 기반 그래디언트 검사

배정밀도 모드에서 해석적 그래디언트와 수치 그래디언트를 비교합니다.
상대 오차는 입력별 최대 절대 오차를 두 그래디언트의 최대 크기로 나눈 값입니다.
분모에는 손실 크기에 비례하는 하한(ATOL_SCALE * max(1, |loss|))을 두어
참값이 0인 그래디언트(instance_norm 앞 conv bias 등)의 반올림 잡음이 실패로 잡히지 않게 합니다.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from autodiff.ops import mul, total
from autodiff.tensor import Tape, Tensor5, high_precision, no_grad

logger = logging.getLogger(__name__)

ScalarFn = Callable[[Dict[str, Tensor5]], Tensor5]

ATOL_SCALE = 1e-5


@dataclass
class GradCheckReport:
    """입력별 최대 상대 오차"""
    name: str
    tolerance: float
    errors: Dict[str, float] = field(default_factory=dict)
    checked: Dict[str, int] = field(default_factory=dict)

    @property
    def max_error(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def passed(self) -> bool:
        return all(np.isfinite(e) and e < self.tolerance for e in self.errors.values())

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "max_error": self.max_error,
            "errors": dict(self.errors),
            "checked": dict(self.checked),
        }


def scalarize(out: Tensor5, seed: int = 0) -> Tensor5:
    """고정 난수 가중합으로 임의 출력을 스칼라로 투영"""
    weights = np.random.default_rng(seed).uniform(0.5, 1.5, size=out.shape)
    return total(mul(out, Tensor5(weights.astype(out.data.dtype))))


def _relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float) -> float:
    scale = max(float(np.abs(analytic).max(initial=0.0)), float(np.abs(numeric).max(initial=0.0)), floor)
    return float(np.abs(analytic - numeric).max(initial=0.0)) / scale


def grad_check(
    fn: ScalarFn,
    inputs: Mapping[str, np.ndarray],
    tolerance: float = 1e-4,
    step: float = 1e-4,
    name: str = "op",
    max_checks_per_input: Optional[int] = None,
    seed: int = 0,
) -> GradCheckReport:
    """fn(텐서 dict) -> 스칼라 Tensor5 의 그래디언트를 입력별로 검사"""
    report = GradCheckReport(name=name, tolerance=tolerance)
    with high_precision():
        tensors = {k: Tensor5.from_array(v, requires_grad=True, name=k) for k, v in inputs.items()}

        with Tape() as tape:
            loss = fn(tensors)
        tape.backward(loss)
        atol = ATOL_SCALE * max(1.0, abs(loss.item()))
        analytic = {
            k: (t.grad.copy() if t.grad is not None else np.zeros_like(t.data)) for k, t in tensors.items()
        }

        rng = np.random.default_rng(seed)
        for key, tensor in tensors.items():
            flat = tensor.data.reshape(-1)
            indices = np.arange(flat.size)
            if max_checks_per_input is not None and flat.size > max_checks_per_input:
                indices = np.sort(rng.choice(flat.size, size=max_checks_per_input, replace=False))
            numeric = np.zeros(indices.size, dtype=np.float64)
            with no_grad():
                for j, idx in enumerate(indices):
                    original = flat[idx]
                    flat[idx] = original + step
                    plus = fn(tensors).item()
                    flat[idx] = original - step
                    minus = fn(tensors).item()
                    flat[idx] = original
                    numeric[j] = (plus - minus) / (2.0 * step)
            expected = analytic[key].reshape(-1)[indices]
            report.errors[key] = _relative_error(expected, numeric, atol)
            report.checked[key] = int(indices.size)

    logger.debug("gradcheck name=%s max_error=%.3e passed=%s", name, report.max_error, report.passed)
    return report

