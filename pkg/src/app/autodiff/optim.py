"""
Adam 옵티마이저 (분리형 weight decay)

자식 네트워크와 컨트롤러가 같은 구현을 사용합니다.
이번 스텝에 그래디언트가 없는 파라미터는 건드리지 않으므로
비활성 경로의 공유 가중치는 바이트 단위로 보존됩니다.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

import numpy as np

from core.responses import ArgumentException, ShapeException

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """파라미터별 1차/2차 모멘트와 스텝 카운터"""
    lr: float = 1e-3
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    # 편향 보정용 파라미터별 갱신 횟수
    param_steps: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ArgumentException(f"학습률은 양수여야 합니다: lr={self.lr}")
        if self.weight_decay < 0:
            raise ArgumentException(f"weight_decay는 0 이상이어야 합니다: {self.weight_decay}")

    def to_arrays(self, prefix: str) -> Dict[str, np.ndarray]:
        """체크포인트 저장용 평탄화"""
        arrays: Dict[str, np.ndarray] = {}
        for name in sorted(self.m):
            arrays[f"{prefix}.m.{name}"] = self.m[name]
            arrays[f"{prefix}.v.{name}"] = self.v[name]
        return arrays

    def meta(self) -> Dict[str, object]:
        return {
            "lr": self.lr,
            "weight_decay": self.weight_decay,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "t": self.t,
            "param_steps": dict(sorted(self.param_steps.items())),
        }

    @classmethod
    def restore(cls, meta: Mapping[str, object], arrays: Mapping[str, np.ndarray], prefix: str) -> "AdamState":
        state = cls(
            lr=float(meta["lr"]),
            weight_decay=float(meta["weight_decay"]),
            beta1=float(meta["beta1"]),
            beta2=float(meta["beta2"]),
            eps=float(meta["eps"]),
            t=int(meta["t"]),
        )
        state.param_steps = {str(k): int(v) for k, v in dict(meta["param_steps"]).items()}
        for name in state.param_steps:
            state.m[name] = np.array(arrays[f"{prefix}.m.{name}"], copy=True)
            state.v[name] = np.array(arrays[f"{prefix}.v.{name}"], copy=True)
        return state


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, Optional[np.ndarray]],
    state: AdamState,
) -> int:
    """그래디언트가 있는 파라미터만 제자리 갱신, 갱신된 파라미터 수 반환"""
    state.t += 1
    updated = 0
    for name in sorted(grads):
        g = grads[name]
        if g is None:
            continue
        p = params[name]
        if g.shape != p.shape:
            raise ShapeException(f"그래디언트 형상 불일치: {name} grad={g.shape} param={p.shape}")
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
            state.param_steps[name] = 0
        state.param_steps[name] += 1
        k = state.param_steps[name]
        m, v = state.m[name], state.v[name]

        if state.weight_decay:
            p *= 1.0 - state.lr * state.weight_decay
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        m_hat = m / (1.0 - state.beta1 ** k)
        v_hat = v / (1.0 - state.beta2 ** k)
        p -= (state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(p.dtype, copy=False)
        updated += 1
    return updated
