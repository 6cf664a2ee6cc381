"""
5축 텐서와 역전파 테이프

Tensor5는 (n, c, d, h, w) 순서의 numpy 배열을 감싼 값 객체입니다.
연산은 활성화된 Tape가 있을 때만 기록되며, Tape는 ContextVar로 관리되므로
스레드마다 독립적으로 사용할 수 있습니다.
"""
from __future__ import annotations

import contextvars
import itertools
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core.responses import ArgumentException, ShapeException

logger = logging.getLogger(__name__)

# 학습은 단정밀도, 그래디언트 검사는 배정밀도
FAST_DTYPE = np.float32
PRECISE_DTYPE = np.float64

_default_dtype: contextvars.ContextVar = contextvars.ContextVar("autodiff_dtype", default=FAST_DTYPE)
_active_tape: contextvars.ContextVar = contextvars.ContextVar("autodiff_tape", default=None)
_ids = itertools.count()


def default_dtype():
    """현재 수치 모드의 dtype"""
    return _default_dtype.get()


@contextmanager
def high_precision() -> Iterator[None]:
    """배정밀도 모드 (그래디언트 검사용)"""
    token = _default_dtype.set(PRECISE_DTYPE)
    try:
        yield
    finally:
        _default_dtype.reset(token)


class Tensor5:
    """역전파 테이프에 참여하는 5축 실수 배열"""

    __slots__ = ("data", "requires_grad", "grad", "name", "id")

    def __init__(self, data: np.ndarray, requires_grad: bool = False, name: Optional[str] = None):
        array = np.asarray(data)
        if array.ndim != 5:
            raise ShapeException(f"Tensor5는 5축이어야 합니다: shape={array.shape}")
        if not np.issubdtype(array.dtype, np.floating):
            array = array.astype(default_dtype())
        self.data = array
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self.id = next(_ids)

    @classmethod
    def from_array(cls, data, requires_grad: bool = False, name: Optional[str] = None) -> "Tensor5":
        """현재 수치 모드 dtype으로 복사하여 생성"""
        return cls(np.array(data, dtype=default_dtype()), requires_grad=requires_grad, name=name)

    @classmethod
    def zeros(cls, shape: Sequence[int], requires_grad: bool = False) -> "Tensor5":
        return cls(np.zeros(tuple(shape), dtype=default_dtype()), requires_grad=requires_grad)

    @property
    def shape(self) -> Tuple[int, int, int, int, int]:
        return tuple(self.data.shape)  # type: ignore[return-value]

    @property
    def spatial(self) -> Tuple[int, int, int]:
        return tuple(self.data.shape[2:])  # type: ignore[return-value]

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeException(f"스칼라가 아닌 텐서입니다: shape={self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, g: np.ndarray) -> None:
        if g.shape != self.data.shape:
            raise ShapeException(f"그래디언트 형상 불일치: grad={g.shape} data={self.data.shape}")
        if self.grad is None:
            self.grad = np.array(g, dtype=self.data.dtype, copy=True)
        else:
            self.grad += g

    def __repr__(self) -> str:
        label = f" name={self.name}" if self.name else ""
        return f"Tensor5(shape={self.shape}{label} requires_grad={self.requires_grad})"


BackwardRule = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass
class TapeNode:
    """기록된 연산 한 개"""
    op: str
    inputs: Tuple[Tensor5, ...]
    output: Tensor5
    backward: BackwardRule


class Tape:
    """역방향 자동 미분 테이프

    노드는 생성 순서(위상 순서)로 쌓이며 backward()는 역순으로 정확히 한 번씩 방문합니다.
    """

    def __init__(self) -> None:
        self.nodes: List[TapeNode] = []
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        _active_tape.reset(self._token)
        self._token = None
        return False

    def record(self, op: str, inputs: Sequence[Tensor5], output: Tensor5, backward: BackwardRule) -> None:
        self.nodes.append(TapeNode(op=op, inputs=tuple(inputs), output=output, backward=backward))

    def backward(self, loss: Tensor5) -> None:
        """스칼라 손실에서 그래디언트를 전파"""
        if loss.size != 1:
            raise ArgumentException(f"backward는 스칼라 출력에서만 호출할 수 있습니다: shape={loss.shape}")
        if not loss.requires_grad:
            raise ArgumentException("손실이 테이프에 기록되지 않았습니다")

        loss.grad = np.ones_like(loss.data)
        for node in reversed(self.nodes):
            upstream = node.output.grad
            if upstream is None:
                continue
            grads = node.backward(upstream)
            for tensor, g in zip(node.inputs, grads):
                if g is None or not tensor.requires_grad:
                    continue
                tensor.accumulate_grad(g)
            # 중간 결과 그래디언트는 더 이상 필요 없음
            if node.output is not loss:
                node.output.grad = None
        self.nodes.clear()


def active_tape() -> Optional[Tape]:
    return _active_tape.get()


@contextmanager
def no_grad() -> Iterator[None]:
    """테이프 기록 중지 (평가/추론용)"""
    token = _active_tape.set(None)
    try:
        yield
    finally:
        _active_tape.reset(token)


def make_output(op: str, data: np.ndarray, inputs: Sequence[Tensor5], backward: BackwardRule) -> Tensor5:
    """연산 결과 텐서를 만들고 필요하면 테이프에 기록"""
    tape = _active_tape.get()
    track = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor5(data, requires_grad=track)
    if track:
        tape.record(op, inputs, out, backward)
    return out
