"""
슈퍼넷이 사용하는 미분 가능 연산 모음

모든 벡터형 파라미터(bias, gamma, beta)는 (1, c, 1, 1, 1) 형상의 Tensor5로 다룹니다.
"""
from __future__ import annotations

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from autodiff.tensor import Tensor5, make_output
from core.responses import ArgumentException, ShapeException

logger = logging.getLogger(__name__)

ACTIVATIONS: Tuple[str, ...] = ("relu", "leaky_relu", "elu")
POOL_KINDS: Tuple[str, ...] = ("max", "avg")

LEAKY_SLOPE = 0.01
ELU_ALPHA = 1.0
DICE_SMOOTH = 1e-5
NORM_EPS = 1e-5

_INDEX_LIMIT = np.iinfo(np.int32).max
_SPATIAL_AXES = (2, 3, 4)


def _triple(value, label: str) -> Tuple[int, int, int]:
    if isinstance(value, (int, np.integer)):
        return (int(value),) * 3
    items = tuple(int(v) for v in value)
    if len(items) != 3:
        raise ArgumentException(f"{label}는 3개의 값이어야 합니다: {value}")
    return items  # type: ignore[return-value]


def _vector_shape(t: Tensor5, channels: int, label: str) -> None:
    if t.shape != (1, channels, 1, 1, 1):
        raise ShapeException(f"{label} 형상은 (1, {channels}, 1, 1, 1)이어야 합니다: {t.shape}")


# ---------------------------------------------------------------------------
# 합성곱
# ---------------------------------------------------------------------------
def conv3d(
    x: Tensor5,
    kernel: Tensor5,
    bias: Optional[Tensor5] = None,
    dilation: Sequence[int] = (1, 1, 1),
) -> Tensor5:
    """stride 1, same 패딩 3D 합성곱 (커널 공간 크기는 축마다 1 또는 3)"""
    n, c_in, D, H, W = x.shape
    c_out, k_in, kd, kh, kw = kernel.shape
    if k_in != c_in:
        raise ShapeException(f"conv3d 채널 불일치: kernel c_in={k_in}, x.c={c_in}")
    ks = (kd, kh, kw)
    if any(k not in (1, 3) for k in ks):
        raise ArgumentException(f"커널 공간 크기는 1 또는 3이어야 합니다: {ks}")
    dil = _triple(dilation, "dilation")
    if any(d < 1 for d in dil):
        raise ArgumentException(f"dilation은 1 이상이어야 합니다: {dil}")
    pads = tuple(d * (k - 1) // 2 for d, k in zip(dil, ks))
    for p, extent in zip(pads, (D, H, W)):
        if 2 * p + extent > _INDEX_LIMIT:
            raise ArgumentException(f"dilation이 너무 커서 패딩 범위를 표현할 수 없습니다: dilation={dil}")
    if bias is not None:
        _vector_shape(bias, c_out, "bias")

    dtype = x.data.dtype
    # im2col: 오프셋 k개와 입력 채널을 열로 펼쳐 행렬곱 한 번으로 처리
    xp = np.pad(x.data, ((0, 0), (0, 0), (pads[0],) * 2, (pads[1],) * 2, (pads[2],) * 2))
    xp_t = np.ascontiguousarray(xp.transpose(0, 2, 3, 4, 1))
    offsets = [(a, b, c) for a in range(kd) for b in range(kh) for c in range(kw)]
    k = len(offsets)

    def window(arr: np.ndarray, a: int, b: int, c: int) -> np.ndarray:
        return arr[:, a * dil[0]:a * dil[0] + D, b * dil[1]:b * dil[1] + H, c * dil[2]:c * dil[2] + W, :]

    cols = np.empty((n, D, H, W, k, c_in), dtype=dtype)
    for i, (a, b, c) in enumerate(offsets):
        cols[..., i, :] = window(xp_t, a, b, c)
    cols = cols.reshape(n * D * H * W, k * c_in)
    # 행 순서 (a, b, c, c_in)은 offsets 순서와 같음
    w_mat = np.ascontiguousarray(kernel.data.transpose(2, 3, 4, 1, 0).reshape(k * c_in, c_out), dtype=dtype)
    out = (cols @ w_mat).reshape(n, D, H, W, c_out).transpose(0, 4, 1, 2, 3)
    if bias is not None:
        out = out + bias.data
    out = np.ascontiguousarray(out, dtype=dtype)

    def backward(g: np.ndarray):
        g_mat = np.ascontiguousarray(g.transpose(0, 2, 3, 4, 1)).reshape(-1, c_out)
        grad_w = None
        if kernel.requires_grad:
            grad_w = (cols.T @ g_mat).reshape(kd, kh, kw, c_in, c_out).transpose(4, 3, 0, 1, 2)
            grad_w = np.ascontiguousarray(grad_w)
        grad_x = None
        if x.requires_grad:
            grad_cols = (g_mat @ w_mat.T).reshape(n, D, H, W, k, c_in)
            grad_xp_t = np.zeros_like(xp_t)
            for i, (a, b, c) in enumerate(offsets):
                window(grad_xp_t, a, b, c)[...] += grad_cols[..., i, :]
            grad_x = grad_xp_t[:, pads[0]:pads[0] + D, pads[1]:pads[1] + H, pads[2]:pads[2] + W, :]
            grad_x = np.ascontiguousarray(grad_x.transpose(0, 4, 1, 2, 3))
        grad_b = None
        if bias is not None and bias.requires_grad:
            grad_b = g.sum(axis=(0, 2, 3, 4)).reshape(1, c_out, 1, 1, 1)
        return grad_x, grad_w, grad_b

    inputs = (x, kernel) if bias is None else (x, kernel, bias)
    return make_output("conv3d", out, inputs, backward)


# ---------------------------------------------------------------------------
# 풀링
# ---------------------------------------------------------------------------
def pool3d(x: Tensor5, kind: str, stride: Sequence[int]) -> Tensor5:
    """겹치지 않는 풀링 (window = stride, 축마다 1 또는 2)"""
    if kind not in POOL_KINDS:
        raise ArgumentException(f"지원하지 않는 풀링 종류입니다: {kind}")
    s = _triple(stride, "stride")
    if any(v not in (1, 2) for v in s):
        raise ArgumentException(f"stride는 축마다 1 또는 2여야 합니다: {s}")
    n, c, D, H, W = x.shape
    if D < s[0] or H < s[1] or W < s[2]:
        raise ShapeException(f"입력 크기가 stride보다 작습니다: spatial={(D, H, W)} stride={s}")
    if s == (1, 1, 1):
        return make_output("pool3d", x.data.copy(), (x,), lambda g: (g,))

    Do, Ho, Wo = D // s[0], H // s[1], W // s[2]
    k = s[0] * s[1] * s[2]
    cropped = x.data[:, :, :Do * s[0], :Ho * s[1], :Wo * s[2]]
    windows = (
        cropped.reshape(n, c, Do, s[0], Ho, s[1], Wo, s[2])
        .transpose(0, 1, 2, 4, 6, 3, 5, 7)
        .reshape(n, c, Do, Ho, Wo, k)
    )
    if kind == "max":
        # 동률이면 창 내부 행 우선 순서의 첫 복셀
        argmax = windows.argmax(axis=-1)
        out = np.take_along_axis(windows, argmax[..., None], axis=-1)[..., 0]
    else:
        argmax = None
        out = windows.mean(axis=-1)

    def backward(g: np.ndarray):
        if kind == "max":
            gw = np.zeros((n, c, Do, Ho, Wo, k), dtype=g.dtype)
            np.put_along_axis(gw, argmax[..., None], g[..., None], axis=-1)
        else:
            gw = np.broadcast_to(g[..., None] / k, (n, c, Do, Ho, Wo, k))
        g_crop = (
            gw.reshape(n, c, Do, Ho, Wo, s[0], s[1], s[2])
            .transpose(0, 1, 2, 5, 3, 6, 4, 7)
            .reshape(n, c, Do * s[0], Ho * s[1], Wo * s[2])
        )
        grad = np.zeros_like(x.data)
        grad[:, :, :Do * s[0], :Ho * s[1], :Wo * s[2]] = g_crop
        return (grad,)

    return make_output("pool3d", np.ascontiguousarray(out), (x,), backward)


# ---------------------------------------------------------------------------
# 정규화 / 활성화
# ---------------------------------------------------------------------------
def instance_norm(x: Tensor5, gamma: Tensor5, beta: Tensor5, eps: float = NORM_EPS) -> Tensor5:
    """(n, c)마다 공간 전체에 대한 인스턴스 정규화"""
    c = x.shape[1]
    _vector_shape(gamma, c, "gamma")
    _vector_shape(beta, c, "beta")
    count = x.shape[2] * x.shape[3] * x.shape[4]
    mean = x.data.mean(axis=_SPATIAL_AXES, keepdims=True)
    centered = x.data - mean
    var = (centered * centered).mean(axis=_SPATIAL_AXES, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv_std
    out = xhat * gamma.data + beta.data

    def backward(g: np.ndarray):
        grad_x = None
        if x.requires_grad:
            dxhat = g * gamma.data
            grad_x = (inv_std / count) * (
                count * dxhat
                - dxhat.sum(axis=_SPATIAL_AXES, keepdims=True)
                - xhat * (dxhat * xhat).sum(axis=_SPATIAL_AXES, keepdims=True)
            )
        grad_gamma = (g * xhat).sum(axis=(0, 2, 3, 4)).reshape(1, c, 1, 1, 1)
        grad_beta = g.sum(axis=(0, 2, 3, 4)).reshape(1, c, 1, 1, 1)
        return grad_x, grad_gamma, grad_beta

    return make_output("instance_norm", out.astype(x.data.dtype, copy=False), (x, gamma, beta), backward)


def activation(x: Tensor5, kind: str) -> Tensor5:
    """원소별 활성화 (0에서의 미분은 양수 쪽 값)"""
    if kind not in ACTIVATIONS:
        raise ArgumentException(f"지원하지 않는 활성화 함수입니다: {kind}")
    data = x.data
    positive = data >= 0
    if kind == "relu":
        out = np.where(positive, data, 0.0)
        slope = positive.astype(data.dtype)
    elif kind == "leaky_relu":
        out = np.where(positive, data, LEAKY_SLOPE * data)
        slope = np.where(positive, 1.0, LEAKY_SLOPE)
    else:
        negative_part = np.minimum(data, 0.0)
        out = np.where(positive, data, ELU_ALPHA * np.expm1(negative_part))
        slope = np.where(positive, 1.0, ELU_ALPHA * np.exp(negative_part))
    out = out.astype(data.dtype, copy=False)
    slope = slope.astype(data.dtype, copy=False)
    return make_output(kind, out, (x,), lambda g: (g * slope,))


def sigmoid(x: Tensor5) -> Tensor5:
    out = (0.5 * (1.0 + np.tanh(0.5 * x.data))).astype(x.data.dtype, copy=False)
    return make_output("sigmoid", out, (x,), lambda g: (g * out * (1.0 - out),))


# ---------------------------------------------------------------------------
# 크기 변환 / 결합
# ---------------------------------------------------------------------------
def interpolation_matrix(n_in: int, n_out: int, dtype=np.float64) -> np.ndarray:
    """align-corners 선형 보간 행렬 (n_out, n_in)"""
    if n_in < 1 or n_out < 1:
        raise ShapeException(f"보간 크기는 1 이상이어야 합니다: in={n_in} out={n_out}")
    matrix = np.zeros((n_out, n_in), dtype=dtype)
    if n_in == 1:
        matrix[:, 0] = 1.0
        return matrix
    if n_out == 1:
        matrix[0, 0] = 1.0
        return matrix
    pos = np.arange(n_out) * (n_in - 1) / (n_out - 1)
    lo = np.minimum(np.floor(pos).astype(np.int64), n_in - 2)
    frac = pos - lo
    rows = np.arange(n_out)
    matrix[rows, lo] += 1.0 - frac
    matrix[rows, lo + 1] += frac
    return matrix


def _apply_axis(data: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(data, matrix, axes=([axis], [1])), -1, axis)


def resize_trilinear(x: Tensor5, target: Sequence[int]) -> Tensor5:
    """align-corners 삼선형 보간으로 공간 크기 변경"""
    target = _triple(target, "target")
    if any(t < 1 for t in target):
        raise ShapeException(f"목표 크기는 1 이상이어야 합니다: {target}")
    if tuple(target) == x.spatial:
        return make_output("resize_trilinear", x.data.copy(), (x,), lambda g: (g,))

    dtype = x.data.dtype
    plan = []
    for axis, (n_in, n_out) in zip(_SPATIAL_AXES, zip(x.spatial, target)):
        if n_in != n_out:
            plan.append((axis, interpolation_matrix(n_in, n_out, dtype)))
    out = x.data
    for axis, matrix in plan:
        out = _apply_axis(out, matrix, axis)

    def backward(g: np.ndarray):
        grad = g
        for axis, matrix in reversed(plan):
            grad = _apply_axis(grad, matrix.T, axis)
        return (np.ascontiguousarray(grad),)

    return make_output("resize_trilinear", np.ascontiguousarray(out), (x,), backward)


def add(x: Tensor5, y: Tensor5) -> Tensor5:
    if x.shape != y.shape:
        raise ShapeException(f"add 형상 불일치: {x.shape} vs {y.shape}")
    return make_output("add", x.data + y.data, (x, y), lambda g: (g, g))


def mul(x: Tensor5, y: Tensor5) -> Tensor5:
    if x.shape != y.shape:
        raise ShapeException(f"mul 형상 불일치: {x.shape} vs {y.shape}")
    xd, yd = x.data, y.data
    return make_output("mul", xd * yd, (x, y), lambda g: (g * yd, g * xd))


def concat_channels(x: Tensor5, y: Tensor5) -> Tensor5:
    """채널 축 결합 (x 채널이 앞)"""
    if (x.shape[0],) + x.spatial != (y.shape[0],) + y.spatial:
        raise ShapeException(f"concat 형상 불일치: {x.shape} vs {y.shape}")
    cx = x.shape[1]
    out = np.concatenate([x.data, y.data], axis=1)
    return make_output("concat_channels", out, (x, y), lambda g: (g[:, :cx], g[:, cx:]))


def total(x: Tensor5) -> Tensor5:
    """모든 원소의 합 (스칼라 Tensor5)"""
    out = x.data.sum(dtype=x.data.dtype).reshape(1, 1, 1, 1, 1)
    return make_output("sum", out, (x,), lambda g: (np.broadcast_to(g.reshape(()), x.shape).copy(),))


# ---------------------------------------------------------------------------
# 손실
# ---------------------------------------------------------------------------
def dice_loss(pred: Tensor5, target: Tensor5, eps: float = DICE_SMOOTH) -> Tensor5:
    """(n, c) 평균 soft dice 손실, pred는 sigmoid 이후 값"""
    if pred.shape != target.shape:
        raise ShapeException(f"dice_loss 형상 불일치: {pred.shape} vs {target.shape}")
    p, g_t = pred.data, target.data.astype(pred.data.dtype, copy=False)
    n, c = pred.shape[:2]
    intersection = (p * g_t).sum(axis=_SPATIAL_AXES, keepdims=True)
    denom = p.sum(axis=_SPATIAL_AXES, keepdims=True) + g_t.sum(axis=_SPATIAL_AXES, keepdims=True) + eps
    numer = 2.0 * intersection + eps
    per_pair = 1.0 - numer / denom
    loss = per_pair.mean(dtype=p.dtype).reshape(1, 1, 1, 1, 1)

    def backward(g: np.ndarray):
        scale = g.reshape(()) / (n * c)
        grad_p = -scale * (2.0 * g_t * denom - numer) / (denom * denom)
        return grad_p.astype(p.dtype, copy=False), None

    return make_output("dice_loss", loss.astype(p.dtype, copy=False), (pred, target), backward)
