"""
표준 그래디언트 검사 묶음

각 연산과 슈퍼넷 순전파 전체를 작은 무작위 텐서(최대 (1, 2, 4, 6, 6))에서
배정밀도 중앙 차분과 비교합니다.
"""
import logging
from typing import Callable, Dict, List, Tuple

import numpy as np

from autodiff.gradcheck import GradCheckReport, grad_check, scalarize
from autodiff.ops import (
    activation, conv3d, dice_loss, instance_norm, pool3d, resize_trilinear, sigmoid,
)
from autodiff.tensor import Tensor5, high_precision
from nas.searchspace import SKIP_EDGES
from nas.supernet import ArchRealization, SupernetConfig, SupernetWeights, build, forward, matching_op

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-4
CheckCase = Tuple[str, Callable[[Dict[str, Tensor5]], Tensor5], Dict[str, np.ndarray], int]


def _tiny_realization() -> ArchRealization:
    return ArchRealization(
        patch=(4, 4, 4),
        strides=((2, 2, 2), (1, 1, 1), (1, 1, 1), (1, 1, 1)),
        dilations=(1, 2, 1, 1),
        pool_kind="avg",
        activation="elu",
        active_edges=frozenset(SKIP_EDGES),
    )


def _weights_fn(template: SupernetWeights, fn):
    """입력 dict에 있는 파라미터는 입력 텐서로, 나머지는 template 값으로 슈퍼넷 구성"""
    def run(t: Dict[str, Tensor5]) -> Tensor5:
        weights = SupernetWeights(template.config, {k: t.get(k, v) for k, v in template.params.items()})
        return fn(weights, t)
    return run


def _away_from_zero(values: np.ndarray, margin: float = 0.1) -> np.ndarray:
    """꺾이는 점(0) 근처 값을 피함"""
    return np.sign(values) * (np.abs(values) + margin)


def standard_cases(seed: int = 0) -> List[CheckCase]:
    rng = np.random.default_rng(seed)

    def r(*shape: int, scale: float = 1.0) -> np.ndarray:
        return rng.standard_normal(shape) * scale

    cases: List[CheckCase] = []
    for dil in (1, 2, 3):
        cases.append((
            f"conv3d_k3_d{dil}",
            lambda t, dil=dil: scalarize(conv3d(t["x"], t["w"], t["b"], (dil,) * 3)),
            {"x": r(1, 2, 4, 6, 6), "w": r(3, 2, 3, 3, 3, scale=0.3), "b": r(1, 3, 1, 1, 1)},
            0,
        ))
    cases.append((
        "conv3d_k1",
        lambda t: scalarize(conv3d(t["x"], t["w"], t["b"])),
        {"x": r(1, 2, 4, 6, 6), "w": r(3, 2, 1, 1, 1), "b": r(1, 3, 1, 1, 1)},
        0,
    ))
    for kind in ("max", "avg"):
        cases.append((
            f"pool3d_{kind}",
            lambda t, kind=kind: scalarize(pool3d(t["x"], kind, (2, 2, 2))),
            {"x": r(1, 2, 4, 6, 6)},
            0,
        ))
    cases.append((
        "pool3d_anisotropic",
        lambda t: scalarize(pool3d(t["x"], "max", (1, 2, 2))),
        {"x": r(1, 2, 4, 6, 6)},
        0,
    ))
    cases.append((
        "instance_norm",
        lambda t: scalarize(instance_norm(t["x"], t["g"], t["b"])),
        {"x": r(1, 2, 4, 6, 6), "g": r(1, 2, 1, 1, 1), "b": r(1, 2, 1, 1, 1)},
        0,
    ))
    for kind in ("relu", "leaky_relu", "elu"):
        cases.append((
            f"activation_{kind}",
            lambda t, kind=kind: scalarize(activation(t["x"], kind)),
            {"x": _away_from_zero(r(1, 2, 4, 6, 6))},
            0,
        ))
    cases.append((
        "resize_trilinear_up",
        lambda t: scalarize(resize_trilinear(t["x"], (4, 6, 6))),
        {"x": r(1, 2, 2, 3, 3)},
        0,
    ))
    cases.append((
        "resize_trilinear_down",
        lambda t: scalarize(resize_trilinear(t["x"], (2, 3, 4))),
        {"x": r(1, 2, 4, 6, 6)},
        0,
    ))
    target = (r(1, 2, 4, 6, 6) > 0).astype(np.float64)
    cases.append((
        "dice_loss",
        lambda t: dice_loss(sigmoid(t["x"]), Tensor5(target.astype(t["x"].data.dtype))),
        {"x": r(1, 2, 4, 6, 6)},
        0,
    ))

    with high_precision():
        config = SupernetConfig(base_channels=2, in_channels=2, out_channels=1)
        template = build(config, seed=seed)
    realization = _tiny_realization()
    params = {k: v.data for k, v in template.params.items()}

    skip = (1, 3)
    cases.append((
        "matching_op",
        _weights_fn(template, lambda w, t: scalarize(
            matching_op(w, skip, t["feature"], config.width(skip[1] + 1), (2, 3, 3)))),
        {
            f"skip_{skip[0]}_{skip[1]}.weight": params[f"skip_{skip[0]}_{skip[1]}.weight"],
            f"skip_{skip[0]}_{skip[1]}.bias": params[f"skip_{skip[0]}_{skip[1]}.bias"],
            "feature": r(1, config.width(skip[0]), 4, 6, 6),
        },
        0,
    ))
    cases.append((
        "supernet_forward",
        _weights_fn(template, lambda w, t: scalarize(forward(w, realization, t["x"]))),
        {**params, "x": r(1, 2, 4, 4, 4)},
        4,
    ))
    return cases


def run_standard_suite(tolerance: float = DEFAULT_TOLERANCE, seed: int = 0) -> List[GradCheckReport]:
    reports = []
    for name, fn, inputs, limit in standard_cases(seed):
        report = grad_check(fn, inputs, tolerance=tolerance, name=name, max_checks_per_input=limit or None, seed=seed)
        logger.info("gradcheck case=%s max_error=%.3e passed=%s", name, report.max_error, report.passed)
        reports.append(report)
    return reports
