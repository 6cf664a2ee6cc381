"""역방향 자동 미분 (5축 텐서 전용)"""
from .tensor import Tensor5, Tape, high_precision, no_grad, default_dtype
from .ops import (
    ACTIVATIONS, POOL_KINDS,
    conv3d, pool3d, instance_norm, activation, resize_trilinear,
    add, mul, concat_channels, sigmoid, total, dice_loss,
)
from .optim import AdamState, adam_step
from .gradcheck import GradCheckReport, grad_check, scalarize

__all__ = [
    'Tensor5', 'Tape', 'high_precision', 'no_grad', 'default_dtype',
    'ACTIVATIONS', 'POOL_KINDS',
    'conv3d', 'pool3d', 'instance_norm', 'activation', 'resize_trilinear',
    'add', 'mul', 'concat_channels', 'sigmoid', 'total', 'dice_loss',
    'AdamState', 'adam_step',
    'GradCheckReport', 'grad_check', 'scalarize',
]
