"""볼륨 전처리, 패치 샘플링, 합성 데이터 생성"""
from .preprocessing import (
    Case, axial_hflip, fold_split, nonzero_crop, pad_to, preprocess_case, sample_patch, zscore_normalize,
)

__all__ = [
    'Case', 'axial_hflip', 'fold_split', 'nonzero_crop', 'pad_to', 'preprocess_case', 'sample_patch',
    'zscore_normalize',
]
