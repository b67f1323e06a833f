"""Padding-free FP8 grouped GEMM simulator."""

from ._core import (
    AlignmentError,
    BoundsError,
    ConfigError,
    DegenerateVariance,
    Error,
    InvalidBlockM,
    InvalidBlockN,
    InvalidInput,
    NoAlignedSolution,
    ResOutOfRange,
    ShapeMismatch,
    account,
    build_pool,
    correlation_matrix,
    dequant,
    e4m3_decode,
    e4m3_encode,
    generate_group_sizes,
    plan_prefetch,
    plan_two_phase,
    quantize_a,
    quantize_b,
    select_descriptor,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
