"""Tensor-core cost simulator: tiled products, blocked JL transforms and similarity joins."""

from ._core import (
    CostLedger,
    JlTransform,
    TcuConfig,
    bench_jl,
    bench_join,
    brute_force_join,
    build_schedule,
    exact_distance,
    generate_planted,
    jl_apply,
    lsh_join,
    multiply,
    sample_transform,
    target_dim,
    tile_count,
)

__all__ = [
    "CostLedger",
    "JlTransform",
    "TcuConfig",
    "bench_jl",
    "bench_join",
    "brute_force_join",
    "build_schedule",
    "exact_distance",
    "generate_planted",
    "jl_apply",
    "lsh_join",
    "multiply",
    "sample_transform",
    "target_dim",
    "tile_count",
]
