"""Weighted deep-network kernels: minimum-norm interpolation and
TV-regularized learning over discrete parameter measures."""

from rkbsnet._core import (
    CandidateSet,
    NetworkSpec,
    feature_matrix,
    forward,
    grad_check,
    grad_params,
    kernel_eval,
    lambda_path,
    merge,
    param_dim,
    refine,
    rho,
    run_pipeline,
    sample_grid,
    sample_random,
    solve_mni,
    solve_regularized,
    train_expansion,
)

__all__ = [
    "CandidateSet",
    "NetworkSpec",
    "feature_matrix",
    "forward",
    "grad_check",
    "grad_params",
    "kernel_eval",
    "lambda_path",
    "merge",
    "param_dim",
    "refine",
    "rho",
    "run_pipeline",
    "sample_grid",
    "sample_random",
    "solve_mni",
    "solve_regularized",
    "train_expansion",
]
