"""
Synthetic angular-slice classification: data, MLP training and the width sweep.
"""
from .adam import Adam
from .dataset import DEFAULT_CLASS_COUNTS, AngularDataset, gen_angular_data, slice_label
from .mlp import (
    MlpParams,
    cross_entropy,
    gradient_check,
    init_params,
    leaky_relu,
    loss_and_grads,
    mlp_backward,
    mlp_forward,
    zero_params,
)
from .sweep import (
    PROFILES,
    SweepProfile,
    compare_group,
    evaluation_grid,
    find_permuted_pairs,
    summarize_width,
    train_seeds,
    unembedding_order,
    width_sweep,
    width_trend_spearman,
)
from .trainer import SUPPORTED_WIDTHS, NormConstraint, TrainConfig, TrainedModel, renormalize_rows, train

__all__ = [
    "Adam",
    "AngularDataset",
    "DEFAULT_CLASS_COUNTS",
    "MlpParams",
    "NormConstraint",
    "PROFILES",
    "SUPPORTED_WIDTHS",
    "SweepProfile",
    "TrainConfig",
    "TrainedModel",
    "compare_group",
    "cross_entropy",
    "evaluation_grid",
    "find_permuted_pairs",
    "gen_angular_data",
    "gradient_check",
    "init_params",
    "leaky_relu",
    "loss_and_grads",
    "mlp_backward",
    "mlp_forward",
    "renormalize_rows",
    "slice_label",
    "summarize_width",
    "train",
    "train_seeds",
    "unembedding_order",
    "width_sweep",
    "width_trend_spearman",
]
