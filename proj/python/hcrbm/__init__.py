"""Classification RBM with a hierarchical prior over class labels."""

from hcrbm._core import (
    Dataset,
    Model,
    Tree,
    TrainConfig,
    balanced_sample,
    balanced_sample_total,
    compose_u,
    evaluate,
    gradcheck,
    load_idx_files,
    load_model,
    load_table,
    load_table_file,
    orthogonal_penalty,
    rare_class_sample,
    save_table,
    train,
)

__all__ = [
    "Dataset",
    "Model",
    "Tree",
    "TrainConfig",
    "balanced_sample",
    "balanced_sample_total",
    "compose_u",
    "evaluate",
    "gradcheck",
    "load_idx_files",
    "load_model",
    "load_table",
    "load_table_file",
    "orthogonal_penalty",
    "rare_class_sample",
    "save_table",
    "train",
]
