"""Hyperdimensional glue for combining pretrained classifiers."""

from ._hdglue import (
    EmbeddingDataset,
    ErrorFleet,
    GlueModel,
    HdglueError,
    HilModel,
    Hypervector,
    OnlineSession,
    __version__,
    bind,
    evaluate_glue,
    evaluate_hil,
    gen_synthetic,
    hamming,
    load_dataset,
    load_model,
    make_specialist_data,
    model_kind,
    parse_model,
    random_hypervector,
    save_dataset,
    similarity,
    staged_schedule,
)

__all__ = [
    "EmbeddingDataset",
    "ErrorFleet",
    "GlueModel",
    "HdglueError",
    "HilModel",
    "Hypervector",
    "OnlineSession",
    "__version__",
    "bind",
    "evaluate_glue",
    "evaluate_hil",
    "gen_synthetic",
    "hamming",
    "load_dataset",
    "load_model",
    "make_specialist_data",
    "model_kind",
    "parse_model",
    "random_hypervector",
    "save_dataset",
    "similarity",
    "staged_schedule",
]
