"""Set classification by matching input sets against trainable hidden sets."""

from ._repset import (
    Assignment,
    Checkpoint,
    DataError,
    Dataset,
    EvalResult,
    MatchMode,
    Model,
    NumericError,
    TrainConfig,
    TrainResult,
    brute_force_oracle,
    evaluate,
    layer_forward,
    load_checkpoint,
    load_set_file,
    save_checkpoint,
    score_matrix,
    solve_exact,
    solve_relaxed,
    synthetic_bench,
    synthetic_toy,
    train,
    write_set_file,
)

__all__ = [name for name in dir() if not name.startswith("_")]
