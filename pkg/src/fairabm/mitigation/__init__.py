from .expgrad import (
    ConstraintMoment,
    EgEnsemble,
    IncrementalEg,
    MomentKind,
    constraint_violation,
    eg_fit,
    eg_fit_incremental,
)
from .reweigh import (
    DegenerateCellError,
    EmaReweigherState,
    WeightTable,
    ema_reweigh_update,
    kamiran_calders_weights,
    manual_weights,
)

__all__ = [
    "ConstraintMoment",
    "DegenerateCellError",
    "EgEnsemble",
    "EmaReweigherState",
    "IncrementalEg",
    "MomentKind",
    "WeightTable",
    "constraint_violation",
    "eg_fit",
    "eg_fit_incremental",
    "ema_reweigh_update",
    "kamiran_calders_weights",
    "manual_weights",
]
