from .gbt import GbtModel, GbtParams, gbt_append, gbt_fit
from .hoeffding import HoeffdingParams, HoeffdingTree, hoeffding_learn_one, hoeffding_predict
from .isotonic import CalibrationBuffer, IsotonicCalibrator, isotonic_fit, online_calibration_cycle
from .scaler import BatchScaler, StreamingScaler, scaler_fit_transform, scaler_update
from .search import SearchSpec, random_search, sample_candidates, time_split

__all__ = [
    "BatchScaler",
    "CalibrationBuffer",
    "GbtModel",
    "GbtParams",
    "HoeffdingParams",
    "HoeffdingTree",
    "IsotonicCalibrator",
    "SearchSpec",
    "StreamingScaler",
    "gbt_append",
    "gbt_fit",
    "hoeffding_learn_one",
    "hoeffding_predict",
    "isotonic_fit",
    "online_calibration_cycle",
    "random_search",
    "sample_candidates",
    "scaler_fit_transform",
    "scaler_update",
    "time_split",
]
