"""Statistics kernel: OLS, unit-root tests, trends and moving volatilities."""

from .ols import RegressionResult, ols
from .timeseries import TrendFit, first_difference, moving_vol_log, moving_vol_signed, time_trend
from .unitroot import Null, TestResult, adf_test, kpss_test, pp_test

__all__ = [
    "Null", "RegressionResult", "TestResult", "TrendFit", "adf_test", "first_difference",
    "kpss_test", "moving_vol_log", "moving_vol_signed", "ols", "pp_test", "time_trend",
]
