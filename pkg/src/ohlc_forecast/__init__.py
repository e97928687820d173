"""Constraint-safe forecasting toolkit for OHLC candlestick series."""

__version__ = "0.1.0"

from .bars import (
    BoundaryBarError,
    InvalidBarError,
    OhlcBar,
    OhlcSeries,
    RawBar,
    SanitizeConfig,
    TransformOverflowError,
    TransformedVector,
    inverse_transform,
    read_csv,
    sanitize_series,
    transform,
    transform_series,
    write_csv,
)
from .metrics import (
    ComparisonReport,
    EvalReport,
    accuracy_ratio,
    compare_methods,
    compare_one_sided,
    evaluate,
    mape,
    naive_forecast,
    rmse,
    rmseh,
    sd_of_forecasts,
)
from .pipeline import (
    BacktestResult,
    PipelineConfig,
    WindowForecast,
    WindowSpec,
    rolling_backtest,
    run_window,
)
from .simulate import ScenarioSpec, generate, load_preset
from .stattests import AdfResult, JohansenResult, adf_test, johansen_trace_test
from .varvec import (
    ForecastPath,
    aic_values,
    default_p_max,
    VarModel,
    VecModel,
    difference,
    fit_var,
    fit_vec,
    forecast_var,
    forecast_vec,
    integrate,
    select_lag_aic,
)
