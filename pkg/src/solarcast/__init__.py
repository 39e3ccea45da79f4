"""solarcast: one-day-ahead solar irradiance and insolation forecasting
for gappy weather-station records (quality control, gap filling, clear-sky
detrending, ARIMA and neural forecasters, prequential evaluation)."""

from ._accel import NUMBA_ENABLED, backend_name
from .arima import ArimaFit, ArimaOrder, difference, fit, forecast, select_order
from .data import (
    DailySeries,
    DataError,
    DayClass,
    HourlySeries,
    MissingReport,
    Provenance,
    Region,
    SeriesUnit,
    StationMeta,
    classify_day,
    ingest_csv,
    missing_report,
    quarter_spans,
    write_daily_csv,
    write_hourly_csv,
)
from .imputation import (
    TempModel,
    TempModelCoeffs,
    evaluate_imputation,
    fit_temp_model,
    impute_daily,
    impute_hourly,
)
from .metrics import ErrorStats, compute_stats, quarter_stats
from .neural import (
    LstmNet,
    MultiLayerNet,
    NetConfig,
    SingleLayerNet,
    gradient_check,
    init_model,
    load_checkpoint,
)
from .pipeline import (
    RunConfig,
    RunReport,
    detrend,
    prepare,
    retrend,
    run_on_prepared,
    run_prequential,
    write_forecasts_csv,
    write_report_csv,
    write_report_json,
)
from .qc import QcReport, apply_qc
from .solar import (
    GeoPosition,
    SolarInstant,
    clear_sky_index,
    clear_sky_irradiance,
    clearness_index,
    daily_extraterrestrial_insolation,
    extraterrestrial_irradiance,
    solar_position,
    transmittance,
)
from .synth import synthesize_station

__version__ = "0.1.0"
