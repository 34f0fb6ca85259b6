"""Data handling, W126, predictive summaries, cross-validation and the CLI."""

from ..config import RunConfig
from .config import SEED_ENV, parse_config_text, read_config_file, resolve_config
from .io import (
    ParseError,
    PreparedData,
    Scaling,
    load_dataset,
    prepare,
    read_corr_sweep_csv,
    read_dataset_csv,
    write_corr_sweep_csv,
    write_dataset_csv,
)
from .predictive import (
    CoverageReport,
    FoldResult,
    PredictiveSummary,
    density_grid,
    loo_cross_validation,
    posterior_predictive,
    read_loo_csv,
    read_predictive_csv,
    summarize_draws,
    write_loo_csv,
    write_predictive_csv,
)
from .w126 import (
    HourlyOzoneSeries,
    W126Result,
    calendar_months,
    read_hourly_csv,
    w126_annual,
    w126_weight,
    write_hourly_csv,
)
