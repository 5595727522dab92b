"""wagetidy: wide NLSY79 survey extracts to tidy longitudinal wage tables.

The pipeline decodes the survey's column-name grammar, tidies the
demographic and employment variables, screens the result with
machine-checkable validation, repairs implausible wages with a
per-person Huber robust line fit, and cuts the high-school-dropout
cohort, all behind a staged CLI and an interactive threshold explorer.
"""

from .columns import RawColumnDescriptor, parse_column_name, render_column_name
from .config import PipelineConfig, load_config
from .ingest import MissingReason, RawTable, load_raw_table
from .repair import RepairConfig, RobustFitResult, fit_huber_line, repair_series
from .tables import PersonDemographics, WageRow

__version__ = "0.1.0"

__all__ = [
    "RawColumnDescriptor",
    "parse_column_name",
    "render_column_name",
    "PipelineConfig",
    "load_config",
    "MissingReason",
    "RawTable",
    "load_raw_table",
    "RepairConfig",
    "RobustFitResult",
    "fit_huber_line",
    "repair_series",
    "PersonDemographics",
    "WageRow",
    "__version__",
]
