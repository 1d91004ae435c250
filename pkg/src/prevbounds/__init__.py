"""Partial-identification bounds on prevalence from voluntary mass testing."""

__version__ = "0.1.0"

from .adjust import ReferenceStudy, derive_accuracy_band
from .core import (
    NO_ASSUMPTION,
    STANDARD_SCENARIOS,
    STANDARD_Q_BAND,
    UNBOUNDED,
    AccuracyBand,
    ConditionalPrevalence,
    ObservedCounty,
    PrevalenceInterval,
    Scenario,
    ScenarioSet,
    SelectionBand,
    bounds_no_assumption,
    bounds_table,
    bounds_with_selection,
    conditional_prevalence,
    run_scenarios,
)
from .errors import (
    EmptyInput,
    EmptyScenarioSet,
    InfeasibleAccuracy,
    NoFeasibleDistribution,
    ParseError,
    PrevBoundsError,
    ValidationError,
)
from .ingest import CountyFormat, Dataset, parse_config, parse_counties, serialize_counties
from .oracle import CertificationReport, OracleConfig, certify, oracle_bounds, random_sweep
