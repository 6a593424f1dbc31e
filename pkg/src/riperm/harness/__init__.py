"""Verification suites, seeded corpora, configuration and reports."""

from .config import (CONFIG_SCHEMA, DEFAULTS, SPACE_GRID, SUITES, RunConfig, SuiteConfig,
                     default_config, default_run_json, load_config, validate_raw)
from .report import CaseRecord, SuiteReport
from .suites import SUITE_FUNCTIONS, run_all, run_suite

__all__ = ["CONFIG_SCHEMA", "DEFAULTS", "SPACE_GRID", "SUITES", "RunConfig", "SuiteConfig",
           "default_config", "default_run_json", "load_config", "validate_raw", "CaseRecord",
           "SuiteReport", "SUITE_FUNCTIONS", "run_all", "run_suite"]
