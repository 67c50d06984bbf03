"""Config-driven runs and their reports."""

from .config import CHECKS, ConfigError, RunConfig, config_digest, dump_config, load_config, parse_config
from .render import latex_report, report_dict, report_json, text_summary
from .runner import CheckResult, RunResult, build_geometry, ricci_fields, run

__all__ = [
    "CHECKS",
    "CheckResult",
    "ConfigError",
    "RunConfig",
    "RunResult",
    "build_geometry",
    "config_digest",
    "dump_config",
    "latex_report",
    "load_config",
    "parse_config",
    "report_dict",
    "report_json",
    "ricci_fields",
    "run",
    "text_summary",
]
