"""
Power studies and validation suites
Handles study configs, the replicate runner and result formatting
"""

from .formatter import ResultFormatter
from .models import PowerCell, PowerStudyConfig, PowerTable, TestSpec
from .runner import PowerStudyRunner
from .validation import SUITES, ValidationReport, run_suite

__all__ = [
    "ResultFormatter",
    "PowerCell",
    "PowerStudyConfig",
    "PowerTable",
    "TestSpec",
    "PowerStudyRunner",
    "SUITES",
    "ValidationReport",
    "run_suite",
]
