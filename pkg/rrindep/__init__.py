"""
rrindep: independence testing from recurrence rates of distance matrices
"""

from .core.data import PairedSample, distance_matrix, load_paired_sample
from .core.permutation import TestResult, critical_value, independence_test, permutation_pvalue
from .core.statistic import statistic, tn_fast, tsup
from .core.weights import WeightSpec, parse_weights
from .errors import RRIndepError

__all__ = [
    "PairedSample",
    "distance_matrix",
    "load_paired_sample",
    "TestResult",
    "critical_value",
    "independence_test",
    "permutation_pvalue",
    "statistic",
    "tn_fast",
    "tsup",
    "WeightSpec",
    "parse_weights",
    "RRIndepError",
]
