"""
Format test results, power tables and validation reports for output
"""
import io
import logging
from typing import Iterable

import numpy as np
import pandas as pd

from rrindep.core.permutation import TestResult
from rrindep.study.models import PowerTable

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["alternative", "n", "test", "weight", "power", "se", "reps", "rejections", "failures", "calibration"]


class ResultFormatter:
    """
    Renders results as CSV, JSON or one-line summaries.

    Timings are left out unless asked for, so repeated runs give identical output.
    """

    @staticmethod
    def summary_line(result: TestResult, level: float) -> str:
        """One human-readable line for a single test."""
        name = "T_n" if result.statistic.kind == "cvm" else "T'_n"
        verdict = "reject H0" if result.p_value < level else "no evidence against H0"
        weight = f", weight {result.weight.label()}" if result.weight is not None else ""
        return (
            f"{name} = {result.statistic.t:.6g} "
            f"(n={result.n}{weight}), p = {result.p_value:.4f} "
            f"[{result.estimator}, m={result.m}, seed={result.seed}]: {verdict} at level {level:g}"
        )

    @staticmethod
    def table_frame(table: PowerTable, timings: bool = False) -> pd.DataFrame:
        columns = TABLE_COLUMNS + (["elapsed"] if timings else [])
        rows = [cell.model_dump() for cell in table.sorted_cells()]
        return pd.DataFrame(rows, columns=columns)

    @classmethod
    def table_csv(cls, table: PowerTable, timings: bool = False) -> str:
        """Power table as CSV, probabilities at 3 decimals."""
        frame = cls.table_frame(table, timings)
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format="%.3f", lineterminator="\n")
        return buffer.getvalue()

    @staticmethod
    def table_json(table: PowerTable, timings: bool = False) -> str:
        """Power table as JSON at full precision."""
        exclude = None if timings else {"cells": {"__all__": {"elapsed"}}}
        return table.model_dump_json(indent=2, exclude=exclude)

    @staticmethod
    def curve_csv(r: Iterable[float], values: Iterable[float], value_name: str = "sigma2") -> str:
        frame = pd.DataFrame({"r": np.asarray(r, dtype=float), value_name: np.asarray(values, dtype=float)})
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format="%.10g", lineterminator="\n")
        return buffer.getvalue()

    @staticmethod
    def sample_csv(xs: np.ndarray, ys: np.ndarray) -> str:
        """Both marginals side by side, columns x0.. and y0.."""
        x = np.asarray(xs).reshape(len(xs), -1)
        y = np.asarray(ys).reshape(len(ys), -1)
        frame = pd.concat(
            [
                pd.DataFrame(x, columns=[f"x{i}" for i in range(x.shape[1])]),
                pd.DataFrame(y, columns=[f"y{i}" for i in range(y.shape[1])]),
            ],
            axis=1,
        )
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format="%.17g", lineterminator="\n")
        return buffer.getvalue()

    @staticmethod
    def report_json(report) -> str:
        return report.model_dump_json(indent=2)

    @staticmethod
    def points_csv(values: np.ndarray) -> str:
        """One observation per row without a header, readable by `cli.py test`."""
        points = np.asarray(values).reshape(len(values), -1)
        buffer = io.StringIO()
        pd.DataFrame(points).to_csv(buffer, index=False, header=False, float_format="%.17g", lineterminator="\n")
        return buffer.getvalue()
