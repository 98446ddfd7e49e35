"""
Validation suites behind `cli.py validate`

Each suite returns a ValidationReport with one entry per check and the
measured discrepancy; a failed check is a report entry, not an exception.
"""
import logging
import math
import time
from typing import Callable, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, computed_field

from rrindep.core.asymptotics import diagonal_curve, diagonal_maximum
from rrindep.core.data import PairedSample, distance_matrix
from rrindep.core.generators import AlternativeSpec
from rrindep.core.recurrence import hn_bound, hn_check
from rrindep.core.statistic import tn_bruteforce, tn_fast, tn_quadrature, tn_reference
from rrindep.core.weights import PRESETS, WeightSpec
from rrindep.errors import InvalidParameterError
from rrindep.study.models import PowerStudyConfig, TestSpec
from rrindep.study.runner import PowerStudyRunner

logger = logging.getLogger(__name__)

Suite = Literal["oracles", "lemma2", "sigma2", "size"]
SUITES = ("oracles", "lemma2", "sigma2", "size")

DIAGONAL_MAX_SD = 0.06409
DIAGONAL_ARGMAX = 1.3488


class CheckResult(BaseModel):
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


class ValidationReport(BaseModel):
    suite: str
    checks: List[CheckResult]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


def _random_sample(rng: np.random.Generator, n: int, variant: str) -> PairedSample:
    if variant == "scalar":
        return PairedSample(xs=rng.standard_normal(n), ys=rng.standard_normal(n) + rng.standard_normal(n))
    if variant == "vector":
        x = rng.standard_normal((n, 5))
        return PairedSample(xs=x, ys=x[:, :2] ** 2 + rng.standard_normal((n, 2)))
    # ties: X on a 3-point support
    return PairedSample(xs=rng.integers(0, 3, n).astype(float), ys=rng.integers(0, 4, n).astype(float))


def oracle_suite(seed: int = 0, samples: int = 100, quadrature_samples: int = 20) -> ValidationReport:
    """Evaluator tower bruteforce = reference = fast, then quadrature against reference."""
    rng = np.random.default_rng(seed)
    worst_fast = 0.0
    worst_brute = 0.0
    for index in range(samples):
        n = int(rng.integers(4, 11))
        variant = ("scalar", "vector", "ties")[index % 3]
        pairs = _random_sample(rng, n, variant).pairs()
        mu, var = PRESETS[sorted(PRESETS)[index % len(PRESETS)]]
        w = WeightSpec.fixed(mu, var)
        reference = tn_reference(pairs, w).t
        worst_fast = max(worst_fast, _relative(tn_fast(pairs, w).t, reference))
        worst_brute = max(worst_brute, _relative(tn_bruteforce(pairs, w).t, reference))

    worst_quad = 0.0
    w = WeightSpec.fixed(1.0, 1.0)
    for _ in range(quadrature_samples):
        pairs = _random_sample(rng, 6, "scalar").pairs()
        reference = tn_reference(pairs, w).t
        worst_quad = max(worst_quad, abs(tn_quadrature(pairs, w, 400) - reference) / max(reference, 1e-12))

    return ValidationReport(
        suite="oracles",
        checks=[
            CheckResult(name="fast_vs_reference", passed=worst_fast <= 1e-9, measured=worst_fast, tolerance=1e-9,
                        detail=f"{samples} samples, n in 4..10, scalar/vector/ties"),
            CheckResult(name="bruteforce_vs_reference", passed=worst_brute <= 1e-10, measured=worst_brute, tolerance=1e-10),
            CheckResult(name="quadrature_vs_reference", passed=worst_quad <= 1e-3, measured=worst_quad, tolerance=1e-3,
                        detail=f"{quadrature_samples} samples, n=6, N(1,1), resolution 400"),
        ],
    )


def lemma2_suite(seed: int = 0, samples: int = 200) -> ValidationReport:
    """|E'_n - E_n| <= 4/sqrt(n) on random small samples; sign violations are reported, not failed."""
    rng = np.random.default_rng(seed)
    violations = 0
    negatives = 0
    worst_ratio = 0.0
    for _ in range(samples):
        n = int(rng.integers(4, 9))
        dX = distance_matrix(rng.standard_normal(n))
        dY = distance_matrix(rng.standard_normal(n))
        r, s = rng.uniform(0.05, 3.0, 2)
        check = hn_check(dX, dY, float(r), float(s))
        violations += int(not check.ok)
        negatives += int(not check.nonnegative)
        worst_ratio = max(worst_ratio, abs(check.hn) / hn_bound(n))
    return ValidationReport(
        suite="lemma2",
        checks=[
            CheckResult(name="hn_magnitude_bound", passed=violations == 0, measured=float(violations), tolerance=0.0,
                        detail=f"worst |H_n| / (4/sqrt(n)) = {worst_ratio:.4f}"),
            CheckResult(name="hn_negative_count", passed=True, measured=float(negatives), tolerance=float(samples),
                        detail="H_n < 0 occurs for some samples; informational"),
        ],
    )


def sigma2_suite() -> ValidationReport:
    """Diagonal maximum of the normal-model variance surface."""
    best = diagonal_maximum()
    r, values = diagonal_curve(np.linspace(0.05, 6.0, 240))
    peak = int(np.argmax(values))
    unimodal = bool(np.all(np.diff(values[: peak + 1]) >= 0) and np.all(np.diff(values[peak:]) <= 0))
    return ValidationReport(
        suite="sigma2",
        checks=[
            CheckResult(name="max_sd", passed=abs(best.sd - DIAGONAL_MAX_SD) <= 1e-3,
                        measured=abs(best.sd - DIAGONAL_MAX_SD), tolerance=1e-3,
                        detail=f"sqrt(sigma2)={best.sd:.5f}, sigma2={best.sigma2:.6f}"),
            CheckResult(name="argmax", passed=abs(best.r - DIAGONAL_ARGMAX) <= 1e-2,
                        measured=abs(best.r - DIAGONAL_ARGMAX), tolerance=1e-2, detail=f"r={best.r:.4f}"),
            CheckResult(name="unimodal_diagonal", passed=unimodal, measured=float(r[peak]), tolerance=0.0,
                        detail="three-point scan on (0, 6]"),
        ],
    )


def _size_band(reps: int, level: float = 0.05) -> float:
    return max(0.02, 3.0 * math.sqrt(level * (1.0 - level) / reps))


def size_suite(seed: int = 0, reps: int = 500, null_reps: int = 5000, vector_reps: int = 200, workers: Optional[int] = None) -> ValidationReport:
    """Rejection rates under independence: scalar clouds and 5-dimensional normals."""
    clouds = PowerStudyConfig(
        alternatives=[AlternativeSpec(name="four_clouds")],
        tests=[TestSpec(name="rr_cvm", weights=["n_1_1"])],
        n_values=[30],
        power_reps=reps,
        null_reps=null_reps,
        master_seed=seed,
    )
    vectors = PowerStudyConfig(
        alternatives=[AlternativeSpec(name="independent_normal", params={"dim_x": 5, "dim_y": 5})],
        tests=[TestSpec(name="rr_cvm", weights=["auto"])],
        n_values=[30],
        power_reps=vector_reps,
        perm_m=99,
        calibration="permutation",
        master_seed=seed,
    )
    checks = []
    for label, config in (("four_clouds_n30", clouds), ("independent_normal_5d_n30", vectors)):
        cell = PowerStudyRunner(config, workers).run().cells[0]
        band = _size_band(config.power_reps)
        deviation = abs(cell.power - config.level)
        checks.append(CheckResult(name=label, passed=deviation <= band, measured=cell.power, tolerance=band,
                                  detail=f"{cell.calibration}, reps={cell.reps}, failures={cell.failures}, se={cell.se:.3f}"))
    return ValidationReport(suite="size", checks=checks)


_RUNNERS: Dict[str, Callable[..., ValidationReport]] = {
    "oracles": oracle_suite,
    "lemma2": lemma2_suite,
    "sigma2": sigma2_suite,
    "size": size_suite,
}


def run_suite(suite: str, **options) -> ValidationReport:
    if suite not in _RUNNERS:
        raise InvalidParameterError(f"Unknown suite {suite!r}, expected one of {SUITES}")
    started = time.perf_counter()
    report = _RUNNERS[suite](**options)
    failed = [check.name for check in report.checks if not check.passed]
    if failed:
        logger.warning(f"Suite {suite}: {len(failed)} check(s) failed: {', '.join(failed)}")
    else:
        logger.info(f"Suite {suite}: all {len(report.checks)} checks passed in {time.perf_counter() - started:.1f}s")
    return report
