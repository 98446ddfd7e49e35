"""
Pydantic models for power-study configs and result tables
"""
import logging
import math
from typing import ClassVar, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from rrindep.core.generators import AlternativeSpec
from rrindep.core.permutation import MIN_NULL_REPS, MIN_PERMUTATIONS, Estimator
from rrindep.core.weights import choice_label, parse_weights

logger = logging.getLogger(__name__)

TestName = Literal["rr_cvm", "rr_sup", "dcov", "psk", "hsic"]
Calibration = Literal["permutation", "null_quantile"]

# Above this many estimated kernel operations a study gets a runtime warning
OPERATION_WARNING = 1e10


class TestSpec(BaseModel):
    """A test column; rr_cvm expands into one column per weight."""

    __test__: ClassVar[bool] = False

    name: TestName
    weights: List[str] = Field(default_factory=lambda: ["auto"])

    @field_validator("weights")
    @classmethod
    def _parse(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("at least one weight is required")
        for text in value:
            parse_weights(text)
        return value

    def weight_labels(self) -> List[str]:
        if self.name != "rr_cvm":
            return [""]
        return [choice_label(parse_weights(text)) for text in self.weights]


class PowerStudyConfig(BaseModel):
    """
    A factorial power study: every alternative x n x test cell.

    The n and seed of each alternative are ignored; n comes from n_values and
    sample seeds are derived from master_seed.
    """

    alternatives: List[AlternativeSpec] = Field(min_length=1)
    tests: List[TestSpec] = Field(min_length=1)
    n_values: List[int] = Field(min_length=1)
    level: float = Field(default=0.05, gt=0, lt=1)
    power_reps: int = Field(default=500, ge=1)
    perm_m: int = Field(default=200, ge=MIN_PERMUTATIONS)
    calibration: Calibration = "null_quantile"
    null_reps: int = Field(default=5000, ge=MIN_NULL_REPS)
    normal_scores: bool = True
    estimator: Estimator = "paper"
    master_seed: int = Field(default=0, ge=0)

    @field_validator("n_values")
    @classmethod
    def _check_n(cls, value: List[int]) -> List[int]:
        if any(n < 4 for n in value):
            raise ValueError("every n must be at least 4")
        return value

    @model_validator(mode="after")
    def _check_calibration(self):
        if self.calibration == "null_quantile" and not self.normal_scores:
            raise ValueError("null_quantile calibration needs normal_scores=true")
        operations = self.estimated_operations()
        if operations > OPERATION_WARNING:
            logger.warning(f"⚠️  Study needs about {operations:.2g} kernel operations; expect a long run")
        return self

    def estimated_operations(self) -> float:
        """reps x m x N log N summed over the permutation-calibrated cells."""
        permuted = 0
        for test in self.tests:
            if test.name in ("dcov", "hsic") or (test.name.startswith("rr") and self.calibration == "permutation"):
                permuted += len(test.weight_labels())
        if not permuted:
            return 0.0
        per_alternative = sum(n * (n - 1) * math.log(max(n * (n - 1), 2)) for n in self.n_values)
        return float(self.power_reps * self.perm_m * per_alternative * permuted * len(self.alternatives))


class PowerCell(BaseModel):
    alternative: str
    n: int
    test: str
    weight: str = ""
    power: float = Field(ge=0, le=1)
    se: float = Field(ge=0)
    reps: int = Field(ge=1)
    rejections: int = Field(ge=0)
    # replicates on which the test raised; power and se are over reps - failures
    failures: int = Field(default=0, ge=0)
    calibration: str = ""
    elapsed: Optional[float] = None

    @model_validator(mode="after")
    def _check_counts(self):
        if self.failures >= self.reps:
            raise ValueError(f"failures ({self.failures}) must be below reps ({self.reps})")
        if self.rejections > self.reps - self.failures:
            raise ValueError("more rejections than valid replicates")
        return self

    @property
    def valid_reps(self) -> int:
        return self.reps - self.failures

    @classmethod
    def from_counts(
        cls, alternative: str, n: int, test: str, weight: str, rejections: int, reps: int, failures: int = 0, **extra
    ) -> "PowerCell":
        valid = reps - failures
        power = rejections / valid if valid > 0 else 0.0
        return cls(
            alternative=alternative,
            n=n,
            test=test,
            weight=weight,
            power=power,
            se=math.sqrt(power * (1.0 - power) / valid) if valid > 0 else 0.0,
            reps=reps,
            rejections=rejections,
            failures=failures,
            **extra,
        )

    def sort_key(self):
        return (self.alternative, self.n, self.test, self.weight)


class PowerTable(BaseModel):
    level: float
    master_seed: int
    cells: List[PowerCell] = Field(default_factory=list)

    def sorted_cells(self) -> List[PowerCell]:
        return sorted(self.cells, key=PowerCell.sort_key)

    def cell(self, alternative: str, n: int, test: str, weight: str = "") -> PowerCell:
        for cell in self.cells:
            if cell.sort_key() == (alternative, n, test, weight):
                return cell
        raise KeyError((alternative, n, test, weight))
