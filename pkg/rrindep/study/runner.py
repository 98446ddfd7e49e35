"""
Power-study orchestrator
Generates the samples of every cell, runs each test on them and aggregates rejections
"""
import logging
import time
import zlib
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from rrindep import settings
from rrindep.core.baselines import dcov_test, hsic_test, psk_pvalues
from rrindep.core.data import PairedSample
from rrindep.core.generators import AlternativeSpec, generate, normal_scores
from rrindep.core.permutation import critical_value, map_replicates, permutation_pvalue
from rrindep.core.statistic import statistic
from rrindep.core.weights import WeightChoice, parse_weights, resolve_weights
from rrindep.errors import ReplicateFailureError, RRIndepError
from rrindep.study.models import PowerCell, PowerStudyConfig, PowerTable

logger = logging.getLogger(__name__)

PSK_COMPONENTS = ("pearson", "spearman", "kendall")


class Column(NamedTuple):
    test: str
    weight_text: str
    weight_label: str

    @property
    def kind(self) -> str:
        return "sup" if self.test == "rr_sup" else "cvm"

    def weight_choice(self) -> Optional[WeightChoice]:
        """Parsed weight of a cvm column; the sup statistic takes none."""
        return parse_weights(self.weight_text) if self.kind == "cvm" else None


def derive_seed(master_seed: int, *key: int) -> int:
    """Counter-based 64-bit child seed; the same key always gives the same seed."""
    state = np.random.SeedSequence(master_seed, spawn_key=tuple(key)).generate_state(1, dtype=np.uint64)
    return int(state[0])


def text_code(text: str) -> int:
    return zlib.crc32(text.encode("utf-8"))


def scored(sample: PairedSample) -> PairedSample:
    return PairedSample(xs=normal_scores(sample.xs), ys=normal_scores(sample.ys))


class CellReplicate:
    """
    One replicate of one (alternative, n) cell: a single generated sample shared
    by every column.

    Returns:
        {(test, weight label): (rejected, seconds)}; rejected is None when the
        column raised on this replicate
    """

    def __init__(
        self,
        config: PowerStudyConfig,
        alternative: AlternativeSpec,
        n: int,
        columns: List[Column],
        thresholds: Dict[Tuple[str, str], float],
    ):
        self.config = config
        self.alternative = alternative
        self.n = n
        self.columns = columns
        self.thresholds = thresholds

    def __call__(self, rep: int) -> Dict[Tuple[str, str], Tuple[Optional[bool], float]]:
        config = self.config
        code = text_code(self.alternative.key())
        sample_seed = derive_seed(config.master_seed, code, self.n, rep, 0)
        perm_seed = derive_seed(config.master_seed, code, self.n, rep, 1)
        sample = generate(self.alternative.model_copy(update={"n": self.n, "seed": sample_seed}))
        rr_sample = scored(sample) if config.normal_scores and self.alternative.scalar_marginals else sample

        outcome = {}
        for column in self.columns:
            started = time.perf_counter()
            try:
                outcome.update(self._run_column(column, sample, rr_sample, perm_seed))
            except RRIndepError as e:
                logger.warning(f"{column.test} failed on {self.alternative.key()} n={self.n} rep={rep}: {e}")
                for key in self._keys(column):
                    outcome[key] = (None, 0.0)
                continue
            elapsed = time.perf_counter() - started
            for key in self._keys(column):
                outcome[key] = (outcome[key][0], elapsed)
        return outcome

    @staticmethod
    def _keys(column: Column):
        if column.test == "psk":
            return [(name, "") for name in PSK_COMPONENTS]
        return [(column.test, column.weight_label)]

    def _run_column(self, column: Column, sample: PairedSample, rr_sample: PairedSample, perm_seed: int):
        config = self.config
        level = config.level
        if column.test in ("rr_cvm", "rr_sup"):
            key = (column.kind, column.weight_label)
            if key in self.thresholds:
                pairs = rr_sample.pairs()
                weight = resolve_weights(column.weight_choice(), pairs) if column.kind == "cvm" else None
                value = statistic(pairs, weight, column.kind).t
                return {(column.test, column.weight_label): (value > self.thresholds[key], 0.0)}
            dX, dY = rr_sample.distances()
            result = permutation_pvalue(
                dX,
                dY,
                column.weight_choice(),
                kind=column.kind,
                m=config.perm_m,
                seed=perm_seed,
                estimator=config.estimator,
                workers=1,
            )
            return {(column.test, column.weight_label): (result.p_value < level, 0.0)}
        if column.test == "dcov":
            result = dcov_test(sample, m=config.perm_m, seed=perm_seed, estimator=config.estimator, workers=1)
            return {("dcov", ""): (result.p_value < level, 0.0)}
        if column.test == "hsic":
            result = hsic_test(sample, m=config.perm_m, seed=perm_seed, estimator=config.estimator, workers=1)
            return {("hsic", ""): (result.p_value < level, 0.0)}
        pvalues = psk_pvalues(sample)
        return {(name, ""): (pvalues[name] < level, 0.0) for name in PSK_COMPONENTS}


class PowerStudyRunner:
    """
    Runs a PowerStudyConfig cell by cell.

    Samples are paired across tests: every column of an (alternative, n) cell
    sees the same generated samples. Output order is sorted by cell key.
    """

    def __init__(self, config: PowerStudyConfig, workers: Optional[int] = None):
        self.config = config
        self.workers = settings.get_threads() if workers is None else workers
        self._thresholds: Dict[Tuple[int, str, str], float] = {}

    def columns(self) -> List[Column]:
        columns = []
        for test in self.config.tests:
            if test.name == "rr_cvm":
                for text, label in zip(test.weights, test.weight_labels()):
                    columns.append(Column("rr_cvm", text, label))
            else:
                columns.append(Column(test.name, "", ""))
        return columns

    def _threshold(self, n: int, column: Column) -> float:
        cache_key = (n, column.kind, column.weight_label)
        if cache_key not in self._thresholds:
            seed = derive_seed(self.config.master_seed, text_code(f"null:{column.kind}:{column.weight_label}"), n)
            logger.info(f"Calibrating {column.test} {column.weight_label} at n={n} with {self.config.null_reps} null samples")
            self._thresholds[cache_key] = critical_value(
                None,
                n,
                column.weight_choice(),
                kind=column.kind,
                level=self.config.level,
                reps=self.config.null_reps,
                seed=seed,
                workers=self.workers,
            )
        return self._thresholds[cache_key]

    def thresholds_for(self, alternative: AlternativeSpec, n: int) -> Dict[Tuple[str, str], float]:
        """Null-quantile thresholds of the recurrence columns, empty under permutation calibration."""
        if self.config.calibration != "null_quantile":
            return {}
        if not alternative.scalar_marginals:
            logger.warning(
                f"⚠️  null_quantile calibration is only distribution-free for scalar marginals; "
                f"using permutation calibration for {alternative.key()}"
            )
            return {}
        return {
            (column.kind, column.weight_label): self._threshold(n, column)
            for column in self.columns()
            if column.test in ("rr_cvm", "rr_sup")
        }

    def run_cell(self, alternative: AlternativeSpec, n: int) -> List[PowerCell]:
        config = self.config
        columns = self.columns()
        thresholds = self.thresholds_for(alternative, n)
        started = time.perf_counter()
        logger.info(f"Running {alternative.key()} at n={n}: {config.power_reps} replicates")

        task = CellReplicate(config, alternative, n, columns, thresholds)
        outcomes = map_replicates(task, config.power_reps, self.workers)

        counts: Dict[Tuple[str, str], int] = {}
        failures: Dict[Tuple[str, str], int] = {}
        seconds: Dict[Tuple[str, str], float] = {}
        for outcome in outcomes:
            for key, (rejected, elapsed) in outcome.items():
                counts[key] = counts.get(key, 0) + int(bool(rejected))
                failures[key] = failures.get(key, 0) + int(rejected is None)
                seconds[key] = seconds.get(key, 0.0) + elapsed

        for (test, weight), failed in failures.items():
            label = f"{test}[{weight}]" if weight else test
            if failed == config.power_reps:
                raise ReplicateFailureError(f"{label} failed on all {failed} replicates of {alternative.key()} n={n}")
            if failed:
                logger.warning(
                    f"⚠️  {label}: {failed}/{config.power_reps} replicates failed on {alternative.key()} n={n}; "
                    f"power is over the remaining {config.power_reps - failed}"
                )

        def calibration_of(test: str) -> str:
            if test in PSK_COMPONENTS or test == "psk":
                return "classical"
            if test.startswith("rr") and thresholds:
                return "null_quantile"
            return "permutation"

        cells = []
        for (test, weight), count in counts.items():
            cells.append(
                PowerCell.from_counts(
                    alternative.key(), n, test, weight, count, config.power_reps,
                    failures=failures[(test, weight)],
                    calibration=calibration_of(test), elapsed=seconds[(test, weight)],
                )
            )
        psk = [(name, "") for name in PSK_COMPONENTS if (name, "") in counts]
        if psk:
            # components fail together; the max row takes the best power over valid replicates
            best = max(psk, key=lambda key: counts[key] / (config.power_reps - failures[key]))
            cells.append(
                PowerCell.from_counts(
                    alternative.key(), n, "psk", "", counts[best], config.power_reps,
                    failures=failures[best],
                    calibration="classical", elapsed=sum(seconds[key] for key in psk),
                )
            )
        logger.info(f"Finished {alternative.key()} at n={n} in {time.perf_counter() - started:.1f}s")
        for cell in cells:
            logger.debug(f"  {cell.test} {cell.weight}: power={cell.power:.3f} (se {cell.se:.3f})")
        return cells

    def run(self) -> PowerTable:
        cells = []
        for alternative in self.config.alternatives:
            for n in self.config.n_values:
                cells.extend(self.run_cell(alternative, n))
        return PowerTable(
            level=self.config.level,
            master_seed=self.config.master_seed,
            cells=sorted(cells, key=PowerCell.sort_key),
        )
