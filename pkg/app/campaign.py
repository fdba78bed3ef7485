"""Satisfiability campaign harness.

Sweeps the number of top-level clauses L, generates a batch of formulas per
point, decides each with a timeout, and aggregates satisfiable/unsatisfiable/
timeout and triviality fractions plus decision-time percentiles.
"""

import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np
import pandas as pd
from scipy import stats

from app.config import get_settings
from app.decider import Status, k_satisfiable
from app.errors import GenerationError, InvariantViolation, ModalBenchError
from app.generator import FormulaGenerator
from app.param_spec import GenParams, LengthSpec, Method, PropRateSpec, build_specs, ensure_valid
from app.rng import derive_seed

logger = logging.getLogger(__name__)

BASE_COLUMNS = [
    "L", "L_over_N", "n", "frac_sat", "frac_unsat", "frac_timeout",
    "frac_trivial_sat", "frac_trivial_unsat",
]
GEN_FAILURE_COLUMN = "frac_gen_failure"
_PERCENTILE_COLUMN = re.compile(r"^p(.+)_ms$")


@dataclass
class CampaignConfig:
    """Everything a sweep needs except L, which varies."""
    d: int
    m: int
    N: int
    C: LengthSpec
    p: PropRateSpec
    l_values: List[int]
    method: Method = Method.NEW
    samples_per_point: int = 100
    timeout: float = 10.0
    percentiles: List[float] = field(default_factory=lambda: [50.0, 90.0])
    master_seed: int = 0
    csv_path: Optional[Path] = None
    workers: int = 1
    rejection_cap: Optional[int] = None

    def __post_init__(self):
        if not self.l_values:
            raise ModalBenchError("campaign needs at least one L value")
        if any(b <= a for a, b in zip(self.l_values, self.l_values[1:])):
            raise ModalBenchError(f"L values must be strictly increasing: {self.l_values}")
        if self.l_values[0] < 1:
            raise ModalBenchError("L values must be >= 1")
        if self.samples_per_point < 1:
            raise ModalBenchError("samples per point must be >= 1")
        if self.timeout <= 0:
            raise ModalBenchError("timeout must be positive")
        for q in self.percentiles:
            if not 0 < q <= 100:
                raise ModalBenchError(f"percentile {q} outside (0, 100]")

    def params_for(self, L: int, seed: int = 0) -> GenParams:
        return GenParams(d=self.d, m=self.m, L=L, N=self.N, C=self.C, p=self.p, method=self.method, seed=seed)


@dataclass
class PointStats:
    """Aggregated results at one L value."""
    L: int
    L_over_N: float
    n: int
    frac_sat: float
    frac_unsat: float
    frac_timeout: float
    frac_trivial_sat: float
    frac_trivial_unsat: float
    percentile_ms: Dict[float, float] = field(default_factory=dict)
    frac_gen_failure: float = 0.0


@dataclass
class SampleResult:
    status: Optional[Status]
    trivially_sat: bool = False
    trivially_unsat: bool = False
    elapsed: float = 0.0
    generation_error: Optional[str] = None


# ---------------------------------------------------------------------------
# Configuration loading
# ---------------------------------------------------------------------------

def l_values_from_range(
    start: Union[int, str, Fraction],
    stop: Union[int, str, Fraction],
    step: Union[int, str, Fraction],
    N: int,
    per_var: bool = False,
) -> List[int]:
    """
    Inclusive arithmetic sweep of L, optionally in units of L/N.

    Args:
        start: First value
        stop: Last value (included when reached exactly)
        step: Positive increment
        N: Number of propositional variables
        per_var: Interpret values as L/N ratios

    Returns:
        Strictly increasing list of distinct integer L values
    """
    start, stop, step = Fraction(str(start)), Fraction(str(stop)), Fraction(str(step))
    if step <= 0:
        raise ModalBenchError(f"L step must be positive, got {step}")
    scale = N if per_var else 1
    values: List[int] = []
    x = start
    while x <= stop:
        L = x * scale
        if L.denominator != 1:
            raise ModalBenchError(f"L = {x} * {scale} is not an integer")
        if not values or int(L) > values[-1]:
            values.append(int(L))
        x += step
    return values


def parse_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Read flat ``key=value`` lines; ``#`` starts a comment."""
    options: Dict[str, str] = {}
    for number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ModalBenchError(f"{path}:{number}: expected key=value")
        key, value = line.split("=", 1)
        options[key.strip().lstrip("-").replace("_", "-")] = value.strip()
    return options


def campaign_config_from_options(options: Dict[str, str]) -> CampaignConfig:
    """
    Build a CampaignConfig from flag-named string options.

    Keys: depth, boxes, vars, clause-size | length-spec, prop-prob | prop-spec,
    method, seed, l-values | (l-from, l-to, l-step), l-per-var, samples,
    percentiles, timeout, csv, workers.
    """
    settings = get_settings()
    known = {
        "depth", "boxes", "vars", "clause-size", "length-spec", "prop-prob", "prop-spec", "method",
        "seed", "l-values", "l-from", "l-to", "l-step", "l-per-var", "samples", "percentiles",
        "timeout", "csv", "workers", "rejection-cap",
    }
    unknown = set(options) - known
    if unknown:
        raise ModalBenchError(f"unknown campaign option(s): {', '.join(sorted(unknown))}")

    try:
        d = int(options.get("depth", 0))
        N = int(options["vars"])
        m = int(options.get("boxes", 1))
        method = Method(options.get("method", "new"))
        C, p = build_specs(
            d=d, method=method,
            clause_size=options.get("clause-size"), length_spec=options.get("length-spec"),
            prop_prob=options.get("prop-prob"), prop_spec=options.get("prop-spec"),
        )
        per_var = options.get("l-per-var", "false").lower() in ("1", "true", "yes")
        if "l-values" in options:
            l_values = [int(v) for v in re.split(r"[,\s]+", options["l-values"].strip()) if v]
        else:
            l_values = l_values_from_range(
                options["l-from"], options["l-to"], options.get("l-step", "1"), N, per_var
            )
        percentiles = (
            [float(q) for q in re.split(r"[,\s]+", options["percentiles"].strip()) if q]
            if "percentiles" in options else list(settings.default_percentiles)
        )
        return CampaignConfig(
            d=d, m=m, N=N, C=C, p=p, l_values=l_values, method=method,
            samples_per_point=int(options.get("samples", settings.default_samples)),
            timeout=float(options.get("timeout", settings.default_timeout_seconds)),
            percentiles=percentiles,
            master_seed=int(options.get("seed", 0)),
            csv_path=Path(options["csv"]) if options.get("csv") else None,
            workers=int(options.get("workers", settings.campaign_workers)),
            rejection_cap=int(options["rejection-cap"]) if "rejection-cap" in options else None,
        )
    except KeyError as e:
        raise ModalBenchError(f"missing campaign option: {e.args[0]}") from None
    except ValueError as e:
        raise ModalBenchError(f"bad campaign option value: {e}") from None


def load_campaign_config(path: Union[str, Path], overrides: Optional[Dict[str, str]] = None) -> CampaignConfig:
    options = parse_config_file(path)
    options.update(overrides or {})
    return campaign_config_from_options(options)


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

def percentile(times: Sequence[Optional[float]], q: float, timeout: float) -> float:
    """
    Nearest-rank percentile with every timeout counted as the timeout value.

    Args:
        times: Decision times; None marks a timeout
        q: Percentile in (0, 100]
        timeout: Value substituted for timeouts

    Returns:
        The value at rank ceil(q * n / 100)
    """
    if not times:
        raise ValueError("percentile of an empty sample")
    if not 0 < q <= 100:
        raise ValueError(f"percentile {q} outside (0, 100]")
    values = np.sort(np.array([timeout if t is None else t for t in times], dtype=float))
    rank = math.ceil(Fraction(str(q)) * len(values) / 100)
    return float(values[max(rank, 1) - 1])


def aggregate_point(L: int, N: int, results: Sequence[SampleResult], config: CampaignConfig) -> PointStats:
    """Fold sample results into PointStats; generation failures are counted apart."""
    decided = [r for r in results if r.generation_error is None]
    failures = len(results) - len(decided)
    n = len(decided)
    counts = {status: sum(1 for r in decided if r.status is status) for status in Status}
    trivial_sat = sum(1 for r in decided if r.trivially_sat)
    trivial_unsat = sum(1 for r in decided if r.trivially_unsat)

    if counts[Status.SAT] + counts[Status.UNSAT] + counts[Status.TIMEOUT] != n:
        raise InvariantViolation(f"status counts do not add up at L={L}")
    if trivial_sat > counts[Status.SAT] + counts[Status.TIMEOUT] or \
            trivial_unsat > counts[Status.UNSAT] + counts[Status.TIMEOUT]:
        raise InvariantViolation(f"triviality counts exceed status counts at L={L}")

    def frac(count: int) -> float:
        return count / n if n else 0.0

    times = [None if r.status is Status.TIMEOUT else r.elapsed for r in decided]
    percentile_ms = {
        q: percentile(times, q, config.timeout) * 1000 if times else 0.0 for q in config.percentiles
    }
    return PointStats(
        L=L, L_over_N=L / N, n=n,
        frac_sat=frac(counts[Status.SAT]), frac_unsat=frac(counts[Status.UNSAT]),
        frac_timeout=frac(counts[Status.TIMEOUT]),
        frac_trivial_sat=frac(trivial_sat), frac_trivial_unsat=frac(trivial_unsat),
        percentile_ms=percentile_ms,
        frac_gen_failure=failures / len(results) if results else 0.0,
    )


def unsat_trend(points: Sequence[PointStats]) -> Tuple[float, float]:
    """Spearman correlation (rho, p-value) of frac_unsat against L."""
    result = stats.spearmanr([pt.L for pt in points], [pt.frac_unsat for pt in points])
    return float(result[0]), float(result[1])


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def run_sample(task: Tuple[GenParams, float, Optional[int]]) -> SampleResult:
    """Generate and decide one formula. Top-level so process pools can pickle it."""
    params, timeout, rejection_cap = task
    try:
        formula = FormulaGenerator(params, rejection_cap=rejection_cap).generate()
    except GenerationError as e:
        return SampleResult(status=None, generation_error=str(e))
    outcome = k_satisfiable(formula, timeout)
    return SampleResult(outcome.status, outcome.trivially_sat, outcome.trivially_unsat, outcome.elapsed)


class CampaignRunner:
    """Runs one campaign configuration."""

    def __init__(self, config: CampaignConfig):
        self.config = config
        ensure_valid(config.params_for(config.l_values[0]))

    def tasks_for_point(self, point_index: int, L: int) -> List[Tuple[GenParams, float, Optional[int]]]:
        cfg = self.config
        return [
            (cfg.params_for(L, derive_seed(cfg.master_seed, point_index, sample)), cfg.timeout, cfg.rejection_cap)
            for sample in range(cfg.samples_per_point)
        ]

    def run(self, progress: Optional[Callable[[PointStats], None]] = None) -> List[PointStats]:
        """
        Run the sweep.

        Args:
            progress: Called with each point's stats as it completes

        Returns:
            PointStats in L order
        """
        cfg = self.config
        logger.info(
            f"Starting campaign: d={cfg.d}, m={cfg.m}, N={cfg.N}, {len(cfg.l_values)} L values, "
            f"{cfg.samples_per_point} samples/point, timeout {cfg.timeout}s"
        )
        executor = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
        points = []
        try:
            for index, L in enumerate(cfg.l_values):
                tasks = self.tasks_for_point(index, L)
                results = list(executor.map(run_sample, tasks)) if executor else [run_sample(t) for t in tasks]
                point = aggregate_point(L, cfg.N, results, cfg)
                if point.frac_gen_failure:
                    logger.warning(f"L={L}: {point.frac_gen_failure:.1%} of samples failed to generate")
                logger.info(
                    f"L={L} (L/N={point.L_over_N:.2f}): sat={point.frac_sat:.2f} unsat={point.frac_unsat:.2f} "
                    f"timeout={point.frac_timeout:.2f} trivial_sat={point.frac_trivial_sat:.2f} "
                    f"trivial_unsat={point.frac_trivial_unsat:.2f}"
                )
                points.append(point)
                if progress:
                    progress(point)
        finally:
            if executor:
                executor.shutdown()
        return points


def run_campaign(config: CampaignConfig) -> List[PointStats]:
    """Run ``config`` and write its CSV when a path is configured."""
    points = CampaignRunner(config).run()
    if config.csv_path is not None:
        write_points_csv(points, config.csv_path, config.percentiles)
    return points


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def percentile_column(q: float) -> str:
    label = str(int(q)) if float(q).is_integer() else str(q)
    return f"p{label}_ms"


def points_frame(points: Sequence[PointStats], percentiles: Sequence[float]) -> pd.DataFrame:
    rows = []
    with_failures = any(pt.frac_gen_failure for pt in points)
    for pt in points:
        row = {name: getattr(pt, name) for name in BASE_COLUMNS}
        for q in percentiles:
            row[percentile_column(q)] = pt.percentile_ms[q]
        if with_failures:
            row[GEN_FAILURE_COLUMN] = pt.frac_gen_failure
        rows.append(row)
    columns = BASE_COLUMNS + [percentile_column(q) for q in percentiles]
    if with_failures:
        columns.append(GEN_FAILURE_COLUMN)
    return pd.DataFrame(rows, columns=columns)


def write_points_csv(points: Sequence[PointStats], path: Union[str, Path], percentiles: Sequence[float]) -> Path:
    path = Path(path)
    points_frame(points, percentiles).to_csv(path, index=False)
    logger.info(f"Wrote {len(points)} points to {path}")
    return path


def read_points_csv(path: Union[str, Path]) -> List[PointStats]:
    """Parse a campaign CSV back into PointStats (floats round-trip exactly)."""
    frame = pd.read_csv(path, float_precision="round_trip")
    percentile_columns = {}
    for column in frame.columns:
        match = _PERCENTILE_COLUMN.match(column)
        if match:
            percentile_columns[column] = float(match.group(1))
    points = []
    for row in frame.to_dict(orient="records"):
        points.append(PointStats(
            L=int(row["L"]), L_over_N=float(row["L_over_N"]), n=int(row["n"]),
            frac_sat=float(row["frac_sat"]), frac_unsat=float(row["frac_unsat"]),
            frac_timeout=float(row["frac_timeout"]),
            frac_trivial_sat=float(row["frac_trivial_sat"]),
            frac_trivial_unsat=float(row["frac_trivial_unsat"]),
            percentile_ms={q: float(row[column]) for column, q in percentile_columns.items()},
            frac_gen_failure=float(row.get(GEN_FAILURE_COLUMN, 0.0)),
        ))
    return points
