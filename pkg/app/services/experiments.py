"""Monte-Carlo sweeps over transmit power, user location and RIS size."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple
import logging

import numpy as np
import pandas as pd

from app.core.config import settings
from app.core.exceptions import RisCellFreeError
from app.models.models import MethodId, SweepKind
from app.models.scenario import SweepSpec
from app.services.baselines import run_baseline
from app.utils.channel import generate_channels

logger = logging.getLogger(__name__)

ROW_COLUMNS = [
    "sweep_value",
    "method",
    "seed",
    "sum_rate_bps_hz",
    "iterations",
    "signaling_symbols_paper",
    "signaling_symbols_actual",
]
INTEGER_COLUMNS = ["seed", "iterations", "signaling_symbols_paper", "signaling_symbols_actual"]
AGGREGATE_COLUMNS = ["sweep_value", "method", "count", "mean_sum_rate_bps_hz", "stderr_sum_rate_bps_hz"]


@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    method: MethodId
    seed: int
    sum_rate_bps_hz: float
    iterations: float
    signaling_symbols_paper: float
    signaling_symbols_actual: float

    @classmethod
    def failed(cls, value: float, method: MethodId, seed: int) -> "SweepRow":
        nan = float("nan")
        return cls(float(value), method, seed, nan, nan, nan, nan)


@dataclass
class SweepResult:
    kind: SweepKind
    rows: List[SweepRow] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    def frame(self) -> pd.DataFrame:
        records = [
            {**asdict(row), "method": row.method.value}
            for row in self.rows
        ]
        frame = pd.DataFrame.from_records(records, columns=ROW_COLUMNS)
        if frame.empty:
            return frame
        # counts stay integral; failed cells become <NA>
        return frame.astype({c: "Int64" for c in INTEGER_COLUMNS})

    def aggregate(self) -> pd.DataFrame:
        """Mean and standard error of the sum rate per (sweep value, method); failed cells are skipped."""
        frame = self.frame()
        if frame.empty:
            return pd.DataFrame(columns=AGGREGATE_COLUMNS)
        grouped = frame.groupby(["sweep_value", "method"], sort=False)["sum_rate_bps_hz"]
        out = grouped.agg(["count", "mean", "sem"]).reset_index()
        out.columns = AGGREGATE_COLUMNS
        return out

    def mean(self, method: MethodId, value: float) -> float:
        frame = self.frame()
        mask = (frame["method"] == MethodId(method).value) & (frame["sweep_value"] == value)
        return float(frame.loc[mask, "sum_rate_bps_hz"].mean())


def run_cell(spec: SweepSpec, value: float, seed: int) -> List[SweepRow]:
    """All methods of one (value, seed) cell on one shared channel realization."""
    try:
        config = spec.config_for(value).with_overrides(seed=seed)
        channels = generate_channels(config, seed)
    except (RisCellFreeError, np.linalg.LinAlgError) as e:
        logger.warning(f"Cell (value={value}, seed={seed}) could not be set up: {str(e)}")
        return [SweepRow.failed(value, m, seed) for m in spec.methods]

    rows = []
    for method in spec.methods:
        try:
            _, report = run_baseline(method, config, channels, seed=seed)
            rows.append(SweepRow(
                sweep_value=float(value),
                method=method,
                seed=seed,
                sum_rate_bps_hz=report.sum_rate,
                iterations=report.iterations_used,
                signaling_symbols_paper=report.ledger.formula_total,
                signaling_symbols_actual=report.ledger.actual_total,
            ))
        except (RisCellFreeError, np.linalg.LinAlgError) as e:
            logger.warning(f"{method.value} failed at value={value}, seed={seed}: {str(e)}")
            rows.append(SweepRow.failed(value, method, seed))
    return rows


def sweep(spec: SweepSpec, workers: Optional[int] = None) -> SweepResult:
    """Run every (value, seed) cell on a bounded pool; rows come back ordered by (value, method, seed)."""
    workers = workers or settings.SWEEP_WORKERS
    cells: List[Tuple[float, int]] = [(v, s) for v in spec.values for s in spec.seeds()]
    logger.info(
        f"Starting {spec.kind.value} sweep: {len(spec.values)} values x {spec.num_seeds} seeds, "
        f"{len(spec.methods)} methods, {workers} workers"
    )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(lambda cell: run_cell(spec, *cell), cells))
    else:
        outputs = [run_cell(spec, v, s) for v, s in cells]

    by_cell: Dict[Tuple[float, int], List[SweepRow]] = dict(zip(cells, outputs))
    result = SweepResult(kind=spec.kind)
    for value in spec.values:
        for i, method in enumerate(spec.methods):
            for seed in spec.seeds():
                row = by_cell[(value, seed)][i]
                if np.isnan(row.sum_rate_bps_hz):
                    result.failures.append(f"{method.value}@{value}/seed{seed}")
                result.rows.append(row)

    if result.failures:
        logger.warning(f"Sweep finished with {len(result.failures)} failed entries")
    logger.info(f"{spec.kind.value} sweep finished with {len(result.rows)} rows")
    return result
