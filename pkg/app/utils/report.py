from typing import TYPE_CHECKING, Any, Dict, Iterable, List
import json
import logging
import os

import numpy as np

from app.models.ledger import SolveReport
from app.services.orchestrator import admm_signaling_formula, complexity_estimate, signaling_formula

if TYPE_CHECKING:
    from app.services.experiments import SweepResult

logger = logging.getLogger(__name__)

# 17 significant digits round-trip every double
CSV_FLOAT_FORMAT = "%.17g"


def _floats(values: np.ndarray) -> List[float]:
    return [float(v) for v in np.asarray(values).ravel()]


def report_to_dict(report: SolveReport, include_wall_time: bool = True) -> Dict[str, Any]:
    ledger = report.ledger
    data: Dict[str, Any] = {
        "method": report.method.value,
        "mse_form": report.mse_form.value if report.mse_form is not None else None,
        "dimensions": report.dimensions,
        "converged": report.converged,
        "iterations_used": report.iterations_used,
        "sum_rate_bps_hz": report.sum_rate,
        "surrogate_nats": report.final.surrogate,
        "per_user_rate_bps_hz": _floats(report.final.per_user_rate),
        "per_user_sinr": _floats(report.final.per_user_sinr),
        "finalized_unit_modulus": report.finalized_unit_modulus,
        "signaling": {
            "formula_total": ledger.formula_total,
            "actual_total": ledger.actual_total,
            "by_kind": ledger.totals_by_kind(),
        },
        "trace": [
            {
                "iteration": r.index,
                "sum_rate_bps_hz": r.sum_rate,
                "surrogate_nats": r.surrogate,
                "ap_power_mw": _floats(r.ap_powers),
                "theta_residual": r.theta_residual,
                "symbols": r.symbols,
            }
            for r in report.trace
        ],
    }
    if include_wall_time:
        data["wall_time_s"] = report.wall_time
    return data


def render_solve_report(report: SolveReport, include_wall_time: bool = True) -> str:
    """SolveReport as an indented JSON document, one trace entry per iteration."""
    return json.dumps(report_to_dict(report, include_wall_time), indent=2)


def emit_csv(result: "SweepResult", path: str, aggregate: bool = False) -> str:
    """Write sweep rows (or their per-cell aggregates) ordered by (value, method, seed)."""
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        frame = result.aggregate() if aggregate else result.frame()
        frame.to_csv(path, index=False, na_rep="nan", float_format=CSV_FLOAT_FORMAT)
        logger.info(f"Sweep CSV written: {path} ({len(frame)} rows)")
        return path
    except OSError as e:
        logger.error(f"Error writing sweep CSV {path}: {str(e)}")
        raise


def overhead_rows(B: int, Nt: int, K: int, M: int, iterations: Iterable[int]) -> List[Dict[str, Any]]:
    return [
        {
            "iterations": i,
            "proposed": signaling_formula(B, Nt, K, M, i),
            "admm": admm_signaling_formula(B, Nt, K, M, i),
            "complexity": complexity_estimate(B, Nt, K, M, i),
        }
        for i in iterations
    ]


def format_overhead_table(rows: List[Dict[str, Any]]) -> str:
    lines = [f"{'iterations':>10}  {'proposed':>12}  {'admm':>12}  {'complexity':>12}"]
    for row in rows:
        lines.append(
            f"{row['iterations']:>10}  {row['proposed']:>12}  {row['admm']:>12}  {row['complexity']:>12.4g}"
        )
    return "\n".join(lines)


def format_comparison(reports: Iterable[SolveReport]) -> str:
    lines = [f"{'method':<22}  {'sum_rate':>10}  {'iters':>5}  {'formula':>9}  {'actual':>9}"]
    for r in reports:
        lines.append(
            f"{r.method.value:<22}  {r.sum_rate:>10.4f}  {r.iterations_used:>5}  "
            f"{r.ledger.formula_total:>9}  {r.ledger.actual_total:>9}"
        )
    return "\n".join(lines)
