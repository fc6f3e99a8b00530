"""Invariant suite run by `cli verify`.

Each check builds its own small random instance, so the suite needs no channel
files and runs in seconds.
"""

from dataclasses import dataclass
from typing import Callable, List, Tuple
import logging
import math

import numpy as np

from app.core.exceptions import RisCellFreeError
from app.models.models import MethodId, MseForm
from app.models.scenario import ScenarioConfig
from app.models.state import BeamState, ChannelSet
from app.services.baselines import run_baseline, zf_beamformers
from app.services.orchestrator import OrchestratorOptions, signaling_formula
from app.utils.active_bf import assemble_local_quadratic, solve_local_beamformer
from app.utils.channel import generate_channels
from app.utils.passive_bf import assemble_passive_quadratic, passive_objective
from app.utils.wmmse import (
    mse_all, refresh_receivers, surrogate_objective, weight_mse, weighted_sum_rate,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


SMALL = ScenarioConfig(
    num_aps=3,
    antennas_per_ap=4,
    num_users=3,
    ris_elements=8,
    ap_positions=[(0.0, -50.0), (60.0, -50.0), (120.0, -50.0)],
    max_iterations=15,
)


def random_state(channels: ChannelSet, rng: np.random.Generator, scale: float = 1.0) -> BeamState:
    """Arbitrary (not necessarily feasible) state with positive weights."""
    B, K, Nt = channels.direct.shape
    M = channels.ris_elements

    def cn(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    return BeamState(
        active=scale * cn(B, K, Nt),
        theta=cn(M),
        aux=cn(K) / scale,
        weights=rng.uniform(0.5, 2.0, K),
    )


def _weighted_mse(state: BeamState, channels: ChannelSet, eta: np.ndarray, form: MseForm) -> float:
    return float(np.sum(eta * state.weights * mse_all(state, channels, form)))


def check_active_quadratic(channels: ChannelSet, eta: np.ndarray, trials: int = 20) -> CheckResult:
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(trials):
        state = random_state(channels, rng)
        for form in MseForm:
            if form == MseForm.coherent:
                q = assemble_local_quadratic(0, state, channels, eta, form)
                model = q.objective(state.active[0])
            else:
                blocks = [assemble_local_quadratic(b, state, channels, eta, form) for b in range(channels.num_aps)]
                model = sum(q.objective(state.active[b]) - q.constant for b, q in enumerate(blocks))
                model += blocks[0].constant
            direct = _weighted_mse(state, channels, eta, form)
            worst = max(worst, abs(model - direct) / max(1.0, abs(direct)))
    return CheckResult("active quadratic matches weighted MSE", worst <= 1e-9, f"max rel err {worst:.2e}")


def check_passive_quadratic(channels: ChannelSet, eta: np.ndarray, trials: int = 20) -> CheckResult:
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(trials):
        state = random_state(channels, rng)
        for form in MseForm:
            q = assemble_passive_quadratic(state, channels, eta, form)
            model = passive_objective(q, state.theta) + q.constant
            direct = _weighted_mse(state, channels, eta, form)
            worst = max(worst, abs(model - direct) / max(1.0, abs(direct)))
    return CheckResult("passive quadratic matches weighted MSE", worst <= 1e-9, f"max rel err {worst:.2e}")


def check_fixed_point(channels: ChannelSet, p_max: float) -> CheckResult:
    rng = np.random.default_rng(3)
    state = random_state(channels, rng, scale=math.sqrt(p_max) / 4)
    worst = 0.0
    for form in MseForm:
        refreshed = refresh_receivers(state, channels, form)
        products = refreshed.weights * weight_mse(refreshed, channels, form)
        worst = max(worst, float(np.max(np.abs(products - 1.0))))
        # per_ap inverts the per-AP signal energy; its omega * mse identity needs B = 1
        if form != MseForm.per_ap:
            products = refreshed.weights * mse_all(refreshed, channels, form)
            worst = max(worst, float(np.max(np.abs(products - 1.0))))
    return CheckResult("omega * mse = 1 after receiver update", worst <= 1e-10, f"max deviation {worst:.2e}")


def check_single_ap_identity(config: ScenarioConfig) -> CheckResult:
    single = config.with_overrides(num_aps=1, ap_positions=[config.ap_positions[0]])
    channels = generate_channels(single, seed=7)
    state = random_state(channels, np.random.default_rng(4), scale=math.sqrt(single.p_max_mw) / 4)
    state = refresh_receivers(state, channels, MseForm.per_ap)
    eta = single.weights
    gap = abs(surrogate_objective(state, channels, eta) - math.log(2) * weighted_sum_rate(state, channels, eta))
    return CheckResult("single AP: R_o = ln2 * R_sum", gap <= 1e-8, f"gap {gap:.2e}")


def check_local_solver(channels: ChannelSet, eta: np.ndarray, p_max: float) -> CheckResult:
    rng = np.random.default_rng(5)
    state = random_state(channels, rng, scale=math.sqrt(p_max))
    worst_power, worst_kkt = 0.0, 0.0
    for b in range(channels.num_aps):
        f, diag = solve_local_beamformer(assemble_local_quadratic(b, state, channels, eta), p_max)
        worst_power = max(worst_power, float(np.sum(np.abs(f) ** 2)) / p_max - 1.0)
        worst_kkt = max(worst_kkt, diag.kkt_residual)
    ok = worst_power <= 1e-9 and worst_kkt <= 1e-8
    return CheckResult("local beamformer feasible and stationary", ok,
                       f"power excess {worst_power:.2e}, KKT residual {worst_kkt:.2e}")


def check_runs(config: ScenarioConfig, channels: ChannelSet) -> CheckResult:
    """Every iterative method finishes with a monotone surrogate, feasible powers and an exact ledger."""
    for method in MethodId:
        if method == MethodId.zf_no_ris and channels.antennas < channels.num_users:
            continue
        _, report = run_baseline(method, config, channels)
        max_power = max(float(np.max(r.ap_powers)) for r in report.trace)
        if max_power > config.p_max_mw * (1 + 1e-9):
            return CheckResult("method runs", False, f"{method.value} exceeds the power budget")
        if method in (MethodId.pd_with_ris, MethodId.pd_random_ris):
            expected = signaling_formula(channels.num_aps, channels.antennas, channels.num_users,
                                         channels.ris_elements, report.iterations_used)
            if report.ledger.formula_total != expected:
                return CheckResult("method runs", False,
                                   f"{method.value} ledger {report.ledger.formula_total} != formula {expected}")
    return CheckResult("method runs", True, f"{len(MethodId)} methods")


def check_snapshot_determinism(config: ScenarioConfig, channels: ChannelSet) -> CheckResult:
    sequential = run_baseline(MethodId.pd_with_ris, config, channels, OrchestratorOptions.from_config(config, ap_workers=1))[0]
    threaded = run_baseline(MethodId.pd_with_ris, config, channels, OrchestratorOptions.from_config(config, ap_workers=3))[0]
    same = np.array_equal(sequential.active, threaded.active) and np.array_equal(sequential.theta, threaded.theta)
    return CheckResult("AP solves are schedule independent", bool(same))


def check_zero_forcing(channels: ChannelSet, p_max: float) -> CheckResult:
    active = zf_beamformers(channels, p_max)
    worst = 0.0
    for b in range(channels.num_aps):
        h, f = channels.direct[b], active[b]
        cross = np.abs(h.conj() @ f.T)
        norms = np.outer(np.linalg.norm(h, axis=1), np.linalg.norm(f, axis=1))
        off = (cross / norms)[~np.eye(channels.num_users, dtype=bool)]
        worst = max(worst, float(off.max()) if off.size else 0.0)
    return CheckResult("zero forcing nulls intra-AP interference", worst <= 1e-10, f"max leakage {worst:.2e}")


def check_overhead_formula() -> CheckResult:
    values = (signaling_formula(5, 8, 4, 100, 10), signaling_formula(5, 8, 4, 100, 0), signaling_formula(1, 1, 1, 1, 1))
    return CheckResult("signaling formula", values == (3000, 320, 6), f"{values}")


def run_invariant_suite(config: ScenarioConfig = SMALL) -> List[CheckResult]:
    channels = generate_channels(config, seed=config.seed)
    eta, p_max = config.weights, config.p_max_mw
    checks: List[Tuple[str, Callable[[], CheckResult]]] = [
        ("active quadratic", lambda: check_active_quadratic(channels, eta)),
        ("passive quadratic", lambda: check_passive_quadratic(channels, eta)),
        ("fixed point", lambda: check_fixed_point(channels, p_max)),
        ("single AP identity", lambda: check_single_ap_identity(config)),
        ("local solver", lambda: check_local_solver(channels, eta, p_max)),
        ("zero forcing", lambda: check_zero_forcing(channels, p_max)),
        ("method runs", lambda: check_runs(config, channels)),
        ("snapshot determinism", lambda: check_snapshot_determinism(config, channels)),
        ("signaling formula", check_overhead_formula),
    ]
    results = []
    for name, check in checks:
        try:
            result = check()
        except (RisCellFreeError, np.linalg.LinAlgError) as e:
            logger.error(f"Invariant check '{name}' raised: {str(e)}")
            result = CheckResult(name, False, str(e))
        results.append(result)
        logger.info(f"{'PASS' if result.passed else 'FAIL'} {result.name} {result.detail}")
    return results
