"""Partially distributed beamforming as an explicit AP <-> CPU exchange.

Each iteration the CPU broadcasts (u, omega, theta), every AP solves its own
beamformers from that snapshot and returns them, and the CPU then refreshes
(u, omega) and re-optimizes theta. Every message is written to a ledger.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple
import logging
import math
import time

import numpy as np

from app.core.exceptions import DegenerateChannelError, InvariantViolationError
from app.models.ledger import (
    CPU, IterationRecord, MessageKind, SignalingLedger, SolveReport,
)
from app.models.models import MethodId, MseForm, ThetaInit
from app.models.scenario import ScenarioConfig
from app.models.state import BeamState, ChannelSet
from app.utils.active_bf import (
    ActiveSolveDiagnostics, assemble_local_quadratic, solve_local_beamformer,
)
from app.utils.channel import random_phases
from app.utils.passive_bf import (
    PassiveOptions, assemble_passive_quadratic, extract_phases, solve_passive,
)
from app.utils.wmmse import rate_report, refresh_receivers, surrogate_objective, weighted_sum_rate

logger = logging.getLogger(__name__)

ActiveStep = Callable[[BeamState], np.ndarray]


@dataclass(frozen=True)
class OrchestratorOptions:
    eps: float = 1e-3
    max_iterations: int = 100
    mse_form: MseForm = MseForm.per_ap
    theta_init: ThetaInit = ThetaInit.ones
    finalize_unit_modulus: bool = False
    centralized_inner_passes: int = 3
    ap_workers: int = 1
    passive: PassiveOptions = field(default_factory=PassiveOptions)

    @classmethod
    def from_config(cls, config: ScenarioConfig, **overrides) -> "OrchestratorOptions":
        values = dict(
            eps=config.convergence_eps,
            max_iterations=config.max_iterations,
            mse_form=config.mse_form,
            theta_init=config.theta_init,
            finalize_unit_modulus=config.finalize_unit_modulus,
            centralized_inner_passes=config.centralized_inner_passes,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def signaling_formula(B: int, Nt: int, K: int, M: int, iterations: int) -> int:
    """Published overhead of the partially distributed scheme: 2BN_tK + I(M + 2K + BN_tK)."""
    return 2 * B * Nt * K + iterations * (M + 2 * K + B * Nt * K)


def admm_signaling_formula(B: int, Nt: int, K: int, M: int, iterations: int) -> int:
    """Overhead of the fully distributed ADMM scheme: B^2 (N_tK + I(N_tK + M + 2K))."""
    return B * B * (Nt * K + iterations * (Nt * K + M + 2 * K))


def complexity_estimate(B: int, Nt: int, K: int, M: int, iterations: int) -> float:
    """Order-of-magnitude operation count I (M^3.5 + B (N_tK)^3)."""
    return float(iterations * (M ** 3.5 + B * (Nt * K) ** 3))


def initial_theta(num_elements: int, theta_init: ThetaInit, seed: int) -> np.ndarray:
    if theta_init == ThetaInit.random:
        return random_phases(num_elements, seed)
    return np.ones(num_elements, dtype=complex)


def initial_state(
    channels: ChannelSet,
    p_max: float,
    theta: np.ndarray,
    form: MseForm,
) -> BeamState:
    """Per-AP MRT on the effective channel at full power, then closed-form u and omega."""
    K = channels.num_users
    h_eff = channels.effective(theta)
    norms = np.linalg.norm(h_eff, axis=2, keepdims=True)
    if np.any(norms == 0):
        raise DegenerateChannelError("an effective channel vector is zero; MRT start is undefined")
    active = math.sqrt(p_max / K) * h_eff / norms
    state = BeamState(active=active, theta=theta, aux=np.zeros(K, dtype=complex), weights=np.ones(K))
    return refresh_receivers(state, channels, form)


def local_active_step(
    channels: ChannelSet,
    eta: np.ndarray,
    p_max: float,
    form: MseForm,
    workers: int = 1,
    diagnostics: Optional[List[ActiveSolveDiagnostics]] = None,
) -> ActiveStep:
    """AP phase: every AP solves its block from the same broadcast snapshot."""

    def solve(snapshot: BeamState, b: int):
        return solve_local_beamformer(assemble_local_quadratic(b, snapshot, channels, eta, form), p_max)

    def step(snapshot: BeamState) -> np.ndarray:
        indices = range(channels.num_aps)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda b: solve(snapshot, b), indices))
        else:
            results = [solve(snapshot, b) for b in indices]
        if diagnostics is not None:
            diagnostics.extend(d for _, d in results)
        return np.stack([f for f, _ in results])

    return step


def _theta_residual(theta: np.ndarray) -> float:
    return float(max(np.max(np.abs(theta)) - 1.0, 0.0)) if theta.size else 0.0


def trace_record(index: int, state: BeamState, channels: ChannelSet, eta: np.ndarray, form: MseForm, symbols: int) -> IterationRecord:
    record = IterationRecord(
        index=index,
        sum_rate=weighted_sum_rate(state, channels, eta),
        surrogate=surrogate_objective(state, channels, eta, form),
        ap_powers=state.ap_powers(),
        theta_residual=_theta_residual(state.theta),
        symbols=symbols,
    )
    if not (math.isfinite(record.sum_rate) and math.isfinite(record.surrogate)):
        raise InvariantViolationError(
            f"non-finite trace at iteration {index}: R_sum={record.sum_rate}, R_o={record.surrogate}"
        )
    return record


def record_setup(ledger: SignalingLedger, channels: ChannelSet, share_cascade: bool = True) -> None:
    """Every AP reports its direct CSI and, with an RIS, its cascade CSI."""
    B, K, Nt, M = channels.num_aps, channels.num_users, channels.antennas, channels.ris_elements
    for b in range(B):
        ledger.record(b, CPU, MessageKind.csi_direct, Nt * K, 0)
        if share_cascade:
            ledger.record(b, CPU, MessageKind.csi_cascade, M * Nt * K, 0)


def alternate(
    method: MethodId,
    channels: ChannelSet,
    state: BeamState,
    eta: np.ndarray,
    options: OrchestratorOptions,
    active_step: ActiveStep,
    form: MseForm,
    optimize_theta: bool = True,
    ledger: Optional[SignalingLedger] = None,
    broadcast_symbols: Optional[int] = None,
) -> Tuple[BeamState, SolveReport]:
    """Alternating optimization loop shared by all iterative schemes.

    With `broadcast_symbols` set, each iteration writes the CPU broadcast and the
    per-AP beamformer uploads to the ledger.
    """
    started = time.perf_counter()
    ledger = ledger if ledger is not None else SignalingLedger()
    B, K, Nt = channels.num_aps, channels.num_users, channels.antennas
    trace = [trace_record(0, state, channels, eta, form, 0)]
    converged = False
    iteration = 0

    for iteration in range(1, options.max_iterations + 1):
        symbols = 0
        if broadcast_symbols is not None:
            for b in range(B):
                ledger.record(CPU, b, MessageKind.broadcast_u_omega_theta, broadcast_symbols, iteration, fanout=B)
            symbols += broadcast_symbols

        state = state.with_(active=active_step(state))

        if broadcast_symbols is not None:
            for b in range(B):
                symbols += ledger.record(b, CPU, MessageKind.active_beamformer, Nt * K, iteration).symbols

        state = refresh_receivers(state, channels, form)
        if optimize_theta:
            q = assemble_passive_quadratic(state, channels, eta, form)
            theta, pdiag = solve_passive(q, state.theta, options.passive)
            state = state.with_(theta=theta)
            logger.debug(
                f"{method.value} iteration {iteration}: phase update {pdiag.iterations} steps, "
                f"residual {pdiag.final_gradient_residual:.3e}"
            )

        record = trace_record(iteration, state, channels, eta, form, symbols)
        previous = trace[-1]
        slack = max(1e-8, 1e-12 * abs(previous.surrogate))
        if record.surrogate < previous.surrogate - slack:
            raise InvariantViolationError(
                f"{method.value}: surrogate decreased from {previous.surrogate:.12g} "
                f"to {record.surrogate:.12g} at iteration {iteration}"
            )
        trace.append(record)
        logger.debug(f"{method.value} iteration {iteration}: R_sum={record.sum_rate:.6f}, R_o={record.surrogate:.6f}")

        if abs(record.sum_rate - previous.sum_rate) < options.eps:
            converged = True
            break

    if not converged:
        logger.warning(f"{method.value} stopped at the iteration cap ({options.max_iterations})")

    finalized = False
    if options.finalize_unit_modulus and optimize_theta:
        state = refresh_receivers(state.with_(theta=extract_phases(state.theta)), channels, form)
        finalized = True

    report = SolveReport(
        method=method,
        mse_form=form,
        dimensions=dict(B=B, Nt=Nt, K=K, M=channels.ris_elements),
        trace=trace,
        iterations_used=iteration,
        ledger=ledger,
        converged=converged,
        final=rate_report(state, channels, eta, form),
        wall_time=time.perf_counter() - started,
        finalized_unit_modulus=finalized,
    )
    logger.info(
        f"{method.value} finished: R_sum={report.sum_rate:.4f} bits/s/Hz after "
        f"{report.iterations_used} iterations (converged={converged})"
    )
    return state, report


def run_partially_distributed(
    config: ScenarioConfig,
    channels: ChannelSet,
    options: Optional[OrchestratorOptions] = None,
    seed: Optional[int] = None,
    fixed_theta: Optional[np.ndarray] = None,
    method: MethodId = MethodId.pd_with_ris,
) -> Tuple[BeamState, SolveReport]:
    """Run the partially distributed scheme.

    With `fixed_theta` the phases are held and only (f, u, omega) alternate.
    A channel set without reflected path exchanges no cascade CSI and no phases.
    """
    options = options or OrchestratorOptions.from_config(config)
    seed = config.seed if seed is None else seed
    eta, p_max, form = config.weights, config.p_max_mw, options.mse_form
    K, M = channels.num_users, channels.ris_elements

    has_ris = bool(np.any(channels.cascade))
    if fixed_theta is not None:
        theta = np.asarray(fixed_theta, dtype=complex)
    else:
        theta = initial_theta(M, options.theta_init, seed)
    phases_shared = M if has_ris else 0

    ledger = SignalingLedger()
    record_setup(ledger, channels, share_cascade=has_ris)
    state = initial_state(channels, p_max, theta, form)
    step = local_active_step(channels, eta, p_max, form, workers=options.ap_workers)
    return alternate(
        method, channels, state, eta, options, step, form,
        optimize_theta=fixed_theta is None and has_ris,
        ledger=ledger,
        broadcast_symbols=phases_shared + 2 * K,
    )
