"""Comparison schemes: centralized WMMSE, random/no RIS variants, local ZF and MRT."""

from typing import Optional, Tuple
import logging
import math
import time

import numpy as np

from app.core.exceptions import DegenerateChannelError
from app.models.ledger import CPU, MessageKind, SignalingLedger, SolveReport
from app.models.models import MethodId, MseForm
from app.models.scenario import ScenarioConfig
from app.models.state import BeamState, ChannelSet
from app.services.orchestrator import (
    OrchestratorOptions, alternate, initial_state, initial_theta, record_setup,
    run_partially_distributed, trace_record,
)
from app.utils.active_bf import centralized_active_update
from app.utils.channel import random_phases
from app.utils.wmmse import rate_report, refresh_receivers

logger = logging.getLogger(__name__)


def mrt_beamformers(channels: ChannelSet, p_max: float) -> np.ndarray:
    """f_{b,k} = sqrt(p_max/K) h_{b,k} / ||h_{b,k}|| on the direct channel."""
    K = channels.num_users
    norms = np.linalg.norm(channels.direct, axis=2, keepdims=True)
    if np.any(norms == 0):
        b, k = np.argwhere(norms[..., 0] == 0)[0]
        raise DegenerateChannelError(f"direct channel of AP {b} to user {k} is zero")
    return math.sqrt(p_max / K) * channels.direct / norms


def zf_beamformers(channels: ChannelSet, p_max: float) -> np.ndarray:
    """Local zero forcing per AP: columns of H_b (H_b^H H_b)^-1, each scaled to sqrt(p_max/K)."""
    B, K, Nt = channels.direct.shape
    if Nt < K:
        raise DegenerateChannelError(f"zero forcing needs N_t >= K, got N_t={Nt}, K={K}")
    active = np.empty_like(channels.direct)
    for b in range(B):
        rows = channels.direct[b]          # (K, N_t), row k = h_{b,k}^T
        if np.linalg.matrix_rank(rows) < K:
            raise DegenerateChannelError(f"local channel of AP {b} is rank deficient")
        gram = rows.conj() @ rows.T        # h_{b,k}^H h_{b,j}
        # columns of H_b gram^-1, stored as rows
        F = np.linalg.solve(gram.T, rows)
        active[b] = math.sqrt(p_max / K) * F / np.linalg.norm(F, axis=1, keepdims=True)
    return active


def _one_shot(method: MethodId, channels: ChannelSet, active: np.ndarray, eta: np.ndarray) -> Tuple[BeamState, SolveReport]:
    started = time.perf_counter()
    K = channels.num_users
    state = BeamState(
        active=active,
        theta=np.ones(channels.ris_elements, dtype=complex),
        aux=np.zeros(K, dtype=complex),
        weights=np.ones(K),
    )
    state = refresh_receivers(state, channels, MseForm.coherent)
    report = SolveReport(
        method=method,
        mse_form=None,
        dimensions=dict(B=channels.num_aps, Nt=channels.antennas, K=K, M=channels.ris_elements),
        trace=[trace_record(0, state, channels, eta, MseForm.coherent, 0)],
        iterations_used=0,
        ledger=SignalingLedger(),
        converged=True,
        final=rate_report(state, channels, eta, None),
        wall_time=time.perf_counter() - started,
    )
    return state, report


def run_centralized(
    config: ScenarioConfig,
    channels: ChannelSet,
    options: OrchestratorOptions,
    seed: int,
) -> Tuple[BeamState, SolveReport]:
    """CPU-side WMMSE on the exact coherent MSE; beamformers are delivered once at the end."""
    eta, p_max, form = config.weights, config.p_max_mw, MseForm.coherent
    ledger = SignalingLedger()
    record_setup(ledger, channels)
    theta = initial_theta(channels.ris_elements, options.theta_init, seed)
    state = initial_state(channels, p_max, theta, form)

    def step(snapshot: BeamState) -> np.ndarray:
        return centralized_active_update(snapshot, channels, eta, p_max, options.centralized_inner_passes)

    state, report = alternate(MethodId.centralized_with_ris, channels, state, eta, options, step, form, ledger=ledger)
    Nt, K = channels.antennas, channels.num_users
    for b in range(channels.num_aps):
        ledger.record(CPU, b, MessageKind.final_beamformer, Nt * K, report.iterations_used)
    return state, report


def run_baseline(
    method: MethodId,
    config: ScenarioConfig,
    channels: ChannelSet,
    options: Optional[OrchestratorOptions] = None,
    seed: Optional[int] = None,
) -> Tuple[BeamState, SolveReport]:
    """Run one comparison scheme on a channel realization. Rates use the coherent SINR."""
    options = options or OrchestratorOptions.from_config(config)
    seed = config.seed if seed is None else seed
    method = MethodId(method)
    logger.debug(f"Running {method.value} for seed {seed}")

    if method == MethodId.pd_with_ris:
        return run_partially_distributed(config, channels, options, seed)
    if method == MethodId.centralized_with_ris:
        return run_centralized(config, channels, options, seed)
    if method == MethodId.pd_random_ris:
        phases = random_phases(channels.ris_elements, seed)
        return run_partially_distributed(config, channels, options, seed, fixed_theta=phases, method=method)
    if method == MethodId.pd_no_ris:
        return run_partially_distributed(config, channels.without_ris(), options, seed, method=method)

    local = channels.without_ris()
    if method == MethodId.zf_no_ris:
        active = zf_beamformers(local, config.p_max_mw)
    else:
        active = mrt_beamformers(local, config.p_max_mw)
    return _one_shot(method, local, active, config.weights)
