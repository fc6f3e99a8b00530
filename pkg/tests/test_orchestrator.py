import math

import numpy as np
import pytest

from app.core.exceptions import DegenerateChannelError
from app.models import MessageKind, MethodId, MseForm, ScenarioConfig, ThetaInit
from app.models.ledger import CPU, SignalingLedger
from app.services.orchestrator import (
    OrchestratorOptions, admm_signaling_formula, complexity_estimate, initial_state, initial_theta,
    run_partially_distributed, signaling_formula,
)
from conftest import manual_channels


@pytest.mark.parametrize(
    "dims, iterations, expected",
    [((5, 8, 4, 100), 10, 3000), ((5, 8, 4, 100), 0, 320), ((1, 1, 1, 1), 1, 6)],
)
def test_signaling_formula(dims, iterations, expected):
    assert signaling_formula(*dims, iterations) == expected


def test_admm_and_complexity_formulas():
    assert admm_signaling_formula(5, 8, 4, 100, 10) == 35800
    assert complexity_estimate(1, 1, 1, 1, 1) == 2.0
    assert complexity_estimate(5, 8, 4, 100, 10) == pytest.approx(1.016384e8)
    assert complexity_estimate(5, 8, 4, 100, 20) == 2 * complexity_estimate(5, 8, 4, 100, 10)


def test_options_from_config(small_config):
    options = OrchestratorOptions.from_config(small_config, ap_workers=None, eps=0.5)
    assert options.ap_workers == 1
    assert options.eps == 0.5
    assert options.max_iterations == small_config.max_iterations
    assert options.mse_form == MseForm.per_ap


def test_single_iteration_ledger(small_config, small_channels):
    options = OrchestratorOptions.from_config(small_config, eps=math.inf)
    _, report = run_partially_distributed(small_config, small_channels, options)
    B, Nt, K, M = 2, 3, 2, 4
    assert report.iterations_used == 1
    assert report.converged
    assert len(report.trace) == 2
    assert report.ledger.totals_by_kind() == {
        MessageKind.csi_direct.value: B * Nt * K,
        MessageKind.csi_cascade.value: B * M * Nt * K,
        MessageKind.broadcast_u_omega_theta.value: B * (M + 2 * K),
        MessageKind.active_beamformer.value: B * Nt * K,
    }
    assert report.ledger.formula_total == signaling_formula(B, Nt, K, M, 1) == 44
    assert report.ledger.actual_total == 88
    assert report.trace[1].symbols == M + 2 * K + B * Nt * K
    assert report.ledger.totals_by_iteration(formula=True) == {0: 2 * B * Nt * K, 1: M + 2 * K + B * Nt * K}


def test_run_is_monotone_feasible_and_matches_formula(small_config, small_channels):
    _, report = run_partially_distributed(small_config, small_channels)
    surrogates = [r.surrogate for r in report.trace]
    assert all(b >= a - 1e-8 for a, b in zip(surrogates, surrogates[1:]))
    assert all(np.all(r.ap_powers <= small_config.p_max_mw * (1 + 1e-9)) for r in report.trace)
    assert all(r.theta_residual <= 1e-12 for r in report.trace)
    assert report.iterations_used <= small_config.max_iterations
    assert report.ledger.formula_total == signaling_formula(2, 3, 2, 4, report.iterations_used)


def test_parallel_ap_solves_are_bit_identical(small_config, small_channels):
    sequential, a = run_partially_distributed(small_config, small_channels, OrchestratorOptions.from_config(small_config))
    threaded, b = run_partially_distributed(
        small_config, small_channels, OrchestratorOptions.from_config(small_config, ap_workers=2)
    )
    assert np.array_equal(sequential.active, threaded.active)
    assert np.array_equal(sequential.theta, threaded.theta)
    assert a.sum_rate == b.sum_rate


def test_fixed_phases_are_not_touched(small_config, small_channels):
    phases = np.exp(1j * np.linspace(0, 3, small_channels.ris_elements))
    state, report = run_partially_distributed(small_config, small_channels, fixed_theta=phases)
    assert np.array_equal(state.theta, phases)
    assert report.ledger.formula_total == signaling_formula(2, 3, 2, 4, report.iterations_used)


def test_without_ris_broadcasts_no_phases(small_config, small_channels):
    _, report = run_partially_distributed(small_config, small_channels.without_ris(), method=MethodId.pd_no_ris)
    totals = report.ledger.totals_by_kind()
    assert MessageKind.csi_cascade.value not in totals
    assert totals[MessageKind.broadcast_u_omega_theta.value] == 2 * (2 * 2) * report.iterations_used
    assert report.method == MethodId.pd_no_ris


def test_unit_modulus_finalize(small_config, small_channels):
    config = small_config.with_overrides(finalize_unit_modulus=True)
    state, report = run_partially_distributed(config, small_channels)
    assert report.finalized_unit_modulus
    assert np.allclose(np.abs(state.theta), 1.0)


def test_initial_theta_and_state(small_channels):
    ones = initial_theta(4, ThetaInit.ones, seed=0)
    assert np.array_equal(ones, np.ones(4))
    random = initial_theta(4, ThetaInit.random, seed=0)
    assert np.allclose(np.abs(random), 1.0)

    state = initial_state(small_channels, 100.0, ones, MseForm.per_ap_bounded)
    assert np.allclose(state.ap_powers(), 100.0)
    assert np.all(state.weights > 0)


def test_initial_state_rejects_zero_channel():
    channels = manual_channels(np.zeros((1, 1, 2)))
    with pytest.raises(DegenerateChannelError):
        initial_state(channels, 1.0, np.ones(1, dtype=complex), MseForm.per_ap_bounded)


def test_ledger_record_rejects_negative_symbols():
    with pytest.raises(ValueError):
        SignalingLedger().record(0, CPU, MessageKind.csi_direct, -1, 0)
    with pytest.raises(ValueError):
        SignalingLedger().record(CPU, 0, MessageKind.broadcast_u_omega_theta, 3, 1, fanout=0)


def test_broadcast_reaches_every_ap_and_counts_once(small_config, small_channels):
    options = OrchestratorOptions.from_config(small_config, eps=math.inf)
    _, report = run_partially_distributed(small_config, small_channels, options)
    broadcasts = [m for m in report.ledger.messages if m.kind == MessageKind.broadcast_u_omega_theta]
    assert sorted(m.receiver for m in broadcasts) == [0, 1]
    assert all(m.sender == CPU and m.symbols == 4 + 2 * 2 and m.fanout == 2 for m in broadcasts)
    assert sum(m.formula_symbols for m in broadcasts) == 4 + 2 * 2

    ledger = SignalingLedger()
    for b in range(3):
        ledger.record(CPU, b, MessageKind.broadcast_u_omega_theta, 7, 1, fanout=3)
    assert ledger.formula_total == 7
    assert ledger.actual_total == 21
    assert ledger.totals_by_iteration(formula=True) == {1: 7}


def test_single_user_reaches_phase_aligned_capacity():
    h = np.array([1.0, 0.5j])
    G = np.array([0.8, -0.3 + 0.4j])
    noise = 4.0
    channels = manual_channels(h[None, None, :], ap_ris=G[None, None, :], ris_user=[[1.0]], noise_power=noise)
    config = ScenarioConfig(
        num_aps=1, antennas_per_ap=2, num_users=1, ris_elements=1,
        ap_positions=[(0.0, -50.0)], p_max_dbm=0.0,
    )
    options = OrchestratorOptions.from_config(config, eps=1e-12, max_iterations=2000)
    _, report = run_partially_distributed(config, channels, options)

    phases = np.exp(1j * np.linspace(0.0, 2 * np.pi, 10000, endpoint=False))
    gains = np.linalg.norm(h[None, :] + np.conj(G)[None, :] * phases[:, None], axis=1) ** 2
    capacity = math.log2(1.0 + config.p_max_mw * gains.max() / noise)
    assert report.sum_rate == pytest.approx(capacity, abs=1e-3)
