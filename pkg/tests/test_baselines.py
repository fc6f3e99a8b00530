import numpy as np
import pytest

from app.core.exceptions import DegenerateChannelError
from app.models import BeamState, MessageKind, MethodId
from app.services.baselines import mrt_beamformers, run_baseline, zf_beamformers
from app.services.orchestrator import signaling_formula
from app.utils.channel import generate_channels, random_phases
from app.utils.wmmse import sinr_all
from conftest import cn, manual_channels


def test_mrt_power_and_direction(small_channels):
    active = mrt_beamformers(small_channels, 10.0)
    assert np.allclose(np.sum(np.abs(active) ** 2, axis=(1, 2)), 10.0)
    for b in range(small_channels.num_aps):
        for k in range(small_channels.num_users):
            h = small_channels.direct[b, k]
            cos = abs(np.vdot(h, active[b, k])) / (np.linalg.norm(h) * np.linalg.norm(active[b, k]))
            assert cos == pytest.approx(1.0)


def test_mrt_single_user_reaches_matched_filter_sinr(rng):
    h = cn(rng, 1, 1, 3)
    channels = manual_channels(h, noise_power=0.3)
    active = mrt_beamformers(channels, 2.0)
    state = BeamState(active=active, theta=np.ones(1), aux=np.zeros(1), weights=np.ones(1))
    assert sinr_all(state, channels)[0] == pytest.approx(2.0 * np.linalg.norm(h) ** 2 / 0.3)


def test_mrt_rejects_zero_channel():
    direct = np.ones((1, 2, 2), dtype=complex)
    direct[0, 1] = 0
    with pytest.raises(DegenerateChannelError):
        mrt_beamformers(manual_channels(direct), 1.0)


def test_zf_nulls_intra_ap_interference(small_channels):
    active = zf_beamformers(small_channels, 10.0)
    assert np.allclose(np.sum(np.abs(active) ** 2, axis=(1, 2)), 10.0)
    for b in range(small_channels.num_aps):
        h, f = small_channels.direct[b], active[b]
        cross = np.abs(h.conj() @ f.T) / np.outer(np.linalg.norm(h, axis=1), np.linalg.norm(f, axis=1))
        assert np.all(cross[~np.eye(2, dtype=bool)] <= 1e-10)
        assert np.all(np.diag(cross) > 0)


def test_zf_single_user_is_mrt(rng):
    channels = manual_channels(cn(rng, 2, 1, 4))
    assert np.allclose(zf_beamformers(channels, 3.0), mrt_beamformers(channels, 3.0))


def test_zf_rejects_degenerate_channels(rng):
    h = cn(rng, 3)
    with pytest.raises(DegenerateChannelError):
        zf_beamformers(manual_channels(np.stack([h, 2j * h])[None]), 1.0)
    with pytest.raises(DegenerateChannelError):
        zf_beamformers(manual_channels(cn(rng, 1, 3, 2)), 1.0)


@pytest.mark.parametrize("method", [MethodId.zf_no_ris, MethodId.mrt_no_ris])
def test_one_shot_reports(small_config, small_channels, method):
    _, report = run_baseline(method, small_config, small_channels)
    assert report.iterations_used == 0
    assert report.ledger.is_empty()
    assert report.mse_form is None
    assert len(report.trace) == 1
    assert report.sum_rate > 0
    assert np.isnan(report.final.surrogate)


def test_no_ris_run_ignores_surface_size(small_config):
    rates = []
    for M in (4, 8):
        config = small_config.with_overrides(ris_elements=M, max_iterations=10)
        channels = generate_channels(config, seed=5)
        rates.append(run_baseline(MethodId.pd_no_ris, config, channels, seed=5)[1].sum_rate)
    assert rates[0] == pytest.approx(rates[1], rel=1e-12)


def test_random_surface_keeps_its_phases(small_config, small_channels):
    state, report = run_baseline(MethodId.pd_random_ris, small_config, small_channels, seed=9)
    assert np.array_equal(state.theta, random_phases(small_channels.ris_elements, 9))
    assert report.method == MethodId.pd_random_ris


def test_centralized_ledger_and_trace(small_config, small_channels):
    _, report = run_baseline(MethodId.centralized_with_ris, small_config, small_channels)
    totals = report.ledger.totals_by_kind()
    assert totals[MessageKind.final_beamformer.value] == 2 * 3 * 2
    assert MessageKind.broadcast_u_omega_theta.value not in totals
    assert report.ledger.formula_total == signaling_formula(2, 3, 2, 4, 0)
    surrogates = [r.surrogate for r in report.trace]
    assert all(b >= a - 1e-8 for a, b in zip(surrogates, surrogates[1:]))


def test_every_method_respects_the_power_budget(small_config, small_channels):
    for method in MethodId:
        _, report = run_baseline(method, small_config, small_channels)
        for record in report.trace:
            assert np.all(record.ap_powers <= small_config.p_max_mw * (1 + 1e-9)), method
