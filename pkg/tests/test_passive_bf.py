import numpy as np
import pytest

from app.core.exceptions import DimensionMismatchError
from app.models import BeamState, MseForm
from app.utils.passive_bf import (
    PassiveOptions, PassiveQuadratic, assemble_passive_quadratic, extract_phases,
    lipschitz_estimate, passive_objective, project_ball, solve_passive,
)
from app.utils.wmmse import mse_all
from conftest import cn, manual_channels, random_channels, random_state


def _random_psd(rng, M, floor=0.1):
    X = cn(rng, M, M)
    return X @ X.conj().T / M + floor * np.eye(M)


def _long_run(q, rng, restarts=20, steps=5000):
    """Plain projected gradient from random starts."""
    M = q.linear.shape[0]
    step = 1.0 / (2.0 * np.linalg.eigvalsh(q.hessian).max())
    best = np.inf
    for _ in range(restarts):
        theta = project_ball(cn(rng, M))
        for _ in range(steps):
            theta = project_ball(theta - step * 2.0 * (q.hessian @ theta - q.linear))
        best = min(best, passive_objective(q, theta))
    return best


def test_zero_beamformers_give_zero_quadratic(rng):
    ch = random_channels(rng, M=3)
    state = random_state(ch, rng).with_(active=np.zeros((2, 2, 2), dtype=complex))
    q = assemble_passive_quadratic(state, ch, np.ones(2))
    assert np.all(q.hessian == 0)
    assert np.all(q.linear == 0)


def test_scalar_hand_expansion():
    h, G, v = 0.3 - 0.2j, 0.8 + 0.1j, 0.5 + 0.4j
    ch = manual_channels([[[h]]], ap_ris=[[[G]]], ris_user=[[v]], noise_power=0.2)
    f, u, w = 1.1 - 0.3j, 0.7 + 0.2j, 1.8
    state = BeamState(active=[[[f]]], theta=[1.0 + 0j], aux=[u], weights=[w])
    q_scalar = np.conj(v) * G
    a = q_scalar * f                       # theta-coefficient of h~^H f
    d = np.conj(h) * f
    pq = assemble_passive_quadratic(state, ch, np.ones(1))
    assert pq.hessian[0, 0] == pytest.approx(w * abs(u) ** 2 * abs(a) ** 2)
    assert pq.linear[0] == pytest.approx(w * np.conj(u) * a - w * abs(u) ** 2 * a * np.conj(d))


@pytest.mark.parametrize("form", list(MseForm))
def test_quadratic_matches_weighted_mse(rng, form):
    ch = random_channels(rng, B=3, K=2, Nt=2, M=4)
    eta = np.array([0.7, 1.9])
    state = random_state(ch, rng)
    q = assemble_passive_quadratic(state, ch, eta, form)
    assert np.allclose(q.hessian, q.hessian.conj().T)
    assert np.linalg.eigvalsh(q.hessian).min() >= -1e-10 * np.abs(q.hessian).max()
    for _ in range(100):
        theta = cn(rng, 4)
        direct = float(np.sum(eta * state.weights * mse_all(state.with_(theta=theta), ch, form)))
        model = passive_objective(q, theta) + q.constant
        assert abs(model - direct) <= 1e-9 * max(1.0, abs(direct))


def test_project_ball():
    inside = np.array([0.5, 0.3j, 0.0])
    assert np.array_equal(project_ball(inside), inside)
    assert project_ball(np.array([2.0]))[0] == pytest.approx(1.0)
    assert project_ball(np.array([2 * np.exp(1j * np.pi / 3)]))[0] == pytest.approx(np.exp(1j * np.pi / 3))


def test_extract_phases():
    out = extract_phases(np.array([0.0, 0.5j, -3.0]))
    assert np.allclose(out, [1.0, 1j, -1.0])


def test_lipschitz_known_spectra(rng):
    assert lipschitz_estimate(np.eye(4, dtype=complex)) == pytest.approx(1.01, rel=1e-6)
    embedded = np.zeros((7, 7), dtype=complex)
    embedded[:5, :5] = np.diag(np.arange(1.0, 6.0))
    assert lipschitz_estimate(embedded) == pytest.approx(5.05, rel=1e-3)
    assert lipschitz_estimate(np.zeros((3, 3))) == 0.0


def test_lipschitz_brackets_largest_eigenvalue(rng):
    U, _ = np.linalg.qr(cn(rng, 6, 6))
    Q = U @ np.diag(np.linspace(1.0, 8.0, 6)) @ U.conj().T
    Q = 0.5 * (Q + Q.conj().T)
    estimate = lipschitz_estimate(Q)
    lam = np.linalg.eigvalsh(Q).max()
    assert lam <= estimate <= 1.02 * lam


def test_identity_interior_optimum():
    p = np.array([0.3, -0.2j, 0.5 + 0.5j])
    theta, diag = solve_passive(PassiveQuadratic(np.eye(3, dtype=complex), p), np.ones(3, dtype=complex))
    assert diag.converged
    assert np.allclose(theta, p, atol=1e-6)


def test_identity_boundary_optimum():
    phi = 1.2
    p = np.array([3 * np.exp(1j * phi), 0.0, 0.0])
    theta, _ = solve_passive(PassiveQuadratic(np.eye(3, dtype=complex), p), np.zeros(3, dtype=complex))
    assert np.allclose(theta, [np.exp(1j * phi), 0.0, 0.0], atol=1e-6)


def test_random_instance_against_long_run(rng):
    M = 8
    q = PassiveQuadratic(_random_psd(rng, M), 2.0 * cn(rng, M))
    theta, diag = solve_passive(q, np.ones(M, dtype=complex))
    assert diag.converged
    assert np.all(np.abs(theta) <= 1 + 1e-12)
    assert passive_objective(q, theta) <= _long_run(q, rng) + 1e-6

    gradient = 2.0 * (q.hessian @ theta - q.linear)
    boundary = np.abs(theta) > 1 - 1e-6
    # on the boundary the gradient points inward along -theta
    aligned = np.real(np.conj(gradient[boundary]) * theta[boundary])
    assert np.all(aligned <= 1e-4)
    assert np.all(np.abs(gradient[~boundary]) <= 1e-4)


def test_objective_trace_is_monotone(rng):
    M = 12
    X = cn(rng, M, 3)
    q = PassiveQuadratic(X @ X.conj().T, 4.0 * cn(rng, M))
    theta, diag = solve_passive(q, cn(rng, M), PassiveOptions(max_iters=500))
    trace = np.array(diag.objective_trace)
    assert np.all(np.diff(trace) <= 1e-10 * np.maximum(1.0, np.abs(trace[:-1])))
    assert np.all(np.abs(theta) <= 1 + 1e-12)
    assert diag.lipschitz_estimate > 0


def test_zero_hessian_moves_to_phase_of_linear_term():
    p = np.array([0.5j, -2.0])
    theta, _ = solve_passive(PassiveQuadratic(np.zeros((2, 2), dtype=complex), p), np.zeros(2, dtype=complex))
    assert np.allclose(theta, [1j, -1.0], atol=1e-6)


def test_passive_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        solve_passive(PassiveQuadratic(np.eye(2), np.ones(2)), np.ones(3))


@pytest.mark.parametrize("form", [MseForm.per_ap, MseForm.per_ap_bounded])
def test_solution_never_lowers_surrogate(rng, small_channels, form):
    from app.utils.wmmse import refresh_receivers, surrogate_objective
    eta = np.ones(2)
    state = random_state(small_channels, rng, scale=2.0).with_(theta=np.ones(4, dtype=complex))
    state = refresh_receivers(state, small_channels, form)
    before = surrogate_objective(state, small_channels, eta, form)
    q = assemble_passive_quadratic(state, small_channels, eta, form)
    theta, _ = solve_passive(q, state.theta)
    after = surrogate_objective(state.with_(theta=theta), small_channels, eta, form)
    assert after >= before - 1e-8
