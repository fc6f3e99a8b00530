"""Rates, per-user MSE and the closed-form (u, omega) updates of the WMMSE surrogate.

Every MSE form shares one shape,

    mse_k = |u_k|^2 D_k - 2 Re{conj(u_k) S_k} + 1,   S_k = sum_b h~_{b,k}^H f_{b,k},

and only the quadratic D_k - sigma^2 differs (see MseForm). The omega update of the
per-AP form inverts the per-AP signal energy rather than |S_k|^2, so omega_k mse_k = 1
holds for it only with a single serving AP. Rates always use the coherent SINR.
R_sum is in bits, the surrogate R_o in nats.
"""

from typing import Optional
import logging

import numpy as np

from app.core.exceptions import DimensionMismatchError, InvariantViolationError
from app.models.models import MseForm
from app.models.state import BeamState, ChannelSet, RateReport

logger = logging.getLogger(__name__)

FIXED_POINT_TOL = 1e-10


def link_gains(state: BeamState, channels: ChannelSet) -> np.ndarray:
    """g[b, k, j] = h~_{b,k}^H f_{b,j}, shape (B, K, K)."""
    if state.active.shape != channels.direct.shape:
        raise DimensionMismatchError(
            f"beamformers {state.active.shape} do not match channels {channels.direct.shape}"
        )
    h_eff = channels.effective(state.theta)
    return np.einsum("bkn,bjn->bkj", h_eff.conj(), state.active)


def _signal(gains: np.ndarray) -> np.ndarray:
    return np.einsum("bkk->k", gains)


def _quadratic(gains: np.ndarray, form: MseForm) -> np.ndarray:
    if form == MseForm.coherent:
        return np.sum(np.abs(gains.sum(axis=0)) ** 2, axis=1)
    per_ap = np.sum(np.abs(gains) ** 2, axis=(0, 2))
    if form == MseForm.per_ap_bounded:
        return gains.shape[0] * per_ap
    return per_ap


def quadratic_scale(form: MseForm, num_aps: int) -> float:
    """Multiplier on the per-AP quadratic (not defined for the coherent form)."""
    return float(num_aps) if form == MseForm.per_ap_bounded else 1.0


def _terms(state: BeamState, channels: ChannelSet, form: MseForm):
    gains = link_gains(state, channels)
    return _signal(gains), _quadratic(gains, form) + channels.noise_power


def sinr_all(state: BeamState, channels: ChannelSet) -> np.ndarray:
    coherent = np.abs(link_gains(state, channels).sum(axis=0)) ** 2
    desired = np.diag(coherent)
    interference = coherent.sum(axis=1) - desired
    return desired / (interference + channels.noise_power)


def sinr(k: int, state: BeamState, channels: ChannelSet) -> float:
    """Coherent SINR of user k."""
    return float(sinr_all(state, channels)[k])


def user_rates(state: BeamState, channels: ChannelSet) -> np.ndarray:
    return np.log2(1.0 + sinr_all(state, channels))


def weighted_sum_rate(state: BeamState, channels: ChannelSet, eta: np.ndarray) -> float:
    return float(np.dot(np.asarray(eta, dtype=float), user_rates(state, channels)))


def mse_all(state: BeamState, channels: ChannelSet, form: MseForm = MseForm.per_ap) -> np.ndarray:
    signal, denom = _terms(state, channels, form)
    u = state.aux
    return np.abs(u) ** 2 * denom - 2.0 * np.real(np.conj(u) * signal) + 1.0


def mse(k: int, state: BeamState, channels: ChannelSet, form: MseForm = MseForm.per_ap) -> float:
    return float(mse_all(state, channels, form)[k])


def update_u(state: BeamState, channels: ChannelSet, form: MseForm = MseForm.per_ap) -> np.ndarray:
    """Minimizer of each mse_k over u_k with everything else fixed."""
    signal, denom = _terms(state, channels, form)
    return signal / denom


def optimal_mse(state: BeamState, channels: ChannelSet, form: MseForm = MseForm.per_ap) -> np.ndarray:
    """mse_k at the optimal u_k: 1 - |S_k|^2 / D_k."""
    signal, denom = _terms(state, channels, form)
    return 1.0 - np.abs(signal) ** 2 / denom


def weight_mse(state: BeamState, channels: ChannelSet, form: MseForm = MseForm.per_ap) -> np.ndarray:
    """MSE inverted by the omega update.

    The per-AP form counts the desired signal AP by AP,

        1 - sum_b |h~_{b,k}^H f_{b,k}|^2 / D_k,

    which lies in (0, 1] and equals optimal_mse when a single AP serves user k.
    The other forms use optimal_mse.
    """
    if form != MseForm.per_ap:
        return optimal_mse(state, channels, form)
    gains = link_gains(state, channels)
    energy = np.sum(np.abs(np.einsum("bkk->bk", gains)) ** 2, axis=0)
    return 1.0 - energy / (_quadratic(gains, form) + channels.noise_power)


def update_omega(state: BeamState, channels: ChannelSet, form: MseForm = MseForm.per_ap) -> np.ndarray:
    """omega_k = 1 / weight_mse_k, with u already at its optimum."""
    direct = mse_all(state, channels, form)
    mismatch = np.abs(direct - optimal_mse(state, channels, form))
    if np.any(mismatch > FIXED_POINT_TOL * np.maximum(1.0, np.abs(direct) + 1.0)):
        raise InvariantViolationError(
            f"u is not at its optimum: closed-form and direct MSE differ by {mismatch.max():.3e}"
        )
    target = weight_mse(state, channels, form)
    if np.any(target <= 0) or not np.all(np.isfinite(target)):
        raise InvariantViolationError(
            f"weight MSE must be positive, got {target.tolist()} (form={form.value})"
        )
    return 1.0 / target


def surrogate_objective(
    state: BeamState,
    channels: ChannelSet,
    eta: np.ndarray,
    form: MseForm = MseForm.per_ap,
) -> float:
    """R_o = sum_k eta_k (ln omega_k - omega_k mse_k + 1), in nats."""
    omega = state.weights
    if np.any(omega <= 0):
        raise InvariantViolationError(f"weights must be positive, got {omega.tolist()}")
    terms = np.log(omega) - omega * mse_all(state, channels, form) + 1.0
    return float(np.dot(np.asarray(eta, dtype=float), terms))


def refresh_receivers(state: BeamState, channels: ChannelSet, form: MseForm) -> BeamState:
    """Apply the u update and then the omega update."""
    state = state.with_(aux=update_u(state, channels, form))
    return state.with_(weights=update_omega(state, channels, form))


def rate_report(
    state: BeamState,
    channels: ChannelSet,
    eta: np.ndarray,
    form: Optional[MseForm] = MseForm.per_ap,
) -> RateReport:
    sinrs = sinr_all(state, channels)
    rates = np.log2(1.0 + sinrs)
    surrogate = surrogate_objective(state, channels, eta, form) if form is not None else float("nan")
    return RateReport(
        per_user_sinr=sinrs,
        per_user_rate=rates,
        weighted_sum_rate=float(np.dot(np.asarray(eta, dtype=float), rates)),
        surrogate=surrogate,
    )
