"""Per-AP active beamforming.

With (u, omega, theta) fixed, the weighted sum-MSE restricted to AP b is

    sum_k f_{b,k}^H A_b f_{b,k} - 2 Re{v_{b,k}^H f_{b,k}} + c,

i.e. the block-diagonal Hessian I_K (x) A_b. One N_t x N_t eigendecomposition of
A_b serves every user and every bisection step on the power multiplier.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple
import logging
import math

import numpy as np

from app.core.exceptions import DimensionMismatchError, SolverError
from app.models.models import MseForm
from app.models.state import BeamState, ChannelSet
from app.utils.wmmse import link_gains, quadratic_scale

logger = logging.getLogger(__name__)

BISECTION_TOL = 1e-8
BISECTION_MAX_ITERS = 200
CENTRALIZED_INNER_PASSES = 3


@dataclass(frozen=True)
class LocalQuadratic:
    hessian_block: np.ndarray  # A_b, (N_t, N_t)
    linear: np.ndarray         # v_{b,k} stacked, (K, N_t)
    constant: float

    def objective(self, f_b: np.ndarray) -> float:
        quad = np.real(np.einsum("kn,nm,km->", f_b.conj(), self.hessian_block, f_b))
        lin = np.real(np.vdot(self.linear, f_b))
        return float(quad - 2.0 * lin + self.constant)


@dataclass(frozen=True)
class ActiveSolveDiagnostics:
    multiplier: float
    bisection_iterations: int
    power_used: float
    kkt_residual: float


def _receiver_weights(state: BeamState, eta: np.ndarray) -> np.ndarray:
    return np.asarray(eta, dtype=float) * state.weights


def assemble_local_quadratic(
    b: int,
    state: BeamState,
    channels: ChannelSet,
    eta: np.ndarray,
    form: MseForm = MseForm.per_ap,
) -> LocalQuadratic:
    """Quadratic model of the weighted sum-MSE in the beamformers of AP b.

    For the per-AP forms the model is the separable block and `constant` is the
    shared term sum_k eta_k omega_k (1 + |u_k|^2 sigma^2). For the coherent form
    the other APs' current beamformers enter the linear term, and the constant
    makes the model equal the full objective with those beamformers fixed.
    """
    B, K, Nt = channels.direct.shape
    if not 0 <= b < B:
        raise DimensionMismatchError(f"AP index {b} outside 0..{B - 1}")
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (K,):
        raise DimensionMismatchError(f"eta has shape {eta.shape}, expected {(K,)}")

    h_b = channels.effective(state.theta)[b]  # (K, N_t)
    u = state.aux
    w = _receiver_weights(state, eta)
    curvature = w * np.abs(u) ** 2

    scale = 1.0 if form == MseForm.coherent else quadratic_scale(form, B)
    hessian = scale * (h_b.T * curvature) @ h_b.conj()
    hessian = 0.5 * (hessian + hessian.conj().T)
    linear = (w * u)[:, None] * h_b
    constant = float(np.sum(w * (1.0 + np.abs(u) ** 2 * channels.noise_power)))

    if form == MseForm.coherent:
        gains = link_gains(state, channels)
        others = gains.sum(axis=0) - gains[b]  # r[k, j]: contribution of APs other than b
        linear = linear - np.einsum("k,kj,kn->jn", curvature, others, h_b)
        constant += float(np.sum(
            curvature * np.sum(np.abs(others) ** 2, axis=1)
            - 2.0 * w * np.real(np.conj(u) * np.diag(others))
        ))

    return LocalQuadratic(hessian_block=hessian, linear=linear, constant=constant)


def solve_local_beamformer(
    q: LocalQuadratic,
    p_max: float,
    tol: float = BISECTION_TOL,
    max_iters: int = BISECTION_MAX_ITERS,
) -> Tuple[np.ndarray, ActiveSolveDiagnostics]:
    """min sum_k f_k^H A f_k - 2 Re{v_k^H f_k}  s.t.  sum_k ||f_k||^2 <= p_max.

    Solution f_k = (A + lambda I)^-1 v_k with lambda >= 0 found by bisection.
    """
    if not p_max > 0:
        raise SolverError(f"power budget must be positive, got {p_max}")
    A = 0.5 * (q.hessian_block + q.hessian_block.conj().T)
    V = q.linear
    if A.shape[0] != A.shape[1] or V.shape[1] != A.shape[0]:
        raise DimensionMismatchError(f"hessian {A.shape} and linear {V.shape} disagree")

    eigvals, U = np.linalg.eigh(A)
    spread = float(np.max(np.abs(eigvals))) if eigvals.size else 0.0
    if eigvals.size and eigvals.min() < -1e-10 * max(spread, 1e-300):
        raise SolverError(f"local Hessian is not PSD (min eigenvalue {eigvals.min():.3e})")
    eigvals = np.clip(eigvals, 0.0, None)

    v_norm = float(np.linalg.norm(V))
    if v_norm == 0.0:
        return np.zeros_like(V), ActiveSolveDiagnostics(0.0, 0, 0.0, 0.0)

    W = V @ U.conj()  # rows: U^H v_k
    null = eigvals <= A.shape[0] * np.finfo(float).eps * spread
    energy = np.abs(W) ** 2

    def power(lam: float) -> float:
        return float(np.sum(energy / (eigvals + lam) ** 2))

    def beamformers(lam: float) -> np.ndarray:
        if lam == 0.0:
            X = np.where(null, 0.0, W / np.where(null, 1.0, eigvals))
        else:
            X = W / (eigvals + lam)
        return X @ U.T

    multiplier = None
    iterations = 0
    null_energy = float(np.sum(energy[:, null]))
    if null_energy <= (1e-10 * v_norm) ** 2:
        # minimum-norm stationary point exists; keep it if it is feasible
        unconstrained = float(np.sum(np.where(null, 0.0, energy / np.where(null, 1.0, eigvals) ** 2)))
        if unconstrained <= p_max:
            multiplier = 0.0

    if multiplier is None:
        lo, hi = 0.0, v_norm / math.sqrt(p_max)
        if power(hi) > p_max * (1.0 + 1e-9):
            raise SolverError("bisection bracket failed: upper multiplier is infeasible")
        while power(hi) < p_max * (1.0 - tol):
            if iterations >= max_iters:
                logger.warning(f"Bisection stopped after {iterations} steps, power {power(hi):.6e} of {p_max:.6e}")
                break
            mid = 0.5 * (lo + hi)
            iterations += 1
            if power(mid) > p_max:
                lo = mid
            else:
                hi = mid
        multiplier = hi

    F = beamformers(multiplier)
    residual = F @ A.T + multiplier * F - V  # rows: (A + lambda I) f_k - v_k
    row_norms = np.linalg.norm(V, axis=1)
    rel = np.linalg.norm(residual, axis=1) / np.where(row_norms > 0, row_norms, 1.0)
    diagnostics = ActiveSolveDiagnostics(
        multiplier=float(multiplier),
        bisection_iterations=iterations,
        power_used=float(np.sum(np.abs(F) ** 2)),
        kkt_residual=float(rel.max()),
    )
    return F, diagnostics


def solve_all_local(
    state: BeamState,
    channels: ChannelSet,
    eta: np.ndarray,
    p_max: float,
    form: MseForm = MseForm.per_ap,
) -> Tuple[np.ndarray, List[ActiveSolveDiagnostics]]:
    """Every AP solves its own block from the same snapshot."""
    blocks = [
        solve_local_beamformer(assemble_local_quadratic(b, state, channels, eta, form), p_max)
        for b in range(channels.num_aps)
    ]
    return np.stack([f for f, _ in blocks]), [d for _, d in blocks]


def centralized_active_update(
    state: BeamState,
    channels: ChannelSet,
    eta: np.ndarray,
    p_max: float,
    inner_passes: int = CENTRALIZED_INNER_PASSES,
    diagnostics: Optional[List[ActiveSolveDiagnostics]] = None,
) -> np.ndarray:
    """Gauss-Seidel sweeps over AP blocks of the exact coherent weighted sum-MSE."""
    active = np.array(state.active, copy=True)
    for _ in range(inner_passes):
        for b in range(channels.num_aps):
            current = state.with_(active=active)
            block = assemble_local_quadratic(b, current, channels, eta, MseForm.coherent)
            f_b, diag = solve_local_beamformer(block, p_max)
            active[b] = f_b
            if diagnostics is not None:
                diagnostics.append(diag)
    return active
