"""RIS phase update.

With (f, u, omega) fixed the weighted sum-MSE is a convex quadratic in theta,

    theta^H Q theta - 2 Re{p^H theta} + const,

minimized over the relaxed set |theta_m| <= 1 by accelerated projected gradient.
"""

from dataclasses import dataclass, field
from typing import List, Literal, Optional, Tuple
import logging
import math

import numpy as np

from app.core.exceptions import DimensionMismatchError, SolverError
from app.models.models import MseForm
from app.models.state import BeamState, ChannelSet
from app.utils.wmmse import quadratic_scale

logger = logging.getLogger(__name__)

POWER_ITERATIONS = 50
POWER_ITERATION_TOL = 1e-6
LIPSCHITZ_MARGIN = 1.01
MAX_STEP_HALVINGS = 50

Finalize = Literal["none", "unit_modulus"]


@dataclass(frozen=True)
class PassiveQuadratic:
    hessian: np.ndarray  # Q, (M, M) Hermitian PSD
    linear: np.ndarray   # p, (M,)
    constant: float = 0.0


@dataclass(frozen=True)
class PassiveOptions:
    tol: Optional[float] = None  # defaults to 1e-7 * sqrt(M)
    max_iters: int = 2000
    finalize: Finalize = "none"

    def tolerance(self, num_elements: int) -> float:
        return self.tol if self.tol is not None else 1e-7 * math.sqrt(max(num_elements, 1))


@dataclass
class PassiveSolveDiagnostics:
    iterations: int = 0
    converged: bool = False
    final_gradient_residual: float = float("nan")
    lipschitz_estimate: float = 0.0
    restarts: int = 0
    objective_trace: List[float] = field(default_factory=list)


def _coupling(channels: ChannelSet, active: np.ndarray):
    """a[b,k,j] = cascade[b,k] f_{b,j} (M-vectors) and d[b,k,j] = h_{b,k}^H f_{b,j}."""
    a = np.einsum("bkmn,bjn->bkjm", channels.cascade, active)
    d = np.einsum("bkn,bjn->bkj", channels.direct.conj(), active)
    return a, d


def assemble_passive_quadratic(
    state: BeamState,
    channels: ChannelSet,
    eta: np.ndarray,
    form: MseForm = MseForm.per_ap,
) -> PassiveQuadratic:
    """Build (Q, p, const) so that the weighted sum-MSE equals
    theta^H Q theta - 2 Re{p^H theta} + const for every theta."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (channels.num_users,):
        raise DimensionMismatchError(f"eta has shape {eta.shape}, expected {(channels.num_users,)}")
    u = state.aux
    w = eta * state.weights
    curvature = w * np.abs(u) ** 2
    a, d = _coupling(channels, state.active)

    if form == MseForm.coherent:
        A, D = a.sum(axis=0), d.sum(axis=0)  # (K, K, M), (K, K)
        Q = np.einsum("k,kjm,kjl->ml", curvature, A, A.conj())
        p = np.einsum("k,km->m", w * np.conj(u), np.einsum("kkm->km", A))
        p -= np.einsum("k,kj,kjm->m", curvature, D.conj(), A)
        quad_const = np.sum(np.abs(D) ** 2, axis=1)
        signal_const = np.einsum("kk->k", D)
    else:
        c = quadratic_scale(form, channels.num_aps)
        Q = c * np.einsum("k,bkjm,bkjl->ml", curvature, a, a.conj())
        p = np.einsum("k,km->m", w * np.conj(u), np.einsum("bkkm->km", a))
        p -= c * np.einsum("k,bkj,bkjm->m", curvature, d.conj(), a)
        quad_const = c * np.sum(np.abs(d) ** 2, axis=(0, 2))
        signal_const = np.einsum("bkk->k", d)

    Q = 0.5 * (Q + Q.conj().T)
    constant = float(np.sum(
        w * (np.abs(u) ** 2 * (quad_const + channels.noise_power) + 1.0)
        - 2.0 * w * np.real(np.conj(u) * signal_const)
    ))
    return PassiveQuadratic(hessian=Q, linear=p, constant=constant)


def passive_objective(q: PassiveQuadratic, theta: np.ndarray) -> float:
    """Re{theta^H Q theta} - 2 Re{p^H theta} (constant excluded)."""
    return float(np.real(np.vdot(theta, q.hessian @ theta)) - 2.0 * np.real(np.vdot(q.linear, theta)))


def project_ball(theta: np.ndarray) -> np.ndarray:
    """Elementwise projection onto |theta_m| <= 1."""
    theta = np.asarray(theta, dtype=complex)
    return theta / np.maximum(1.0, np.abs(theta))


def extract_phases(theta: np.ndarray) -> np.ndarray:
    """Radial projection onto the unit circle; zero entries map to 1."""
    theta = np.asarray(theta, dtype=complex)
    mag = np.abs(theta)
    return np.where(mag > 0, theta / np.where(mag > 0, mag, 1.0), 1.0 + 0j)


def lipschitz_estimate(hessian: np.ndarray) -> float:
    """Upper estimate of lambda_max(Q) by power iteration, with a small margin."""
    if not np.any(hessian):
        return 0.0
    rng = np.random.default_rng(0)
    n = hessian.shape[0]
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(POWER_ITERATIONS):
        y = hessian @ x
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            break
        x = y / norm
        stalled = abs(norm - estimate) <= POWER_ITERATION_TOL * norm
        estimate = norm
        if stalled:
            break
    return LIPSCHITZ_MARGIN * estimate


def _gradient(q: PassiveQuadratic, theta: np.ndarray) -> np.ndarray:
    return 2.0 * (q.hessian @ theta - q.linear)


def solve_passive(
    q: PassiveQuadratic,
    theta0: np.ndarray,
    options: Optional[PassiveOptions] = None,
) -> Tuple[np.ndarray, PassiveSolveDiagnostics]:
    """Accelerated projected gradient on the relaxed phase set, warm-started at theta0.

    Momentum is reset whenever the extrapolated step would raise the objective;
    the recorded objective trace is nonincreasing.
    """
    options = options or PassiveOptions()
    M = q.linear.shape[0]
    if q.hessian.shape != (M, M) or np.shape(theta0) != (M,):
        raise DimensionMismatchError(
            f"Q {q.hessian.shape}, p {q.linear.shape} and theta {np.shape(theta0)} disagree"
        )
    tol = options.tolerance(M)
    diag = PassiveSolveDiagnostics()

    theta = project_ball(theta0)
    obj = passive_objective(q, theta)
    diag.objective_trace.append(obj)
    if M == 0:
        diag.converged, diag.final_gradient_residual = True, 0.0
        return theta, diag

    L = 2.0 * lipschitz_estimate(q.hessian)
    if L == 0.0:
        L = 2.0 * max(float(np.max(np.abs(q.linear))), 1.0)
    y, t = theta.copy(), 1.0

    for it in range(options.max_iters):
        residual = float(np.linalg.norm(theta - project_ball(theta - _gradient(q, theta) / L)))
        diag.final_gradient_residual = residual
        if residual <= tol:
            diag.converged = True
            break

        cand = project_ball(y - _gradient(q, y) / L)
        cand_obj = passive_objective(q, cand)
        if cand_obj > obj:
            diag.restarts += 1
            y, t = theta.copy(), 1.0
            for _ in range(MAX_STEP_HALVINGS):
                cand = project_ball(theta - _gradient(q, theta) / L)
                cand_obj = passive_objective(q, cand)
                if cand_obj <= obj:
                    break
                L *= 2.0
            else:
                logger.warning(f"Phase update stalled at iteration {it}, residual {residual:.3e}")
                break

        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = cand + ((t - 1.0) / t_next) * (cand - theta)
        theta, obj, t = cand, cand_obj, t_next
        diag.iterations = it + 1
        diag.objective_trace.append(obj)
    else:
        diag.final_gradient_residual = float(np.linalg.norm(theta - project_ball(theta - _gradient(q, theta) / L)))
        diag.converged = diag.final_gradient_residual <= tol

    diag.lipschitz_estimate = L
    if not np.all(np.isfinite(theta)):
        raise SolverError("phase update produced non-finite values")
    if not diag.converged:
        logger.debug(f"Phase update hit {options.max_iters} iterations, residual {diag.final_gradient_residual:.3e}")
    return theta, diag
