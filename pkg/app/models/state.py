"""Numeric value types shared by the optimization kernels.

Array layout (B APs, K users, N_t antennas, M RIS elements):

    direct    (B, K, N_t)     h_{b,k}
    ap_ris    (B, M, N_t)     G_b
    ris_user  (K, M)          v_k
    cascade   (B, K, M, N_t)  diag(v_k^H) G_b, applied as theta^H @ cascade[b, k]
    active    (B, K, N_t)     f_{b,k}
"""

from dataclasses import dataclass, field, replace
from typing import Tuple

import numpy as np

from app.core.exceptions import DimensionMismatchError
from app.models.scenario import Position


def _frozen(array: np.ndarray, dtype=complex) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization. Immutable and safe to share across threads."""

    direct: np.ndarray
    ap_ris: np.ndarray
    ris_user: np.ndarray
    cascade: np.ndarray
    noise_power: float
    user_positions: Tuple[Position, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "direct", _frozen(self.direct))
        object.__setattr__(self, "ap_ris", _frozen(self.ap_ris))
        object.__setattr__(self, "ris_user", _frozen(self.ris_user))
        object.__setattr__(self, "cascade", _frozen(self.cascade))
        object.__setattr__(self, "user_positions", tuple(self.user_positions))
        B, K, Nt = self.direct.shape
        M = self.ap_ris.shape[1]
        if self.ap_ris.shape != (B, M, Nt):
            raise DimensionMismatchError(f"ap_ris shape {self.ap_ris.shape} != {(B, M, Nt)}")
        if self.ris_user.shape != (K, M):
            raise DimensionMismatchError(f"ris_user shape {self.ris_user.shape} != {(K, M)}")
        if self.cascade.shape != (B, K, M, Nt):
            raise DimensionMismatchError(f"cascade shape {self.cascade.shape} != {(B, K, M, Nt)}")
        if not self.noise_power > 0:
            raise DimensionMismatchError("noise power must be positive")

    @property
    def num_aps(self) -> int:
        return self.direct.shape[0]

    @property
    def num_users(self) -> int:
        return self.direct.shape[1]

    @property
    def antennas(self) -> int:
        return self.direct.shape[2]

    @property
    def ris_elements(self) -> int:
        return self.ap_ris.shape[1]

    def effective(self, theta: np.ndarray) -> np.ndarray:
        """All equivalent channels h~_{b,k} for phase vector theta, shape (B, K, N_t)."""
        theta = np.asarray(theta)
        if theta.shape != (self.ris_elements,):
            raise DimensionMismatchError(f"theta shape {theta.shape} != {(self.ris_elements,)}")
        return self.direct + np.einsum("bkmn,m->bkn", self.cascade.conj(), theta)

    def without_ris(self) -> "ChannelSet":
        """Same realization with the reflected path removed (h~ = h for any theta)."""
        return replace(self, cascade=np.zeros_like(self.cascade))

    def scaled(self, gain: float, noise_scale: float) -> "ChannelSet":
        return replace(
            self,
            direct=self.direct * gain,
            cascade=self.cascade * gain,
            ap_ris=self.ap_ris * gain,
            noise_power=self.noise_power * noise_scale,
        )


@dataclass(frozen=True)
class BeamState:
    """Snapshot of the optimization variables (f, theta, u, omega)."""

    active: np.ndarray
    theta: np.ndarray
    aux: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "active", _frozen(self.active))
        object.__setattr__(self, "theta", _frozen(self.theta))
        object.__setattr__(self, "aux", _frozen(self.aux))
        object.__setattr__(self, "weights", _frozen(self.weights, dtype=float))
        B, K, _ = self.active.shape
        if self.aux.shape != (K,) or self.weights.shape != (K,):
            raise DimensionMismatchError("aux and weights must have one entry per user")

    def with_(self, **changes) -> "BeamState":
        return replace(self, **changes)

    def ap_powers(self) -> np.ndarray:
        """sum_k ||f_{b,k}||^2 for every AP, shape (B,)."""
        return np.sum(np.abs(self.active) ** 2, axis=(1, 2))


@dataclass(frozen=True)
class RateReport:
    per_user_sinr: np.ndarray
    per_user_rate: np.ndarray
    weighted_sum_rate: float
    surrogate: float
