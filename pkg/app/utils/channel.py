"""Geometry, unit conversion and Rayleigh channel generation.

All powers are milliwatts internally; dB/dBm only appear at the config boundary.
Every link draws from its own RNG substream keyed by (seed, link, indices), so a
realization does not depend on generation order or on parallelism.
"""

from typing import List, Optional
import logging
import math

import numpy as np

from app.core.exceptions import DegenerateGeometryError, DimensionMismatchError
from app.models.scenario import Position, ScenarioConfig
from app.models.state import ChannelSet

logger = logging.getLogger(__name__)

# Substream identifiers
LINK_USER_POSITIONS = 0
LINK_DIRECT = 1
LINK_AP_RIS = 2
LINK_RIS_USER = 3
LINK_RANDOM_PHASES = 4


def dbm_to_linear(value: float) -> float:
    """dBm (or dB) to milliwatts (or linear ratio)."""
    return float(10.0 ** (value / 10.0))


def pathloss_db(d: float, exponent: float, c0_db: float = -32.0, d0: float = 1.0) -> float:
    """Distance-dependent path loss C0 (d/d0)^-kappa, in dB."""
    if not d > 0:
        raise DegenerateGeometryError(f"link distance must be positive, got {d}")
    if not d0 > 0:
        raise DegenerateGeometryError(f"reference distance must be positive, got {d0}")
    return c0_db - 10.0 * exponent * math.log10(d / d0)


def link_variance(a: Position, b: Position, exponent: float, config: ScenarioConfig) -> float:
    """Linear power gain of the link between two nodes."""
    d = a.distance_to(b)
    try:
        return dbm_to_linear(pathloss_db(d, exponent, config.pathloss_ref_db, config.ref_distance))
    except DegenerateGeometryError:
        logger.error(f"Coincident nodes at ({a.x}, {a.y}) and ({b.x}, {b.y})")
        raise


def substream(seed: int, link: int, *index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(link, *index)))


def complex_gaussian(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    """Circularly symmetric CN(0, variance) entries."""
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_user_positions(config: ScenarioConfig, seed: int) -> List[Position]:
    """Users uniform over the disk area (radius R*sqrt(U))."""
    rng = substream(seed, LINK_USER_POSITIONS)
    u = rng.random((config.num_users, 2))
    radius = config.user_circle_radius * np.sqrt(u[:, 0])
    angle = 2.0 * np.pi * u[:, 1]
    cx, cy = config.user_circle_center.x, config.user_circle_center.y
    return [
        Position(x=cx + r * math.cos(a), y=cy + r * math.sin(a))
        for r, a in zip(radius, angle)
    ]


def cascade_channels(ap_ris: np.ndarray, ris_user: np.ndarray) -> np.ndarray:
    """diag(v_k^H) G_b for every (b, k): row m of G_b scaled by conj(v_k[m])."""
    return ris_user.conj()[None, :, :, None] * ap_ris[:, None, :, :]


def generate_channels(config: ScenarioConfig, seed: Optional[int] = None) -> ChannelSet:
    """Draw one Rayleigh realization of every link for the scenario."""
    seed = config.seed if seed is None else seed
    B, K, Nt, M = config.num_aps, config.num_users, config.antennas_per_ap, config.ris_elements
    users = sample_user_positions(config, seed)

    direct = np.empty((B, K, Nt), dtype=complex)
    ap_ris = np.empty((B, M, Nt), dtype=complex)
    ris_user = np.empty((K, M), dtype=complex)

    for b, ap in enumerate(config.ap_positions):
        var = link_variance(ap, config.ris_position, config.exponent_ap_ris, config)
        ap_ris[b] = complex_gaussian(substream(seed, LINK_AP_RIS, b), (M, Nt), var)
        for k, user in enumerate(users):
            var = link_variance(ap, user, config.exponent_ap_user, config)
            direct[b, k] = complex_gaussian(substream(seed, LINK_DIRECT, b, k), (Nt,), var)

    for k, user in enumerate(users):
        var = link_variance(config.ris_position, user, config.exponent_ris_user, config)
        ris_user[k] = complex_gaussian(substream(seed, LINK_RIS_USER, k), (M,), var)

    logger.debug(f"Generated channels for seed {seed}: B={B}, K={K}, N_t={Nt}, M={M}")
    return ChannelSet(
        direct=direct,
        ap_ris=ap_ris,
        ris_user=ris_user,
        cascade=cascade_channels(ap_ris, ris_user),
        noise_power=config.noise_mw,
        user_positions=tuple(users),
    )


def effective_channel(h: np.ndarray, q: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """h~ with h~^H = h^H + theta^H q; theta is not required to be feasible."""
    h, q, theta = np.asarray(h), np.asarray(q), np.asarray(theta)
    if q.ndim != 2 or q.shape != (theta.shape[0], h.shape[0]) or theta.ndim != 1 or h.ndim != 1:
        raise DimensionMismatchError(
            f"expected h (N_t,), q (M, N_t), theta (M,); got {h.shape}, {q.shape}, {theta.shape}"
        )
    return h + q.conj().T @ theta


def random_phases(num_elements: int, seed: int) -> np.ndarray:
    """Unit-modulus phases drawn once per realization."""
    rng = substream(seed, LINK_RANDOM_PHASES)
    return np.exp(2j * np.pi * rng.random(num_elements))
