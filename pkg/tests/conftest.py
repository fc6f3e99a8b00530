import os
import tempfile

# The app reads its settings at import time; point it at a throwaway database first
_TMP = tempfile.mkdtemp(prefix="ris_cellfree_tests_")
os.environ.setdefault("DATABASE_URL", f"sqlite:///{os.path.join(_TMP, 'test.db')}")
os.environ.setdefault("REPORTS_DIR", os.path.join(_TMP, "reports"))

import numpy as np
import pytest

from app.models import BeamState, ChannelSet, ScenarioConfig
from app.utils.channel import cascade_channels, generate_channels


def cn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def manual_channels(direct, ap_ris=None, ris_user=None, noise_power=1.0):
    """ChannelSet from explicit arrays; the RIS links default to zero with M=1."""
    direct = np.asarray(direct, dtype=complex)
    B, K, Nt = direct.shape
    if ap_ris is None:
        ap_ris = np.zeros((B, 1, Nt), dtype=complex)
    if ris_user is None:
        ris_user = np.zeros((K, np.shape(ap_ris)[1]), dtype=complex)
    ap_ris = np.asarray(ap_ris, dtype=complex)
    ris_user = np.asarray(ris_user, dtype=complex)
    return ChannelSet(
        direct=direct,
        ap_ris=ap_ris,
        ris_user=ris_user,
        cascade=cascade_channels(ap_ris, ris_user),
        noise_power=noise_power,
    )


def random_channels(rng, B=2, K=2, Nt=2, M=2, noise_power=0.5):
    return manual_channels(cn(rng, B, K, Nt), cn(rng, B, M, Nt), cn(rng, K, M), noise_power)


def random_state(channels, rng, scale=1.0):
    B, K, Nt = channels.direct.shape
    return BeamState(
        active=scale * cn(rng, B, K, Nt),
        theta=cn(rng, channels.ris_elements),
        aux=cn(rng, K) / scale,
        weights=rng.uniform(0.5, 2.0, K),
    )


slow = pytest.mark.skipif(os.getenv("RUN_SLOW") != "1", reason="set RUN_SLOW=1 for Monte-Carlo runs")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config():
    return ScenarioConfig(
        num_aps=2,
        antennas_per_ap=3,
        num_users=2,
        ris_elements=4,
        ap_positions=[(0.0, -50.0), (60.0, -50.0)],
        max_iterations=30,
    )


@pytest.fixture
def small_channels(small_config):
    return generate_channels(small_config, seed=3)


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(
        "[scenario]\n"
        "num_aps = 2\n"
        "antennas_per_ap = 3\n"
        "num_users = 2\n"
        "ris_elements = 4\n"
        "ap_positions = [[0.0, -50.0], [60.0, -50.0]]\n"
        "max_iterations = 10\n"
    )
    return str(path)
