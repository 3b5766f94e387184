"""
Shared fixtures: the reference parameter set, seeded streams and an output directory.
"""

import pytest

from models.channel import FadingParams
from services.channel_service import FadingChannel
from services.streams import RandomStream


@pytest.fixture
def canonical() -> FadingParams:
    """alpha = 2, eta = 1, kappa = 1, mu = 2, p = 3, q = 1, r_hat = 1."""
    return FadingParams(alpha=2.0, eta=1.0, kappa=1.0, mu=2.0, p=3.0, q=1.0, r_hat=1.0)


@pytest.fixture
def fractional() -> FadingParams:
    """Non-integer cluster counts, sampled through the inverse CDF."""
    return FadingParams(alpha=1.0, eta=0.1, kappa=0.2, mu=0.7, p=3.0, q=1.0, r_hat=1.0)


@pytest.fixture
def channel(canonical) -> FadingChannel:
    return FadingChannel.for_params(canonical)


@pytest.fixture
def stream() -> RandomStream:
    return RandomStream(seed=7, stream_id=0)


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / "out"
    path.mkdir()
    return path
